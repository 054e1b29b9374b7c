"""Helpers that lean on another class's private state."""


class Counter:
    def __init__(self):
        self.__count = 0

    def bump(self):
        self.__count += 1
        return self.__count


def helper(counter):
    return counter._Counter__count
