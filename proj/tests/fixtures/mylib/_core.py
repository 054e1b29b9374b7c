"""Core array type."""


def array(values):
    return list(values)
