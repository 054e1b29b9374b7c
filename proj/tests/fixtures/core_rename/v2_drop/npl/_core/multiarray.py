"""Array construction."""


def array(values):
    return list(values)


def zeros(n):
    return [0] * n
