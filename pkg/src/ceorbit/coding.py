"""Pairing functions used to code tuples and integers as naturals.

Tuple codes are iterated Cantor pairing, nested to the right:

    <a>           = a
    <a0, a1, ...> = pair(a0, <a1, ...>)

with ``pair(x, y) = (x + y)(x + y + 1)/2 + y``.  Every natural decodes to an
n-tuple for every n >= 1.

Integers are coded into naturals with the zigzag map n -> 2n for n >= 0 and
-n -> 2n - 1 for n > 0.
"""

from math import isqrt


def pair(x: int, y: int) -> int:
    s = x + y
    return s * (s + 1) // 2 + y


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def tuple_code(items) -> int:
    items = list(items)
    if not items:
        raise ValueError("cannot code an empty tuple")
    code = items[-1]
    for a in reversed(items[:-1]):
        code = pair(a, code)
    return code


def tuple_decode(code: int, n: int) -> tuple[int, ...]:
    if n < 1:
        raise ValueError(f"tuple arity must be >= 1, got {n}")
    if code < 0:
        raise ValueError(f"tuple code must be a natural, got {code}")
    out = []
    for _ in range(n - 1):
        a, code = unpair(code)
        out.append(a)
    out.append(code)
    return tuple(out)


def zigzag(n: int) -> int:
    """Code an integer as a natural."""
    return 2 * n if n >= 0 else -2 * n - 1


def unzigzag(c: int) -> int:
    return c // 2 if c % 2 == 0 else -(c + 1) // 2
