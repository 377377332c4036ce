"""Two-dimensional Sobol points (unscrambled, Gray-code order)."""

from __future__ import annotations

_BITS = 32

# First coordinate: van der Corput directions.  Second coordinate: primitive
# polynomial x + 1 with initial direction number m1 = 1, the first row of the
# Joe-Kuo table.
_V1 = [1 << (_BITS - 1 - j) for j in range(_BITS)]
_V2 = [1 << (_BITS - 1)]
for _ in range(1, _BITS):
    _V2.append(_V2[-1] ^ (_V2[-1] >> 1))


def sobol_point(n: int) -> tuple[float, float]:
    """Point ``n`` of the sequence; point 0 is the origin."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    if n >= 1 << _BITS:
        raise ValueError(f"index must be below 2**{_BITS}")
    gray = n ^ (n >> 1)
    x1 = x2 = 0
    j = 0
    while gray:
        if gray & 1:
            x1 ^= _V1[j]
            x2 ^= _V2[j]
        gray >>= 1
        j += 1
    scale = float(1 << _BITS)
    return x1 / scale, x2 / scale


def sobol_pair(index: int) -> tuple[float, float]:
    """The ``index``-th nonzero point; both coordinates lie strictly inside (0, 1).

    >>> sobol_pair(0), sobol_pair(1)
    ((0.5, 0.5), (0.75, 0.25))
    """
    if index < 0:
        raise ValueError("index must be nonnegative")
    return sobol_point(index + 1)
