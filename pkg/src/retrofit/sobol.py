"""Base-2 digital quasi-random sequence generator (Gray-code ordering).

Points fill the unit hypercube far more uniformly than pseudo-random draws:
any prefix of 2^m points places exactly one point in each dyadic interval
of each coordinate. The generator is fully deterministic; the same
(n, dims, skip) triple always reproduces the same block.
"""

from functools import lru_cache

import numpy as np

from .errors import DimensionUnsupported

_BITS = 32
_SCALE = float(1 << _BITS)

# Primitive polynomials (bit pattern, leading and trailing 1 included) and
# initial odd direction integers m_1..m_s per dimension, from the published
# Joe & Kuo (2008) table. Dimension 1 is the base-2 van der Corput sequence
# and needs no entry.
_DIRECTIONS = (
    (0b11, (1,)),
    (0b111, (1, 3)),
    (0b1011, (1, 3, 1)),
    (0b1101, (1, 1, 1)),
    (0b10011, (1, 1, 3, 3)),
    (0b11001, (1, 3, 5, 13)),
    (0b100101, (1, 1, 5, 5, 17)),
    (0b101001, (1, 1, 5, 5, 5)),
    (0b101111, (1, 1, 7, 11, 19)),
    (0b110111, (1, 1, 5, 1, 1)),
    (0b111011, (1, 1, 1, 3, 11)),
    (0b111101, (1, 3, 5, 5, 31)),
    (0b1000011, (1, 3, 3, 9, 7, 49)),
    (0b1011011, (1, 1, 1, 15, 21, 21)),
    (0b1100001, (1, 3, 1, 13, 27, 49)),
    (0b1100111, (1, 1, 1, 15, 7, 5)),
    (0b1101101, (1, 3, 1, 15, 13, 25)),
    (0b1110011, (1, 1, 5, 5, 19, 61)),
    (0b10000011, (1, 3, 7, 11, 23, 15, 103)),
    (0b10001001, (1, 3, 7, 13, 13, 15, 69)),
    (0b10001111, (1, 1, 3, 13, 7, 35, 63)),
    (0b10010001, (1, 3, 5, 9, 1, 25, 53)),
    (0b10011101, (1, 3, 1, 13, 9, 35, 107)),
    (0b10100111, (1, 3, 1, 5, 27, 61, 31)),
    (0b10101011, (1, 1, 5, 11, 19, 41, 61)),
    (0b10111001, (1, 3, 5, 3, 3, 13, 69)),
    (0b10111111, (1, 1, 7, 13, 1, 19, 1)),
    (0b11000001, (1, 3, 7, 5, 13, 19, 59)),
    (0b11001011, (1, 1, 3, 9, 25, 29, 41)),
    (0b11010011, (1, 3, 5, 13, 23, 1, 55)),
    (0b11010101, (1, 3, 7, 3, 13, 59, 17)),
)

MAX_DIMENSIONS = 1 + len(_DIRECTIONS)


def _direction_integers(poly: int, m_init: tuple) -> list:
    """Expand initial direction values to all _BITS columns for one dimension."""
    degree = poly.bit_length() - 1
    v = [m_init[c] << (_BITS - 1 - c) for c in range(min(degree, _BITS))]
    for c in range(degree, _BITS):
        value = v[c - degree] ^ (v[c - degree] >> degree)
        for k in range(1, degree):
            if (poly >> (degree - k)) & 1:
                value ^= v[c - k]
        v.append(value)
    return v


@lru_cache(maxsize=None)
def _direction_matrix(dims: int) -> np.ndarray:
    """(_BITS, dims) uint64 matrix of direction integers."""
    cols = np.empty((_BITS, dims), dtype=np.uint64)
    cols[:, 0] = [1 << (_BITS - 1 - c) for c in range(_BITS)]
    for d in range(1, dims):
        poly, m_init = _DIRECTIONS[d - 1]
        cols[:, d] = _direction_integers(poly, m_init)
    cols.setflags(write=False)
    return cols


def sobol_sequence(n: int, dims: int, skip: int = 0) -> np.ndarray:
    """Return points skip..skip+n-1 of the sequence as an (n, dims) array.

    Entries lie in [0, 1). skip=0 keeps the initial all-zeros point, so the
    first 2^m points of any coordinate are perfectly stratified over the
    2^m dyadic intervals.
    """
    if dims < 1 or dims > MAX_DIMENSIONS:
        raise DimensionUnsupported(
            f"dims={dims} outside supported range 1..{MAX_DIMENSIONS}"
        )
    if n < 1:
        raise ValueError("n must be >= 1")
    if skip < 0:
        raise ValueError("skip must be >= 0")
    if skip + n > (1 << _BITS):
        raise ValueError(f"sequence index space exhausted beyond 2^{_BITS} points")

    directions = _direction_matrix(dims)
    index = np.arange(skip, skip + n, dtype=np.uint64)
    gray = index ^ (index >> np.uint64(1))
    out = np.zeros((n, dims), dtype=np.uint64)
    top_bit = int(skip + n - 1).bit_length()
    for bit in range(min(top_bit, _BITS)):
        rows = (gray >> np.uint64(bit)) & np.uint64(1) == 1
        if rows.any():
            out[rows] ^= directions[bit]
    return out.astype(np.float64) / _SCALE
