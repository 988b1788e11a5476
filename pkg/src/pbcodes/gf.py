"""Arithmetic over GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1.

Scalar helpers (``add``, ``mul``, ``inv``, ``div``) take and return Python
ints.  The vector helpers accept numpy ``uint8`` arrays of any shape and
operate elementwise, so a "symbol" can be a single byte or a whole lane of
independent bytes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

POLY = 0x11D
ORDER = 255


@dataclass(frozen=True)
class FieldTables:
    log: tuple      # log[x] for x in 1..255, indexed by x (log[0] is unused)
    antilog: tuple  # 510 entries so log sums need no modular reduction
    poly: int = POLY


def _build_tables(poly=POLY):
    antilog = [0] * (2 * ORDER)
    log = [0] * 256
    x = 1
    for i in range(ORDER):
        antilog[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= poly
    for i in range(ORDER, 2 * ORDER):
        antilog[i] = antilog[i - ORDER]
    return FieldTables(tuple(log), tuple(antilog), poly)


TABLES = _build_tables()

_LOG = np.array(TABLES.log, dtype=np.int32)
_EXP = np.array(TABLES.antilog, dtype=np.uint8)


def _build_mul_table():
    a = np.arange(256)
    t = _EXP[(_LOG[a][:, None] + _LOG[a][None, :])]
    t[0, :] = 0
    t[:, 0] = 0
    return t.astype(np.uint8)


MUL = _build_mul_table()
MUL.setflags(write=False)

INV = np.zeros(256, dtype=np.uint8)
INV[1:] = _EXP[(ORDER - _LOG[1:]) % ORDER]
INV.setflags(write=False)


@dataclass
class OpCounter:
    """Tally of field multiplications and additions, one per symbol operation."""

    mult: int = 0
    add: int = 0

    def __iadd__(self, other):
        self.mult += other.mult
        self.add += other.add
        return self

    def as_tuple(self):
        return (self.mult, self.add)


def add(a, b):
    return a ^ b


sub = add


def mul(a, b):
    return int(MUL[a, b])


def mul_bitwise(a, b, poly=POLY):
    """Carry-less multiply followed by polynomial reduction; no tables."""
    prod = 0
    while b:
        if b & 1:
            prod ^= a
        b >>= 1
        a <<= 1
    for bit in range(14, 7, -1):
        if prod & (1 << bit):
            prod ^= poly << (bit - 8)
    return prod


def inv(a):
    if a == 0:
        raise ZeroDivisionError("no inverse of zero")
    return int(INV[a])


def div(a, b):
    return mul(a, inv(b))


def power(a, e):
    if e == 0:
        return 1
    if a == 0:
        return 0
    return int(_EXP[(_LOG[a] * e) % ORDER])


def scale(c, x):
    """Multiply every symbol of ``x`` by the scalar ``c``."""
    return MUL[c][np.asarray(x, dtype=np.uint8)]


def dot(coeffs, vectors):
    """Sum of ``coeffs[i] * vectors[i]`` along the first axis of ``vectors``."""
    coeffs = np.asarray(coeffs, dtype=np.uint8)
    vectors = np.asarray(vectors, dtype=np.uint8)
    if len(coeffs) != len(vectors):
        raise ValueError(f"length mismatch: {len(coeffs)} coefficients, {len(vectors)} vectors")
    prods = MUL[coeffs.reshape((-1,) + (1,) * (vectors.ndim - 1)), vectors]
    return np.bitwise_xor.reduce(prods, axis=0)


# bound on the broadcast temporary in matmul
_CHUNK_ELEMS = 1 << 24


def matmul(A, B):
    """Matrix product over the field; ``B`` may carry trailing lane axes."""
    A = np.asarray(A, dtype=np.uint8)
    B = np.asarray(B, dtype=np.uint8)
    m, p = A.shape
    if B.shape[0] != p:
        raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
    tail = B.shape[1:]
    flat = B.reshape(p, -1)
    width = flat.shape[1]
    out = np.zeros((m, width), dtype=np.uint8)
    if m == 0 or p == 0 or width == 0:
        return out.reshape((m,) + tail)
    step = max(1, _CHUNK_ELEMS // (m * p))
    for lo in range(0, width, step):
        hi = min(width, lo + step)
        prods = MUL[A[:, :, None], flat[None, :, lo:hi]]
        out[:, lo:hi] = np.bitwise_xor.reduce(prods, axis=1)
    return out.reshape((m,) + tail)


def _eliminate(M, ncols, counter=None):
    """Reduce M in place to reduced row echelon form over its first ncols columns.

    Returns the pivot column list.
    """
    rows = M.shape[0]
    pivots = []
    row = 0
    for col in range(ncols):
        if row == rows:
            break
        nz = np.nonzero(M[row:, col])[0]
        if len(nz) == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            M[[row, piv]] = M[[piv, row]]
        c = int(M[row, col])
        if c != 1:
            M[row] = MUL[INV[c]][M[row]]
            if counter is not None:
                counter.mult += M.shape[1] - col
        others = np.nonzero(M[:, col])[0]
        for o in others:
            if o == row:
                continue
            f = M[o, col]
            M[o] ^= MUL[f][M[row]]
            if counter is not None:
                counter.mult += M.shape[1] - col
                counter.add += M.shape[1] - col
        pivots.append(col)
        row += 1
    return pivots


def rank(A):
    M = np.array(A, dtype=np.uint8, copy=True)
    if M.size == 0:
        return 0
    return len(_eliminate(M, M.shape[1]))


def solve_linear(A, y, counter=None):
    """Solve ``A x = y`` by Gauss-Jordan elimination.

    ``y`` has ``len(A)`` rows and may carry trailing lane axes; the result has
    the same shape.  Raises SingularMatrixError (carrying the rank found) when
    ``A`` is not invertible.
    """
    A = np.asarray(A, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    m = A.shape[0]
    if A.shape != (m, m):
        raise ValueError(f"coefficient matrix must be square, got {A.shape}")
    if y.shape[0] != m:
        raise ValueError(f"right-hand side has {y.shape[0]} rows, expected {m}")
    tail = y.shape[1:]
    aug = np.concatenate([A, y.reshape(m, -1)], axis=1)
    pivots = _eliminate(aug, m, counter)
    if len(pivots) < m:
        raise SingularMatrixError(len(pivots), m)
    return aug[:, m:].reshape((m,) + tail)


def inverse(A):
    A = np.asarray(A, dtype=np.uint8)
    return solve_linear(A, np.eye(len(A), dtype=np.uint8))
