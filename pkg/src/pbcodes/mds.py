"""Systematic Cauchy MDS base code."""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import gf
from .errors import ConfigError, InconsistentSymbolsError, InsufficientSymbolsError


@dataclass(frozen=True, eq=False)
class CodeParams:
    n: int
    k: int
    parity: np.ndarray  # r x k, row i is the encoding vector of parity node k+i

    @property
    def r(self):
        return self.n - self.k

    def generator(self):
        """n x k generator matrix [I; P]."""
        return np.concatenate([np.eye(self.k, dtype=np.uint8), self.parity])


def check_mds(parity):
    """Exhaustively confirm every square submatrix of ``parity`` is invertible."""
    r, k = parity.shape
    for size in range(1, min(r, k) + 1):
        for rows in combinations(range(r), size):
            for cols in combinations(range(k), size):
                if gf.rank(parity[np.ix_(rows, cols)]) < size:
                    return False
    return True


@lru_cache(maxsize=None)
def make_code(n, k):
    """Build the systematic (n, k) code with a Cauchy parity matrix.

    Entry (i, j) is ``1 / (x_i + y_j)`` with ``x_i = k + i`` and ``y_j = j``,
    so every square submatrix is invertible and no entry is zero.
    """
    if not (2 <= k < n <= 255):
        raise ConfigError(f"need 2 <= k < n <= 255, got n={n}, k={k}")
    r = n - k
    parity = np.empty((r, k), dtype=np.uint8)
    for i in range(r):
        for j in range(k):
            parity[i, j] = gf.inv((k + i) ^ j)
    parity.setflags(write=False)
    if __debug__ and n <= 12:
        assert check_mds(parity), "Cauchy parity matrix failed the MDS check"
    return CodeParams(n, k, parity)


def encode(code, u):
    """Return the n codeword symbols for message ``u`` (k symbols, each may be a lane)."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[0] != code.k:
        raise ValueError(f"message has {u.shape[0]} symbols, expected {code.k}")
    return np.concatenate([u, gf.matmul(code.parity, u)])


def reconstruct(code, known):
    """Recover the message from a mapping ``position -> symbol`` of at least k entries."""
    if len(known) < code.k:
        raise InsufficientSymbolsError(f"insufficient symbols: {len(known)} < k={code.k}")
    positions = sorted(known)
    chosen = positions[:code.k]
    G = code.generator()
    y = np.stack([np.asarray(known[pos], dtype=np.uint8) for pos in chosen])
    u = gf.solve_linear(G[chosen], y)
    extra = positions[code.k:]
    if extra:
        expect = gf.matmul(G[extra], u)
        got = np.stack([np.asarray(known[pos], dtype=np.uint8) for pos in extra])
        if not np.array_equal(expect, got):
            raise InconsistentSymbolsError("inconsistent symbols")
    return u


def repair_symbol(code, missing, survivors, counter=None):
    """Rebuild systematic symbol ``missing`` from the other k-1 systematic
    symbols and the first parity symbol.

    ``survivors`` maps position to symbol and must hold exactly that access
    pattern.  Costs k multiplications and k-1 additions per symbol.
    """
    k = code.k
    want = set(range(k)) - {missing} | {k}
    if not 0 <= missing < k or set(survivors) != want:
        raise ValueError(
            f"repair of position {missing} needs survivors {sorted(want)}, got {sorted(survivors)}"
        )
    p1 = code.parity[0]
    acc = np.asarray(survivors[k], dtype=np.uint8)
    mults = adds = 0
    for x in range(k):
        if x == missing:
            continue
        acc = acc ^ gf.scale(p1[x], survivors[x])
        mults += 1
        adds += 1
    out = gf.scale(gf.inv(int(p1[missing])), acc)
    mults += 1
    if counter is not None:
        counter.mult += mults
        counter.add += adds
    return out
