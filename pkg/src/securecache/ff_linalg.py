"""Exact linear algebra over prime fields.

Dense matrices with entries reduced mod q, Gaussian elimination with
first-nonzero pivoting, rank, reduced row echelon form, row-space
membership, and column masking.  All arithmetic is exact integer
arithmetic in numpy int64; there are no tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for desk-scale moduli."""
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def smallest_prime_at_least(n: int) -> int:
    """Return the least prime p with p >= n.

    Args:
        n: lower bound, must be >= 2.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    p = n
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class PrimeField:
    """The field of integers mod q, with q checked prime at construction."""

    q: int

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise ValueError(f"field modulus must be prime, got {self.q}")

    def inv(self, x: int) -> int:
        """Multiplicative inverse of a nonzero residue."""
        x = x % self.q
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, -1, self.q)


class FieldMatrix:
    """Immutable dense matrix over the integers mod a prime q.

    Entries are stored as int64 in [0, q).  Matrices with zero rows are
    legal (they arise as empty observation sets); zero columns are not.
    """

    __slots__ = ("q", "data")

    def __init__(self, q: int, data: Sequence[Sequence[int]] | NDArray) -> None:
        if not is_prime(q):
            raise ValueError(f"field modulus must be prime, got {q}")
        arr = np.array(data, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError(f"matrix data must be 2-dimensional, got shape {arr.shape}")
        if arr.shape[1] == 0:
            raise ValueError("matrix must have at least one column")
        arr %= q
        arr.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("FieldMatrix is immutable")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, q: int, rows: int, cols: int) -> "FieldMatrix":
        return cls(q, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, q: int, n: int) -> "FieldMatrix":
        return cls(q, np.eye(n, dtype=np.int64))

    def row_lists(self) -> list[list[int]]:
        """Entries as plain nested lists (JSON-friendly)."""
        return [[int(x) for x in row] for row in self.data]

    def apply(self, vec: NDArray) -> NDArray:
        """Matrix-vector product mod q; vec has length cols."""
        v = np.asarray(vec, dtype=np.int64)
        if v.shape != (self.cols,):
            raise ValueError(f"vector length {v.shape} does not match {self.cols} columns")
        return (self.data @ v) % self.q

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.q == other.q and self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"FieldMatrix(q={self.q}, {self.rows}x{self.cols})"


def stack(matrices: Iterable[FieldMatrix]) -> FieldMatrix:
    """Vertically stack matrices over the same field and width."""
    mats = list(matrices)
    if not mats:
        raise ValueError("nothing to stack")
    q = mats[0].q
    cols = mats[0].cols
    for m in mats[1:]:
        if m.q != q:
            raise ValueError(f"mixed moduli {q} and {m.q}")
        if m.cols != cols:
            raise ValueError(f"mixed widths {cols} and {m.cols}")
    return FieldMatrix(q, np.vstack([m.data for m in mats]))


def zero_columns(m: FieldMatrix, cols: Iterable[int]) -> FieldMatrix:
    """Copy of m with the given columns forced to zero.

    This realizes restriction of a linear map to the complementary
    variables: ranks of masked matrices measure what the rows still
    reveal once the masked variables are discounted.
    """
    idx = list(cols)
    for c in idx:
        if not 0 <= c < m.cols:
            raise IndexError(f"column {c} out of range for {m.cols} columns")
    arr = m.data.copy()
    arr[:, idx] = 0
    return FieldMatrix(m.q, arr)


def _eliminate(arr: NDArray, q: int, reduced: bool) -> tuple[NDArray, list[int]]:
    """Gaussian elimination mod q on a copy of arr.

    Pivots are chosen as the first nonzero entry scanning down each
    column; pivot rows are normalized to 1.  With reduced=True the
    entries above pivots are cleared as well (RREF).  Returns the
    eliminated matrix and the pivot column list.
    """
    work = arr.copy()
    rows, cols = work.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        inv = pow(int(work[r, c]), -1, q)
        work[r] = (work[r] * inv) % q
        below = work[r + 1:, c]
        mask = below != 0
        if mask.any():
            work[r + 1:][mask] = (work[r + 1:][mask] - np.outer(below[mask], work[r])) % q
        pivots.append(c)
        r += 1
    if reduced:
        for i, c in enumerate(pivots):
            above = work[:i, c]
            mask = above != 0
            if mask.any():
                work[:i][mask] = (work[:i][mask] - np.outer(above[mask], work[i])) % q
    return work, pivots


def rank(m: FieldMatrix) -> int:
    """Rank of m over its prime field."""
    if m.rows == 0:
        return 0
    _, pivots = _eliminate(m.data, m.q, reduced=False)
    return len(pivots)


def rref(m: FieldMatrix) -> FieldMatrix:
    """Reduced row echelon form; deterministic for identical inputs."""
    if m.rows == 0:
        return m
    work, _ = _eliminate(m.data, m.q, reduced=True)
    return FieldMatrix(m.q, work)


def in_rowspace(m: FieldMatrix, target: Sequence[int] | NDArray) -> NDArray | None:
    """Express target as a linear combination of the rows of m.

    Args:
        m: matrix whose row space is queried.
        target: vector of length m.cols.

    Returns:
        Coefficient vector c with c @ m == target (mod q), or None when
        target lies outside the row space.  Free coefficients are 0, so
        the result is deterministic.
    """
    t = np.asarray(target, dtype=np.int64) % m.q
    if t.shape != (m.cols,):
        raise ValueError(f"target length {t.shape} does not match {m.cols} columns")
    if m.rows == 0:
        return np.zeros(0, dtype=np.int64) if not t.any() else None
    # Solve c @ m = t as m.T @ c.T = t.T on the augmented system.
    aug = np.hstack([m.data.T, t[:, None]])
    work, pivots = _eliminate(aug, m.q, reduced=True)
    if m.rows in pivots:
        return None
    coeff = np.zeros(m.rows, dtype=np.int64)
    for i, c in enumerate(pivots):
        coeff[c] = work[i, m.rows]
    return coeff
