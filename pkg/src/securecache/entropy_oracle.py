"""Brute-force entropy oracle, independent of the rank machinery.

Entropies of collections of scheme variables are measured by literally
enumerating every assignment of the global input vector, pushing each
through the variables' matrices, and tallying the image.  For linear
maps of uniform inputs the image must be uniform and its size a power
of q, so every entropy is an exact integer count of units; the oracle
raises rather than round.  Agreement of these counts with matrix ranks
is the cross-check that keeps the rank-based verifier honest.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .constructions import build_shares, share_rows_global
from .ff_linalg import FieldMatrix, in_rowspace, rank, stack, zero_columns
from .scheme_model import (
    DemandVector,
    LinearScheme,
    demand_from_index,
    demands_iter,
    memory_of,
    worst_case_rate,
)


class EnumerationCapError(ValueError):
    """The input space is too large to enumerate; carries the size."""

    def __init__(self, q: int, n: int, required: int, max_enum: int) -> None:
        self.required = required
        super().__init__(
            f"brute-force enumeration needs {q}**{n} = {required} input vectors, "
            f"over the cap of {max_enum}"
        )


class OracleInvariantError(RuntimeError):
    """A linear image came out non-uniform or of non-power size."""


@dataclass(frozen=True)
class VariableRef:
    """Reference to one random variable of a scheme.

    kind is one of "file", "cache", "delivery", "shares"; index is the
    file or user for the first two, demand the demand tuple for a
    delivery, and (index, labels) the file and share labels for a
    share set.
    """

    kind: str
    index: int = 0
    demand: tuple[int, ...] = ()
    labels: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def of_file(cls, n: int) -> "VariableRef":
        return cls(kind="file", index=n)

    @classmethod
    def of_cache(cls, k: int) -> "VariableRef":
        return cls(kind="cache", index=k)

    @classmethod
    def of_delivery(cls, d: DemandVector | tuple[int, ...]) -> "VariableRef":
        entries = d.entries if isinstance(d, DemandVector) else tuple(d)
        return cls(kind="delivery", demand=entries)

    @classmethod
    def of_shares(cls, n: int, labels: Iterable[tuple[int, ...]]) -> "VariableRef":
        return cls(kind="shares", index=n, labels=tuple(tuple(L) for L in labels))

    def resolve(self, s: LinearScheme) -> FieldMatrix:
        if self.kind == "file":
            return s.layout.file_selector(s.field.q, self.index)
        if self.kind == "cache":
            if not 1 <= self.index <= s.K:
                raise IndexError(f"user {self.index} out of range [1, {s.K}]")
            return s.cache[self.index - 1]
        if self.kind == "delivery":
            return s.delivery_matrix(DemandVector(self.demand))
        if self.kind == "shares":
            return share_rows_global(s, self.index, self.labels)
        raise ValueError(f"unknown variable kind {self.kind!r}")


@dataclass(frozen=True)
class EntropyResult:
    value: int
    uniform: bool
    image_size: int


def stacked_matrix(s: LinearScheme, refs: Sequence[VariableRef]) -> FieldMatrix:
    """Row stack of the resolved variables; empty collections are legal."""
    mats = [ref.resolve(s) for ref in refs]
    if not mats:
        return FieldMatrix.zeros(s.field.q, 0, s.layout.total)
    return stack(mats)


class _Enumerator:
    """Chunked walk over all q**n input vectors.

    The base-q digit rows are cached in a narrow dtype when small
    enough, re-derived chunk by chunk otherwise; either way each chunk
    is widened to int64 before the matrix product so arithmetic is
    exact.
    """

    CHUNK = 1 << 16
    CACHE_ENTRIES = 50_000_000

    def __init__(self, q: int, n: int) -> None:
        self.q = q
        self.n = n
        self.count = q**n
        self.powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64) if n else None
        self.pack_dtype = np.uint8 if q <= 255 else np.uint16 if q <= 65535 else np.uint32
        self.cached: NDArray | None = None
        if self.count * max(n, 1) <= self.CACHE_ENTRIES:
            self.cached = self._digits(0, self.count).astype(self.pack_dtype)

    def _digits(self, start: int, stop: int) -> NDArray:
        idx = np.arange(start, stop, dtype=np.int64)
        if self.n == 0:
            return np.zeros((stop - start, 0), dtype=np.int64)
        return (idx[:, None] // self.powers) % self.q

    def image_counts(self, G: NDArray) -> dict[bytes, int]:
        """Tally of the images of all inputs under the row map G."""
        m = G.shape[0]
        width = self.pack_dtype().itemsize * m
        counts: dict[bytes, int] = {}
        for start in range(0, self.count, self.CHUNK):
            stop = min(start + self.CHUNK, self.count)
            if self.cached is not None:
                digits = self.cached[start:stop].astype(np.int64)
            else:
                digits = self._digits(start, stop)
            out = (digits @ G.T) % self.q
            packed = np.ascontiguousarray(out.astype(self.pack_dtype))
            void = packed.view(np.dtype((np.void, width))).ravel()
            uniq, cnt = np.unique(void, return_counts=True)
            for u, c in zip(uniq, cnt):
                key = u.tobytes()
                counts[key] = counts.get(key, 0) + int(c)
        return counts

    def entropy_units(self, G: NDArray) -> int:
        """Exact log_q of the image size, with uniformity enforced."""
        if G.shape[0] == 0:
            return 0
        counts = self.image_counts(G)
        if len(set(counts.values())) != 1:
            raise OracleInvariantError(
                f"non-uniform image for a linear map: tallies {sorted(set(counts.values()))}"
            )
        image_size = len(counts)
        value, size = 0, 1
        while size < image_size:
            size *= self.q
            value += 1
        if size != image_size:
            raise OracleInvariantError(
                f"image size {image_size} is not a power of {self.q}"
            )
        return value


def brute_entropy(
    s: LinearScheme, refs: Sequence[VariableRef], max_enum: int = 10**7
) -> EntropyResult:
    """Entropy of a variable collection, in units, by full enumeration.

    Enumerates all q**total inputs (refusing politely past max_enum),
    maps them through the stacked variable matrices, and checks that
    the image is uniform with size an exact power of q.  The value is
    that exact logarithm; rank is never consulted.
    """
    q = s.field.q
    n = s.layout.total
    required = q**n
    if required > max_enum:
        raise EnumerationCapError(q, n, required, max_enum)
    G = stacked_matrix(s, refs)
    if G.rows == 0:
        return EntropyResult(value=0, uniform=True, image_size=1)
    enum = _Enumerator(q, n)
    value = enum.entropy_units(G.data)
    return EntropyResult(value=value, uniform=True, image_size=q**value)


def _bounded_deliveries(s: LinearScheme, max_deliveries: int) -> list[DemandVector]:
    space = s.N**s.K
    if space <= max_deliveries:
        return list(demands_iter(s.N, s.K))
    idxs = sorted({round(i * (space - 1) / (max_deliveries - 1)) for i in range(max_deliveries)})
    return [demand_from_index(s.N, s.K, i) for i in idxs]


def check_rank_agreement(
    s: LinearScheme,
    subset_size_cap: int,
    max_enum: int = 10**7,
    max_deliveries: int = 32,
) -> bool:
    """Brute-force entropy equals rank for every small variable collection.

    The universe is all files, all caches, and a bounded demand set of
    deliveries; every collection up to subset_size_cap variables
    (including the empty one) is checked.
    """
    q = s.field.q
    n = s.layout.total
    required = q**n
    if required > max_enum:
        raise EnumerationCapError(q, n, required, max_enum)
    universe: list[VariableRef] = (
        [VariableRef.of_file(i) for i in range(1, s.N + 1)]
        + [VariableRef.of_cache(k) for k in range(1, s.K + 1)]
        + [VariableRef.of_delivery(d) for d in _bounded_deliveries(s, max_deliveries)]
    )
    enum = _Enumerator(q, n)
    for size in range(0, subset_size_cap + 1):
        for combo in itertools.combinations(universe, size):
            G = stacked_matrix(s, combo)
            if enum.entropy_units(G.data) != rank(G):
                return False
    return True


def _rank_of(s: LinearScheme, refs: Sequence[VariableRef]) -> int:
    return rank(stacked_matrix(s, refs))


def check_lemma1_lemma2(s: LinearScheme) -> bool:
    """Joint-entropy identities specific to unit cache size.

    First: under any demand, the broadcast together with a requested
    file already determines the caches of all users requesting that
    file (for groups of 1 to K-1 users).  Second: any single file and
    all caches together are mutually independent.  All entropies here
    are computed as ranks; the oracle's rank agreement check is what
    ties ranks to counting.
    """
    if memory_of(s) != 1:
        raise ValueError(f"identities require cache size 1, scheme has M={memory_of(s)}")
    for d in demands_iter(s.N, s.K):
        dv = VariableRef.of_delivery(d)
        for user in range(1, s.K + 1):
            group = [k for k in range(1, s.K + 1) if d[k] == d[user]]
            if not 1 <= len(group) <= s.K - 1:
                continue
            wanted = VariableRef.of_file(d[user])
            lhs = _rank_of(s, [wanted, dv])
            rhs = _rank_of(s, [wanted] + [VariableRef.of_cache(k) for k in group] + [dv])
            if lhs != rhs:
                return False
    caches = [VariableRef.of_cache(k) for k in range(1, s.K + 1)]
    cache_rank_sum = sum(_rank_of(s, [c]) for c in caches)
    for n in range(1, s.N + 1):
        fv = VariableRef.of_file(n)
        if _rank_of(s, [fv] + caches) != _rank_of(s, [fv]) + cache_rank_sum:
            return False
    return True


def check_lemma3_lemma4(s: LinearScheme, samples: int = 10, seed: int = 0) -> bool:
    """Joint-entropy identities specific to unit broadcast rate.

    With every broadcast one unit, fixing a user's request to file a
    makes the class of broadcasts with that request a deterministic
    function of the file and the user's cache; and a foreign file,
    one whole class, plus one representative from each other class
    are mutually independent.  Representatives are the
    lexicographically least demands, plus seeded random re-draws.
    """
    if worst_case_rate(s) != 1:
        raise ValueError("identities require unit rate")
    all_demands = list(demands_iter(s.N, s.K))
    rng = random.Random(seed)
    for user in range(1, s.K + 1):
        classes = {
            a: [d for d in all_demands if d[user] == a] for a in range(1, s.N + 1)
        }
        class_refs = {
            a: [VariableRef.of_delivery(d) for d in ds] for a, ds in classes.items()
        }
        class_rank = {a: _rank_of(s, class_refs[a]) for a in classes}
        for a in range(1, s.N + 1):
            fv = VariableRef.of_file(a)
            zv = VariableRef.of_cache(user)
            if _rank_of(s, [fv, zv]) != _rank_of(s, [fv, zv] + class_refs[a]):
                return False
        rep_choices = [{a: 0 for a in classes}]
        for _ in range(samples):
            rep_choices.append({a: rng.randrange(len(classes[a])) for a in classes})
        for choice in rep_choices:
            reps = {a: VariableRef.of_delivery(classes[a][choice[a]]) for a in classes}
            rep_rank = {a: _rank_of(s, [reps[a]]) for a in classes}
            for a in range(1, s.N + 1):
                others = [x for x in range(1, s.N + 1) if x != a]
                joint = _rank_of(s, class_refs[a] + [reps[x] for x in others])
                if joint != class_rank[a] + sum(rep_rank[x] for x in others):
                    return False
                for b in others:
                    rest = [x for x in others if x != b]
                    fv = VariableRef.of_file(b)
                    joint = _rank_of(s, [fv] + class_refs[a] + [reps[x] for x in rest])
                    split = _rank_of(s, [fv]) + class_rank[a] + sum(rep_rank[x] for x in rest)
                    if joint != split:
                        return False
    return True


def check_secret_sharing(
    K: int,
    t: int,
    exhaustive_limit: int = 30,
    sample_count: int = 1000,
    seed: int = 0,
) -> bool:
    """Threshold properties of the share expansion for (K, t).

    Every set of comb(K-1, t-1) shares must reveal nothing about the
    file (rank unchanged by masking the file columns), and all shares
    together must recover every file unit.  Subsets are checked
    exhaustively up to exhaustive_limit shares, by seeded sample
    beyond that.
    """
    sys = build_shares(K, t)
    G = sys.generator
    B, m = sys.units, sys.key_units
    for j in range(B):
        target = np.zeros(G.cols, dtype=np.int64)
        target[j] = 1
        if in_rowspace(G, target) is None:
            return False
    file_cols = range(B)
    if sys.n_shares <= exhaustive_limit:
        subsets: Iterable[tuple[int, ...]] = itertools.combinations(range(sys.n_shares), m)
    else:
        rng = random.Random(seed)
        subsets = (tuple(sorted(rng.sample(range(sys.n_shares), m))) for _ in range(sample_count))
    for rows in subsets:
        sub = FieldMatrix(sys.q, G.data[list(rows)])
        if rank(sub) != rank(zero_columns(sub, file_cols)):
            return False
    return True
