"""Builders for the achievable secure caching schemes.

Four scheme families, all explicit linear codes over small prime
fields:

* ``otp``: every user holds a one-time pad, the broadcast sends each
  requested file padded with its requester's key.  Cache size 1,
  rate K.
* ``theorem1``: two files, cache size 1, rate K - 1.  Keys occupy the
  caches of the first K - 1 users; the last user caches a mixture of
  both files and all keys, and demand-dependent coefficients over
  GF(3) make the broadcast simultaneously decodable and opaque.
* ``theorem2``: rate 1 at cache size (N - 1)(K - 1).  The first K - 1
  users cache keyed file differences, the last caches all keys, and a
  single broadcast row serves everyone.
* ``theorem3``: a one-parameter family trading cache size against
  rate.  Each file is expanded into threshold secret shares via a
  Vandermonde generator, users cache share subsets blinded by cross
  keys, and the broadcast sends share combinations per (t+1)-subset
  of users.

Uniform demands (all users ask for the same file) are always served by
sending the file's units directly; that is both cheaper and secure, so
the worst-case rate is attained on non-uniform demands.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from numpy.typing import NDArray

from .ff_linalg import FieldMatrix, PrimeField, smallest_prime_at_least
from .scheme_model import DemandVector, LinearScheme, VariableLayout


def _matrix(q: int, rows: list[NDArray], total: int) -> FieldMatrix:
    if not rows:
        return FieldMatrix.zeros(q, 0, total)
    return FieldMatrix(q, np.array(rows, dtype=np.int64))


def _unit_row(total: int, col: int, value: int = 1) -> NDArray:
    row = np.zeros(total, dtype=np.int64)
    row[col] = value
    return row


def uniform_delivery(s: LinearScheme, d: DemandVector) -> FieldMatrix:
    """Direct broadcast of the commonly requested file's units."""
    if not d.uniform:
        raise ValueError(f"demand {d.entries} is not uniform")
    return s.layout.file_selector(s.field.q, d[1])


# ---------------------------------------------------------------------------
# One-time-pad baseline
# ---------------------------------------------------------------------------


def build_otp(N: int, K: int) -> LinearScheme:
    """Pad-per-user baseline: M = 1, R = K, L = K, over GF(2)."""
    if N < 2 or K < 2:
        raise ValueError(f"need N >= 2 and K >= 2, got N={N}, K={K}")
    q = 2
    layout = VariableLayout(N, 1, tuple(f"S_{k}" for k in range(1, K + 1)))
    total = layout.total
    cache = tuple(
        _matrix(q, [_unit_row(total, layout.key_column(f"S_{k}"))], total)
        for k in range(1, K + 1)
    )

    def delivery(d: DemandVector) -> FieldMatrix:
        if d.uniform:
            return layout.file_selector(q, d[1])
        rows = []
        for k in range(1, K + 1):
            row = _unit_row(total, layout.file_columns(d[k])[0])
            row[layout.key_column(f"S_{k}")] = 1
            rows.append(row)
        return _matrix(q, rows, total)

    return LinearScheme(
        field=PrimeField(q),
        layout=layout,
        K=K,
        cache=cache,
        delivery=delivery,
        label="otp",
        params={"N": N, "K": K},
    )


# ---------------------------------------------------------------------------
# Two files, cache size 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientAssignment:
    """GF(3) broadcast coefficients, one per user."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        for a in self.values:
            if a not in (1, 2):
                raise ValueError(f"coefficients live in {{1, 2}}, got {a}")


def assign_coefficients(d: DemandVector) -> CoefficientAssignment:
    """Per-user GF(3) coefficients for a non-uniform two-file demand.

    Within each demand group (users requesting the same file, in user
    order) coefficients are dealt as (1, 2) pairs while more than two
    users remain, a lone leftover gets 1, and a final pair gets (2, 2).
    Both group sums then equal 1 mod 3, which is what makes the mixed
    cache of the last user useful to every demand at once.
    """
    if d.uniform:
        raise ValueError("uniform demands take the direct broadcast, no coefficients")
    for n in d:
        if n not in (1, 2):
            raise ValueError(f"coefficients are defined for two files, got demand {n}")
    values = [0] * d.K
    for n in (1, 2):
        group = [u for u in range(1, d.K + 1) if d[u] == n]
        while len(group) > 2:
            values[group.pop(0) - 1] = 1
            values[group.pop(0) - 1] = 2
        if len(group) == 1:
            values[group[0] - 1] = 1
        elif len(group) == 2:
            values[group[0] - 1] = 2
            values[group[1] - 1] = 2
    return CoefficientAssignment(tuple(values))


def build_theorem1(K: int) -> LinearScheme:
    """Two-file scheme with M = 1 and R = K - 1 over GF(3).

    Users 1..K-1 cache one key each; user K caches twice the sum of
    both files plus the sum of all keys.  A non-uniform demand is
    served by K - 1 rows, row k sending a_k * W_{d_k} + 2 * S_k with
    the coefficients from assign_coefficients.
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    q = 3
    N = 2
    layout = VariableLayout(N, 1, tuple(f"S_{k}" for k in range(1, K)))
    total = layout.total
    cache_rows = [
        [_unit_row(total, layout.key_column(f"S_{k}"))] for k in range(1, K)
    ]
    last = np.zeros(total, dtype=np.int64)
    last[layout.file_columns(1)[0]] = 2
    last[layout.file_columns(2)[0]] = 2
    for k in range(1, K):
        last[layout.key_column(f"S_{k}")] = 1
    cache_rows.append([last])
    cache = tuple(_matrix(q, rows, total) for rows in cache_rows)

    def delivery(d: DemandVector) -> FieldMatrix:
        if d.uniform:
            return layout.file_selector(q, d[1])
        a = assign_coefficients(d).values
        rows = []
        for k in range(1, K):
            row = _unit_row(total, layout.file_columns(d[k])[0], a[k - 1])
            row[layout.key_column(f"S_{k}")] = 2
            rows.append(row)
        return _matrix(q, rows, total)

    return LinearScheme(
        field=PrimeField(q),
        layout=layout,
        K=K,
        cache=cache,
        delivery=delivery,
        label="theorem1",
        params={"N": N, "K": K},
    )


# ---------------------------------------------------------------------------
# Rate 1
# ---------------------------------------------------------------------------


def build_theorem2(N: int, K: int) -> LinearScheme:
    """Single-broadcast scheme with M = (N-1)(K-1) and R = 1 over GF(2).

    User k < K caches W_1 + W_n + S_{n-1,k} for every n in [2, N]
    together with the other users' keys of each level; user K caches
    every key.  One broadcast row then finishes all K decodings.
    """
    if N < 2 or K < 2:
        raise ValueError(f"need N >= 2 and K >= 2, got N={N}, K={K}")
    q = 2
    names = tuple(
        f"S_{n}_{k}" for n in range(1, N) for k in range(1, K)
    )
    layout = VariableLayout(N, 1, names)
    total = layout.total

    cache_list = []
    for k in range(1, K):
        rows = []
        for n in range(2, N + 1):
            row = _unit_row(total, layout.file_columns(1)[0])
            row[layout.file_columns(n)[0]] = 1
            row[layout.key_column(f"S_{n - 1}_{k}")] = 1
            rows.append(row)
            for other in range(1, K):
                if other != k:
                    rows.append(_unit_row(total, layout.key_column(f"S_{n - 1}_{other}")))
        cache_list.append(_matrix(q, rows, total))
    cache_list.append(
        _matrix(q, [_unit_row(total, layout.key_column(name)) for name in names], total)
    )
    cache = tuple(cache_list)

    def delivery(d: DemandVector) -> FieldMatrix:
        if d.uniform:
            return layout.file_selector(q, d[1])
        row = _unit_row(total, layout.file_columns(d[K])[0])
        for i in range(1, K):
            if d[K] >= 2:
                row[layout.key_column(f"S_{d[K] - 1}_{i}")] += 1
            if d[i] >= 2:
                row[layout.key_column(f"S_{d[i] - 1}_{i}")] += 1
        return _matrix(q, [row], total)

    return LinearScheme(
        field=PrimeField(q),
        layout=layout,
        K=K,
        cache=cache,
        delivery=delivery,
        label="theorem2",
        params={"N": N, "K": K},
    )


# ---------------------------------------------------------------------------
# Threshold secret sharing and the cache/rate tradeoff family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShareSystem:
    """Per-file share expansion used by the tradeoff family.

    A file of B units plus key_units fresh key units is mapped to one
    share per t-subset of users by the generator [I over 0 | V], where
    V is a Vandermonde block on distinct nodes 0, 1, 2, ...  Any
    key_units shares reveal nothing about the file, while all shares
    together recover it.
    """

    K: int
    t: int
    q: int
    labels: tuple[tuple[int, ...], ...]
    generator: FieldMatrix

    @property
    def n_shares(self) -> int:
        return len(self.labels)

    @property
    def key_units(self) -> int:
        return comb(self.K - 1, self.t - 1)

    @property
    def units(self) -> int:
        """File units B carried by the share system."""
        return self.n_shares - self.key_units

    def label_index(self, label: tuple[int, ...]) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown share label {label}") from None

    def share_row(self, label: tuple[int, ...]) -> NDArray:
        """Generator row of the share for a t-subset label."""
        return self.generator.data[self.label_index(label)]


def build_shares(K: int, t: int) -> ShareSystem:
    """Share system for K users at threshold parameter t.

    The modulus is the smallest prime admitting comb(K, t) distinct
    Vandermonde nodes with t + 1 invertible, which the delivery rule
    of the tradeoff family needs.
    """
    if not 1 <= t <= K - 1:
        raise ValueError(f"need 1 <= t <= K - 1, got t={t}, K={K}")
    n_shares = comb(K, t)
    m = comb(K - 1, t - 1)
    B = n_shares - m
    q = smallest_prime_at_least(max(n_shares, t + 2))
    labels = tuple(itertools.combinations(range(1, K + 1), t))
    gen = np.zeros((n_shares, B + m), dtype=np.int64)
    gen[:B, :B] = np.eye(B, dtype=np.int64)
    for i in range(n_shares):
        for j in range(m):
            gen[i, B + j] = pow(i, j, q)
    return ShareSystem(K=K, t=t, q=q, labels=labels, generator=FieldMatrix(q, gen))


def build_theorem3(N: int, K: int, t: int) -> LinearScheme:
    """Tradeoff family member: M = Nt/(K-t) + 1 - 1/B, R = K/(t+1).

    Every file is expanded into comb(K, t) shares, one per t-subset of
    users.  Users 1..t+1 cache their shares in the clear plus the
    cross keys of the (t+1)-subsets containing them; later users cache
    the same material blinded by their own designated cross key.  A
    non-uniform demand costs comb(K, t+1) broadcast rows, one per
    (t+1)-subset of users.
    """
    if K < 3:
        raise ValueError(f"need K >= 3, got {K}")
    if not 1 <= t <= K - 2:
        raise ValueError(f"need 1 <= t <= K - 2, got t={t}")
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    shares = build_shares(K, t)
    q = shares.q
    B = shares.units
    m = shares.key_units
    cross = tuple(itertools.combinations(range(1, K + 1), t + 1))
    cross_name = {V: "S_{" + ",".join(str(u) for u in V) + "}" for V in cross}
    names = tuple(
        f"S_{n}^{i}" for n in range(1, N + 1) for i in range(1, m + 1)
    ) + tuple(cross_name[V] for V in cross)
    layout = VariableLayout(N, B, names)
    total = layout.total

    def share_global(n: int, label: tuple[int, ...]) -> NDArray:
        """The share of file n for a t-subset, over the global layout."""
        g = shares.share_row(label)
        row = np.zeros(total, dtype=np.int64)
        row[list(layout.file_columns(n))] = g[:B]
        for i in range(m):
            row[layout.key_column(f"S_{n}^{i + 1}")] = g[B + i]
        return row

    share_cache = {
        (n, L): share_global(n, L)
        for n in range(1, N + 1)
        for L in shares.labels
    }

    head = tuple(range(1, t + 2))
    cache_list = []
    for k in range(1, K + 1):
        rows = []
        if k <= t + 1:
            for n in range(1, N + 1):
                for L in shares.labels:
                    if k in L:
                        rows.append(share_cache[(n, L)])
            for V in cross:
                if k in V and V != head:
                    rows.append(_unit_row(total, layout.key_column(cross_name[V])))
        else:
            own = tuple(range(1, t + 1)) + (k,)
            own_col = layout.key_column(cross_name[own])
            for n in range(1, N + 1):
                for L in shares.labels:
                    if k in L:
                        row = share_cache[(n, L)].copy()
                        row[own_col] += 1
                        rows.append(row)
            for V in cross:
                if k in V and V != own:
                    row = _unit_row(total, layout.key_column(cross_name[V]))
                    row[own_col] -= 1
                    rows.append(row)
        cache_list.append(_matrix(q, rows, total))
    cache = tuple(cache_list)

    def delivery(d: DemandVector) -> FieldMatrix:
        if d.uniform:
            return layout.file_selector(q, d[1])
        rows = []
        row = np.zeros(total, dtype=np.int64)
        for i in head:
            rest = tuple(u for u in head if u != i)
            row = row + share_cache[(d[i], rest)]
        rows.append(row)
        for V in cross:
            if V == head:
                continue
            row = _unit_row(total, layout.key_column(cross_name[V]), t + 1)
            for i in V:
                rest = tuple(u for u in V if u != i)
                row = row + share_cache[(d[i], rest)]
            rows.append(row)
        return _matrix(q, rows, total)

    return LinearScheme(
        field=PrimeField(q),
        layout=layout,
        K=K,
        cache=cache,
        delivery=delivery,
        label="theorem3",
        params={"N": N, "K": K, "t": t},
        randomness=Fraction(m + comb(K, t + 1), B),
        shares=shares,
    )


def share_rows_global(s: LinearScheme, n: int, labels: tuple[tuple[int, ...], ...]) -> FieldMatrix:
    """Rows of file n's shares over a tradeoff scheme's global layout."""
    if s.shares is None:
        raise ValueError(f"scheme {s.label!r} carries no share system")
    shares = s.shares
    layout = s.layout
    B = shares.units
    rows = []
    for L in labels:
        g = shares.share_row(L)
        row = np.zeros(layout.total, dtype=np.int64)
        row[list(layout.file_columns(n))] = g[:B]
        for i in range(shares.key_units):
            row[layout.key_column(f"S_{n}^{i + 1}")] = g[B + i]
        rows.append(row)
    return _matrix(s.field.q, rows, layout.total)


def build_scheme(label: str, N: int, K: int, t: int | None = None) -> LinearScheme:
    """Dispatch to a builder by scheme label, validating parameters."""
    if label == "otp":
        return build_otp(N, K)
    if label == "theorem1":
        if N != 2:
            raise ValueError(f"theorem1 is a two-file scheme, got N={N}")
        return build_theorem1(K)
    if label == "theorem2":
        return build_theorem2(N, K)
    if label == "theorem3":
        if t is None:
            raise ValueError("theorem3 needs the tradeoff parameter t")
        return build_theorem3(N, K, t)
    raise ValueError(f"unknown scheme label {label!r}")
