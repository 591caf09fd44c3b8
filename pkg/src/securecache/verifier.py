"""Machine checks of decodability and security for linear schemes.

Everything a user k observes under demand d is the row stack of their
cache matrix and the broadcast matrix.  Exact rank identities over the
prime field decide both conditions:

* correctness: the observation determines the requested file exactly
  when rank(observed) equals rank(observed with the requested file's
  columns zeroed) plus the file's unit count;
* security: the observation is independent of all other files exactly
  when zeroing all other files' columns does not change the rank.

decode and simulate exercise the same schemes on concrete symbol
vectors, which keeps the rank checks honest.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .ff_linalg import FieldMatrix, in_rowspace, rank, stack, zero_columns
from .scheme_model import DemandVector, LinearScheme, demand_from_index, demands_iter


class NotDecodableError(ValueError):
    """The requested unit is not a combination of the observed symbols."""


@dataclass(frozen=True)
class CorrectnessCheck:
    passed: bool
    rank_full: int
    rank_masked_requested: int
    file_units: int


@dataclass(frozen=True)
class SecurityCheck:
    passed: bool
    rank_full: int
    rank_masked_others: int


@dataclass(frozen=True)
class CheckRecord:
    demand: tuple[int, ...]
    user: int
    correctness: CorrectnessCheck
    security: SecurityCheck

    @property
    def ok(self) -> bool:
        return self.correctness.passed and self.security.passed

    def as_dict(self) -> dict:
        return {
            "demand": list(self.demand),
            "user": self.user,
            "correct": self.correctness.passed,
            "rank_full": self.correctness.rank_full,
            "rank_masked_requested": self.correctness.rank_masked_requested,
            "file_units": self.correctness.file_units,
            "secure": self.security.passed,
            "rank_masked_others": self.security.rank_masked_others,
        }


@dataclass(frozen=True)
class VerificationReport:
    label: str
    N: int
    K: int
    policy: str
    records: tuple[CheckRecord, ...]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.records)

    @property
    def demand_count(self) -> int:
        return len({r.demand for r in self.records})

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.ok]

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "N": self.N,
            "K": self.K,
            "policy": self.policy,
            "demands_checked": self.demand_count,
            "passed": self.passed,
            "failures": [r.as_dict() for r in self.failures()],
            "records": [r.as_dict() for r in self.records],
        }


def observed_matrix(s: LinearScheme, d: DemandVector, k: int) -> FieldMatrix:
    """Row stack of user k's cache and the broadcast for demand d."""
    if not 1 <= k <= s.K:
        raise IndexError(f"user {k} out of range [1, {s.K}]")
    return stack([s.cache[k - 1], s.delivery_matrix(d)])


def _other_file_columns(s: LinearScheme, requested: int) -> list[int]:
    cols: list[int] = []
    for n in range(1, s.N + 1):
        if n != requested:
            cols.extend(s.layout.file_columns(n))
    return cols


def check_correctness(s: LinearScheme, d: DemandVector, k: int) -> CorrectnessCheck:
    """Rank identity for user k decoding file d_k under demand d."""
    G = observed_matrix(s, d, k)
    r_full = rank(G)
    r_masked = rank(zero_columns(G, s.layout.file_columns(d[k])))
    return CorrectnessCheck(
        passed=r_full == r_masked + s.B,
        rank_full=r_full,
        rank_masked_requested=r_masked,
        file_units=s.B,
    )


def check_security(s: LinearScheme, d: DemandVector, k: int) -> SecurityCheck:
    """Rank identity for user k learning nothing beyond file d_k."""
    G = observed_matrix(s, d, k)
    r_full = rank(G)
    r_masked = rank(zero_columns(G, _other_file_columns(s, d[k])))
    return SecurityCheck(passed=r_full == r_masked, rank_full=r_full, rank_masked_others=r_masked)


def _check_demand(s: LinearScheme, d: DemandVector) -> list[CheckRecord]:
    delivery = s.delivery_matrix(d)
    records = []
    for k in range(1, s.K + 1):
        G = stack([s.cache[k - 1], delivery])
        r_full = rank(G)
        r_req = rank(zero_columns(G, s.layout.file_columns(d[k])))
        r_oth = rank(zero_columns(G, _other_file_columns(s, d[k])))
        records.append(
            CheckRecord(
                demand=d.entries,
                user=k,
                correctness=CorrectnessCheck(r_full == r_req + s.B, r_full, r_req, s.B),
                security=SecurityCheck(r_full == r_oth, r_full, r_oth),
            )
        )
    return records


def _sampled_indices(N: int, K: int, count: int, seed: int) -> list[int]:
    """Deterministic demand sample always containing the uniform demands."""
    space = N**K
    if count >= space:
        return list(range(space))
    uniform = {(v - 1) * (space - 1) // (N - 1) for v in range(1, N + 1)} if N > 1 else {0}
    rng = random.Random(seed)
    picked = set(itertools.islice(
        (i for i in rng.sample(range(space), min(space, count + len(uniform))) if i not in uniform),
        max(0, count - len(uniform)),
    ))
    return sorted(uniform | picked)


def verify_all(
    s: LinearScheme,
    policy: str = "all",
    count: int | None = None,
    seed: int | None = None,
    cap: int = 10**6,
) -> VerificationReport:
    """Run the correctness and security rank checks over demands.

    Args:
        s: the scheme under test.
        policy: "all" for every demand (subject to cap), or "sample"
            for a seeded sample that always includes the uniform
            demands.
        count: sample size, required for policy="sample".
        seed: sample seed, required for policy="sample".
        cap: refuse exhaustive sweeps beyond this many demands.

    Returns:
        A report with one record per (demand, user) pair, in
        lexicographic demand order.
    """
    space = s.N**s.K
    if policy == "all":
        if space > cap:
            raise ValueError(
                f"{s.N}**{s.K} = {space} demands exceed cap {cap}; "
                "use policy='sample' with a count and seed"
            )
        demands = demands_iter(s.N, s.K)
        policy_desc = "all"
    elif policy == "sample":
        if count is None or seed is None:
            raise ValueError("policy='sample' needs count and seed")
        demands = (demand_from_index(s.N, s.K, i) for i in _sampled_indices(s.N, s.K, count, seed))
        policy_desc = f"sample(count={count}, seed={seed})"
    else:
        raise ValueError(f"unknown policy {policy!r}")

    records: list[CheckRecord] = []
    for d in demands:
        records.extend(_check_demand(s, d))
    return VerificationReport(
        label=s.label, N=s.N, K=s.K, policy=policy_desc, records=tuple(records)
    )


def decode(
    s: LinearScheme,
    d: DemandVector,
    k: int,
    cache_symbols: Sequence[int] | NDArray,
    delivery_symbols: Sequence[int] | NDArray,
) -> NDArray:
    """Recover user k's requested file units from observed symbols.

    cache_symbols and delivery_symbols are the images of the hidden
    input vector under the cache and broadcast matrices.  Raises
    NotDecodableError when some requested unit is not a linear
    combination of the observations.
    """
    G = observed_matrix(s, d, k)
    cache_syms = np.asarray(cache_symbols, dtype=np.int64) % s.field.q
    deliv_syms = np.asarray(delivery_symbols, dtype=np.int64) % s.field.q
    if cache_syms.shape != (s.cache[k - 1].rows,):
        raise ValueError(
            f"{cache_syms.shape} cache symbols for {s.cache[k - 1].rows} cache rows"
        )
    if deliv_syms.shape != (G.rows - s.cache[k - 1].rows,):
        raise ValueError(
            f"{deliv_syms.shape} delivery symbols for {G.rows - s.cache[k - 1].rows} broadcast rows"
        )
    observed = np.concatenate([cache_syms, deliv_syms])
    out = np.zeros(s.B, dtype=np.int64)
    for i, col in enumerate(s.layout.file_columns(d[k])):
        target = np.zeros(s.layout.total, dtype=np.int64)
        target[col] = 1
        coeff = in_rowspace(G, target)
        if coeff is None:
            raise NotDecodableError(
                f"unit {i + 1} of file {d[k]} is not decodable by user {k} under demand {d.entries}"
            )
        out[i] = int(coeff @ observed) % s.field.q
    return out


@dataclass(frozen=True)
class SimulationResult:
    passed: bool
    demand: tuple[int, ...]
    seed: int
    failed_users: tuple[int, ...]


def simulate(
    s: LinearScheme, d: DemandVector, seed: int, corrupt_unit: int | None = None
) -> SimulationResult:
    """End-to-end run on random file and key symbols.

    Draws the hidden input vector from a seeded generator, computes
    every cache and the broadcast, decodes each user, and compares
    against ground truth.  corrupt_unit, when given, adds 1 to that
    broadcast symbol first; decoding is then expected to break.
    """
    q = s.field.q
    rng = np.random.default_rng(seed)
    hidden = rng.integers(0, q, s.layout.total, dtype=np.int64)
    broadcast = s.delivery_matrix(d).apply(hidden)
    if corrupt_unit is not None:
        if not 0 <= corrupt_unit < broadcast.shape[0]:
            raise IndexError(
                f"broadcast unit {corrupt_unit} out of range for {broadcast.shape[0]} rows"
            )
        broadcast = broadcast.copy()
        broadcast[corrupt_unit] = (broadcast[corrupt_unit] + 1) % q
    failed = []
    for k in range(1, s.K + 1):
        truth = hidden[list(s.layout.file_columns(d[k]))]
        try:
            got = decode(s, d, k, s.cache[k - 1].apply(hidden), broadcast)
        except NotDecodableError:
            failed.append(k)
            continue
        if not np.array_equal(got, truth):
            failed.append(k)
    return SimulationResult(
        passed=not failed, demand=d.entries, seed=seed, failed_users=tuple(failed)
    )
