"""Verifier tests: rank identities, decoding, and simulation."""

import json

import numpy as np
import pytest

from securecache.constructions import (
    build_otp,
    build_theorem1,
    build_theorem2,
    build_theorem3,
)
from securecache.ff_linalg import FieldMatrix, PrimeField, in_rowspace, rank, zero_columns
from securecache.scheme_model import (
    DemandVector,
    LinearScheme,
    VariableLayout,
    demands_iter,
)
from securecache.verifier import (
    NotDecodableError,
    check_correctness,
    check_security,
    decode,
    observed_matrix,
    simulate,
    verify_all,
)


def test_correctness_ranks_two_file_scheme():
    s = build_theorem1(3)
    d = DemandVector((1, 1, 2))
    c1 = check_correctness(s, d, 1)
    assert (c1.passed, c1.rank_full, c1.rank_masked_requested, c1.file_units) == (True, 3, 2, 1)
    c3 = check_correctness(s, d, 3)
    assert (c3.passed, c3.rank_full, c3.rank_masked_requested) == (True, 3, 2)


def test_security_ranks_two_file_scheme():
    s = build_theorem1(3)
    d = DemandVector((1, 1, 2))
    for k in (1, 2, 3):
        chk = check_security(s, d, k)
        assert chk.passed and chk.rank_full == chk.rank_masked_others == 3


def test_degenerate_scheme_fails_correctness():
    layout = VariableLayout(2, 1, ())
    empty = FieldMatrix.zeros(2, 0, layout.total)
    s = LinearScheme(
        field=PrimeField(2),
        layout=layout,
        K=2,
        cache=(empty, empty),
        delivery=lambda d: empty,
        label="degenerate",
    )
    chk = check_correctness(s, DemandVector((1, 2)), 1)
    assert not chk.passed
    assert (chk.rank_full, chk.rank_masked_requested, chk.file_units) == (0, 0, 1)


def _leaky_pad_scheme():
    # Pad scheme for two files and two users, except user 1 caches the
    # second file in plaintext.
    s = build_otp(2, 2)
    bad = FieldMatrix(2, [[0, 1, 0, 0]])
    return LinearScheme(
        field=s.field,
        layout=s.layout,
        K=s.K,
        cache=(bad, s.cache[1]),
        delivery=s.delivery,
        label="leaky",
        params=dict(s.params),
    )


def test_leaky_scheme_fails_security_by_one_unit():
    s = _leaky_pad_scheme()
    chk = check_security(s, DemandVector((1, 1)), 1)
    assert not chk.passed
    assert chk.rank_full - chk.rank_masked_others == s.B


def test_verify_all_flags_leak():
    report = verify_all(_leaky_pad_scheme())
    assert not report.passed
    bad = [(r.demand, r.user) for r in report.failures()]
    assert ((1, 1), 1) in bad


def test_verify_all_passes_all_families():
    for s in [build_otp(3, 3), build_theorem1(4), build_theorem2(3, 3), build_theorem3(2, 3, 1)]:
        report = verify_all(s)
        assert report.passed
        assert report.demand_count == s.N**s.K
        assert len(report.records) == s.N**s.K * s.K


def test_verify_all_cap():
    s = build_otp(4, 6)
    with pytest.raises(ValueError, match="sample"):
        verify_all(s, cap=1000)


def test_verify_all_sample_is_deterministic_and_covers_uniform():
    s = build_theorem3(4, 6, 2)
    r1 = verify_all(s, policy="sample", count=40, seed=7)
    r2 = verify_all(s, policy="sample", count=40, seed=7)
    assert [rec.demand for rec in r1.records] == [rec.demand for rec in r2.records]
    assert r1.passed
    demands = {rec.demand for rec in r1.records}
    for n in range(1, 5):
        assert (n,) * 6 in demands
    r3 = verify_all(s, policy="sample", count=40, seed=8)
    assert {rec.demand for rec in r3.records} != demands


def test_verify_all_sample_needs_count_and_seed():
    s = build_theorem1(3)
    with pytest.raises(ValueError):
        verify_all(s, policy="sample")
    with pytest.raises(ValueError):
        verify_all(s, policy="bogus")


def test_report_json_serializable():
    report = verify_all(build_theorem1(2))
    blob = json.dumps(report.as_dict())
    back = json.loads(blob)
    assert back["passed"] is True
    assert back["demands_checked"] == 4
    assert len(back["records"]) == 8
    rec = back["records"][0]
    assert rec["rank_full"] == rec["rank_masked_requested"] + rec["file_units"]


def test_correctness_rank_form_matches_decodability():
    # The rank identity holds exactly when every requested unit lies in
    # the observed row space.
    schemes = [build_theorem1(3), build_theorem2(2, 3), build_theorem3(2, 3, 1), _leaky_pad_scheme()]
    for s in schemes:
        for d in demands_iter(s.N, s.K):
            for k in range(1, s.K + 1):
                G = observed_matrix(s, d, k)
                decodable = all(
                    in_rowspace(G, np.eye(s.layout.total, dtype=np.int64)[col]) is not None
                    for col in s.layout.file_columns(d[k])
                )
                assert decodable == check_correctness(s, d, k).passed, (s.label, d, k)


def test_decode_recovers_ground_truth():
    s = build_theorem3(3, 3, 1)
    d = DemandVector((1, 2, 3))
    rng = np.random.default_rng(42)
    hidden = rng.integers(0, 3, s.layout.total, dtype=np.int64)
    broadcast = s.delivery_matrix(d).apply(hidden)
    for k in (1, 2, 3):
        got = decode(s, d, k, s.cache[k - 1].apply(hidden), broadcast)
        want = hidden[list(s.layout.file_columns(d[k]))]
        assert np.array_equal(got, want)


def test_decode_rejects_wrong_symbol_counts():
    s = build_theorem1(3)
    d = DemandVector((1, 2, 1))
    with pytest.raises(ValueError):
        decode(s, d, 1, [0, 0], [0, 0])


def test_decode_raises_when_not_decodable():
    layout = VariableLayout(2, 1, ())
    empty = FieldMatrix.zeros(2, 0, layout.total)
    s = LinearScheme(
        field=PrimeField(2),
        layout=layout,
        K=1,
        cache=(empty,),
        delivery=lambda d: empty,
        label="degenerate",
    )
    with pytest.raises(NotDecodableError, match="not decodable"):
        decode(s, DemandVector((1,)), 1, [], [])


def test_simulate_seeded_and_reproducible():
    s = build_theorem2(3, 3)
    d = DemandVector((1, 2, 3))
    r1 = simulate(s, d, seed=5)
    r2 = simulate(s, d, seed=5)
    assert r1 == r2
    assert r1.passed and r1.failed_users == ()


def test_simulate_detects_corruption():
    s = build_theorem1(3)
    d = DemandVector((1, 2, 2))
    clean = simulate(s, d, seed=9)
    assert clean.passed
    corrupt = simulate(s, d, seed=9, corrupt_unit=0)
    assert not corrupt.passed and corrupt.failed_users
    with pytest.raises(IndexError):
        simulate(s, d, seed=9, corrupt_unit=99)


def test_security_holds_on_cache_only_observations():
    # Row subsets of a passing observation stay secure; spot-check the
    # cache-only subset by masking every file but the (hypothetically)
    # requested one.
    for s in [build_otp(2, 3), build_theorem1(3), build_theorem2(3, 3), build_theorem3(2, 3, 1)]:
        for k in range(1, s.K + 1):
            cache = s.cache[k - 1]
            for n in range(1, s.N + 1):
                others = [
                    c
                    for f in range(1, s.N + 1)
                    if f != n
                    for c in s.layout.file_columns(f)
                ]
                assert rank(zero_columns(cache, others)) == rank(cache)
