"""Construction tests: exact cache and broadcast matrices of each family."""

import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from securecache.constructions import (
    assign_coefficients,
    build_otp,
    build_scheme,
    build_shares,
    build_theorem1,
    build_theorem2,
    build_theorem3,
    share_rows_global,
    uniform_delivery,
)
from securecache.ff_linalg import FieldMatrix, rank, zero_columns
from securecache.scheme_model import DemandVector, demands_iter, memory_of, worst_case_rate


def _row_set(m: FieldMatrix) -> frozenset:
    return frozenset(tuple(row) for row in m.row_lists())


# ---------------------------------------------------------------------------
# Coefficient assignment
# ---------------------------------------------------------------------------


def test_assign_coefficients_examples():
    assert assign_coefficients(DemandVector((1, 1, 2))).values == (2, 2, 1)
    assert assign_coefficients(DemandVector((2, 1, 2))).values == (2, 1, 2)
    assert assign_coefficients(DemandVector((1, 1, 1, 2, 2))).values == (1, 2, 1, 2, 2)
    assert assign_coefficients(DemandVector((1, 2))).values == (1, 1)


def test_assign_coefficients_rejects():
    with pytest.raises(ValueError):
        assign_coefficients(DemandVector((1, 1, 1)))
    with pytest.raises(ValueError):
        assign_coefficients(DemandVector((1, 3)))


def test_assign_coefficients_group_sums():
    # Exhaustive over every non-uniform two-file demand up to K = 10:
    # coefficients stay in {1, 2} and each demand group sums to 1 mod 3.
    for K in range(2, 11):
        for entries in itertools.product((1, 2), repeat=K):
            d = DemandVector(entries)
            if d.uniform:
                continue
            a = assign_coefficients(d).values
            assert all(x in (1, 2) for x in a)
            for n in (1, 2):
                total = sum(a[u - 1] for u in range(1, K + 1) if d[u] == n)
                assert total % 3 == 1, (entries, a)


# ---------------------------------------------------------------------------
# Pad baseline and two-file scheme
# ---------------------------------------------------------------------------


def test_otp_matrices():
    s = build_otp(2, 2)
    assert s.field.q == 2
    assert s.cache[0].row_lists() == [[0, 0, 1, 0]]
    assert s.cache[1].row_lists() == [[0, 0, 0, 1]]
    X = s.delivery_matrix(DemandVector((2, 1)))
    assert X.row_lists() == [[0, 1, 1, 0], [1, 0, 0, 1]]


def test_two_file_cache_matrices():
    s = build_theorem1(3)
    assert s.field.q == 3
    assert s.cache[0].row_lists() == [[0, 0, 1, 0]]
    assert s.cache[1].row_lists() == [[0, 0, 0, 1]]
    assert s.cache[2].row_lists() == [[2, 2, 1, 1]]


def test_two_file_broadcast_rows():
    s = build_theorem1(3)
    X = s.delivery_matrix(DemandVector((1, 1, 2)))
    assert X.row_lists() == [[2, 0, 2, 0], [2, 0, 0, 2]]
    X2 = s.delivery_matrix(DemandVector((2, 1, 2)))
    assert X2.row_lists() == [[0, 2, 2, 0], [1, 0, 0, 2]]


def test_uniform_delivery_sends_file_directly():
    s = build_theorem1(4)
    d = DemandVector((2, 2, 2, 2))
    assert uniform_delivery(s, d).row_lists() == [[0, 1, 0, 0, 0]]
    assert s.delivery_matrix(d) == uniform_delivery(s, d)
    with pytest.raises(ValueError):
        uniform_delivery(s, DemandVector((1, 2, 2, 2)))


# ---------------------------------------------------------------------------
# Unit-rate scheme
# ---------------------------------------------------------------------------


def _key_row(layout, name):
    row = [0] * layout.total
    row[layout.key_column(name)] = 1
    return tuple(row)


def _mix_row(layout, files, keys):
    row = [0] * layout.total
    for n in files:
        row[layout.file_columns(n)[0]] = 1
    for name in keys:
        row[layout.key_column(name)] = 1
    return tuple(row)


def test_unit_rate_cache_layout_3_3():
    s = build_theorem2(3, 3)
    L = s.layout
    expect_1 = {
        _mix_row(L, (1, 2), ("S_1_1",)),
        _key_row(L, "S_1_2"),
        _mix_row(L, (1, 3), ("S_2_1",)),
        _key_row(L, "S_2_2"),
    }
    expect_2 = {
        _mix_row(L, (1, 2), ("S_1_2",)),
        _key_row(L, "S_1_1"),
        _mix_row(L, (1, 3), ("S_2_2",)),
        _key_row(L, "S_2_1"),
    }
    expect_3 = {_key_row(L, name) for name in L.key_names}
    assert _row_set(s.cache[0]) == expect_1
    assert _row_set(s.cache[1]) == expect_2
    assert _row_set(s.cache[2]) == expect_3


def test_unit_rate_broadcast_row():
    s = build_theorem2(3, 3)
    L = s.layout
    X = s.delivery_matrix(DemandVector((1, 2, 3)))
    assert _row_set(X) == {_mix_row(L, (3,), ("S_2_1", "S_2_2", "S_1_2"))}
    # Keys cancel when a user's request matches the last user's.
    X2 = s.delivery_matrix(DemandVector((3, 2, 3)))
    assert _row_set(X2) == {_mix_row(L, (3,), ("S_2_2", "S_1_2"))}


def test_unit_rate_two_users():
    s = build_theorem2(2, 2)
    assert memory_of(s) == 1
    assert worst_case_rate(s) == 1
    X = s.delivery_matrix(DemandVector((1, 2)))
    assert _row_set(X) == {_mix_row(s.layout, (2,), ("S_1_1",))}


# ---------------------------------------------------------------------------
# Share systems
# ---------------------------------------------------------------------------


def test_share_system_3_1():
    sys = build_shares(3, 1)
    assert sys.q == 3
    assert sys.labels == ((1,), (2,), (3,))
    assert sys.units == 2 and sys.key_units == 1
    assert sys.generator.row_lists() == [[1, 0, 1], [0, 1, 1], [0, 0, 1]]


def test_share_system_4_2():
    sys = build_shares(4, 2)
    assert sys.n_shares == comb(4, 2) == 6
    assert sys.key_units == comb(3, 1) == 3
    assert sys.units == 3
    assert sys.q == 7
    assert sys.generator.rows == 6 and sys.generator.cols == 6


def test_share_count_identity():
    # The unit count B equals comb(K-1, t) for every threshold choice.
    for K in range(2, 12):
        for t in range(1, K):
            sys_units = comb(K, t) - comb(K - 1, t - 1)
            assert sys_units == comb(K - 1, t)


def test_share_threshold_nonsingular():
    # Any key_units generator rows restricted to the key block are
    # independent: Vandermonde rows on distinct nodes.
    for K in range(3, 6):
        for t in range(1, K):
            sys = build_shares(K, t)
            m = sys.key_units
            key_block = sys.generator.data[:, sys.units:]
            for rows in itertools.combinations(range(sys.n_shares), m):
                sub = FieldMatrix(sys.q, key_block[list(rows)])
                assert rank(sub) == m, (K, t, rows)


def test_share_modulus_large_enough():
    for K in range(3, 8):
        for t in range(1, K - 1):
            sys = build_shares(K, t)
            assert sys.q >= sys.n_shares
            assert (t + 1) % sys.q != 0


def test_build_shares_validation():
    with pytest.raises(ValueError):
        build_shares(3, 0)
    with pytest.raises(ValueError):
        build_shares(3, 3)


# ---------------------------------------------------------------------------
# Tradeoff family
# ---------------------------------------------------------------------------


def test_tradeoff_scheme_3_3_1_layout():
    s = build_theorem3(3, 3, 1)
    L = s.layout
    assert s.field.q == 3 and s.B == 2
    assert L.key_names == (
        "S_1^1", "S_2^1", "S_3^1", "S_{1,2}", "S_{1,3}", "S_{2,3}",
    )

    def share(n, label_idx):
        # Shares of file n: unit 1 + key, unit 2 + key, key alone.
        row = [0] * L.total
        gen = [[1, 0, 1], [0, 1, 1], [0, 0, 1]][label_idx]
        cols = list(L.file_columns(n))
        row[cols[0]], row[cols[1]] = gen[0], gen[1]
        row[L.key_column(f"S_{n}^1")] = gen[2]
        return np.array(row)

    def key(name, value=1):
        row = np.zeros(L.total, dtype=int)
        row[L.key_column(name)] = value
        return row

    # User 1 caches its share of every file plus one cross key.
    expect_1 = [share(1, 0), share(2, 0), share(3, 0), key("S_{1,3}")]
    assert s.cache[0].row_lists() == [list(r % 3) for r in expect_1]
    # User 3 caches everything blinded by its designated cross key.
    expect_3 = [
        share(1, 2) + key("S_{1,3}"),
        share(2, 2) + key("S_{1,3}"),
        share(3, 2) + key("S_{1,3}"),
        key("S_{2,3}") - key("S_{1,3}"),
    ]
    assert s.cache[2].row_lists() == [list(r % 3) for r in expect_3]

    X = s.delivery_matrix(DemandVector((1, 2, 3)))
    expect_X = [
        share(1, 1) + share(2, 0),
        key("S_{1,3}", 2) + share(1, 2) + share(3, 0),
        key("S_{2,3}", 2) + share(2, 2) + share(3, 1),
    ]
    assert X.row_lists() == [list(r % 3) for r in expect_X]


def test_tradeoff_scheme_counts():
    for N in range(2, 4):
        for K in range(3, 6):
            for t in range(1, K - 1):
                s = build_theorem3(N, K, t)
                B = comb(K - 1, t)
                m = comb(K - 1, t - 1)
                assert s.B == B
                for cache in s.cache:
                    assert cache.rows == N * m + B - 1
                d = next(d for d in demands_iter(N, K) if not d.uniform)
                assert s.delivery_matrix(d).rows == comb(K, t + 1)
                assert memory_of(s) == Fraction(N * t, K - t) + 1 - Fraction(1, B)
                assert worst_case_rate(s) == Fraction(K, t + 1)


def test_tradeoff_family_corner_values():
    s = build_theorem3(2, 4, 1)
    assert (memory_of(s), worst_case_rate(s)) == (Fraction(4, 3), Fraction(2))
    s = build_theorem3(2, 4, 2)
    assert (memory_of(s), worst_case_rate(s)) == (Fraction(8, 3), Fraction(4, 3))
    s = build_theorem3(4, 3, 1)
    assert (memory_of(s), worst_case_rate(s)) == (Fraction(5, 2), Fraction(3, 2))


def test_share_rows_global_match_generator():
    s = build_theorem3(2, 4, 2)
    sys = s.shares
    m = share_rows_global(s, 2, sys.labels)
    assert m.rows == sys.n_shares
    # File columns carry the unit block, own keys the Vandermonde block,
    # all other columns stay zero.
    file_cols = list(s.layout.file_columns(2))
    key_cols = [s.layout.key_column(f"S_2^{i+1}") for i in range(sys.key_units)]
    other = [
        c for c in range(s.layout.total) if c not in file_cols and c not in key_cols
    ]
    assert np.array_equal(m.data[:, file_cols], sys.generator.data[:, : sys.units])
    assert np.array_equal(m.data[:, key_cols], sys.generator.data[:, sys.units :])
    assert not m.data[:, other].any()


def test_cache_only_observations_leak_nothing():
    # Masking every file column never changes a cache matrix's rank.
    schemes = [
        build_otp(3, 3),
        build_theorem1(4),
        build_theorem2(3, 3),
        build_theorem3(3, 4, 2),
    ]
    for s in schemes:
        all_file_cols = list(range(s.N * s.B))
        for cache in s.cache:
            assert rank(zero_columns(cache, all_file_cols)) == rank(cache)


def test_build_scheme_dispatch():
    assert build_scheme("otp", 3, 3).label == "otp"
    assert build_scheme("theorem1", 2, 4).label == "theorem1"
    assert build_scheme("theorem2", 3, 3).label == "theorem2"
    assert build_scheme("theorem3", 2, 3, 1).label == "theorem3"
    with pytest.raises(ValueError):
        build_scheme("theorem1", 3, 4)
    with pytest.raises(ValueError):
        build_scheme("theorem3", 2, 3)
    with pytest.raises(ValueError):
        build_scheme("nope", 2, 3)


def test_builder_validation():
    with pytest.raises(ValueError):
        build_theorem1(1)
    with pytest.raises(ValueError):
        build_theorem2(1, 3)
    with pytest.raises(ValueError):
        build_theorem3(2, 2, 1)
    with pytest.raises(ValueError):
        build_theorem3(2, 4, 3)
