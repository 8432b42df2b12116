"""Exact walk census: step multisets, convolutions, kernel-vector counts."""

import itertools
import math
from fractions import Fraction

import pytest

from regsing.common import GuardError
from regsing.walk_census import (
    brute_force_null_count,
    build_U,
    graphs_with_null_vector,
    is_admissible,
    key_sum,
    multinomial,
    phi,
    representative_vector,
    squared_deviation,
    support_bound_ok,
    type_class_partition,
    type_vectors,
    walk_endpoint_counts,
)


def test_multinomial():
    assert multinomial(4, (2, 2)) == 6
    assert multinomial(6, (1, 2, 3)) == 60
    with pytest.raises(ValueError):
        multinomial(4, (2, 3))


def test_phi_profiles():
    assert phi((0, 0, 0), 2) == (3, 0)
    assert phi((1, 0, 1), 2) == (1, 2)
    assert phi((4, 2, 0), 5) == (1, 0, 1, 0, 1)
    with pytest.raises(ValueError):
        phi((2,), 2)


def test_admissibility_parity():
    assert is_admissible((4, 2), 2)
    assert not is_admissible((3, 3), 2)
    assert is_admissible((1, 1, 1), 3)  # 0*1 + 1*1 + 2*1 = 3


def test_step_multiset_structure():
    u = build_U(3, 2)
    assert u.as_dict() == {(3, 0): 1, (1, 2): 3}
    for d, p in [(3, 2), (3, 5), (4, 3), (5, 2)]:
        u = build_U(d, p)
        assert u.total_multiplicity == p ** (d - 1)
        w1, m1 = u.items[0]
        assert w1 == (d,) + (0,) * (p - 1) and m1 == 1
        for w, _ in u.items[1:]:
            assert w[0] <= d - 2
            assert sum(w[1:]) >= 2
        for w, _ in u.items:
            assert sum(w) == d
            assert is_admissible(w, p)


def test_step_multiset_matches_direct_enumeration():
    for d, p in [(3, 2), (4, 3)]:
        tally = {}
        for t in itertools.product(range(p), repeat=d):
            if sum(t) % p == 0:
                w = phi(t, p)
                tally[w] = tally.get(w, 0) + 1
        assert build_U(d, p).as_dict() == tally


def brute_endpoints(n, d, p):
    """Endpoint tally over all p^((d-1)n) step sequences, independent route."""
    tuples = [t for t in itertools.product(range(p), repeat=d) if sum(t) % p == 0]
    tally = {}
    for seq in itertools.product(tuples, repeat=n):
        e = [0] * p
        for s in seq:
            for j, c in enumerate(phi(s, p)):
                e[j] += c
        e = tuple(e)
        tally[e] = tally.get(e, 0) + 1
    return tally


def test_convolution_against_sequence_enumeration():
    for n, d, p in [(1, 3, 2), (3, 3, 2), (2, 4, 3), (2, 3, 5)]:
        counts = walk_endpoint_counts(n, d, p)
        assert {k: v for k, v in counts.counts.items() if v} == brute_endpoints(n, d, p)


def test_mass_and_parity_invariants():
    for n, d, p in [(6, 3, 2), (4, 4, 3), (3, 3, 5), (12, 3, 2)]:
        counts = walk_endpoint_counts(n, d, p)
        assert counts.total_mass_ok()
        assert counts.parity_ok()


def test_p2_closed_form():
    # endpoints (3n-2k, 2k) carry weight C(n,k) * 3^k when d=3, p=2
    for n in (3, 7, 12):
        counts = walk_endpoint_counts(n, 3, 2)
        for k in range(0, (3 * n) // 2 + 1):
            expected = math.comb(n, k) * 3**k if k <= n else 0
            assert counts.count((3 * n - 2 * k, 2 * k)) == expected


def test_lattice_guard():
    with pytest.raises(GuardError):
        walk_endpoint_counts(2000, 3, 5, guard=1000)


def test_key_sum_values():
    assert key_sum(3, 3, 2) == Fraction(27, 28)
    assert key_sum(2, 3, 2) == 0
    assert key_sum(1, 3, 2) == 0


def test_graphs_with_null_vector_values():
    counts2 = walk_endpoint_counts(2, 3, 2)
    assert graphs_with_null_vector((2, 0), counts2) == math.factorial(6)
    counts3 = walk_endpoint_counts(3, 3, 2)
    assert graphs_with_null_vector((1, 2), counts3) == 116640
    with pytest.raises(ValueError):
        graphs_with_null_vector((1, 1), counts3)


def test_type_vectors_cover_simplex():
    ts = list(type_vectors(5, 3))
    assert len(ts) == math.comb(7, 2)
    assert len(set(ts)) == len(ts)
    assert all(sum(t) == 5 for t in ts)


def test_squared_deviation_exact():
    assert squared_deviation((2, 2), 2) == 0
    assert squared_deviation((4, 0), 2) == Fraction(1, 2)
    assert squared_deviation((3, 1), 2) == 2 * Fraction(1, 4) ** 2


def test_class_partition_is_exact_split():
    n, d, p = 14, 3, 2
    counts = walk_endpoint_counts(n, d, p)
    ks = key_sum(n, d, p, counts=counts)
    for b in (0.5, 1.0, 10.0):
        e_sum, n_sum, degenerate = type_class_partition(n, d, p, b, counts)
        assert e_sum + n_sum == ks
        assert degenerate == 1
    # small windows leave mass outside; huge windows capture everything
    e_small, n_small, _ = type_class_partition(n, d, p, 0.05, counts)
    assert n_small > 0
    e_big, n_big, _ = type_class_partition(n, d, p, 100.0, counts)
    assert n_big == 0 and e_big == ks
    with pytest.raises(ValueError):
        type_class_partition(n, d, p, 0.0, counts)


def test_support_bound_holds_everywhere():
    for n, d, p in [(6, 3, 2), (4, 3, 5)]:
        counts = walk_endpoint_counts(n, d, p)
        for t in type_vectors(n, p):
            assert support_bound_ok(t, counts)


def test_brute_force_guard_and_validation():
    with pytest.raises(GuardError):
        brute_force_null_count([0] * 5, 5, 3, 2)
    with pytest.raises(ValueError):
        brute_force_null_count([0, 1], 3, 3, 2)


def test_representative_vector():
    assert representative_vector((2, 1, 0)) == [0, 0, 1]
    assert phi(representative_vector((1, 2)), 2) == (1, 2)


def test_walk_identity_equals_brute_force_smallest():
    counts = walk_endpoint_counts(2, 3, 2)
    for t in type_vectors(2, 2):
        predicted = graphs_with_null_vector(t, counts)
        brute = brute_force_null_count(representative_vector(t), 2, 3, 2)
        assert predicted == brute
