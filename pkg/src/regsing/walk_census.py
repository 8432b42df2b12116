"""Exact counting: step multisets, lattice walks, and kernel-vector sums.

Everything here is integer/rational arithmetic end to end.  The central
identity: for a vector with value-frequency profile t = (n_0,...,n_{p-1}),
the number of configurations whose adjacency matrix annihilates it mod p
equals (prod_j (d*n_j)!) times the number of n-step walks with steps drawn
(with multiplicity) from the profile multiset of sum-zero d-tuples that
end at d*t.  Summing over nonzero profiles and normalizing by (nd)! gives
the key sum, whose limit is 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple

from .common import GuardError, require_degree, require_prime
from .graph_model import ENUMERATION_GUARD, adjacency_from_permutation, enumerate_all_configurations

TypeVec = Tuple[int, ...]

LATTICE_GUARD = 5_000_000  # max C(dn+p-1, p-1) lattice points per walk table


@lru_cache(maxsize=None)
def _factorial(k: int) -> int:
    return math.factorial(k)


def multinomial(n: int, parts: Sequence[int]) -> int:
    if sum(parts) != n or any(x < 0 for x in parts):
        raise ValueError(f"parts {parts} do not partition {n}")
    out = _factorial(n)
    for x in parts:
        out //= _factorial(x)
    return out


def phi(a: Sequence[int], p: int) -> TypeVec:
    """Value-frequency profile of a tuple over F_p."""
    counts = [0] * p
    for x in a:
        if not 0 <= x < p:
            raise ValueError(f"entry {x} outside F_{p}")
        counts[x] += 1
    return tuple(counts)


def is_admissible(t: Sequence[int], p: int) -> bool:
    """Profiles of sum-zero vectors satisfy sum_j j*t_j = 0 mod p."""
    return sum(j * tj for j, tj in enumerate(t)) % p == 0


@dataclass(frozen=True)
class UMultiset:
    """Step multiset: profiles of all p^(d-1) sum-zero d-tuples over F_p."""

    d: int
    p: int
    items: Tuple[Tuple[TypeVec, int], ...]  # (profile, multiplicity), w_1 first

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.items)

    def as_dict(self) -> Dict[TypeVec, int]:
        return dict(self.items)


def build_U(d: int, p: int) -> UMultiset:
    require_degree(d)
    require_prime(p)
    counts: Dict[TypeVec, int] = {}
    for head in itertools.product(range(p), repeat=d - 1):
        last = (-sum(head)) % p
        w = phi(head + (last,), p)
        counts[w] = counts.get(w, 0) + 1
    items = tuple(sorted(counts.items(), reverse=True))
    u = UMultiset(d=d, p=p, items=items)
    # structural facts the rest of the package leans on
    assert u.total_multiplicity == p ** (d - 1)
    w1, m1 = items[0]
    assert w1 == (d,) + (0,) * (p - 1) and m1 == 1
    assert all(w[0] <= d - 2 and sum(w[1:]) >= 2 for w, _ in items[1:])
    return u


@dataclass
class LatticeCounts:
    """Exact endpoint distribution of the n-step walk on {x >= 0 : sum x = dn}."""

    n: int
    d: int
    p: int
    counts: Dict[TypeVec, int]

    def count(self, endpoint: Sequence[int]) -> int:
        return self.counts.get(tuple(endpoint), 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def total_mass_ok(self) -> bool:
        return self.total() == self.p ** ((self.d - 1) * self.n)

    def parity_ok(self) -> bool:
        return all(is_admissible(e, self.p) for e, c in self.counts.items() if c)


def _lattice_size(n: int, d: int, p: int) -> int:
    return math.comb(d * n + p - 1, p - 1)


def walk_endpoint_counts(n: int, d: int, p: int, guard: int = LATTICE_GUARD) -> LatticeCounts:
    """n-fold exact convolution of the step multiset counting measure."""
    if n < 1:
        raise ValueError(f"n={n} must be >= 1")
    size = _lattice_size(n, d, p)
    if size > guard:
        raise GuardError(
            f"endpoint lattice has C({d * n}+{p - 1},{p - 1}) = {size} points, "
            f"over the guard of {guard}"
        )
    u = build_U(d, p)
    if p == 2:
        return _walk_counts_dense_p2(n, d, u)
    cur: Dict[TypeVec, int] = {w: m for w, m in u.items}
    for _ in range(n - 1):
        nxt: Dict[TypeVec, int] = {}
        for e, c in cur.items():
            for w, m in u.items:
                key = tuple(a + b for a, b in zip(e, w))
                nxt[key] = nxt.get(key, 0) + c * m
        cur = nxt
    return LatticeCounts(n=n, d=d, p=p, counts=cur)


def _walk_counts_dense_p2(n: int, d: int, u: UMultiset) -> LatticeCounts:
    # dense table indexed by the second coordinate, 0..dn
    steps = [(w[1], m) for w, m in u.items]
    cur = [0] * (d * n + 1)
    for s, m in steps:
        cur[s] += m
    for _ in range(n - 1):
        nxt = [0] * (d * n + 1)
        for j, c in enumerate(cur):
            if c:
                for s, m in steps:
                    nxt[j + s] += c * m
        cur = nxt
    counts = {(d * n - j, j): c for j, c in enumerate(cur) if c}
    return LatticeCounts(n=n, d=d, p=2, counts=counts)


def type_vectors(n: int, p: int) -> Iterator[TypeVec]:
    """All nonnegative p-tuples summing to n, lexicographic in the leading parts."""
    if p == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in type_vectors(n - first, p - 1):
            yield (first,) + rest


def graphs_with_null_vector(t: Sequence[int], counts: LatticeCounts) -> int:
    """Configurations annihilating any fixed vector of profile t, exactly."""
    t = tuple(t)
    if sum(t) != counts.n:
        raise ValueError(f"profile {t} does not sum to n={counts.n}")
    d = counts.d
    prefactor = 1
    for tj in t:
        prefactor *= _factorial(d * tj)
    return prefactor * counts.count(tuple(d * tj for tj in t))


def key_sum(n: int, d: int, p: int, counts: LatticeCounts | None = None) -> Fraction:
    """Normalized count of (graph, nonzero kernel vector) pairs, exact."""
    if counts is None:
        counts = walk_endpoint_counts(n, d, p)
    total = Fraction(0)
    denom_n = d * n
    for t in type_vectors(n, p):
        if t[0] == n:
            continue
        c = counts.count(tuple(d * tj for tj in t))
        if c == 0:
            continue
        term = Fraction(multinomial(n, t) * c, multinomial(denom_n, [d * tj for tj in t]))
        total += term
    return total


def squared_deviation(t: Sequence[int], p: int) -> Fraction:
    """sum_j (t_j/n - 1/p)^2, exact."""
    n = sum(t)
    return sum((Fraction(tj, n) - Fraction(1, p)) ** 2 for tj in t)


def type_class_partition(
    n: int, d: int, p: int, b: float, counts: LatticeCounts | None = None
) -> Tuple[Fraction, Fraction, Fraction]:
    """Split the key sum into equidistributed / non-equidistributed parts.

    Returns (e_sum, n_sum, degenerate) where e_sum + n_sum equals the key
    sum exactly and degenerate is the excluded all-zero-vector term.
    """
    if b <= 0:
        raise ValueError("threshold b must be positive")
    if counts is None:
        counts = walk_endpoint_counts(n, d, p)
    threshold = b * math.log(n) / n
    e_sum = Fraction(0)
    n_sum = Fraction(0)
    degenerate = Fraction(0)
    denom_n = d * n
    for t in type_vectors(n, p):
        c = counts.count(tuple(d * tj for tj in t))
        if c == 0:
            continue
        term = Fraction(multinomial(n, t) * c, multinomial(denom_n, [d * tj for tj in t]))
        if t[0] == n:
            degenerate += term
        elif float(squared_deviation(t, p)) <= threshold:
            e_sum += term
        else:
            n_sum += term
    return e_sum, n_sum, degenerate


def support_bound_ok(t: Sequence[int], counts: LatticeCounts) -> bool:
    """count(d*t)^2 <= (p^(d-1) * n)^(d*m) with m = n - t_0 (squared to keep d*m/2 integral)."""
    m = counts.n - t[0]
    c = counts.count(tuple(counts.d * tj for tj in t))
    return c * c <= (counts.p ** (counts.d - 1) * counts.n) ** (counts.d * m)


@lru_cache(maxsize=None)
def _adjacency_multiset(n: int, d: int) -> Tuple[Tuple[TypeVec, int], ...]:
    """(flattened adjacency matrix, multiplicity) over all (nd)! permutations."""
    tally: Dict[TypeVec, int] = {}
    for sample in enumerate_all_configurations(n, d):
        key = tuple(int(x) for x in adjacency_from_permutation(sample).ravel())
        tally[key] = tally.get(key, 0) + 1
    return tuple(sorted(tally.items()))


def brute_force_null_count(v: Sequence[int], n: int, d: int, p: int) -> int:
    """Count configurations with A v = 0 mod p by direct enumeration."""
    require_prime(p)
    if n * d > ENUMERATION_GUARD:
        raise GuardError(
            f"brute force over ({n}*{d})! permutations refused; guard is n*d <= {ENUMERATION_GUARD}"
        )
    v = [int(x) % p for x in v]
    if len(v) != n:
        raise ValueError(f"vector length {len(v)} != n={n}")
    hits = 0
    for flat, mult in _adjacency_multiset(n, d):
        if all(
            sum(flat[k * n + l] * v[l] for l in range(n)) % p == 0
            for k in range(n)
        ):
            hits += mult
    return hits


def representative_vector(t: Sequence[int]) -> List[int]:
    """Canonical vector of profile t: n_0 zeros, then n_1 ones, ..."""
    out: List[int] = []
    for value, reps in enumerate(t):
        out.extend([value] * reps)
    return out


def oracle_all_types(n: int, d: int, p: int) -> List[Tuple[TypeVec, int, int]]:
    """(profile, formula count, brute-force count) for every profile of length p."""
    counts = walk_endpoint_counts(n, d, p)
    out = []
    for t in type_vectors(n, p):
        predicted = graphs_with_null_vector(t, counts)
        brute = brute_force_null_count(representative_vector(t), n, d, p)
        out.append((t, predicted, brute))
    return out
