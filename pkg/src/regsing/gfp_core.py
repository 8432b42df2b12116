"""Exact linear algebra over F_p and over the integers.

Rank and kernel-size computations work mod a word-size prime on int64
arrays (products of two residues fit in 64 bits for p < 2^31).  Integer
determinants come either from fraction-free (Bareiss) elimination or
from residues modulo a fixed list of 31-bit primes recombined by the
Chinese remainder theorem, with the prime count sized by the Hadamard
bound of the input rows.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .common import MAX_PRIME, is_prime, require_prime

MatrixLike = Sequence[Sequence[int]]


def _as_rows(m: MatrixLike) -> list[list[int]]:
    rows = [list(map(int, r)) for r in m]
    if rows:
        w = len(rows[0])
        if any(len(r) != w for r in rows):
            raise ValueError("ragged matrix")
    return rows


def _require_square(rows: list[list[int]]) -> int:
    n = len(rows)
    if n and len(rows[0]) != n:
        raise ValueError(f"square matrix required, got {n}x{len(rows[0])}")
    return n


def _reduced_int64(m: MatrixLike, p: int) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2:
        a = a.reshape(len(m), -1)
    if a.dtype == object:
        a = (a % p).astype(np.int64)
    else:
        a = a.astype(np.int64) % p
    return a


def fp_eliminate(m: MatrixLike, p: int) -> tuple[int, int]:
    """Row-reduce m mod p; returns (rank, det mod p).

    det is reported as 0 for non-square or rank-deficient input.
    """
    require_prime(p)
    a = _reduced_int64(m, p)
    nr, nc = a.shape
    det = 1
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            det = 0
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
            det = -det
        pv = int(a[r, c])
        det = det * pv % p
        a[r, c:] = a[r, c:] * pow(pv, -1, p) % p
        below = a[r + 1 :, c]
        hit = np.nonzero(below)[0]
        if hit.size:
            rows = hit + r + 1
            a[rows, c:] = (a[rows, c:] - below[hit, None] * a[r, c:]) % p
        r += 1
    if nr != nc or r < nr:
        det = 0
    return r, det % p


def fp_rank(m: MatrixLike, p: int) -> int:
    """Rank of m with entries reduced mod p.  Empty input has rank 0."""
    if len(m) == 0 or len(m[0]) == 0:
        return 0
    return fp_eliminate(m, p)[0]


def fp_det(m: MatrixLike, p: int) -> int:
    rows = _as_rows(m)
    _require_square(rows)
    if not rows:
        return 1 % p
    return fp_eliminate(rows, p)[1]


def fp_kernel_size_exponent(m: MatrixLike, p: int) -> int:
    """k such that the kernel of the n x n matrix m over F_p has p^k elements."""
    rows = _as_rows(m)
    n = _require_square(rows)
    return n - fp_rank(rows, p)


def det_bareiss(m: MatrixLike) -> int:
    """Exact determinant by fraction-free elimination (all divisions exact)."""
    a = _as_rows(m)
    n = _require_square(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (pk * row_i[j] - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pk
    return sign * a[n - 1][n - 1]


def hadamard_bound(rows: list[list[int]]) -> int:
    """Integer upper bound on |det| from row 2-norms (0 iff a zero row exists)."""
    prod_sq = 1
    for r in rows:
        s = sum(x * x for x in r)
        if s == 0:
            return 0
        prod_sq *= s
    return math.isqrt(prod_sq) + 1


def _word_primes():
    q = MAX_PRIME - 1
    while True:
        if is_prime(q):
            yield q
        q -= 1


# Deterministic CRT prime list, largest primes below 2^31, extended on demand.
_CRT_PRIMES: list[int] = []
_CRT_GEN = _word_primes()


def crt_primes(count: int) -> list[int]:
    while len(_CRT_PRIMES) < count:
        _CRT_PRIMES.append(next(_CRT_GEN))
    return _CRT_PRIMES[:count]


def _crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    # x = r1 (mod m1), x = r2 (mod m2), gcd(m1, m2) = 1
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return r1 + m1 * t, m1 * m2


def det_crt(m: MatrixLike) -> int:
    """Exact determinant via residues mod 31-bit primes + CRT reconstruction."""
    rows = _as_rows(m)
    n = _require_square(rows)
    if n == 0:
        return 1
    bound = hadamard_bound(rows)
    if bound == 0:
        return 0
    res, mod = 0, 1
    k = 0
    while mod <= 2 * bound:
        k += 1
        p = crt_primes(k)[-1]
        _, dp = fp_eliminate(rows, p)
        res, mod = _crt_pair(res, mod, dp, p)
    if res > mod // 2:
        res -= mod
    return res


def int_determinant(m: MatrixLike) -> int:
    """Exact integer determinant (CRT route; see det_bareiss for the other)."""
    return det_crt(m)


def int_determinant_is_zero(m: MatrixLike) -> bool:
    """Exact test det(m) == 0, short-circuiting on the first nonzero residue.

    A single nonzero residue certifies det != 0; otherwise residues are
    accumulated until their modulus exceeds twice the Hadamard bound, which
    certifies det == 0.  Never touches floating point.
    """
    rows = _as_rows(m)
    n = _require_square(rows)
    if n == 0:
        return False
    bound = hadamard_bound(rows)
    if bound == 0:
        return True
    mod = 1
    k = 0
    while mod <= 2 * bound:
        k += 1
        p = crt_primes(k)[-1]
        _, dp = fp_eliminate(rows, p)
        if dp != 0:
            return False
        mod *= p
    return True
