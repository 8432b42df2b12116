"""Large-deviation rate function for walk endpoint densities.

For a density nv = (nv_0, ..., nv_{p-1}) on F_p values, the rate is

    sup { -sum_j a_j ln a_j }  +  (d-1) * sum_k nv_k ln nv_k,

the supremum over nonnegative weights a on the p^{d-1} step atoms subject to
sum a_j = 1 and sum_j a_j w_j = d * nv.  The rate is <= 0 everywhere on the
simplex, with equality exactly at the uniform density and at e_0 = (1,0,...,0).

The supremum is computed through the smooth convex dual: a_j(theta) is
proportional to exp(<theta, w_j>) and Newton iterations drive the moment
residual below tolerance.  A closed-form stationary candidate and the AM-GM
upper bound ln(amgm_sum) provide independent cross-checks.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .common import require_coprime_degree
from .walk_census import TypeVec, build_U, squared_deviation, type_vectors

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_NEWTON_ITER = 200


def _check_density(nv: Sequence[float], p: int) -> np.ndarray:
    v = np.asarray(nv, dtype=float)
    if v.shape != (p,):
        raise ValueError(f"density must have length {p}, got shape {v.shape}")
    if (v < -1e-12).any():
        raise ValueError("density entries must be nonnegative")
    if abs(float(v.sum()) - 1.0) > 1e-12:
        raise ValueError("density entries must sum to 1 within 1e-12")
    return np.clip(v, 0.0, None)


def _atoms(d: int, p: int) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct step profiles as rows of W with their multiplicities."""
    u = build_U(d, p)
    w = np.array([item[0] for item in u.items], dtype=float)
    m = np.array([item[1] for item in u.items], dtype=float)
    return w, m


def _expand(values: Sequence[float], mults: np.ndarray) -> Tuple[float, ...]:
    out: List[float] = []
    for v, m in zip(values, mults):
        out.extend([float(v)] * int(m))
    return tuple(out)


@dataclass(frozen=True)
class RateCertificate:
    """Solution of the constrained max-entropy problem at one density.

    alpha lists per-atom weights expanded in step-multiset order (each
    distinct profile repeated by its multiplicity); rate uses 0*ln 0 = 0.
    """

    density: Tuple[float, ...]
    alpha: Tuple[float, ...]
    dual: Tuple[float, ...]
    rate: float
    residual: float
    converged: bool
    feasible: bool


def certificate_json(cert: RateCertificate) -> str:
    return json.dumps(
        {
            "density": list(cert.density),
            "alpha": list(cert.alpha),
            "dual": list(cert.dual),
            "rate": cert.rate,
            "residual": cert.residual,
            "converged": cert.converged,
            "feasible": cert.feasible,
        },
        separators=(",", ":"),
    )


def _density_entropy_term(nv: np.ndarray, d: int) -> float:
    return (d - 1) * float(sum(x * math.log(x) for x in nv if x > 0.0))


def maxent_alpha(
    nv: Sequence[float],
    d: int,
    p: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_NEWTON_ITER,
) -> RateCertificate:
    """Maximize weight entropy subject to the moment constraint at d*nv.

    Atoms touching a zero coordinate of nv are forced to weight 0 before
    solving; a linear program then certifies feasibility of the remaining
    constraint.  Infeasible densities get rate -inf and feasible=False.
    """
    require_coprime_degree(p, d)
    nv_arr = _check_density(nv, p)
    w_all, m_all = _atoms(d, p)
    target = d * nv_arr

    # Support restriction: coordinates with nv_k = 0 force alpha_j = 0 for
    # every atom with w_j(k) > 0, since the atoms are nonnegative.
    keep = ~((w_all > 0) & (nv_arr == 0.0)[None, :]).any(axis=1)
    w = w_all[keep]
    m = m_all[keep]
    density_t = tuple(float(x) for x in nv_arr)
    zero_alpha = tuple(0.0 for _ in range(int(m_all.sum())))
    if len(w) == 0:
        return RateCertificate(
            density=density_t,
            alpha=zero_alpha,
            dual=(0.0,) * p,
            rate=float("-inf"),
            residual=float("inf"),
            converged=False,
            feasible=False,
        )

    a_eq = np.vstack([w.T, np.ones((1, len(w)))])
    b_eq = np.append(target, 1.0)
    lp = linprog(np.zeros(len(w)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if lp.status != 0:
        return RateCertificate(
            density=density_t,
            alpha=zero_alpha,
            dual=(0.0,) * p,
            rate=float("-inf"),
            residual=float("inf"),
            converged=False,
            feasible=False,
        )

    theta = np.zeros(p)

    def dual_value(th: np.ndarray) -> float:
        s = w @ th
        c = s.max()
        return c + math.log(float(np.sum(m * np.exp(s - c)))) - float(th @ target)

    converged = False
    for _ in range(max_iter):
        s = w @ theta
        c = s.max()
        z = m * np.exp(s - c)
        prob = z / z.sum()
        mean = prob @ w
        grad = mean - target
        if float(np.abs(grad).max()) < tol:
            converged = True
            break
        hess = (w * prob[:, None]).T @ w - np.outer(mean, mean)
        step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        g0 = dual_value(theta)
        slope = float(grad @ step)
        # Absolute noise allowance keeps full Newton steps near the optimum,
        # where true dual decrease is below float resolution.
        noise = 1e-15 * (1.0 + abs(g0))
        t = 1.0
        while t > 1e-14 and dual_value(theta + t * step) > g0 + 1e-4 * t * slope + noise:
            t *= 0.5
        theta = theta + t * step
    else:
        s = w @ theta
        c = s.max()
        z = m * np.exp(s - c)
        prob = z / z.sum()
        mean = prob @ w
        grad = mean - target

    # Per-atom weights: prob is the grouped mass, each atom in the group
    # carries prob/mult.
    atom_weight = prob / m
    entropy = -float(np.sum(prob * np.log(np.where(atom_weight > 0, atom_weight, 1.0))))
    rate = entropy + _density_entropy_term(nv_arr, d)
    residual = float(np.abs(grad).max())

    alpha_kept = iter(atom_weight)
    alpha_groups = [next(alpha_kept) if k else 0.0 for k in keep]
    return RateCertificate(
        density=density_t,
        alpha=_expand(alpha_groups, m_all),
        dual=tuple(float(x) for x in theta),
        rate=rate,
        residual=residual,
        converged=converged and residual < tol,
        feasible=True,
    )


@dataclass(frozen=True)
class StationaryWeights:
    """Closed-form stationary candidate alpha_j = e^{d-2+lam} prod_k nv_k^{((d-1)/d) w_j(k)}.

    moment_residual reports how far the candidate is from the moment
    constraint; agreement with the dual solver holds only when it is small.
    """

    density: Tuple[float, ...]
    alpha: Tuple[float, ...]
    lam: float
    rate: float
    moment_residual: float


def _geometric_factor(nv: np.ndarray, w_row: np.ndarray, d: int) -> float:
    acc = 1.0
    for k in range(len(nv)):
        wk = w_row[k]
        if wk == 0:
            continue
        if nv[k] == 0.0:
            return 0.0
        acc *= nv[k] ** (((d - 1) / d) * wk)
    return acc


def amgm_sum(nv: Sequence[float], d: int, p: int) -> float:
    """sum_j mult_j prod_k nv_k^{((d-1)/d) w_j(k)}; <= 1, = 1 iff uniform or e_0."""
    require_coprime_degree(p, d)
    nv_arr = _check_density(nv, p)
    w, m = _atoms(d, p)
    return float(sum(mj * _geometric_factor(nv_arr, wj, d) for wj, mj in zip(w, m)))


def stationary_alpha(nv: Sequence[float], d: int, p: int) -> StationaryWeights:
    """Lagrange stationary weights; the rate equals -(d-2+lam) = ln(amgm_sum)."""
    require_coprime_degree(p, d)
    nv_arr = _check_density(nv, p)
    w, m = _atoms(d, p)
    factors = np.array([_geometric_factor(nv_arr, wj, d) for wj in w])
    s = float((m * factors).sum())
    if s <= 0.0:
        raise ValueError("no step atom is supported on the density; weights undefined")
    atom_weight = factors / s
    lam = -(d - 2) - math.log(s)
    moment = (m * atom_weight) @ w
    residual = float(np.abs(moment - d * nv_arr).max())
    return StationaryWeights(
        density=tuple(float(x) for x in nv_arr),
        alpha=_expand(atom_weight, m),
        lam=lam,
        rate=-(d - 2 + lam),
        moment_residual=residual,
    )


@dataclass(frozen=True)
class GramSpectrum:
    d: int
    p: int
    matrix: Tuple[Tuple[int, ...], ...]
    eigenvalues: Tuple[float, ...]  # descending
    leading: int  # d^2 p^{d-2}
    repeated: int  # d p^{d-2}, multiplicity p-1


def gram_spectrum(d: int, p: int) -> GramSpectrum:
    """Eigenvalues of sum_j mult_j w_j w_j^T, computed numerically.

    The summed matrix equals d p^{d-2} I + d(d-1) p^{d-3} J, so the spectrum
    is {d^2 p^{d-2}} plus d p^{d-2} repeated p-1 times.
    """
    require_coprime_degree(p, d)
    u = build_U(d, p)
    gram = [[0] * p for _ in range(p)]
    for w, mult in u.items:
        for i in range(p):
            if w[i] == 0:
                continue
            for j in range(p):
                gram[i][j] += mult * w[i] * w[j]
    eig = np.linalg.eigvalsh(np.array(gram, dtype=float))[::-1]
    leading = d * d * p ** (d - 2)
    repeated = d * p ** (d - 2)
    logger.info(
        "gram spectrum d=%d p=%d: repeated eigenvalue %d has multiplicity p-1 = %d, "
        "not d-1 = %d",
        d,
        p,
        repeated,
        p - 1,
        d - 1,
    )
    return GramSpectrum(
        d=d,
        p=p,
        matrix=tuple(tuple(row) for row in gram),
        eigenvalues=tuple(float(x) for x in eig),
        leading=leading,
        repeated=repeated,
    )


@dataclass(frozen=True)
class QuadraticReport:
    d: int
    p: int
    radius: float
    ratios: Tuple[float, ...]  # rate(s)/rate(s/2) per sampled direction
    coefficients: Tuple[float, ...]  # rate(s)/sum delta_j^2 per direction
    max_ratio_error: float  # max |ratio - 4|


def quadratic_expansion_check(
    d: int, p: int, radius: float = 1e-3, samples: int = 8, seed: int = 20240801
) -> QuadraticReport:
    """rate(uniform + delta) = -(p/2) sum delta_j^2 + O(|delta|^3).

    Halving delta must scale the rate by about 1/4; the ratio
    rate(s)/rate(s/2) is reported for random zero-sum directions.
    """
    require_coprime_degree(p, d)
    rng = np.random.default_rng(seed)
    uniform = np.full(p, 1.0 / p)
    ratios: List[float] = []
    coeffs: List[float] = []
    for _ in range(samples):
        g = rng.standard_normal(p)
        g -= g.mean()
        g /= np.linalg.norm(g)
        delta = radius * g
        r_full = maxent_alpha(uniform + delta, d, p).rate
        r_half = maxent_alpha(uniform + delta / 2, d, p).rate
        ratios.append(r_full / r_half)
        coeffs.append(r_full / float(delta @ delta))
    return QuadraticReport(
        d=d,
        p=p,
        radius=radius,
        ratios=tuple(ratios),
        coefficients=tuple(coeffs),
        max_ratio_error=max(abs(r - 4.0) for r in ratios),
    )


@dataclass
class GridScanReport:
    d: int
    p: int
    resolution: int
    n_points: int
    n_excluded: int  # within 2/resolution of an equality point
    n_infeasible: int
    n_nonconverged: int
    max_rate: float  # over included feasible points
    argmax: Tuple[float, ...]
    rows: List[Tuple[Tuple[float, ...], float, bool, bool]]  # (density, rate, feasible, converged)

    @property
    def all_negative(self) -> bool:
        return self.max_rate < 0.0


def negativity_grid_scan(d: int, p: int, resolution: int) -> GridScanReport:
    """Scan the density simplex at the given grid resolution.

    Grid points within Euclidean distance 2/resolution of either equality
    point (uniform, e_0) are excluded; the maximum rate over the rest must
    be strictly negative.
    """
    require_coprime_degree(p, d)
    if resolution < 10:
        raise ValueError("resolution must be at least 10")
    uniform = np.full(p, 1.0 / p)
    e0 = np.zeros(p)
    e0[0] = 1.0
    cutoff = 2.0 / resolution
    rows: List[Tuple[Tuple[float, ...], float, bool, bool]] = []
    n_excluded = n_infeasible = n_nonconverged = 0
    max_rate = float("-inf")
    argmax: Tuple[float, ...] = ()
    n_points = 0
    for t in type_vectors(resolution, p):
        n_points += 1
        nv = np.array(t, dtype=float) / resolution
        if (
            float(np.linalg.norm(nv - uniform)) < cutoff
            or float(np.linalg.norm(nv - e0)) < cutoff
        ):
            n_excluded += 1
            continue
        cert = maxent_alpha(nv, d, p)
        rows.append((cert.density, cert.rate, cert.feasible, cert.converged))
        if not cert.feasible:
            n_infeasible += 1
            continue
        if not cert.converged:
            n_nonconverged += 1
        if cert.rate > max_rate:
            max_rate = cert.rate
            argmax = cert.density
    return GridScanReport(
        d=d,
        p=p,
        resolution=resolution,
        n_points=n_points,
        n_excluded=n_excluded,
        n_infeasible=n_infeasible,
        n_nonconverged=n_nonconverged,
        max_rate=max_rate,
        argmax=argmax,
        rows=rows,
    )


def grid_scan_csv(report: GridScanReport) -> str:
    lines = ["density,rate,feasible,converged"]
    for density, rate, feasible, conv in report.rows:
        dens = ",".join(f"{x:.6f}" for x in density)
        lines.append(f"\"{dens}\",{rate!r},{feasible},{conv}")
    return "\n".join(lines) + "\n"


def classify_type(t: TypeVec, b: float) -> str:
    """Label a type vector: zero-type, equidistributed, or non-equidistributed."""
    if b <= 0:
        raise ValueError("b must be positive")
    n = sum(t)
    if t[0] == n:
        return "zero-type"
    if float(squared_deviation(t, len(t))) <= b * math.log(n) / n:
        return "equidistributed"
    return "non-equidistributed"
