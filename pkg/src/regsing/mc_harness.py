"""Monte Carlo estimation of singularity probabilities for adjacency
matrices of random d-regular directed multigraphs.

Each trial draws one configuration-model sample, reduces its adjacency
matrix mod every listed prime, and decides exact rational singularity
through the integer determinant.  Trials use independent counter-based
streams keyed by trial index, so results are byte-identical for a fixed
seed regardless of scheduling or parallelism.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .common import GuardError, require_coprime_degree, require_degree, require_prime
from .gfp_core import fp_det, int_determinant_is_zero
from .graph_model import adjacency_from_permutation, has_identical_rows, sample_configuration

# Caps n*trials so a typo cannot schedule days of elimination work.
WORKLOAD_GUARD = 5_000_000


class InvariantError(RuntimeError):
    """A per-trial implication check failed; indicates a software defect."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    d: int
    primes: Tuple[int, ...]
    trials: int
    seed: int
    parallelism: int = 1

    def __post_init__(self):
        require_degree(self.d)
        for p in self.primes:
            require_prime(p)
            require_coprime_degree(p, self.d)
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.parallelism < 1:
            raise ValueError("parallelism must be positive")
        if self.n * self.trials > WORKLOAD_GUARD:
            raise GuardError(
                f"n*trials = {self.n * self.trials} exceeds the workload guard "
                f"{WORKLOAD_GUARD}"
            )


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one sampled graph.

    elapsed is wall-clock diagnostics only and is excluded from the
    canonical serialization, which must be identical across schedules.
    """

    trial: int
    singular_mod: Tuple[Tuple[int, bool], ...]  # (prime, singular) sorted by prime
    det_zero: bool
    identical_rows: bool
    elapsed: float

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "trial": self.trial,
                "singular_mod": {str(p): flag for p, flag in self.singular_mod},
                "det_zero": self.det_zero,
                "identical_rows": self.identical_rows,
            },
            separators=(",", ":"),
        )


def check_trial_invariants(rec: TrialRecord) -> None:
    """identical-rows implies det 0 implies singular mod every listed prime."""
    if rec.identical_rows and not rec.det_zero:
        raise InvariantError(
            f"trial {rec.trial}: identical rows but nonzero integer determinant"
        )
    if rec.det_zero and not all(flag for _, flag in rec.singular_mod):
        raise InvariantError(
            f"trial {rec.trial}: zero integer determinant but nonsingular mod a prime"
        )


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    # The bounds are exactly 0 (resp. 1) at the empty (resp. full) success
    # count; snapping removes float fuzz in the last ulp.
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return (low, high)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    d: int
    trials: int
    seed: int
    per_prime: Tuple[Tuple[int, float, float, float], ...]  # (p, fraction, low, high)
    rational_fraction: float
    rational_interval: Tuple[float, float]
    identical_rows_fraction: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "d": self.d,
                "trials": self.trials,
                "seed": self.seed,
                "singular_mod": {
                    str(p): {"fraction": f, "wilson_low": lo, "wilson_high": hi}
                    for p, f, lo, hi in self.per_prime
                },
                "rational": {
                    "fraction": self.rational_fraction,
                    "wilson_low": self.rational_interval[0],
                    "wilson_high": self.rational_interval[1],
                },
                "identical_rows_fraction": self.identical_rows_fraction,
            },
            separators=(",", ":"),
        )


def run_trial(n: int, d: int, seed: int, primes: Sequence[int], trial: int) -> TrialRecord:
    """One sampled graph: per-prime residues and the exact integer-zero test.

    The determinant of the sampled matrix is decided once; singularity mod a
    listed prime reads the determinant residue at that prime (reduction
    commutes with the determinant), not a separate rational elimination.
    """
    t0 = time.perf_counter()
    sample = sample_configuration(n, d, seed, stream=trial)
    a = adjacency_from_permutation(sample)
    identical = has_identical_rows(a)
    singular = tuple((p, fp_det(a, p) == 0) for p in sorted(primes))
    det_zero = int_determinant_is_zero(a)
    rec = TrialRecord(
        trial=trial,
        singular_mod=singular,
        det_zero=det_zero,
        identical_rows=identical,
        elapsed=time.perf_counter() - t0,
    )
    check_trial_invariants(rec)
    return rec


def _trial_star(args) -> TrialRecord:
    return run_trial(*args)


def summarize(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> SummaryStats:
    trials = len(records)
    per_prime: List[Tuple[int, float, float, float]] = []
    for idx, p in enumerate(sorted(cfg.primes)):
        hits = sum(1 for r in records if r.singular_mod[idx][1])
        lo, hi = wilson_interval(hits, trials)
        per_prime.append((p, hits / trials, lo, hi))
    zero_hits = sum(1 for r in records if r.det_zero)
    lo, hi = wilson_interval(zero_hits, trials)
    rational_fraction = zero_hits / trials
    for p, frac, _, _ in per_prime:
        if frac < rational_fraction:
            raise InvariantError(
                f"singular fraction mod {p} is below the rational-singular fraction"
            )
    return SummaryStats(
        n=cfg.n,
        d=cfg.d,
        trials=trials,
        seed=cfg.seed,
        per_prime=tuple(per_prime),
        rational_fraction=rational_fraction,
        rational_interval=(lo, hi),
        identical_rows_fraction=sum(r.identical_rows for r in records) / trials,
    )


def run_experiment(cfg: ExperimentConfig) -> Tuple[SummaryStats, List[TrialRecord]]:
    """All trials of one experiment; records come back sorted by trial index."""
    args = [(cfg.n, cfg.d, cfg.seed, cfg.primes, t) for t in range(cfg.trials)]
    if cfg.parallelism == 1:
        records = [_trial_star(a) for a in args]
    else:
        chunk = max(1, cfg.trials // (cfg.parallelism * 8))
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            records = list(pool.map(_trial_star, args, chunksize=chunk))
    records.sort(key=lambda r: r.trial)
    return summarize(cfg, records), records


def records_jsonl(records: Sequence[TrialRecord]) -> str:
    return "\n".join(r.to_json_line() for r in records) + "\n"
