"""Prior-free performance benchmark and posted-price profit benchmarks.

The performance benchmark maximizes an objective over two-level lotteries
whose thresholds come from the profile itself (plus 0 and infinity). The
profit benchmarks are the classic posted-price quantities: best uniform
price revenue, the same restricted to two or more winners, and the
supply-capped variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError
from .ironing import Objective
from .mechanisms import (ValuationProfile, objective_value,
                         run_one_level_lottery, run_two_level_lottery)

__all__ = [
    "BenchmarkResult",
    "benchmark",
    "benchmark_n2_closed_form",
    "best_one_level_lottery",
    "profit_benchmarks",
    "truncate_profile",
]


@dataclass
class BenchmarkResult:
    """Maximizing two-level lottery: value and the (p, q) that attain it."""

    value: float
    argmax_p: float
    argmax_q: float
    objective: Objective

    def to_json(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "argmax_p": "inf" if math.isinf(self.argmax_p) else self.argmax_p,
            "argmax_q": self.argmax_q,
            "objective": {"alpha": self.objective.alpha, "beta": self.objective.beta},
        }


def _candidate_values(profile: ValuationProfile) -> list[float]:
    return sorted({0.0, *profile.values})


def benchmark(profile: ValuationProfile, k: int, objective: Objective) -> BenchmarkResult:
    """Maximize the objective over candidate (p, q) threshold pairs.

    Candidates for each threshold are 0, the profile's values, and +inf for
    p (a pure q-tier with nobody in the top group). The maximum over real
    thresholds is attained on this finite set; ties resolve to the
    lexicographically smallest (p, q).
    """
    cands = _candidate_values(profile)
    best = -math.inf
    best_p = 0.0
    best_q = 0.0
    for p in cands + [math.inf]:
        for q in cands:
            if q > p:
                break
            val = objective_value(
                run_two_level_lottery(profile, k, p, q), profile, objective)
            if val > best:
                best, best_p, best_q = val, p, q
    return BenchmarkResult(best, best_p, best_q, objective)


def benchmark_n2_closed_form(v1: float, v2: float) -> float:
    """Residual-surplus benchmark for two agents and one unit.

    Equals max{(v1+v2)/2, hi - lo/2}: either a free fifty-fifty lottery or
    selling to the high agent at the low agent's value, whichever burns less.
    """
    if v1 < 0 or v2 < 0:
        raise DomainError("values must be >= 0")
    hi, lo = (v1, v2) if v1 >= v2 else (v2, v1)
    return max((v1 + v2) / 2.0, hi - lo / 2.0)


def best_one_level_lottery(profile: ValuationProfile, k: int,
                           objective: Objective) -> tuple[float, float]:
    """Best single posted price with lottery rationing; returns (p, value)."""
    best = -math.inf
    best_p = 0.0
    for p in _candidate_values(profile):
        val = objective_value(run_one_level_lottery(profile, k, p), profile, objective)
        if val > best:
            best, best_p = val, p
    return best_p, best


def profit_benchmarks(profile: ValuationProfile, k: int) -> dict[str, float]:
    """Posted-price revenue benchmarks from the sorted profile.

    bm is max_i i*v_(i) over all i; bm2 restricts to i >= 2 so no single
    agent carries the whole revenue; ofs additionally caps i at the supply k.
    """
    if profile.n < 2:
        raise DomainError("bm2 needs at least two agents")
    if k < 2:
        raise DomainError("ofs needs k >= 2")
    desc = profile.sorted_desc()
    rev = (np.arange(1, profile.n + 1)) * desc
    top = min(k, profile.n)
    return {
        "bm": float(rev.max()),
        "bm2": float(rev[1:].max()),
        "ofs": float(rev[1:top].max()),
    }


def truncate_profile(profile: ValuationProfile) -> ValuationProfile:
    """Replace the highest value with the second highest, sorted descending."""
    if profile.n < 2:
        raise DomainError("truncation needs at least two agents")
    desc = profile.sorted_desc()
    desc[0] = desc[1]
    return ValuationProfile(desc.tolist())
