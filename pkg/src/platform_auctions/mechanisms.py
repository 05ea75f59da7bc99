"""Single-profile mechanism evaluation.

Every runner takes a ValuationProfile and returns an ExpectedOutcome holding
per-agent expected allocation and expected payment, with randomness inside
the mechanism (tie coins, dictator draws, sample partitions) averaged out.
Batch Monte Carlo paths live in experiments.py on top of _kernels; the
runners here are the readable reference implementations the kernels are
tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import _kernels
from .distributions import Distribution, distribution_from_json
from .errors import ConstructionError, DomainError
from .ironing import Objective, iron
from .ironing import IronedVirtualFunction

__all__ = [
    "ValuationProfile",
    "ExpectedOutcome",
    "MechanismSpec",
    "objective_value",
    "run_lottery",
    "run_one_level_lottery",
    "run_two_level_lottery",
    "run_vickrey",
    "run_ratio_auction",
    "run_ironed_maximizer",
    "optimal_lottery_price",
    "run_rsol_partition",
    "rsol_exact",
    "worst_case_platform",
    "run_mixture",
    "run_mechanism",
    "monopoly_price_cdf",
    "sample_monopoly_prices",
    "expected_posting_revenue",
]


class ValuationProfile:
    """An ordered tuple of nonnegative agent valuations."""

    def __init__(self, values: Sequence[float]):
        vals = tuple(float(v) for v in values)
        if len(vals) == 0:
            raise ConstructionError("profile needs at least one agent")
        for v in vals:
            if not math.isfinite(v) or v < 0:
                raise ConstructionError(f"valuations must be finite and >= 0, got {v}")
        self.values = vals

    @property
    def n(self) -> int:
        return len(self.values)

    def sorted_desc(self) -> np.ndarray:
        return np.sort(np.asarray(self.values))[::-1].copy()

    def __repr__(self) -> str:
        return f"ValuationProfile({list(self.values)})"


@dataclass
class ExpectedOutcome:
    """Per-agent expected allocation and expected payment."""

    alloc: np.ndarray
    payment: np.ndarray

    def __post_init__(self):
        self.alloc = np.asarray(self.alloc, dtype=float)
        self.payment = np.asarray(self.payment, dtype=float)
        if self.alloc.shape != self.payment.shape:
            raise ConstructionError("alloc and payment must have equal length")

    def validate(self, profile: ValuationProfile, k: int, tol: float = 1e-12) -> None:
        """Check feasibility, voluntary participation, and no phantom payments."""
        if len(self.alloc) != profile.n:
            raise DomainError("outcome length does not match profile")
        v = np.asarray(profile.values)
        if np.any(self.alloc < -tol) or np.any(self.alloc > 1 + tol):
            raise DomainError("allocations must lie in [0, 1]")
        if self.alloc.sum() > k + tol:
            raise DomainError("total allocation exceeds supply")
        if np.any(self.payment > v * self.alloc + tol):
            raise DomainError("payment exceeds value times allocation")
        if np.any((self.alloc <= tol) & (np.abs(self.payment) > tol)):
            raise DomainError("agents with zero allocation must pay zero")


def objective_value(outcome: ExpectedOutcome, profile: ValuationProfile,
                    objective: Objective) -> float:
    if len(outcome.alloc) != profile.n:
        raise DomainError("outcome length does not match profile")
    v = np.asarray(profile.values)
    return float(objective.alpha * (v * outcome.alloc).sum()
                 + objective.beta * outcome.payment.sum())


def _check_k(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return int(k)


def run_lottery(profile: ValuationProfile, k: int) -> ExpectedOutcome:
    """Uniform k-unit lottery over all agents at price zero."""
    k = _check_k(k)
    n = profile.n
    a = min(1.0, k / n)
    return ExpectedOutcome(np.full(n, a), np.zeros(n))


def run_two_level_lottery(profile: ValuationProfile, k: int, p: float,
                          q: float) -> ExpectedOutcome:
    """Post price q to all, with demand above p rationed at the k-unit cap.

    Agents with value above p form the high group S, agents in (q, p] the
    middle group T. If everyone fits, all pay q. If S alone overfills, S gets
    a k-unit lottery at price p. Otherwise S wins outright at a discounted
    price and T splits the remaining supply at price q.
    """
    k = _check_k(k)
    if math.isnan(p) or math.isnan(q):
        raise DomainError("prices must not be NaN")
    if q < 0 or p < q:
        raise DomainError(f"need 0 <= q <= p, got p={p}, q={q}")
    v = np.asarray(profile.values)
    in_s = v > p
    in_t = (v > q) & ~in_s
    s = int(in_s.sum())
    t = int(in_t.sum())
    alloc = np.zeros(profile.n)
    pay = np.zeros(profile.n)
    if s > k:
        a = k / s
        alloc[in_s] = a
        pay[in_s] = p * a
    elif s + t <= k:
        alloc[in_s | in_t] = 1.0
        pay[in_s | in_t] = q
    else:
        pay_s = p - (p - q) * (k - s + 1) / (t + 1)
        a = (k - s) / t
        alloc[in_s] = 1.0
        pay[in_s] = pay_s
        alloc[in_t] = a
        pay[in_t] = q * a
    return ExpectedOutcome(alloc, pay)


def run_one_level_lottery(profile: ValuationProfile, k: int, p: float) -> ExpectedOutcome:
    """k-unit lottery at posted price p among agents with value above p."""
    return run_two_level_lottery(profile, k, p, p)


def run_vickrey(profile: ValuationProfile, k: int) -> ExpectedOutcome:
    """k-unit uniform-price auction: winners pay the (k+1)-th highest value."""
    k = _check_k(k)
    v = np.asarray(profile.values)
    desc = profile.sorted_desc()
    w = float(desc[k]) if profile.n > k else 0.0
    above = v > w
    at = v == w
    a = int(above.sum())
    m = int(at.sum())
    tie = min(1.0, (k - a) / m) if m else 0.0
    alloc = np.zeros(profile.n)
    pay = np.zeros(profile.n)
    alloc[above] = 1.0
    pay[above] = w
    alloc[at] = tie
    pay[at] = w * tie
    return ExpectedOutcome(alloc, pay)


def run_ratio_auction(profile: ValuationProfile, r: float = 2.0,
                      b: float = 0.75) -> ExpectedOutcome:
    """Two-agent mixture over weighted second-price rules.

    Agent 1's weight is fixed at 1 and agent 2's weight is drawn from
    {0, 1/r, r, inf} with probabilities {1-b, b-1/2, b-1/2, 1-b}. Weight 0
    hands the item to agent 1 for free and weight inf to agent 2; under a
    finite weight the larger weighted value wins and pays the losing
    weighted value divided by its own weight, with exact ties split evenly.
    Requires r > 1 and b in [1/2, 1].
    """
    if profile.n != 2:
        raise DomainError("ratio auction is defined for exactly two agents")
    if not (r > 1):
        raise DomainError(f"need r > 1, got {r}")
    if not (0.5 <= b <= 1):
        raise DomainError(f"need 1/2 <= b <= 1, got {b}")
    v1, v2 = profile.values
    alloc = np.zeros(2)
    pay = np.zeros(2)
    w_dict = 1.0 - b
    w_fin = b - 0.5
    alloc += w_dict  # each agent's dictator branch, free of charge
    for w2 in (1.0 / r, r):
        s1 = v1
        s2 = w2 * v2
        if s1 > s2:
            alloc[0] += w_fin
            pay[0] += w_fin * (s2 / 1.0)
        elif s1 < s2:
            alloc[1] += w_fin
            pay[1] += w_fin * (s1 / w2)
        else:
            alloc += 0.5 * w_fin
            pay[0] += 0.5 * w_fin * (s2 / 1.0)
            pay[1] += 0.5 * w_fin * (s1 / w2)
    return ExpectedOutcome(alloc, pay)


def run_ironed_maximizer(dist: Distribution, objective: Objective,
                         profile: ValuationProfile, k: int,
                         ironed: IronedVirtualFunction | None = None) -> ExpectedOutcome:
    """Pointwise maximizer of the ironed virtual objective, with threshold prices.

    Supply goes to the k agents with the highest nonnegative ironed virtual
    value, randomizing uniformly inside the tied class at the margin. Prices
    are the value thresholds that define the winning classes, so the outcome
    coincides with a two-level lottery at those prices.
    """
    k = _check_k(k)
    fn = ironed if ironed is not None else iron(dist, objective)
    v = np.asarray(profile.values)
    lo, hi = dist.support
    if np.any(v < lo) or np.any(v > hi):
        raise DomainError("profile values must lie inside the distribution support")
    phi = np.array([fn.slope_at(dist.cdf(x)) for x in v])
    alloc = np.zeros(profile.n)
    pay = np.zeros(profile.n)
    order = np.sort(phi)[::-1]
    lam = order[k] if profile.n > k else -math.inf
    if lam >= 0:
        in_s = phi > lam
        in_t = phi == lam
        s = int(in_s.sum())
        t = int(in_t.sum())
        p = fn.threshold_above(lam)
        q = fn.threshold_at_least(lam)
        pay_s = p - (p - q) * (k - s + 1) / (t + 1)
        a = (k - s) / t
        alloc[in_s] = 1.0
        pay[in_s] = pay_s
        alloc[in_t] = a
        pay[in_t] = q * a
    else:
        q0 = fn.threshold_at_least(0.0)
        win = phi >= 0
        alloc[win] = 1.0
        pay[win] = q0
    return ExpectedOutcome(alloc, pay)


def optimal_lottery_price(values: Sequence[float], k: int) -> tuple[float, float]:
    """Price maximizing total value net of price, summed over served agents.

    A one-level k-unit lottery at price p serves agents with value above p,
    each with probability min(1, k/s). Returns (price, value); ties prefer
    the smallest price, and the empty input gets (0.0, 0.0).
    """
    k = _check_k(k)
    sv = np.sort(np.asarray(values, dtype=float))[::-1].copy()
    p, val = _kernels.opt_lottery_price_desc(sv, len(sv), k)
    return float(p), float(val)


def run_rsol_partition(profile: ValuationProfile, k: int,
                       in_sample: Sequence[bool]) -> ExpectedOutcome:
    """One partition step: price the market by the sample's optimal lottery.

    Sample agents are spectators (no allocation, no payment); market agents
    with value above the sample-optimal price share up to k units.
    """
    k = _check_k(k)
    flags = np.asarray(in_sample, dtype=bool)
    if flags.shape != (profile.n,):
        raise DomainError("partition flags must match the profile length")
    v = np.asarray(profile.values)
    p, _ = optimal_lottery_price(v[flags], k) if flags.any() else (0.0, 0.0)
    alloc = np.zeros(profile.n)
    pay = np.zeros(profile.n)
    market = ~flags & (v > p)
    s = int(market.sum())
    if s:
        a = min(1.0, k / s)
        alloc[market] = a
        pay[market] = p * a
    return ExpectedOutcome(alloc, pay)


def rsol_exact(profile: ValuationProfile, k: int) -> ExpectedOutcome:
    """Average over all 2^n sample/market partitions; exact for n <= 20."""
    k = _check_k(k)
    if profile.n > 20:
        raise DomainError("exact partition enumeration is limited to n <= 20")
    alloc, pay = _kernels.rsol_exact_outcome(np.asarray(profile.values), k)
    return ExpectedOutcome(alloc, pay)


# ---------------------------------------------------------------------------
# mechanism specs and dispatch
# ---------------------------------------------------------------------------

@dataclass
class MechanismSpec:
    """Serializable description of a mechanism, runnable via run_mechanism."""

    type: str
    params: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": self.type}
        for key, val in self.params.items():
            if key == "components":
                out[key] = [{"weight": w, "mechanism": spec.to_json()} for w, spec in val]
            elif key == "distribution":
                out[key] = val.to_json()
            elif key == "objective":
                out[key] = {"alpha": val.alpha, "beta": val.beta}
            else:
                out[key] = val
        return out

    @staticmethod
    def from_json(data: dict[str, Any]) -> "MechanismSpec":
        data = dict(data)
        mtype = data.pop("type", None)
        if mtype is None:
            raise ConstructionError("mechanism json needs a 'type' field")
        params: dict[str, Any] = {}
        for key, val in data.items():
            if key == "components":
                params[key] = [(float(c["weight"]), MechanismSpec.from_json(c["mechanism"]))
                               for c in val]
            elif key == "distribution":
                params[key] = distribution_from_json(val)
            elif key == "objective":
                params[key] = Objective(float(val["alpha"]), float(val["beta"]))
            else:
                params[key] = val
        return MechanismSpec(mtype, params)


def worst_case_platform(k: int) -> MechanismSpec:
    """Mixture with a 1/108 second-price escape hatch next to partition pricing."""
    k = _check_k(k)
    return MechanismSpec("mixture", {"components": [
        (107.0 / 108.0, MechanismSpec("rsol", {"k": k})),
        (1.0 / 108.0, MechanismSpec("vickrey", {"k": k})),
    ]})


def run_mixture(profile: ValuationProfile,
                components: Sequence[tuple[float, MechanismSpec]]) -> ExpectedOutcome:
    if not components:
        raise DomainError("mixture needs at least one component")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError("mixture weights must be nonnegative and sum to 1")
    alloc = np.zeros(profile.n)
    pay = np.zeros(profile.n)
    for w, spec in components:
        sub = run_mechanism(spec, profile)
        alloc += w * sub.alloc
        pay += w * sub.payment
    return ExpectedOutcome(alloc, pay)


def run_mechanism(spec: MechanismSpec, profile: ValuationProfile) -> ExpectedOutcome:
    p = spec.params
    if spec.type == "lottery":
        return run_lottery(profile, p["k"])
    if spec.type == "one_level_lottery":
        return run_one_level_lottery(profile, p["k"], p["p"])
    if spec.type == "two_level_lottery":
        return run_two_level_lottery(profile, p["k"], p["p"], p["q"])
    if spec.type == "vickrey":
        return run_vickrey(profile, p["k"])
    if spec.type == "ratio_auction":
        return run_ratio_auction(profile, p.get("r", 2.0), p.get("b", 0.75))
    if spec.type == "ironed_maximizer":
        return run_ironed_maximizer(p["distribution"], p["objective"], profile, p["k"])
    if spec.type == "rsol":
        return rsol_exact(profile, p["k"])
    if spec.type == "mixture":
        return run_mixture(profile, p["components"])
    raise DomainError(f"unknown mechanism type {spec.type!r}")


# ---------------------------------------------------------------------------
# random price posting for the unit-revenue family
# ---------------------------------------------------------------------------

def monopoly_price_cdf(z: float, h: float) -> float:
    """CDF of the price distribution with an atom of 1/(1+ln h) at price 1."""
    if not (h > 1):
        raise DomainError(f"need h > 1, got {h}")
    if z < 1:
        return 0.0
    if z >= h:
        return 1.0
    return (1.0 + math.log(z)) / (1.0 + math.log(h))


def sample_monopoly_prices(h: float, rng: np.random.Generator,
                           size: int) -> np.ndarray:
    """Inverse-transform sampling of the posted-price distribution on [1, h]."""
    if not (h > 1):
        raise DomainError(f"need h > 1, got {h}")
    u = rng.random(size)
    c = 1.0 + math.log(h)
    return np.where(u <= 1.0 / c, 1.0, np.exp(u * c - 1.0))


def expected_posting_revenue(v: float, h: float) -> float:
    """Expected revenue from posting a random price to one agent of value v.

    The agent buys whenever the price is at most v, so the revenue is
    E[price * 1{price <= v}] = v / (1 + ln h) for v in [1, h].
    """
    if not (h > 1):
        raise DomainError(f"need h > 1, got {h}")
    if v < 1 or v > h:
        raise DomainError(f"value must lie in [1, {h}], got {v}")
    return v / (1.0 + math.log(h))
