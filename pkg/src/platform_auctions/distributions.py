"""One-dimensional valuation distributions.

All distributions share one interface (cdf/pdf/quantile/sample, support,
atoms). `MixedDistribution` is the piecewise-exponential family used by the
ironing machinery and the lower-bound constructions; the standard closed-form
families (uniform, power law, equal revenue, point mass) are separate classes
behind the same interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstructionError

_INF = math.inf


@dataclass(frozen=True)
class Atom:
    value: float
    mass: float


class Distribution:
    """Interface: cdf/pdf/quantile are vectorized over numpy arrays."""

    #: (support minimum, support maximum); maximum may be +inf
    support: tuple[float, float] = (0.0, _INF)
    #: point masses, at most one, located at the support maximum
    atoms: tuple[Atom, ...] = ()

    def cdf(self, v):
        raise NotImplementedError

    def pdf(self, v):
        raise NotImplementedError

    def quantile(self, q):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-transform sampling from a caller-supplied generator."""
        return self.quantile(rng.random(size))

    def to_json(self) -> dict:
        raise NotImplementedError


def eval_cdf(dist: Distribution, v):
    """F(v), right-continuous, atom mass at points <= v included."""
    return dist.cdf(v)


def eval_quantile(dist: Distribution, q):
    """inf{v : F(v) >= q}; inverse of eval_cdf at continuity points."""
    return dist.quantile(q)


def sample(dist: Distribution, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)


class MixedDistribution(Distribution):
    """Piecewise-exponential distribution with an optional truncation atom.

    On piece j, which starts at value t_j, the survival function decays as
    S(t_j + z) = S(t_j) * exp(-rate_j * z). An atom is allowed only at the
    (finite) upper support and must carry exactly the survival mass left
    there, which models a truncated tail.

    Args:
        pieces: ordered (start_value, rate) pairs; starts strictly increasing,
            rates positive; the first start is the support minimum.
        atoms: at most one (value, mass) pair at the truncation point.
        upper_support: +inf, or the truncation point when an atom is present.
    """

    def __init__(self, pieces: Sequence[tuple[float, float]],
                 atoms: Sequence[tuple[float, float]] = (),
                 upper_support: float = _INF):
        if not pieces:
            raise ConstructionError("at least one exponential piece required")
        starts = np.asarray([p[0] for p in pieces], dtype=float)
        rates = np.asarray([p[1] for p in pieces], dtype=float)
        if starts[0] < 0 or np.any(np.diff(starts) <= 0):
            raise ConstructionError("piece starts must be >= 0 and strictly increasing")
        if np.any(rates <= 0) or not np.all(np.isfinite(rates)):
            raise ConstructionError("piece rates must be positive and finite")
        # log-survival at each piece start; exact recursion, no cdf tables
        gaps = np.diff(starts)
        log_s = np.concatenate([[0.0], np.cumsum(-rates[:-1] * gaps)])
        self.pieces = tuple((float(s), float(r)) for s, r in pieces)
        self._starts = starts
        self._rates = rates
        self._log_s = log_s

        if atoms:
            if len(atoms) > 1:
                raise ConstructionError("at most one atom (at the truncation point)")
            value, mass = float(atoms[0][0]), float(atoms[0][1])
            if not 0 < mass <= 1:
                raise ConstructionError("atom mass must lie in (0, 1]")
            if value <= starts[-1]:
                raise ConstructionError("atom must lie beyond the last piece start")
            if upper_support != value:
                raise ConstructionError("atom must sit at upper_support")
            tail = self._survival_continuous(value)
            if abs(tail - mass) > 1e-9:
                raise ConstructionError(
                    f"atom mass {mass} does not match residual survival {tail}")
            self.atoms = (Atom(value, tail),)
            self.upper_support = value
        else:
            if upper_support != _INF:
                raise ConstructionError("finite upper_support requires a truncation atom")
            self.atoms = ()
            self.upper_support = _INF
        self.support = (float(starts[0]), self.upper_support)

    def _piece_index(self, v):
        return np.clip(np.searchsorted(self._starts, v, side="right") - 1,
                       0, len(self._starts) - 1)

    def _survival_continuous(self, v):
        v = np.asarray(v, dtype=float)
        j = self._piece_index(v)
        s = np.exp(self._log_s[j] - self._rates[j] * (v - self._starts[j]))
        return np.where(v < self._starts[0], 1.0, s)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        f = 1.0 - self._survival_continuous(v)
        if self.atoms:
            f = np.where(v >= self.atoms[0].value, 1.0, f)
        out = np.clip(f, 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf(self, v):
        """Density of the continuous part (atoms excluded)."""
        v = np.asarray(v, dtype=float)
        j = self._piece_index(v)
        d = self._rates[j] * self._survival_continuous(v)
        d = np.where(v < self._starts[0], 0.0, d)
        if self.atoms:
            d = np.where(v >= self.atoms[0].value, 0.0, d)
        return d if d.ndim else float(d)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        target = 1.0 - q        # survival level to hit
        # piece whose start-survival is the last one >= target
        log_t = np.log(np.maximum(target, 1e-300))
        j = np.clip(len(self._log_s) - np.searchsorted(self._log_s[::-1], log_t,
                                                       side="left") - 1,
                    0, len(self._starts) - 1)
        v = self._starts[j] + (self._log_s[j] - log_t) / self._rates[j]
        v = np.where(q <= 0, self._starts[0], v)
        if self.atoms:
            cont_mass = 1.0 - self.atoms[0].mass
            v = np.where(q > cont_mass, self.atoms[0].value, v)
        else:
            v = np.where(q >= 1, _INF, v)
        return v if v.ndim else float(v)

    def to_json(self) -> dict:
        return {
            "pieces": [{"start": s, "rate": r} for s, r in self.pieces],
            "atoms": [{"value": a.value, "mass": a.mass} for a in self.atoms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MixedDistribution":
        pieces = [(p["start"], p["rate"]) for p in data["pieces"]]
        atoms = [(a["value"], a["mass"]) for a in data.get("atoms", [])]
        upper = atoms[0][0] if atoms else _INF
        return cls(pieces, atoms, upper)


@dataclass(frozen=True)
class PiecewiseConstantFn:
    """Non-negative step function on [0, inf).

    levels[j] holds on [breakpoints[j], breakpoints[j+1]); the last interval
    is unbounded. breakpoints[0] must be 0.
    """

    breakpoints: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if len(bp) != len(lv) or len(bp) == 0:
            raise ConstructionError("need one level per breakpoint interval")
        if bp[0] != 0 or np.any(np.diff(bp) <= 0):
            raise ConstructionError("breakpoints must start at 0 and strictly increase")
        if np.any(lv < 0):
            raise ConstructionError("levels must be non-negative")

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        j = np.clip(np.searchsorted(self.breakpoints, v, side="right") - 1,
                    0, len(self.levels) - 1)
        out = np.asarray(self.levels, dtype=float)[j]
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"pieces": [{"start": b, "level": l}
                           for b, l in zip(self.breakpoints, self.levels)]}

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseConstantFn":
        return cls(tuple(p["start"] for p in data["pieces"]),
                   tuple(p["level"] for p in data["pieces"]))


def build_from_virtual_values(f: PiecewiseConstantFn) -> MixedDistribution:
    """Distribution whose hazard-reciprocal (1-F)/f equals the given step function.

    On each interval the survival must decay with rate 1/level, so the result
    is piecewise exponential with the step function's breakpoints.
    """
    if any(l <= 0 for l in f.levels):
        raise ConstructionError("levels must be strictly positive to invert")
    return MixedDistribution([(b, 1.0 / l) for b, l in zip(f.breakpoints, f.levels)])


def lb_family(beta: int) -> list[MixedDistribution]:
    """Family of beta distributions with one high-virtual-value window each.

    Member j has (1-F)/f equal to beta on [j*beta, (j+1)*beta) and 1 elsewhere.
    """
    if beta < 2:
        raise ConstructionError("beta must be an integer >= 2")
    fam = []
    for j in range(beta):
        lo, hi = float(j * beta), float(j * beta + beta)
        if j == 0:
            fn = PiecewiseConstantFn((0.0, hi), (float(beta), 1.0))
        else:
            fn = PiecewiseConstantFn((0.0, lo, hi), (1.0, float(beta), 1.0))
        fam.append(build_from_virtual_values(fn))
    return fam


class Uniform(Distribution):
    def __init__(self, lo: float, hi: float):
        if not lo < hi:
            raise ConstructionError("need lo < hi")
        if lo < 0:
            raise ConstructionError("support must be non-negative")
        self.lo, self.hi = float(lo), float(hi)
        self.support = (self.lo, self.hi)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.clip((v - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where((v >= self.lo) & (v <= self.hi), 1.0 / (self.hi - self.lo), 0.0)
        return out if out.ndim else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        out = self.lo + q * (self.hi - self.lo)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"type": "uniform", "lo": self.lo, "hi": self.hi}


class PowerLaw(Distribution):
    """F(z) = 1 - (lo/z)^c on [lo, inf)."""

    def __init__(self, c: float, lo: float = 1.0):
        if c <= 0 or lo <= 0:
            raise ConstructionError("need c > 0 and lo > 0")
        self.c, self.lo = float(c), float(lo)
        self.support = (self.lo, _INF)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where(v <= self.lo, 0.0, 1.0 - (self.lo / np.maximum(v, self.lo)) ** self.c)
        return out if out.ndim else float(out)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where(v < self.lo, 0.0,
                       self.c * self.lo ** self.c / np.maximum(v, self.lo) ** (self.c + 1))
        return out if out.ndim else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        out = self.lo * (1.0 - q) ** (-1.0 / self.c)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"type": "power_law", "c": self.c, "lo": self.lo}


class EqualRevenue(Distribution):
    """F(z) = 1 - 1/z on [1, h) with the residual mass 1/h as an atom at h.

    Every posted price in [1, h] earns expected revenue exactly 1.
    """

    def __init__(self, h: float):
        if h <= 1:
            raise ConstructionError("need h > 1")
        self.h = float(h)
        self.support = (1.0, self.h)
        self.atoms = (Atom(self.h, 1.0 / self.h),)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where(v < 1.0, 0.0, np.where(v >= self.h, 1.0, 1.0 - 1.0 / np.maximum(v, 1.0)))
        return out if out.ndim else float(out)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where((v < 1.0) | (v >= self.h), 0.0, 1.0 / np.maximum(v, 1.0) ** 2)
        return out if out.ndim else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        cont = 1.0 - 1.0 / self.h
        out = np.where(q > cont, self.h, 1.0 / np.maximum(1.0 - q, 1.0 / self.h))
        out = np.where(q <= 0, 1.0, out)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"type": "equal_revenue", "h": self.h}


class PointMass(Distribution):
    def __init__(self, value: float):
        if value < 0:
            raise ConstructionError("need value >= 0")
        self.value = float(value)
        self.support = (self.value, self.value)
        self.atoms = (Atom(self.value, 1.0),)

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.where(v >= self.value, 1.0, 0.0)
        return out if out.ndim else float(out)

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        return out if out.ndim else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        out = np.full_like(q, self.value)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"type": "point_mass", "value": self.value}


def exponential(mean: float = 1.0) -> MixedDistribution:
    if mean <= 0:
        raise ConstructionError("need mean > 0")
    return MixedDistribution([(0.0, 1.0 / mean)])


def piecewise_exponential(pieces: Sequence[tuple[float, float]],
                          atoms: Sequence[tuple[float, float]] = (),
                          upper_support: float = _INF) -> MixedDistribution:
    return MixedDistribution(pieces, atoms, upper_support)


def uniform(lo: float, hi: float) -> Uniform:
    return Uniform(lo, hi)


def power_law(c: float, lo: float = 1.0) -> PowerLaw:
    return PowerLaw(c, lo)


def equal_revenue(h: float) -> EqualRevenue:
    return EqualRevenue(h)


def point_mass(value: float) -> PointMass:
    return PointMass(value)


def distribution_from_json(data: dict) -> Distribution:
    """Build any distribution from its JSON form.

    A bare {"pieces": ..., "atoms": ...} object (no "type" tag) is read as a
    MixedDistribution.
    """
    kind = data.get("type", "piecewise_exponential")
    if kind == "piecewise_exponential":
        return MixedDistribution.from_json(data)
    if kind == "exponential":
        return exponential(data["mean"])
    if kind == "uniform":
        return Uniform(data["lo"], data["hi"])
    if kind == "power_law":
        return PowerLaw(data["c"], data.get("lo", 1.0))
    if kind == "equal_revenue":
        return EqualRevenue(data["h"])
    if kind == "point_mass":
        return PointMass(data["value"])
    raise ConstructionError(f"unknown distribution type {kind!r}")
