"""Virtual valuations for linear objectives and their ironed (monotone) form.

The ironing pipeline: map the virtual value to quantile space, integrate it,
take the lower convex hull of the integral, and read the hull's derivative
back as a non-decreasing step/slope function of the quantile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, MixedDistribution
from .errors import DomainError


@dataclass(frozen=True)
class Objective:
    """Linear objective alpha * value_served + beta * payments."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha == 0 and self.beta == 0:
            raise DomainError("objective (0, 0) is degenerate")

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


RESIDUAL_SURPLUS = Objective(1.0, -1.0)
PROFIT = Objective(0.0, 1.0)
SURPLUS = Objective(1.0, 0.0)


def virtual_value(dist: Distribution, obj: Objective, v: float) -> float:
    """(alpha+beta)*v - beta*(1-F(v))/f(v) at a continuity point v."""
    lo, hi = dist.support
    if v < lo or v > hi:
        raise DomainError(f"value {v} outside support [{lo}, {hi}]")
    if any(a.value == v for a in dist.atoms):
        raise DomainError(f"virtual value undefined at the atom {v}")
    f = dist.pdf(v)
    if f <= 0:
        raise DomainError(f"density vanishes at {v}")
    return (obj.alpha + obj.beta) * v - obj.beta * (1.0 - dist.cdf(v)) / f


@dataclass(frozen=True)
class IronedVirtualFunction:
    """Derivative of the hulled quantile-space integral of the virtual value.

    slopes[j] is the function's value on the quantile interval
    (breakpoints[j], breakpoints[j+1]]; evaluation at a value v uses the
    source distribution's cdf. Slopes are non-decreasing by construction.
    """

    breakpoints: tuple[float, ...]   # 0 = b_0 < ... < b_m = 1
    slopes: tuple[float, ...]        # length m
    dist: Distribution

    def __call__(self, v):
        return ironed_value(self, v)

    def slope_at(self, q):
        """Right-continuous slope lookup in quantile space."""
        q = np.asarray(q, dtype=float)
        bp = np.asarray(self.breakpoints)
        idx = np.clip(np.searchsorted(bp, q, side="left") - 1, 0, len(self.slopes) - 1)
        out = np.asarray(self.slopes, dtype=float)[idx]
        return out if out.ndim else float(out)

    def threshold_at_least(self, level: float) -> float:
        """inf{v : ironed value >= level}; +inf if never reached."""
        j = int(np.searchsorted(self.slopes, level, side="left"))
        if j == len(self.slopes):
            return np.inf
        return float(self.dist.quantile(self.breakpoints[j]))

    def threshold_above(self, level: float) -> float:
        """inf{v : ironed value > level}; +inf if never exceeded."""
        j = int(np.searchsorted(self.slopes, level, side="right"))
        if j == len(self.slopes):
            return np.inf
        return float(self.dist.quantile(self.breakpoints[j]))

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "slopes": list(self.slopes)}


def lower_convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Lower convex hull of points with strictly increasing x.

    Keeps the first and last point; drops interior collinear points
    (canonical minimal output). Monotone-chain scan.
    """
    if len(points) < 2:
        raise DomainError("need at least 2 points")
    hull: list[tuple[float, float]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _h_of_q(dist: Distribution, obj: Objective, q):
    """Virtual value composed with the quantile function, vectorized."""
    v = dist.quantile(q)
    f = dist.pdf(v)
    if np.any(f <= 0):
        raise DomainError("density vanishes inside the support")
    return (obj.alpha + obj.beta) * v - obj.beta * (1.0 - q) / f


def iron(dist: Distribution, obj: Objective, grid_size: int = 2 ** 14) -> IronedVirtualFunction:
    """Ironed virtual value function of dist under obj.

    Piecewise-exponential distributions with a pure-payment-reversal
    objective (alpha + beta = 0, beta < 0) iron exactly: there the virtual
    value is constant per piece, so the quantile integral is piecewise linear
    with known breakpoints and the hull introduces no discretization error.
    Everything else goes through a uniform quantile grid (midpoint rule)
    before hulling.
    """
    if dist.atoms:
        raise DomainError("ironing requires an atomless distribution")

    exact = (isinstance(dist, MixedDistribution)
             and obj.alpha + obj.beta == 0 and obj.beta < 0)
    if exact:
        starts = np.array([s for s, _ in dist.pieces])
        rates = np.array([r for _, r in dist.pieces])
        qs = np.concatenate([dist.cdf(starts), [1.0]])
        heights = -obj.beta / rates                  # virtual value per piece
        hs = np.concatenate([[0.0], np.cumsum(heights * np.diff(qs))])
    else:
        g = int(grid_size)
        if g < 2:
            raise DomainError("grid_size must be at least 2")
        mids = (np.arange(g) + 0.5) / g
        h = _h_of_q(dist, obj, mids)
        qs = np.arange(g + 1) / g
        hs = np.concatenate([[0.0], np.cumsum(h) / g])

    hull = lower_convex_hull(list(zip(qs.tolist(), hs.tolist())))
    bp = tuple(x for x, _ in hull)
    ys = [y for _, y in hull]
    slopes = tuple((ys[i + 1] - ys[i]) / (bp[i + 1] - bp[i]) for i in range(len(bp) - 1))
    return IronedVirtualFunction(bp, slopes, dist)


def ironed_value(fn: IronedVirtualFunction, v):
    """g(F(v)): the ironed virtual value at a value point; monotone in v."""
    return fn.slope_at(fn.dist.cdf(v))
