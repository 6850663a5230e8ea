"""Model primitives: parameters, complexity beliefs and ability posteriors.

Ability is uniform on [0, 1]. A test outcome turns that prior into a
piecewise-uniform posterior, stored as a tuple of :class:`Segment` pieces so
that every downstream kernel can be written segment by segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .numerics import DomainError


class ModelError(ValueError):
    """Invalid model configuration (mapped to CLI exit code 2)."""


class PointMassDensityError(ModelError):
    """A point-mass belief was asked for a density."""


class EmptyBranchError(ModelError):
    """The requested test outcome has probability zero."""


@dataclass(frozen=True)
class Primitives:
    """Benchmark parameters: payoff ``V``, cost exponent ``gamma``, rate ``lam``."""

    V: float
    gamma: float
    lam: float

    def __post_init__(self):
        if not (self.V >= 0 and math.isfinite(self.V)):
            raise ModelError(f"V must be a nonnegative real, got {self.V}")
        if not self.gamma > 1:
            raise ModelError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ModelError(f"lambda must be positive, got {self.lam}")

    def cost(self, e):
        return np.power(e, self.gamma)

    def marginal_cost(self, e):
        return self.gamma * np.power(e, self.gamma - 1.0)


# V = 0 is allowed: it is the degenerate "no benefit" case used throughout the
# tests, where every effort and threshold collapses to zero.


class Technology(Enum):
    MULTIPLICATIVE = "mult"
    ADDITIVE = "add"

    def cutoff(self, T: float, e: float) -> float:
        """Lowest ability that succeeds at complexity ``T`` with effort ``e``."""
        if self is Technology.ADDITIVE:
            return T - e
        if T <= 0:
            return 0.0
        return T / e if e > 0 else math.inf


@dataclass(frozen=True)
class TestNoise:
    """Constant misclassification rates: false fail ``eta_minus``, false pass ``eta_plus``."""

    __test__ = False  # keep pytest from collecting it

    eta_minus: float = 0.0
    eta_plus: float = 0.0

    def __post_init__(self):
        for name in ("eta_minus", "eta_plus"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ModelError(f"{name} must lie in [0, 1), got {v}")

    @property
    def noiseless(self) -> bool:
        return self.eta_minus == 0.0 and self.eta_plus == 0.0


NOISELESS = TestNoise()


@dataclass(frozen=True)
class PostingCost:
    """Cost of posting a threshold: ``none``, ``linear`` (slope) or ``power`` (coef, exponent)."""

    kind: str = "none"
    coef: float = 0.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "linear", "power"):
            raise ModelError(f"unknown posting cost kind {self.kind!r}")
        if self.coef < 0:
            raise ModelError("posting cost coefficient must be nonnegative")
        if self.kind == "power" and self.exponent < 1:
            raise ModelError("posting cost exponent must be >= 1")

    def __call__(self, theta_star: float) -> float:
        if self.kind == "none" or theta_star <= 0:
            return 0.0
        if self.kind == "linear":
            return self.coef * theta_star
        return self.coef * theta_star ** self.exponent

    @classmethod
    def parse(cls, text: str) -> "PostingCost":
        """Parse ``none``, ``linear:0.1`` or ``power:2,1.5``."""
        kind, _, params = text.partition(":")
        kind = kind.strip().lower()
        vals = [float(p) for p in params.split(",") if p.strip()]
        if kind == "none":
            return cls()
        if kind == "linear" and len(vals) == 1:
            return cls("linear", vals[0])
        if kind == "power" and len(vals) == 2:
            return cls("power", vals[0], vals[1])
        raise ModelError(f"cannot parse posting cost {text!r}")


NO_POSTING_COST = PostingCost()


# --- beliefs over complexity -------------------------------------------------


@dataclass(frozen=True)
class Prior:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError("prior rate must be positive")


@dataclass(frozen=True)
class PointMass:
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ModelError("point mass location must be nonnegative")


@dataclass(frozen=True)
class TruncExp:
    """Exponential(lam) restricted to [a, b]; ``b`` may be ``inf``."""

    lam: float
    a: float
    b: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError("truncated exponential rate must be positive")
        if not (0 <= self.a < self.b):
            raise ModelError(f"truncation needs 0 <= a < b, got [{self.a}, {self.b}]")

    @property
    def mass(self) -> float:
        """Prior probability of [a, b], computed without cancellation."""
        lam, a, b = self.lam, self.a, self.b
        if math.isinf(b):
            return math.exp(-lam * a)
        return math.exp(-lam * a) * -math.expm1(-lam * (b - a))


ComplexityBelief = Union[Prior, PointMass, TruncExp]


def belief_density(belief: ComplexityBelief, x: float) -> float:
    if isinstance(belief, PointMass):
        raise PointMassDensityError("a point-mass belief has no density")
    if x < 0:
        return 0.0
    if isinstance(belief, Prior):
        return belief.lam * math.exp(-belief.lam * x)
    if x < belief.a or x > belief.b:
        return 0.0
    return belief.lam * math.exp(-belief.lam * x) / belief.mass


def belief_cdf(belief: ComplexityBelief, x: float) -> float:
    if x < 0:
        return 0.0
    if isinstance(belief, PointMass):
        return 1.0 if x >= belief.t else 0.0
    if isinstance(belief, Prior):
        return -math.expm1(-belief.lam * x)
    if x <= belief.a:
        return 0.0
    if x >= belief.b:
        return 1.0
    lam, a = belief.lam, belief.a
    return math.exp(-lam * a) * -math.expm1(-lam * (x - a)) / belief.mass


def belief_support(belief: ComplexityBelief) -> tuple[float, float]:
    if isinstance(belief, Prior):
        return 0.0, math.inf
    if isinstance(belief, PointMass):
        return belief.t, belief.t
    return belief.a, belief.b


def belief_mean(belief: ComplexityBelief) -> float:
    if isinstance(belief, Prior):
        return 1.0 / belief.lam
    if isinstance(belief, PointMass):
        return belief.t
    lam, a, b = belief.lam, belief.a, belief.b
    if math.isinf(b):
        return a + 1.0 / lam
    w = b - a
    # mean of Exp(lam) truncated to [0, w], shifted by a
    return a + 1.0 / lam - w / math.expm1(lam * w)


# --- ability posteriors ------------------------------------------------------


class Branch(Enum):
    PASS = "pass"
    FAIL = "fail"


@dataclass(frozen=True)
class Segment:
    """Ability posterior mass ``mass`` spread uniformly on [lo, hi] (lo == hi is an atom)."""

    lo: float
    hi: float
    mass: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def upper_mass(self, c: float) -> float:
        """Posterior mass of this piece on {theta >= c}."""
        if self.width == 0.0:
            return self.mass if self.lo >= c else 0.0
        if c <= self.lo:
            return self.mass
        if c >= self.hi:
            return 0.0
        return self.mass * (self.hi - c) / self.width


@dataclass(frozen=True)
class AbilityBranch:
    branch: Branch
    theta_star: float
    noise: TestNoise = NOISELESS

    def __post_init__(self):
        if not 0.0 <= self.theta_star <= 1.0:
            raise ModelError(f"theta_star must lie in [0, 1], got {self.theta_star}")


def branch_mass_pieces(ab: AbilityBranch) -> tuple[tuple[float, float, float], ...]:
    """Unnormalized ``(lo, hi, joint mass)`` pieces of {outcome} x {theta}."""
    ts, n = ab.theta_star, ab.noise
    if ab.branch is Branch.PASS:
        below, above = n.eta_plus * ts, (1.0 - n.eta_minus) * (1.0 - ts)
    else:
        below, above = (1.0 - n.eta_plus) * ts, n.eta_minus * (1.0 - ts)
    pieces = []
    if ts > 0 and below > 0:
        pieces.append((0.0, ts, below))
    if ts < 1 and above > 0:
        pieces.append((ts, 1.0, above))
    return tuple(pieces)


def branch_weight(ab: AbilityBranch) -> float:
    return sum(m for _, _, m in branch_mass_pieces(ab))


def branch_segments(ab: AbilityBranch) -> tuple[Segment, ...]:
    """Normalized posterior pieces; degenerate branches use their limit posteriors.

    With zero weight the pass branch at theta* = 1 becomes an atom at 1 and the
    fail branch at theta* = 0 an atom at 0 (limits of the truncations).
    """
    pieces = branch_mass_pieces(ab)
    w = sum(m for _, _, m in pieces)
    if w > 0:
        return tuple(Segment(lo, hi, m / w) for lo, hi, m in pieces)
    atom = 1.0 if ab.branch is Branch.PASS else 0.0
    return (Segment(atom, atom, 1.0),)


def branch_weight_and_density(ab: AbilityBranch) -> tuple[float, Callable[[float], float]]:
    """Outcome probability and the Bayes posterior density of ability on [0, 1]."""
    w = branch_weight(ab)
    if w <= 0:
        raise EmptyBranchError(
            f"{ab.branch.value} branch is empty at theta*={ab.theta_star} with {ab.noise}"
        )
    segs = branch_segments(ab)

    def density(theta: float) -> float:
        if theta < 0 or theta > 1:
            return 0.0
        out = 0.0
        for s in segs:
            if s.lo <= theta <= s.hi and (theta < s.hi or s.hi == 1.0):
                out += s.mass / s.width
        return out

    return w, density


def branch_cdf(ab: AbilityBranch, theta: float) -> float:
    """Posterior CDF of ability given the branch outcome."""
    return 1.0 - sum(s.upper_mass(theta) for s in branch_segments(ab)) if theta > 0 else 0.0


def validate_theta_star(theta_star: float) -> float:
    if not (0.0 <= theta_star <= 1.0):
        raise DomainError(f"theta_star must lie in [0, 1], got {theta_star}")
    return float(theta_star)
