"""The advisor's problem: value of a threshold, optimal policies, taxonomy.

A *regime* maps (T, theta*) to the complexity belief the agent holds when
choosing effort:

* :class:`Naive` - the prior, whatever is posted;
* :class:`Separating` - a point mass at the true T (the agent inverts a
  separating policy);
* :class:`Pooled` - the prior truncated to a stated block [a, b];
* :class:`CurveBeliefs` - beliefs obtained by inverting a sampled policy.

With uniform ability, posting theta* = 1 sends everyone to the fail branch,
so it doubles as the "always fail" limit of unbounded thresholds; it is
payoff-equivalent to theta* = 0 (neither outcome carries information).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .effort import EffortPair, effort_pair
from .model import (
    AbilityBranch,
    Branch,
    ComplexityBelief,
    NO_POSTING_COST,
    NOISELESS,
    PointMass,
    PostingCost,
    Primitives,
    Prior,
    Technology,
    TestNoise,
    TruncExp,
    branch_mass_pieces,
    validate_theta_star,
)
from .numerics import DEFAULT_TOL, Tolerance, maximize_1d

MULT = Technology.MULTIPLICATIVE
NEAR_TIE = 1e-9


# --- regimes -----------------------------------------------------------------


@dataclass(frozen=True)
class Naive:
    """Agent ignores the threshold; ``prior`` overrides Exp(lambda) if given."""

    prior: Optional[ComplexityBelief] = None

    def belief(self, T: float, theta_star: float, prim: Primitives) -> ComplexityBelief:
        return self.prior if self.prior is not None else Prior(prim.lam)


@dataclass(frozen=True)
class Separating:
    def belief(self, T, theta_star, prim):
        return PointMass(T)


@dataclass(frozen=True)
class Pooled:
    a: float
    b: float

    def belief(self, T, theta_star, prim):
        return TruncExp(prim.lam, self.a, self.b)


# --- results -----------------------------------------------------------------


@dataclass(frozen=True)
class ObjectiveBreakdown:
    success_prob: float
    effort_cost: float
    posting_cost: float
    total: float
    e_pass: float = 0.0
    e_fail: float = 0.0


@dataclass
class PolicyCurve:
    T_grid: np.ndarray
    theta_values: np.ndarray
    values: np.ndarray
    near_ties: list = field(default_factory=list)

    def __post_init__(self):
        self.T_grid = np.asarray(self.T_grid, dtype=float)
        self.theta_values = np.asarray(self.theta_values, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not (len(self.T_grid) == len(self.theta_values) == len(self.values)):
            raise ValueError("policy curve arrays must have equal lengths")

    def __call__(self, T):
        """Step interpolation: the threshold of the last grid point <= T."""
        idx = np.searchsorted(self.T_grid, T, side="right") - 1
        return self.theta_values[np.clip(idx, 0, len(self.T_grid) - 1)]


class PolicyClass(Enum):
    SEPARATING = "separating"
    POOLING = "pooling"
    SEMI_SEPARATING = "semi-separating"


@dataclass(frozen=True)
class Block:
    T1: float
    T2: float
    theta_bar: float
    start: int
    stop: int  # inclusive grid index


@dataclass(frozen=True)
class TaxonomyReport:
    cls: PolicyClass
    blocks: tuple
    monotone: bool
    flagged: tuple = ()


# --- objective ---------------------------------------------------------------


def _branch_success(ab: AbilityBranch, c: float) -> float:
    """Joint probability of this outcome and ability >= c."""
    out = 0.0
    for lo, hi, m in branch_mass_pieces(ab):
        if c <= lo:
            out += m
        elif c < hi:
            out += m * (hi - c) / (hi - lo)
    return out


def objective(
    T: float,
    theta_star: float,
    regime,
    prim: Primitives,
    tech: Technology = MULT,
    noise: TestNoise = NOISELESS,
    pcost: PostingCost = NO_POSTING_COST,
) -> ObjectiveBreakdown:
    """Advisor value U(T, theta*) with its success / cost decomposition."""
    theta_star = validate_theta_star(theta_star)
    pair = effort_pair(theta_star, regime.belief(T, theta_star, prim), tech, noise, prim)
    return _assemble(T, theta_star, pair, prim, tech, noise, pcost)


def _assemble(T, theta_star, pair: EffortPair, prim, tech, noise, pcost) -> ObjectiveBreakdown:
    success = 0.0
    effort_cost = 0.0
    for branch, sol, w in (
        (Branch.PASS, pair.pass_, pair.pass_weight),
        (Branch.FAIL, pair.fail, pair.fail_weight),
    ):
        if w <= 0.0:
            continue
        c = tech.cutoff(T, sol.e)
        success += _branch_success(AbilityBranch(branch, theta_star, noise), c)
        effort_cost += w * float(prim.cost(sol.e))
    k = pcost(theta_star)
    return ObjectiveBreakdown(
        success, effort_cost, k, prim.V * success - effort_cost - k, pair.pass_.e, pair.fail.e
    )


def value(T, theta_star, regime, prim, tech=MULT, noise=NOISELESS, pcost=NO_POSTING_COST) -> float:
    return objective(T, theta_star, regime, prim, tech, noise, pcost).total


def continuation_cost(
    theta_star: float,
    regime,
    prim: Primitives,
    tech: Technology = MULT,
    noise: TestNoise = NOISELESS,
    T: float = 0.0,
) -> float:
    """Outcome-weighted effort cost; ``T`` only matters for T-dependent beliefs."""
    pair = effort_pair(validate_theta_star(theta_star), regime.belief(T, theta_star, prim), tech, noise, prim)
    return pair.pass_weight * float(prim.cost(pair.pass_.e)) + pair.fail_weight * float(
        prim.cost(pair.fail.e)
    )


@dataclass(frozen=True)
class CostMinimum:
    argmins: tuple
    value: float


def argmin_continuation_cost(
    regime, prim: Primitives, tech=MULT, noise=NOISELESS, tol: float = 1e-9, T: float = 0.0
) -> CostMinimum:
    """Minimizers of the continuation cost on [0, 1] among {0, 1, best interior}."""
    f = lambda x: -continuation_cost(x, regime, prim, tech, noise, T)
    x_best, v_best = maximize_1d(f, 0.0, 1.0)
    pts = {0.0: f(0.0), 1.0: f(1.0), x_best: v_best}
    top = max(pts.values())
    return CostMinimum(tuple(sorted(x for x, v in pts.items() if v >= top - tol)), -top)


# --- optimization ------------------------------------------------------------


def optimal_threshold(
    T: float,
    regime,
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
    lo: float = 0.0,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[float, float]:
    """Best threshold on [lo, 1]; exact ties go to the smaller threshold."""
    f = lambda x: value(T, x, regime, prim, tech, noise, pcost)
    return maximize_1d(f, lo, 1.0, tol, candidates=(0.0, 1.0))


def policy_curve(
    T_grid: Sequence[float],
    regime,
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
    jitter: float = 2e-3,
) -> PolicyCurve:
    """Optimal thresholds along an ascending complexity grid.

    Among (near-)tied maximizers the monotone selection is kept: if the
    smallest maximizer would drop below the previous threshold, the best
    threshold at or above the previous one is used when it ties within
    ``NEAR_TIE``. Such points are listed in ``near_ties``.
    """
    Ts = np.asarray(T_grid, dtype=float)
    if np.any(np.diff(Ts) < 0):
        raise ValueError("T_grid must be ascending")
    thetas, vals, ties = [], [], []
    prev = 0.0
    for T in Ts:
        th, v = optimal_threshold(T, regime, prim, tech, noise, pcost)
        if th < prev - jitter:
            th_up, v_up = optimal_threshold(T, regime, prim, tech, noise, pcost, lo=prev)
            if v_up >= v - NEAR_TIE * max(1.0, abs(v)):
                th, v = th_up, v_up
                ties.append(float(T))
        thetas.append(th)
        vals.append(v)
        prev = max(prev, th)
    return PolicyCurve(Ts, np.array(thetas), np.array(vals), ties)


def detect_t_small(
    T_grid: Sequence[float],
    regime,
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
    departure: float = 1e-3,
    xtol: float = 1e-6,
) -> float:
    """Largest T (to ``xtol``) below which the optimal threshold stays at 0.

    Returns 0.0 if the very first grid point already departs from zero and
    the last grid point if it never departs.
    """
    departs = lambda T: optimal_threshold(T, regime, prim, tech, noise, pcost)[0] > departure
    Ts = list(np.asarray(T_grid, dtype=float))
    if departs(Ts[0]):
        return 0.0
    prev = Ts[0]
    for T in Ts[1:]:
        if departs(T):
            lo, hi = prev, T
            while hi - lo > xtol * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if departs(mid):
                    hi = mid
                else:
                    lo = mid
            return lo
        prev = T
    return Ts[-1]


# --- taxonomy ----------------------------------------------------------------


def classify_policy(curve: PolicyCurve, flat_tol: float = 1e-6) -> TaxonomyReport:
    th = curve.theta_values
    n = len(th)
    blocks = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs(th[j + 1] - th[j]) <= flat_tol:
            j += 1
        if j > i:
            blocks.append(Block(float(curve.T_grid[i]), float(curve.T_grid[j]), float(np.mean(th[i : j + 1])), i, j))
        i = j + 1
    monotone = bool(np.all(np.diff(th) >= -flat_tol)) if n > 1 else True
    if not blocks:
        cls = PolicyClass.SEPARATING
    elif len(blocks) == 1 and blocks[0].start == 0 and blocks[0].stop == n - 1:
        cls = PolicyClass.POOLING
    else:
        cls = PolicyClass.SEMI_SEPARATING
    return TaxonomyReport(cls, tuple(blocks), monotone, tuple(curve.near_ties))


# --- marginal value of informativeness ----------------------------------------


def mvi(
    T: float,
    theta_bar: float,
    h: float,
    regime,
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
) -> float:
    """Right difference quotient of U(T, .) at ``theta_bar`` (efforts re-solved)."""
    if h <= 0 or theta_bar + h > 1.0 + 1e-15:
        raise ValueError("mvi needs h > 0 and theta_bar + h <= 1")
    up = value(T, min(theta_bar + h, 1.0), regime, prim, tech, noise, pcost)
    return (up - value(T, theta_bar, regime, prim, tech, noise, pcost)) / h


def mvi_stability(T, theta_bar, regime, prim, tech=MULT, noise=NOISELESS, pcost=NO_POSTING_COST, h=1e-3):
    """MVI at ``h`` and ``h / 10`` and their relative gap."""
    a = mvi(T, theta_bar, h, regime, prim, tech, noise, pcost)
    b = mvi(T, theta_bar, h / 10, regime, prim, tech, noise, pcost)
    return a, b, abs(a - b) / max(abs(b), 1e-300)


# --- best-response probe ------------------------------------------------------


@dataclass(frozen=True)
class CurveBeliefs:
    """On-path beliefs obtained by inverting a sampled monotone policy.

    A threshold matching a flat block yields the prior truncated to that
    block (edge blocks extend to 0 or infinity); a threshold on a strictly
    increasing stretch yields a point mass at the interpolated preimage.
    Off-path thresholds below (above) the sampled range are read as the
    lowest (highest) grid complexity.
    """

    T_grid: tuple
    theta_values: tuple
    blocks: tuple
    flat_tol: float = 1e-6

    @classmethod
    def from_curve(cls, curve: PolicyCurve, flat_tol: float = 1e-6) -> "CurveBeliefs":
        rep = classify_policy(curve, flat_tol)
        return cls(tuple(curve.T_grid.tolist()), tuple(curve.theta_values.tolist()), rep.blocks, flat_tol)

    def belief(self, T, theta_star, prim):
        Ts, th = self.T_grid, self.theta_values
        last = len(Ts) - 1
        for blk in self.blocks:
            if abs(theta_star - blk.theta_bar) <= self.flat_tol:
                a = 0.0 if blk.start == 0 else blk.T1
                b = math.inf if blk.stop == last else blk.T2
                return TruncExp(prim.lam, a, b)
        if theta_star <= th[0]:
            return PointMass(Ts[0])
        for i in range(last):
            lo, hi = th[i], th[i + 1]
            if lo < theta_star <= hi and hi > lo:
                frac = (theta_star - lo) / (hi - lo)
                return PointMass(Ts[i] + frac * (Ts[i + 1] - Ts[i]))
        return PointMass(Ts[-1])


@dataclass
class IterationResult:
    curve: PolicyCurve
    rounds: int
    final_change: float
    converged: bool


def best_response_iteration(
    initial: PolicyCurve,
    rounds: int,
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
    stop: float = 1e-4,
) -> IterationResult:
    """Alternate belief inversion and pointwise re-optimization."""
    curve = initial
    change = math.inf if rounds > 0 else 0.0
    done = 0
    for done in range(1, rounds + 1):
        regime = CurveBeliefs.from_curve(curve)
        new = policy_curve(curve.T_grid, regime, prim, tech, noise, pcost)
        change = float(np.max(np.abs(new.theta_values - curve.theta_values)))
        curve = new
        if change <= stop:
            return IterationResult(curve, done, change, True)
    return IterationResult(curve, done, change, rounds == 0 or change <= stop)
