"""Agent continuation effort after a pass or fail outcome.

Efforts solve ``max_e V * P(success | outcome, belief) - e**gamma``. For
beliefs with a density the first-order condition ``gamma e^(gamma-1) = R(e)``
is solved by bracketed root finding, where ``R`` is the marginal benefit
kernel. Point-mass beliefs turn the problem into a deterministic cutoff
choice, solved by direct maximization over the kinks and stationary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    AbilityBranch,
    Branch,
    ComplexityBelief,
    NOISELESS,
    PointMass,
    PointMassDensityError,
    Primitives,
    Prior,
    Segment,
    Technology,
    TestNoise,
    TruncExp,
    belief_density,
    branch_segments,
    branch_weight,
)
from .numerics import (
    DEFAULT_TOL,
    Bracket,
    Tolerance,
    find_root_bracketed,
    integrate,
    maximize_1d,
)

THETA_MIN_CLAMP = 1e-6
_SERIES_CUTOFF = 0.05


@dataclass(frozen=True)
class EffortSolution:
    e: float
    interior: bool
    residual: float
    objective_value: float
    degenerate: bool = False


@dataclass(frozen=True)
class EffortPair:
    pass_: EffortSolution
    fail: EffortSolution
    pass_weight: float
    fail_weight: float

    @property
    def continuation_cost_terms(self) -> tuple[float, float]:
        return self.pass_weight, self.fail_weight


# --- stable elementary pieces ------------------------------------------------


def _phi1(x: float) -> float:
    """(1 - exp(-x)) / x."""
    if x < _SERIES_CUTOFF:
        term, out = 1.0, 0.0
        for n in range(1, 14):
            out += term
            term *= -x / (n + 1)
        return out
    return -math.expm1(-x) / x


def _phi2(x: float) -> float:
    """(1 - (1 + x) exp(-x)) / x**2, i.e. integral of u e^(-x u) on [0, 1]."""
    if x < _SERIES_CUTOFF:
        out, fact = 0.0, 1.0
        for n in range(0, 14):
            if n:
                fact *= n
            out += (-x) ** n / (fact * (n + 2))
        return out
    return (-math.expm1(-x) - x * math.exp(-x)) / (x * x)


def _one_minus_phi1(x: float) -> float:
    if x < _SERIES_CUTOFF:
        term, out = x / 2.0, 0.0
        for n in range(2, 16):
            out += term
            term *= -x / (n + 1)
        return out
    return 1.0 - _phi1(x)


def theta_exp_integral(p: float, q: float, s: float) -> float:
    """Integral of ``theta * exp(-s theta)`` over [p, q], stable for small ``s``."""
    if q <= p:
        return 0.0
    d = q - p
    x = s * d
    return math.exp(-s * p) * (p * d * _phi1(x) + d * d * _phi2(x))


def _exp_params(belief: ComplexityBelief) -> tuple[float, float, float, float]:
    if isinstance(belief, Prior):
        return belief.lam, 0.0, math.inf, 1.0
    if isinstance(belief, TruncExp):
        return belief.lam, belief.a, belief.b, belief.mass
    raise PointMassDensityError("a point-mass belief has no density")


def _cdf_integral(belief: ComplexityBelief, u: float, v: float) -> float:
    """Integral of the belief CDF over [u, v]."""
    if v <= u:
        return 0.0
    lam, a, b, Z = _exp_params(belief)
    total = max(0.0, v - max(u, b)) if math.isfinite(b) else 0.0
    lo, hi = max(u, a), min(v, b)
    if hi > lo:
        d = hi - lo
        off = lam * (lo - a)
        bracket = -math.expm1(-off) + math.exp(-off) * _one_minus_phi1(lam * d)
        total += d * math.exp(-lam * a) * bracket / Z
    return total


def _cdf(belief: ComplexityBelief, x: float) -> float:
    lam, a, b, Z = _exp_params(belief)
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    return math.exp(-lam * a) * -math.expm1(-lam * (x - a)) / Z


# --- kernels -----------------------------------------------------------------


def _segment_kernel(seg: Segment, e: float, belief: ComplexityBelief, tech: Technology) -> float:
    """E_seg[theta g(theta e)] (multiplicative) or E_seg[g(theta + e)] (additive), unscaled."""
    lam, a, b, Z = _exp_params(belief)
    if tech is Technology.ADDITIVE:
        if seg.width == 0.0:
            x = seg.lo + e
            return lam * math.exp(-lam * x) / Z if a <= x <= b else 0.0
        return (_cdf(belief, seg.hi + e) - _cdf(belief, seg.lo + e)) / seg.width
    if seg.width == 0.0:
        x = seg.lo * e
        return seg.lo * lam * math.exp(-lam * x) / Z if a <= x <= b else 0.0
    if e <= 0.0:
        # theta * g(0): only a support starting at 0 contributes
        return 0.5 * (seg.lo + seg.hi) * lam / Z if a == 0.0 else 0.0
    p = max(seg.lo, a / e)
    q = min(seg.hi, b / e) if math.isfinite(b) else seg.hi
    return lam / Z * theta_exp_integral(p, q, lam * e) / seg.width


def marginal_benefit(
    e: float,
    ab: AbilityBranch,
    belief: ComplexityBelief,
    tech: Technology,
    prim: Primitives,
    method: str = "closed",
) -> float:
    """Marginal benefit of effort R(e) for the branch posterior.

    ``method="quad"`` evaluates the same expectation by adaptive quadrature
    against :func:`belief_density` (used to cross-check the closed forms).
    """
    if isinstance(belief, PointMass):
        raise PointMassDensityError("marginal benefit needs a density-bearing belief")
    segs = branch_segments(ab)
    if method == "quad":
        return prim.V * sum(s.mass * _segment_kernel_quad(s, e, belief, tech) for s in segs)
    return prim.V * sum(s.mass * _segment_kernel(s, e, belief, tech) for s in segs)


def _segment_kernel_quad(seg: Segment, e: float, belief, tech) -> float:
    if tech is Technology.ADDITIVE:
        h = lambda th: belief_density(belief, th + e)
    else:
        h = lambda th: th * belief_density(belief, th * e)
    if seg.width == 0.0:
        return h(seg.lo)
    lam, a, b, _ = _exp_params(belief)
    if tech is Technology.ADDITIVE:
        kinks = [a - e, b - e]
    else:
        kinks = [a / e, b / e] if e > 0 else []
    tol = Tolerance(1e-13, 1e-12, 200)
    return integrate(h, seg.lo, seg.hi, tol, [k for k in kinks if math.isfinite(k)]) / seg.width


def success_probability(
    e: float, ab: AbilityBranch, belief: ComplexityBelief, tech: Technology
) -> float:
    """Agent's subjective success probability E_branch[G(theta e)] (or G(theta + e))."""
    segs = branch_segments(ab)
    if isinstance(belief, PointMass):
        c = tech.cutoff(belief.t, e)
        return sum(s.upper_mass(c) for s in segs)
    out = 0.0
    for s in segs:
        if tech is Technology.ADDITIVE:
            val = _cdf(belief, s.lo + e) if s.width == 0.0 else (
                _cdf_integral(belief, s.lo + e, s.hi + e) / s.width
            )
        elif e <= 0.0:
            val = _cdf(belief, 0.0)
        elif s.width == 0.0:
            val = _cdf(belief, s.lo * e)
        else:
            val = _cdf_integral(belief, s.lo * e, s.hi * e) / (e * s.width)
        out += s.mass * val
    return out


def agent_objective(e, ab, belief, tech, prim) -> float:
    return prim.V * success_probability(e, ab, belief, tech) - float(prim.cost(e))


# --- effort solvers ----------------------------------------------------------


def _monotone_kernel(belief: ComplexityBelief) -> bool:
    # decreasing density on [0, inf) keeps R(e) nonincreasing
    return isinstance(belief, Prior) or (isinstance(belief, TruncExp) and belief.a == 0.0)


@lru_cache(maxsize=200_000)
def solve_effort(
    ab: AbilityBranch,
    belief: ComplexityBelief,
    tech: Technology,
    prim: Primitives,
    tol: Tolerance = DEFAULT_TOL,
    method: str = "exact",
) -> EffortSolution:
    """Optimal continuation effort for one branch.

    Zero-weight branches are solved on their limit posterior and flagged
    ``degenerate``. Point-mass beliefs are solved by candidate enumeration;
    ``method="scan"`` runs the generic scan-and-refine maximizer instead.
    """
    degenerate = branch_weight(ab) <= 0.0
    if prim.V == 0.0:
        return EffortSolution(0.0, False, 0.0, 0.0, degenerate)
    if isinstance(belief, PointMass):
        return _solve_point_mass(ab, belief, tech, prim, tol, degenerate, method)

    R = lambda e: marginal_benefit(e, ab, belief, tech, prim)
    foc = lambda e: float(prim.marginal_cost(e)) - R(e)
    g = prim.gamma

    if _monotone_kernel(belief):
        r0 = R(0.0)
        if r0 <= 0.0:
            return EffortSolution(0.0, False, -r0, agent_objective(0.0, ab, belief, tech, prim), degenerate)
        e_hi = (r0 / g) ** (1.0 / (g - 1.0)) + 1.0
        e = find_root_bracketed(foc, Bracket(0.0, e_hi), tol)
        return EffortSolution(e, True, foc(e), agent_objective(e, ab, belief, tech, prim), degenerate)

    # Truncated support away from zero: R(e) rises then falls, so the FOC may
    # have several roots. Compare every local maximum with the corner.
    e_max = prim.V ** (1.0 / g)
    grid = np.linspace(0.0, e_max, 257)
    vals = [foc(x) for x in grid]
    best = EffortSolution(0.0, False, vals[0], agent_objective(0.0, ab, belief, tech, prim), degenerate)
    for x0, x1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if f0 < 0.0 <= f1 or (f0 < 0.0 and f1 == 0.0):
            e = find_root_bracketed(foc, Bracket(x0, x1), tol)
            val = agent_objective(e, ab, belief, tech, prim)
            if val > best.objective_value + 1e-14:
                best = EffortSolution(e, True, foc(e), val, degenerate)
    return best


def _point_mass_candidates(segs, t: float, tech: Technology, prim: Primitives) -> list[float]:
    V, g = prim.V, prim.gamma
    cands = [0.0]
    for s in segs:
        edges = {s.lo, s.hi}
        for edge in edges:
            if tech is Technology.ADDITIVE:
                cands.append(t - edge)
            elif edge > 0:
                cands.append(t / max(edge, THETA_MIN_CLAMP))
        if s.width > 0 and s.mass > 0:
            dens = s.mass / s.width
            if tech is Technology.ADDITIVE:
                cands.append((V * dens / g) ** (1.0 / (g - 1.0)))
            elif t > 0:
                cands.append((V * dens * t / g) ** (1.0 / (g + 1.0)))
    return [c for c in cands if c >= 0.0 and math.isfinite(c)]


def _solve_point_mass(ab, belief: PointMass, tech, prim, tol, degenerate, method="exact") -> EffortSolution:
    segs = branch_segments(ab)
    t = belief.t
    V, g = prim.V, prim.gamma
    lows = np.array([s.lo for s in segs])
    highs = np.array([s.hi for s in segs])
    masses = np.array([s.mass for s in segs])
    widths = highs - lows

    def success(e: np.ndarray) -> np.ndarray:
        e = np.asarray(e, dtype=float)
        if tech is Technology.ADDITIVE:
            c = t - e
        elif t <= 0:
            c = np.zeros_like(e)
        else:
            with np.errstate(divide="ignore"):
                c = np.where(e > 0, t / np.where(e > 0, e, 1.0), np.inf)
        c = c[:, None]
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            frac = np.where(
                widths > 0,
                np.clip((highs - np.maximum(c, lows)) / np.where(widths > 0, widths, 1.0), 0.0, 1.0),
                (lows >= c).astype(float),
            )
        return frac @ masses

    def obj(e):
        return V * success(e) - np.power(e, g)

    e_max = V ** (1.0 / g)
    cands = [c for c in _point_mass_candidates(segs, t, tech, prim) if c <= e_max]
    if method == "scan":
        e, val = maximize_1d(obj, 0.0, e_max, tol, candidates=cands, vectorized=True)
    else:
        # every piece between kinks is concave in e, so the optimum is a kink
        # or that piece's unique stationary point - all of which are candidates
        xs = np.array(sorted(set(cands)))
        ys = obj(xs)
        i = int(np.nonzero(ys >= ys.max() - 1e-13 * max(1.0, abs(ys.max())))[0][0])
        e, val = float(xs[i]), float(ys[i])
    return EffortSolution(e, e > 0.0, 0.0, val, degenerate)


@lru_cache(maxsize=200_000)
def effort_pair(
    theta_star: float,
    belief: ComplexityBelief,
    tech: Technology,
    noise: TestNoise,
    prim: Primitives,
) -> EffortPair:
    """Pass and fail efforts at a posted threshold."""
    ab_pass = AbilityBranch(Branch.PASS, theta_star, noise)
    ab_fail = AbilityBranch(Branch.FAIL, theta_star, noise)
    return EffortPair(
        solve_effort(ab_pass, belief, tech, prim),
        solve_effort(ab_fail, belief, tech, prim),
        branch_weight(ab_pass),
        branch_weight(ab_fail),
    )


def naive_effort_pair(theta_star: float, prim: Primitives, noise: TestNoise = NOISELESS) -> EffortPair:
    """Benchmark convenience: multiplicative technology, prior beliefs."""
    return effort_pair(theta_star, Prior(prim.lam), Technology.MULTIPLICATIVE, noise, prim)
