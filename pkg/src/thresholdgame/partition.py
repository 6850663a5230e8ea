"""Closed-form separating/pooling bounds and the partition of (lambda, V, gamma).

``u_pool`` is the ability-wise upper benchmark for any pooling policy (ability
replaced by 1), ``u_sep_bound`` the value of the feasible separating family
``theta*(T) = min(1, T / (alpha V^(1/gamma)))``. Their difference ``phi``
classifies a parameter point; ``lambda_star`` is its zero in lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .advisor import MULT, Naive, maximize_1d, objective, optimal_threshold
from .model import NO_POSTING_COST, NOISELESS, ComplexityBelief, Primitives, Prior, TruncExp, belief_cdf
from .numerics import (
    Bracket,
    NoCrossingError,
    Tolerance,
    find_bracket,
    find_root_bracketed,
    integrate,
    lambert_w0,
    mixed_grid,
)

SIGN_TOL = 1e-9
DEFAULT_ALPHA = 0.5


class Classification(Enum):
    SEPARATING_BY_BOUNDS = "separating"
    BOUNDARY = "boundary"
    POOLING_SUSTAINABLE_BY_BOUNDS = "pooling"


class ICOutcome(Enum):
    POOLING_ELIMINATED = "pooling-eliminated"
    BOUNDARY = "boundary"
    POOLING_SUSTAINABLE_BY_BOUNDS = "pooling-sustainable"


@dataclass(frozen=True)
class SeparatingKnob:
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    def pass_effort(self, V: float, gamma: float) -> float:
        return self.alpha * V ** (1.0 / gamma)

    def threshold(self, T: float, V: float, gamma: float) -> float:
        return min(1.0, T / self.pass_effort(V, gamma))


@dataclass(frozen=True)
class PartitionPoint:
    lam: float
    V: float
    gamma: float
    alpha: float
    u_sep: float
    u_pool: float
    phi: float
    classification: Classification


@dataclass
class BoundaryCurve:
    axis: str
    grid: np.ndarray
    lambda_star_values: list  # float, or None where no crossing

    @property
    def present(self) -> np.ndarray:
        return np.array([v is not None for v in self.lambda_star_values])


# --- pooling benchmark -------------------------------------------------------


def pooling_root(lam: float, V: float, gamma: float) -> float:
    """z = lam * e solving z^(gamma-1) e^z = (V / gamma) lam^gamma."""
    if V <= 0:
        return 0.0
    L = math.log(V / gamma) + gamma * math.log(lam)
    k = gamma - 1.0
    h = lambda z: k * math.log(z) + z - L
    z0 = math.exp(L / k) if L / k < 700 else math.inf
    if z0 == 0.0:
        return 0.0  # root below the smallest double
    if math.isfinite(z0):
        z_hi = z0  # h(z0) = z0 > 0
    else:
        z_hi = max(1.0, L)
    while h(z_hi) < 0:
        z_hi *= 2.0
    # z0 * exp(-z0 / k) is a root lower bound; it underflows when z0 is large
    z_lo = z0 * math.exp(-z0 / k) if z0 < 700.0 else 0.0
    if not z_lo > 0.0:
        z_lo = z_hi
    # rounding can leave h(z_lo) marginally positive when z0 is tiny
    while h(z_lo) > 0.0 and z_lo > 1e-300:
        z_lo *= 0.5
    if h(z_lo) >= 0.0 or z_lo >= z_hi:
        return z_lo
    return find_root_bracketed(h, Bracket(z_lo, z_hi), Tolerance(1e-300, 1e-15, 400))


def u_pool(lam: float, V: float, gamma: float) -> float:
    """max over e >= 0 of V (1 - exp(-lam e)) - e^gamma, corner e = 0 enforced."""
    if V <= 0:
        return 0.0
    z = pooling_root(lam, V, gamma)
    # equals V - z^(gamma-1) (z + gamma) / lam^gamma at the root, without cancellation
    val = -V * math.expm1(-z) - (z / lam) ** gamma
    return max(0.0, val)


def u_pool_quadratic(lam: float, V: float) -> float:
    """Quadratic-cost pooling benchmark through the Lambert W closed form."""
    if V <= 0:
        return 0.0
    c = 0.5 * V * lam * lam
    w = lambert_w0(c)
    if c < 1e-3:
        # V - (w^2 + 2w)/lam^2 rewritten with exp(-w) = w / c
        val = -V * math.expm1(-w) - (w / lam) ** 2
    else:
        val = V - (w * w + 2.0 * w) / (lam * lam)
    return max(0.0, val)


def u_pool_brute(lam: float, V: float, gamma: float, step: float = 1e-5, e_max: Optional[float] = None) -> float:
    """Grid maximization of the pooling benchmark (reference only)."""
    if e_max is None:
        e_max = max(V, 0.0) ** (1.0 / gamma) + step
    e = np.arange(0.0, e_max + step, step)
    return float(np.max(-V * np.expm1(-lam * e) - e ** gamma))


# --- separating bound --------------------------------------------------------


def _one_minus_phi1(x: float) -> float:
    """1 - (1 - exp(-x)) / x."""
    if x < 1e-4:
        return x / 2.0 - x * x / 6.0 + x ** 3 / 24.0
    return 1.0 + math.expm1(-x) / x


def u_sep_bound(lam: float, V: float, gamma: float, knob: SeparatingKnob = SeparatingKnob()) -> float:
    if V <= 0:
        return 0.0
    x = lam * knob.pass_effort(V, gamma)
    return (1.0 - knob.alpha ** gamma) * V * _one_minus_phi1(x)


# --- partition ---------------------------------------------------------------


def classify_sign(phi_value: float, tol: float = SIGN_TOL) -> Classification:
    if phi_value > tol:
        return Classification.SEPARATING_BY_BOUNDS
    if phi_value < -tol:
        return Classification.POOLING_SUSTAINABLE_BY_BOUNDS
    return Classification.BOUNDARY


def phi(lam: float, V: float, gamma: float, knob: SeparatingKnob = SeparatingKnob()) -> PartitionPoint:
    us = u_sep_bound(lam, V, gamma, knob)
    up = u_pool(lam, V, gamma)
    d = us - up
    return PartitionPoint(lam, V, gamma, knob.alpha, us, up, d, classify_sign(d))


def phi_value(lam, V, gamma, knob=SeparatingKnob()) -> float:
    return u_sep_bound(lam, V, gamma, knob) - u_pool(lam, V, gamma)


def lambda_star(
    V: float,
    gamma: float,
    knob: SeparatingKnob = SeparatingKnob(),
    search_range: tuple = (1e-3, 1e3),
    xtol: float = 1e-10,
) -> float:
    """Zero of phi in lambda: bracket on the mixed grid, then bisect."""
    lo, hi = search_range
    f = lambda lam: phi_value(lam, V, gamma, knob)
    br = find_bracket(f, mixed_grid(lo, hi))
    return _bisect(f, br, xtol)


def _bisect(f, br: Bracket, xtol: float) -> float:
    a, b = br.lo, br.hi
    fa = f(a)
    if fa == 0.0:
        return a
    if f(b) == 0.0:
        return b
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
        if b - a <= xtol:
            break
    return 0.5 * (a + b)


def sign_changes(V, gamma, knob=SeparatingKnob(), search_range=(1e-3, 1e3)) -> int:
    vals = np.sign([phi_value(l, V, gamma, knob) for l in mixed_grid(*search_range)])
    vals = vals[vals != 0]
    return int(np.count_nonzero(np.diff(vals)))


def _boundary(axis: str, grid, fn) -> BoundaryCurve:
    out = []
    for x in grid:
        try:
            out.append(fn(x))
        except NoCrossingError:
            out.append(None)
    return BoundaryCurve(axis, np.asarray(grid, dtype=float), out)


def boundary_vs_V(V_grid: Sequence[float], gamma: float, knob=SeparatingKnob(), search_range=(1e-3, 1e3)) -> BoundaryCurve:
    return _boundary("V", V_grid, lambda V: lambda_star(V, gamma, knob, search_range))


def boundary_vs_gamma(gamma_grid: Sequence[float], V: float, knob=SeparatingKnob(), search_range=(1e-3, 1e3)) -> BoundaryCurve:
    return _boundary("gamma", gamma_grid, lambda g: lambda_star(V, g, knob, search_range))


def partition_grid(lam_grid, gamma_grid, V: float, knob=SeparatingKnob()) -> list:
    """The three-step procedure over a (gamma, lambda) grid, gamma-major order."""
    return [phi(l, V, g, knob) for g in gamma_grid for l in lam_grid]


def ic_diagnostic(lam, V, gamma, knob=SeparatingKnob()) -> ICOutcome:
    d = phi_value(lam, V, gamma, knob)
    if d > SIGN_TOL:
        return ICOutcome.POOLING_ELIMINATED
    if d < -SIGN_TOL:
        return ICOutcome.POOLING_SUSTAINABLE_BY_BOUNDS
    return ICOutcome.BOUNDARY


# --- asymptotics -------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticReport:
    sep_slope: float
    sep_slope_target: float
    sep_slope_rel_err: float
    pool_exponent: float
    pool_exponent_target: float
    pool_exponent_rel_err: float
    u_sep_large: float
    u_sep_limit: float
    u_pool_large: float
    u_pool_limit: float

    @property
    def sep_limit_gap(self) -> float:
        return abs(self.u_sep_large - self.u_sep_limit)

    @property
    def pool_limit_gap(self) -> float:
        return abs(self.u_pool_large - self.u_pool_limit)


def _rel(a, b):
    if b == 0:
        return abs(a)
    return abs(a - b) / abs(b)


def asymptotic_check(
    V: float,
    gamma: float,
    knob: SeparatingKnob = SeparatingKnob(),
    small: float = 1e-4,
    small_pair: tuple = (1e-4, 1e-3),
    large: float = 1e3,
) -> AsymptoticReport:
    a = knob.alpha
    slope = u_sep_bound(small, V, gamma, knob) / small
    slope_target = 0.5 * (1.0 - a ** gamma) * a * V ** (1.0 + 1.0 / gamma)
    l1, l2 = small_pair
    expo = math.log(u_pool(l2, V, gamma) / u_pool(l1, V, gamma)) / math.log(l2 / l1)
    expo_target = gamma / (gamma - 1.0)
    return AsymptoticReport(
        slope,
        slope_target,
        _rel(slope, slope_target),
        expo,
        expo_target,
        _rel(expo, expo_target),
        u_sep_bound(large, V, gamma, knob),
        (1.0 - a ** gamma) * V,
        u_pool(large, V, gamma),
        V,
    )


# --- value of observing complexity -------------------------------------------


@dataclass(frozen=True)
class VOIReport:
    value: float
    raw: float
    informed: float
    uninformed: float
    uninformed_threshold: float


def _prior_expectation(h, prior: ComplexityBelief, t_sat: float, points=(), tail: float = 1e-10) -> float:
    """E[h(T)] under ``prior`` (Prior or TruncExp).

    ``h`` must be constant for T >= ``t_sat``; that tail is added in closed
    form, the rest integrated with ``points`` as breakpoints. Without a finite
    ``t_sat`` the exponential tail is truncated at residual mass ``tail``.
    """
    tol = Tolerance(1e-10, 1e-9, 400)
    if isinstance(prior, Prior):
        prior = TruncExp(prior.lam, 0.0, math.inf)
    if not isinstance(prior, TruncExp):
        raise TypeError("value of information needs a density-bearing prior")
    lam, a, b, Z = prior.lam, prior.a, prior.b, prior.mass
    if not math.isfinite(t_sat):
        t_sat = b if math.isfinite(b) else a - math.log(tail) / lam
    hi = min(b, max(a, t_sat))
    dens = lambda t: lam * math.exp(-lam * t) / Z
    body = 0.0
    if hi > a:
        inner = sorted({float(p) for p in points if a < p < hi} | set(np.linspace(a, hi, 9)[1:-1]))
        body = integrate(lambda t: h(t) * dens(t), a, hi, tol, inner)
    rest = 1.0 - belief_cdf(prior, hi)
    if rest > 0.0:
        body += rest * h(hi if hi > t_sat else t_sat)
    return body


def _saturation(prim, regime, tech, noise) -> float:
    """Complexity beyond which no ability/effort pair succeeds (naive efforts)."""
    e_sup = 0.0
    for th in np.linspace(0.0, 1.0, 201):
        b = objective(0.0, float(th), regime, prim, tech, noise)
        e_sup = max(e_sup, b.e_pass, b.e_fail)
    e_sup = 1.02 * e_sup + 1e-12
    return 1.0 + e_sup if tech is not MULT else e_sup


def value_of_information(
    prim: Primitives,
    tech=MULT,
    noise=NOISELESS,
    pcost=NO_POSTING_COST,
    T_grid: Sequence[float] = (),
    prior: Optional[ComplexityBelief] = None,
) -> VOIReport:
    """Gain from conditioning the threshold on T over the best constant threshold.

    Efforts follow the naive rule under ``prior`` (default Exp(lambda)).
    ``T_grid`` points are passed to the outer quadrature as breakpoints.
    """
    prior = prior if prior is not None else Prior(prim.lam)
    regime = Naive(prior)
    t_sat = _saturation(prim, regime, tech, noise)
    informed = _prior_expectation(
        lambda T: optimal_threshold(T, regime, prim, tech, noise, pcost)[1], prior, t_sat, T_grid
    )

    def expected_value(theta_bar: float) -> float:
        # success terms kink where T hits theta*e or e (shifted by theta for additive)
        b = objective(0.0, theta_bar, regime, prim, tech, noise, pcost)
        if tech is MULT:
            kinks = [theta_bar * b.e_pass, b.e_pass, theta_bar * b.e_fail, b.e_fail]
        else:
            kinks = [theta_bar + b.e_pass, 1 + b.e_pass, b.e_fail, theta_bar + b.e_fail]
        return _prior_expectation(
            lambda T: objective(T, theta_bar, regime, prim, tech, noise, pcost).total, prior, t_sat, kinks
        )

    th, uninformed = maximize_1d(expected_value, 0.0, 1.0, n_scan=64, candidates=(0.0, 1.0))
    raw = informed - uninformed
    return VOIReport(max(raw, 0.0), raw, informed, uninformed, th)
