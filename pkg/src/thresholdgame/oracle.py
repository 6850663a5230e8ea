"""Brute-force and Monte-Carlo references for the test suite.

Nothing here is used by the production paths. The grid oracles evaluate the
agent's expected success with fixed-order Gauss-Legendre quadrature in
ability rather than the closed-form kernels, so they share no integration
code with :mod:`thresholdgame.effort`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .advisor import MULT, Naive, PolicyCurve, objective
from .effort import effort_pair
from .model import (
    NO_POSTING_COST,
    NOISELESS,
    AbilityBranch,
    ComplexityBelief,
    PointMass,
    PostingCost,
    Primitives,
    Prior,
    Technology,
    TestNoise,
    TruncExp,
    branch_segments,
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _cdf_vec(belief: ComplexityBelief, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if isinstance(belief, PointMass):
        return (x >= belief.t).astype(float)
    if isinstance(belief, Prior):
        return np.where(x > 0, -np.expm1(-belief.lam * np.maximum(x, 0.0)), 0.0)
    lam, a, b = belief.lam, belief.a, belief.b
    xc = np.clip(x, a, b)
    return np.exp(-lam * a) * -np.expm1(-lam * (xc - a)) / belief.mass


def _expected_success(e: np.ndarray, ab: AbilityBranch, belief, tech: Technology) -> np.ndarray:
    """E_branch[G(theta e)] for a vector of efforts, by dense quadrature in theta."""
    e = np.asarray(e, dtype=float)
    out = np.zeros_like(e)
    for seg in branch_segments(ab):
        if isinstance(belief, PointMass):
            # step integrand: integrate the indicator exactly
            if tech is Technology.ADDITIVE:
                c = belief.t - e
            else:
                with np.errstate(divide="ignore"):
                    c = np.where(e > 0, belief.t / np.where(e > 0, e, 1.0), np.inf)
                c = np.where(belief.t <= 0, 0.0, c)
            if seg.width == 0.0:
                out += seg.mass * (seg.lo >= c)
            else:
                out += seg.mass * np.clip((seg.hi - c) / seg.width, 0.0, 1.0)
            continue
        if seg.width == 0.0:
            arg = seg.lo + e if tech is Technology.ADDITIVE else seg.lo * e
            out += seg.mass * _cdf_vec(belief, arg)
            continue
        # split [lo, hi] where the CDF argument crosses the support edges, so
        # each Gauss-Legendre panel sees an analytic integrand
        a, b = (0.0, math.inf) if isinstance(belief, Prior) else (belief.a, belief.b)
        with np.errstate(divide="ignore", invalid="ignore"):
            if tech is Technology.ADDITIVE:
                kinks = np.stack([a - e, b - e], axis=1)
            else:
                safe = np.where(e > 0, e, 1.0)
                kinks = np.where(e[:, None] > 0, np.stack([a / safe, b / safe], axis=1), seg.lo)
        kinks = np.nan_to_num(kinks, nan=seg.hi, posinf=seg.hi, neginf=seg.lo)
        edges = np.sort(np.clip(np.concatenate([np.full((len(e), 1), seg.lo), kinks, np.full((len(e), 1), seg.hi)], axis=1), seg.lo, seg.hi), axis=1)
        acc = np.zeros_like(e)
        for j in range(edges.shape[1] - 1):
            left, right = edges[:, j : j + 1], edges[:, j + 1 : j + 2]
            half = 0.5 * (right - left)
            theta = left + half * (_GL_NODES[None, :] + 1.0)
            arg = theta + e[:, None] if tech is Technology.ADDITIVE else theta * e[:, None]
            acc += (_cdf_vec(belief, arg) * half) @ _GL_WEIGHTS
        out += seg.mass * acc / seg.width
    return out


def grid_argmax_effort(
    ab: AbilityBranch,
    belief: ComplexityBelief,
    tech: Technology,
    prim: Primitives,
    e_max: float,
    step: float,
) -> float:
    """Best effort on the grid {0, step, ..., e_max} (e_max always included)."""
    if step <= 0 or e_max <= 0:
        raise ValueError("grid_argmax_effort needs positive step and e_max")
    if prim.V == 0:
        return 0.0
    grid = np.arange(0.0, e_max, step)
    grid = np.append(grid, e_max)
    vals = prim.V * _expected_success(grid, ab, belief, tech) - grid ** prim.gamma
    return float(grid[int(np.argmax(vals))])


def grid_argmax_threshold(
    T: float,
    regime,
    prim: Primitives,
    tech=MULT,
    noise: TestNoise = NOISELESS,
    pcost: PostingCost = NO_POSTING_COST,
    step: float = 1e-3,
) -> float:
    """Best threshold on {0, step, ..., 1} by direct evaluation of the objective."""
    grid = np.append(np.arange(0.0, 1.0, step), 1.0)
    vals = np.array([objective(T, float(x), regime, prim, tech, noise, pcost).total for x in grid])
    return float(grid[int(np.argmax(vals))])


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    draws: int
    seed: int


def mc_payoff(
    policy: Union[PolicyCurve, Callable, float],
    prim: Primitives,
    tech: Technology = MULT,
    noise: TestNoise = NOISELESS,
    draws: int = 10**6,
    seed: int = 0,
    regime=None,
    pcost: PostingCost = NO_POSTING_COST,
    T_fixed: float | None = None,
    efforts: tuple[float, float] | None = None,
) -> McEstimate:
    """Monte-Carlo advisor payoff V 1{success} - C(e) - k(theta*).

    Draws (theta, T, test noise) from a Philox stream seeded by ``seed``.
    ``T_fixed`` pins complexity; ``efforts`` overrides the regime's
    (pass, fail) efforts. The regime (default naive) is consulted once per
    distinct (threshold, belief) pair.
    """
    if draws < 1:
        raise ValueError("draws must be positive")
    regime = regime if regime is not None else Naive()
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random((3, draws))
    theta = u[0]
    if T_fixed is None:
        T = -np.log1p(-u[1]) / prim.lam
    else:
        T = np.full(draws, float(T_fixed))

    if isinstance(policy, PolicyCurve):
        ts = np.asarray(policy(T), dtype=float)
    elif callable(policy):
        ts = np.asarray([policy(t) for t in T], dtype=float)
    else:
        ts = np.full(draws, float(policy))

    above = theta >= ts
    passed = np.where(above, u[2] >= noise.eta_minus, u[2] < noise.eta_plus)

    e = np.empty(draws)
    if efforts is not None:
        e[:] = np.where(passed, efforts[0], efforts[1])
    elif isinstance(regime, Naive):
        uniq, inv = np.unique(ts, return_inverse=True)
        belief = regime.belief(0.0, 0.0, prim)
        pairs = [effort_pair(float(t), belief, tech, noise, prim) for t in uniq]
        e_pass = np.array([p.pass_.e for p in pairs])[inv]
        e_fail = np.array([p.fail.e for p in pairs])[inv]
        e[:] = np.where(passed, e_pass, e_fail)
    else:
        cache = {}
        for i in range(draws):
            b = regime.belief(float(T[i]), float(ts[i]), prim)
            k = (float(ts[i]), b)
            pair = cache.get(k)
            if pair is None:
                pair = cache[k] = effort_pair(k[0], b, tech, noise, prim)
            e[i] = pair.pass_.e if passed[i] else pair.fail.e

    if tech is Technology.ADDITIVE:
        success = theta + e >= T
    else:
        success = theta * e >= T
    uniq_t, inv_t = np.unique(ts, return_inverse=True)
    k_vals = np.array([pcost(float(t)) for t in uniq_t])[inv_t]
    payoff = prim.V * success - e ** prim.gamma - k_vals
    sd = float(np.std(payoff, ddof=1)) if draws > 1 else 0.0
    return McEstimate(float(np.mean(payoff)), sd / math.sqrt(draws), draws, seed)
