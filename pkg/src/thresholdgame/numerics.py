"""Scalar numerical primitives shared by every other module.

Lambert W (principal branch), bracketed root finding, adaptive quadrature
and a kink-tolerant one-dimensional maximizer. Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo

_INV_E = math.exp(-1.0)


class NumericsError(Exception):
    """Base class for numerical failures (mapped to CLI exit code 3)."""


class DomainError(NumericsError, ValueError):
    """Argument outside the domain of the routine."""


class NoSignChangeError(NumericsError):
    """The bracket endpoints do not straddle a root."""


class NoCrossingError(NoSignChangeError):
    """No adjacent grid pair shows a sign change."""


class MaxIterationsError(NumericsError):
    """Iteration budget exhausted before reaching tolerance."""


class ConvergenceError(NumericsError):
    """Adaptive refinement did not meet the requested tolerance."""


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-10
    rel: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0 or self.abs + self.rel <= 0:
            raise DomainError("tolerance needs abs, rel >= 0 with abs + rel > 0")
        if self.max_iter < 1:
            raise DomainError("max_iter must be positive")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def lambert_w0(c: float) -> float:
    """Principal branch of the Lambert W function, ``w * exp(w) = c``.

    Halley iteration seeded by ``log1p(c)`` (an upper bound for c >= 0) or by
    the branch-point series on [-1/e, 0).
    """
    c = float(c)
    if math.isnan(c) or c < -_INV_E - 1e-16:
        raise DomainError(f"lambert_w0 requires c >= -1/e, got {c}")
    if c == 0.0:
        return 0.0
    if math.isinf(c):
        return math.inf
    if c <= -_INV_E:
        return -1.0
    if c < 0.0:
        p = math.sqrt(max(2.0 * (math.e * c + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif c < 3.0:
        w = math.log1p(c)
    else:
        l1 = math.log(c)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - c
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def find_root_bracketed(
    f: Callable[[float], float], b: Bracket, tol: Tolerance = DEFAULT_TOL
) -> float:
    """Zero of ``f`` inside ``b`` by Brent's method."""
    fa, fb = f(b.lo), f(b.hi)
    if fa == 0.0:
        return b.lo
    if fb == 0.0:
        return b.hi
    if math.isnan(fa) or math.isnan(fb) or np.sign(fa) == np.sign(fb):
        raise NoSignChangeError(
            f"no sign change on [{b.lo}, {b.hi}]: f(lo)={fa}, f(hi)={fb}"
        )
    try:
        x, info = _spo.brentq(
            f,
            b.lo,
            b.hi,
            xtol=max(tol.abs, 1e-300),
            rtol=max(tol.rel, 4 * np.finfo(float).eps),
            maxiter=tol.max_iter,
            full_output=True,
            disp=False,
        )
    except RuntimeError as exc:  # pragma: no cover - disp=False avoids this
        raise MaxIterationsError(str(exc)) from exc
    if not info.converged:
        raise MaxIterationsError(
            f"root not converged after {info.iterations} iterations ({info.flag})"
        )
    return min(max(x, b.lo), b.hi)


def find_bracket(f: Callable[[float], float], grid: Sequence[float]) -> Bracket:
    """First adjacent pair of ``grid`` where ``f`` changes sign."""
    xs = [float(x) for x in grid]
    if len(xs) < 2:
        raise DomainError("find_bracket needs at least two grid points")
    prev_x, prev_f = xs[0], f(xs[0])
    for x in xs[1:]:
        fx = f(x)
        if prev_f == 0.0 or fx == 0.0 or (prev_f < 0) != (fx < 0):
            return Bracket(prev_x, x)
        prev_x, prev_f = x, fx
    raise NoCrossingError(f"f keeps one sign on [{xs[0]}, {xs[-1]}]")


def mixed_grid(
    lo: float = 1e-3, hi: float = 1e3, pivot: float = 1.0, n_log: int = 40, n_lin: int = 40
) -> np.ndarray:
    """Log-spaced points on [lo, pivot] followed by linear points on [pivot, hi]."""
    if not 0 < lo < pivot < hi:
        raise DomainError("mixed_grid needs 0 < lo < pivot < hi")
    left = np.geomspace(lo, pivot, n_log)
    right = np.linspace(pivot, hi, n_lin)
    return np.unique(np.concatenate([left, right]))


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Iterable[float] = (),
) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over [a, b].

    ``b`` may be ``inf``: QUADPACK then maps [a, inf) onto (0, 1] through
    ``x = a + (1 - t) / t``. Known kinks inside a finite range go in ``points``.
    """
    if math.isnan(a) or math.isnan(b) or a > b:
        raise DomainError(f"integrate needs a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    inner = sorted({float(p) for p in points if a < p < b})
    kwargs = dict(epsabs=tol.abs, epsrel=tol.rel, limit=max(tol.max_iter, 50), full_output=1)
    if inner and math.isfinite(b):
        kwargs["points"] = inner
    elif inner:
        # kinks on a semi-infinite range: split at the last one
        head = integrate(f, a, inner[-1], tol, inner[:-1])
        return head + integrate(f, inner[-1], b, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = _spi.quad(f, a, b, **kwargs)
    value, err = out[0], out[1]
    # a fourth element is QUADPACK's warning message (ier > 0)
    if len(out) >= 4 and err > 100 * max(tol.abs, tol.rel * abs(value)):
        raise ConvergenceError(f"quadrature did not converge: {out[3]!r} (err={err:.3g})")
    return float(value)


def maximize_1d(
    f: Callable,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
    n_scan: int = 512,
    candidates: Iterable[float] = (),
    vectorized: bool = False,
    n_refine: int = 3,
) -> tuple[float, float]:
    """Maximize a continuous, possibly kinked, function on [lo, hi].

    A uniform scan of ``n_scan`` points (plus any ``candidates`` and both
    endpoints) locates the best cells; bounded Brent search refines the
    ``n_refine`` best local peaks. Ties go to the smaller argument.

    Returns:
        ``(argmax, max)``.
    """
    lo, hi = float(lo), float(hi)
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise DomainError(f"maximize_1d needs lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return lo, float(f(np.array([lo]))[0] if vectorized else f(lo))

    extra = [float(c) for c in candidates if lo <= c <= hi]
    xs = np.unique(np.concatenate([np.linspace(lo, hi, max(n_scan, 2)), extra]))
    if vectorized:
        ys = np.asarray(f(xs), dtype=float)
    else:
        ys = np.array([f(float(x)) for x in xs], dtype=float)
    ys = np.where(np.isnan(ys), -np.inf, ys)

    best_x, best_y = _pick(xs, ys)

    # local peaks of the scan, strongest first
    padded = np.concatenate([[-np.inf], ys, [-np.inf]])
    peaks = np.nonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))[0]
    peaks = peaks[np.argsort(-ys[peaks], kind="stable")][:n_refine]

    def neg(x):
        if vectorized:
            return -float(f(np.array([x]))[0])
        return -float(f(x))

    for i in peaks:
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        if b - a <= tol.abs:
            continue
        res = _spo.minimize_scalar(
            neg,
            bounds=(a, b),
            method="bounded",
            options={"xatol": max(tol.abs, 1e-14), "maxiter": tol.max_iter},
        )
        x, y = float(res.x), -float(res.fun)
        if y > best_y + _tie_eps(best_y) or (abs(y - best_y) <= _tie_eps(best_y) and x < best_x):
            best_x, best_y = x, y
    return best_x, best_y


def _tie_eps(y: float) -> float:
    return 1e-13 * max(1.0, abs(y)) if math.isfinite(y) else 0.0


def _pick(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    top = np.max(ys)
    i = int(np.nonzero(ys >= top - _tie_eps(top))[0][0])
    return float(xs[i]), float(ys[i])
