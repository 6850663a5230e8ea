import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import lambertw

from thresholdgame.numerics import (
    Bracket,
    ConvergenceError,
    DomainError,
    MaxIterationsError,
    NoCrossingError,
    NoSignChangeError,
    Tolerance,
    find_bracket,
    find_root_bracketed,
    integrate,
    lambert_w0,
    maximize_1d,
    mixed_grid,
)


class TestLambertW:
    def test_known_values(self):
        assert lambert_w0(0.0) == 0.0
        assert abs(lambert_w0(math.e) - 1.0) <= 1e-12
        assert lambert_w0(0.5) == pytest.approx(0.351734, abs=1e-6)
        assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)

    def test_domain(self):
        with pytest.raises(DomainError):
            lambert_w0(-0.5)
        with pytest.raises(DomainError):
            lambert_w0(float("nan"))

    @given(st.floats(min_value=1e-12, max_value=1e12))
    def test_identity(self, c):
        w = lambert_w0(c)
        assert abs(w * math.exp(w) - c) <= 1e-10 * max(1.0, c)

    @given(st.floats(min_value=-1 / math.e + 1e-9, max_value=-1e-12))
    def test_negative_branch_matches_scipy(self, c):
        assert lambert_w0(c) == pytest.approx(lambertw(c).real, rel=1e-8, abs=1e-10)

    def test_matches_scipy_on_log_grid(self):
        for c in np.geomspace(1e-8, 1e8, 50):
            assert lambert_w0(c) == pytest.approx(lambertw(c).real, rel=1e-13)

    def test_monotone(self):
        cs = np.geomspace(1e-6, 1e6, 200)
        ws = [lambert_w0(c) for c in cs]
        assert np.all(np.diff(ws) > 0)


class TestRoots:
    def test_simple_root(self):
        r = find_root_bracketed(lambda x: x * x - 2.0, Bracket(0.0, 2.0))
        assert r == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_endpoint_root(self):
        assert find_root_bracketed(lambda x: x, Bracket(0.0, 1.0)) == 0.0

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            find_root_bracketed(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))

    def test_iteration_budget(self):
        with pytest.raises(MaxIterationsError):
            find_root_bracketed(lambda x: x ** 3 - 0.3, Bracket(0.0, 1.0), Tolerance(1e-300, 1e-16, 1))

    def test_bad_bracket(self):
        with pytest.raises(DomainError):
            Bracket(1.0, 1.0)

    def test_find_bracket(self):
        b = find_bracket(lambda x: x - 0.37, np.linspace(0, 1, 11))
        assert b.lo == pytest.approx(0.3) and b.hi == pytest.approx(0.4)
        with pytest.raises(NoCrossingError):
            find_bracket(lambda x: 1.0 + x, np.linspace(0, 1, 11))


class TestGrid:
    def test_mixed_grid_shape(self):
        g = mixed_grid()
        assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e3)
        assert np.all(np.diff(g) > 0)
        assert len(g) == 79  # pivot shared

    def test_mixed_grid_domain(self):
        with pytest.raises(DomainError):
            mixed_grid(1.0, 0.5)


class TestIntegrate:
    def test_polynomial(self):
        assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_semi_infinite(self):
        assert integrate(lambda t: math.exp(-t), 0.0, math.inf) == pytest.approx(1.0, abs=1e-10)

    def test_kink_points(self):
        f = lambda x: abs(x - 0.3)
        exact = 0.3 ** 2 / 2 + 0.7 ** 2 / 2
        assert integrate(f, 0.0, 1.0, points=[0.3]) == pytest.approx(exact, abs=1e-12)
        assert integrate(lambda t: math.exp(-t) * (t > 2.0), 0.0, math.inf, points=[2.0]) == pytest.approx(
            math.exp(-2.0), abs=1e-10
        )

    def test_empty_and_bad_range(self):
        assert integrate(math.sin, 1.0, 1.0) == 0.0
        with pytest.raises(DomainError):
            integrate(math.sin, 1.0, 0.0)

    def test_nonconvergence_reported(self):
        with pytest.raises(ConvergenceError):
            integrate(lambda x: 1.0 / x, 0.0, 1.0, Tolerance(1e-14, 1e-14, 5))


class TestMaximize:
    def test_smooth(self):
        x, y = maximize_1d(lambda x: -(x - 0.3) ** 2, 0.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-7)

    def test_kinked(self):
        x, _ = maximize_1d(lambda x: -abs(x - 0.5) + 0.1 * (x < 0.5), 0.0, 1.0)
        assert x == pytest.approx(0.5, abs=1e-6)

    def test_corner_and_ties(self):
        x, _ = maximize_1d(lambda x: x, 0.0, 2.0)
        assert x == 2.0
        x, _ = maximize_1d(lambda x: 1.0, 0.0, 1.0)
        assert x == 0.0

    def test_vectorized(self):
        x, _ = maximize_1d(lambda x: np.sin(3 * x), 0.0, 1.0, vectorized=True)
        assert x == pytest.approx(math.pi / 6, abs=1e-7)

    def test_degenerate_interval(self):
        assert maximize_1d(lambda x: x, 0.4, 0.4) == (0.4, 0.4)
        with pytest.raises(DomainError):
            maximize_1d(lambda x: x, 1.0, 0.0)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_two_peaks_finds_global(self, a, b):
        f = lambda x: max(1.0 - 40 * abs(x - a), 0.9 - 40 * abs(x - b), 0.0)
        x, y = maximize_1d(f, 0.0, 1.0)
        assert y == pytest.approx(max(f(a), f(b)), abs=1e-6)
