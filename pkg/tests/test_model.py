import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thresholdgame.model import (
    AbilityBranch,
    Branch,
    EmptyBranchError,
    ModelError,
    PointMass,
    PointMassDensityError,
    PostingCost,
    Primitives,
    Prior,
    Technology,
    TestNoise,
    TruncExp,
    belief_cdf,
    belief_density,
    belief_mean,
    branch_cdf,
    branch_segments,
    branch_weight,
    branch_weight_and_density,
)
from thresholdgame.numerics import integrate

thetas = st.floats(0.0, 1.0)
etas = st.floats(0.0, 0.45)


def test_primitives_validation():
    Primitives(0.0, 2.0, 1.0)
    for bad in [(-1, 2, 1), (1, 1, 1), (1, 2, 0), (1, 2, math.inf)]:
        with pytest.raises(ModelError):
            Primitives(*bad)


def test_cost(bench):
    assert bench.cost(0.5) == pytest.approx(0.25)
    assert bench.marginal_cost(0.5) == pytest.approx(1.0)


def test_cutoff():
    m, a = Technology.MULTIPLICATIVE, Technology.ADDITIVE
    assert m.cutoff(0.2, 0.4) == pytest.approx(0.5)
    assert m.cutoff(0.2, 0.0) == math.inf
    assert m.cutoff(0.0, 0.0) == 0.0
    assert a.cutoff(0.7, 0.2) == pytest.approx(0.5)


def test_noise_validation():
    assert TestNoise().noiseless
    with pytest.raises(ModelError):
        TestNoise(eta_minus=1.0)


def test_posting_cost_parse():
    assert PostingCost.parse("none")(0.7) == 0.0
    assert PostingCost.parse("linear:0.1")(0.5) == pytest.approx(0.05)
    assert PostingCost.parse("power:2,1.5")(0.25) == pytest.approx(2 * 0.125)
    with pytest.raises(ModelError):
        PostingCost.parse("cubic:1")
    with pytest.raises(ModelError):
        PostingCost("power", 1.0, 0.5)


class TestBeliefs:
    def test_truncexp_mass(self):
        assert TruncExp(1.0, 0.0, math.inf).mass == 1.0
        assert TruncExp(2.0, 0.1, 0.3).mass == pytest.approx(math.exp(-0.2) - math.exp(-0.6))

    def test_truncexp_validation(self):
        with pytest.raises(ModelError):
            TruncExp(1.0, 0.5, 0.5)

    def test_density_integrates_to_one(self):
        for b in (Prior(0.7), TruncExp(1.3, 0.2, 0.9), TruncExp(0.5, 1.0, math.inf)):
            lo, hi = (b.a, b.b) if isinstance(b, TruncExp) else (0.0, math.inf)
            assert integrate(lambda t: belief_density(b, t), lo, hi) == pytest.approx(1.0, abs=1e-9)

    def test_point_mass_has_no_density(self):
        with pytest.raises(PointMassDensityError):
            belief_density(PointMass(0.3), 0.3)
        assert belief_cdf(PointMass(0.3), 0.29) == 0.0
        assert belief_cdf(PointMass(0.3), 0.3) == 1.0

    def test_means(self):
        assert belief_mean(Prior(2.0)) == pytest.approx(0.5)
        b = TruncExp(1.3, 0.2, 0.9)
        m = integrate(lambda t: t * belief_density(b, t), 0.2, 0.9)
        assert belief_mean(b) == pytest.approx(m, abs=1e-10)

    @given(st.floats(0.1, 5.0), st.floats(0.0, 2.0), st.floats(0.01, 3.0), st.floats(0.0, 6.0))
    def test_cdf_monotone_bounded(self, lam, a, w, x):
        b = TruncExp(lam, a, a + w)
        assert 0.0 <= belief_cdf(b, x) <= 1.0
        assert belief_cdf(b, x) <= belief_cdf(b, x + 0.1) + 1e-15


class TestPosteriors:
    def test_noiseless_weights(self):
        assert branch_weight(AbilityBranch(Branch.PASS, 0.3)) == pytest.approx(0.7)
        assert branch_weight(AbilityBranch(Branch.FAIL, 0.3)) == pytest.approx(0.3)

    def test_degenerate_branches(self):
        (seg,) = branch_segments(AbilityBranch(Branch.PASS, 1.0))
        assert (seg.lo, seg.hi, seg.mass) == (1.0, 1.0, 1.0)
        (seg,) = branch_segments(AbilityBranch(Branch.FAIL, 0.0))
        assert (seg.lo, seg.hi) == (0.0, 0.0)
        with pytest.raises(EmptyBranchError):
            branch_weight_and_density(AbilityBranch(Branch.PASS, 1.0))

    def test_theta_star_range(self):
        with pytest.raises(ModelError):
            AbilityBranch(Branch.PASS, 1.2)

    def test_noisy_at_one_pass_nonempty(self):
        ab = AbilityBranch(Branch.PASS, 1.0, TestNoise(0.0, 0.1))
        assert branch_weight(ab) == pytest.approx(0.1)

    @given(thetas, etas, etas)
    def test_weights_sum_to_one(self, ts, em, ep):
        n = TestNoise(em, ep)
        w = branch_weight(AbilityBranch(Branch.PASS, ts, n)) + branch_weight(AbilityBranch(Branch.FAIL, ts, n))
        assert w == pytest.approx(1.0, abs=1e-12)

    @given(thetas, etas, etas, st.sampled_from(list(Branch)))
    def test_posterior_normalized(self, ts, em, ep, br):
        ab = AbilityBranch(br, ts, TestNoise(em, ep))
        assert sum(s.mass for s in branch_segments(ab)) == pytest.approx(1.0, abs=1e-12)
        assert branch_cdf(ab, 1.0) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0.05, 0.95), etas, etas)
    def test_density_matches_cdf(self, ts, em, ep):
        ab = AbilityBranch(Branch.PASS, ts, TestNoise(em, ep))
        _, dens = branch_weight_and_density(ab)
        x = 0.5 * (ts + 1.0)
        val = integrate(dens, 0.0, x, points=[ts])
        assert val == pytest.approx(branch_cdf(ab, x), abs=1e-9)
