from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle
from harmonic_kit import means, reconstruction as rc
from harmonic_kit.errors import LengthError


@st.composite
def stencils(draw):
    gaps = draw(st.lists(st.floats(0.05, 3.0), min_size=4, max_size=4))
    x = np.cumsum(gaps) + draw(st.floats(-5.0, 5.0))
    f = draw(st.lists(st.floats(-10.0, 10.0), min_size=4, max_size=4))
    return rc.Stencil(tuple(x.tolist()), tuple(f))


def test_stencil_validation():
    with pytest.raises(LengthError):
        rc.Stencil((0.0, 1.0, 2.0), (0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        rc.Stencil((0.0, 1.0, 1.0, 2.0), (0.0,) * 4)
    assert rc.Stencil((0.0, 1.0, 3.0, 4.0), (0.0,) * 4).target == 2.0


def test_gridfunction_validation():
    with pytest.raises(LengthError):
        rc.GridFunction(np.arange(3.0), np.zeros(3))
    with pytest.raises(ValueError):
        rc.GridFunction(np.array([0.0, 2.0, 1.0, 3.0]), np.zeros(4))


def test_baseline_uniform_step():
    s = rc.Stencil((0.0, 1.0, 2.0, 3.0), (0.0, 0.0, 0.0, 1.0))
    assert oracle.lagrange_value(s.x, s.f, Fraction(3, 2)) == Fraction(-1, 16)
    assert rc.baseline_midpoint(s) == -0.0625


def test_baseline_nonuniform_against_oracle():
    s = rc.Stencil((0.0, 1.0, 3.0, 4.0), (0.0, 0.0, 0.0, 1.0))
    assert oracle.lagrange_value(s.x, s.f, 2) == Fraction(-1, 6)
    assert rc.baseline_midpoint(s) == pytest.approx(-1 / 6, rel=1e-15)


@settings(max_examples=300, deadline=None)
@given(stencils())
def test_decomposition_reassembles_lagrange(s):
    exact = float(oracle.lagrange_value(s.x, s.f, Fraction(s.x[1]) / 2 + Fraction(s.x[2]) / 2))
    scale = max(1.0, max(abs(v) for v in s.f))
    assert abs(rc.baseline_midpoint(s) - exact) <= 1e-12 * scale
    assert abs(rc.decompose(s).reassemble() - exact) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(stencils())
def test_weights_sum_to_one(s):
    d = rc.decompose(s)
    assert abs(sum(d.weights) - 1.0) <= 4e-16
    assert all(wi > 0 for wi in d.weights)


@settings(max_examples=200, deadline=None)
@given(stencils())
def test_pph_correction_bounded(s):
    d = rc.decompose(s)
    corr = abs(rc.pph_midpoint(s) - d.affine_part)
    bound = abs(d.coupling) * min(abs(di) / wi for di, wi in zip(d.indicators, d.weights))
    assert corr <= bound * (1 + 1e-12)


def test_pph_equals_linear_on_parabola():
    g = rc.GridFunction.sample(lambda x: 3 * x * x - x + 2, np.array([0.0, 0.3, 1.1, 1.5, 2.6, 3.0, 3.2]))
    assert np.allclose(rc.reconstruct(g, "pph"), rc.reconstruct(g, "linear"), rtol=1e-13)


def test_reconstruct_matches_scalar_path():
    rng = np.random.default_rng(5)
    grid = np.cumsum(rng.uniform(0.1, 1.0, 20))
    g = rc.GridFunction(grid, rng.normal(size=20))
    for policy in (means.CLIP, means.SignPolicy.translate()):
        vec = rc.reconstruct(g, "pph", policy)
        assert vec.shape == (17,)
        scalar = [rc.pph_midpoint(g.stencil(j), policy) for j in range(17)]
        assert np.allclose(vec, scalar, rtol=1e-13, atol=1e-13)
    with pytest.raises(ValueError):
        rc.reconstruct(g, "cubic")


def test_second_differences():
    g = rc.GridFunction.sample(lambda x: x * x, np.array([0.0, 0.5, 2.0, 2.2, 4.0]))
    assert np.allclose(rc.second_differences(g), 2.0, rtol=1e-14)


class TestStep:
    def test_overshoot(self):
        g = rc.step_function(16)
        lin = rc.reconstruct(g, "linear")
        pph = rc.reconstruct(g, "pph")
        assert rc.overshoot_metric(lin, 0.0, 1.0) == 0.0625
        assert rc.overshoot_metric(pph, 0.0, 1.0) == 0.0

    @pytest.mark.parametrize("jump", [-3.0, 0.5, 7.0])
    def test_overshoot_scales_with_jump(self, jump):
        g = rc.step_function(16, jump)
        lo, hi = sorted((0.0, jump))
        assert rc.overshoot_metric(rc.reconstruct(g, "linear"), lo, hi) == pytest.approx(abs(jump) / 16, rel=1e-14)
        assert rc.overshoot_metric(rc.reconstruct(g, "pph"), lo, hi) == 0.0

    def test_translate_policy_does_not_suppress_overshoot(self):
        # indicators (1, -1) next to the jump: translating before the harmonic
        # mean pulls it towards the negative one, so the step overshoots by
        # more than 1/16 and approaches 1/16 only as lam grows. Clip is the
        # Gibbs-free policy.
        g = rc.step_function(16)
        over = [
            rc.overshoot_metric(rc.reconstruct(g, "pph", means.SignPolicy.translate(lam)), 0.0, 1.0)
            for lam in (1.5, 2.0, 4.0, 64.0)
        ]
        assert all(o > 0.0625 for o in over)
        assert over == sorted(over, reverse=True)
        assert over[-1] == pytest.approx(0.0625, rel=0.02)

    def test_report(self):
        rep = rc.recon_report(rc.step_function(16), truth=None)
        assert rep.overshoot == {"linear": 0.0625, "pph": 0.0}
        assert len(rep.midpoints) == 13

    def test_overshoot_metric_validation(self):
        with pytest.raises(ValueError):
            rc.overshoot_metric([0.0], 1.0, 0.0)
        assert rc.overshoot_metric([], 0.0, 1.0) == 0.0


class TestConvergence:
    @pytest.mark.parametrize("operator", ["linear", "pph"])
    def test_sin_fourth_order(self, operator):
        rows = rc.convergence_order(np.sin, (0.6, 2.5), 6, operator)
        assert rows[0].slope is None
        assert abs(rows[-1].slope - 4.0) <= 0.15

    def test_nonuniform_fourth_order(self):
        rows = rc.convergence_order(np.sin, (0.6, 2.5), 6, "pph", jitter=0.3, seed=1)
        assert abs(rows[-1].slope - 4.0) <= 0.15

    def test_translate_tracks_clip(self):
        # the two policies differ by O(h^2) in the mean, O(h^4) at the midpoint
        base = dict(base_intervals=16)
        clip = rc.convergence_order(np.sin, (0.6, 2.5), 6, "pph", **base)
        trans = rc.convergence_order(np.sin, (0.6, 2.5), 6, "pph", means.SignPolicy.translate(), **base)
        assert abs(trans[-1].slope - 4.0) <= 0.15
        assert trans[-1].error <= 10 * clip[-1].error

    def test_cubic_exact_for_linear(self):
        rows = rc.convergence_order(lambda x: x**3 - 2 * x, (0.6, 2.5), 4, "linear")
        assert all(r.error <= 1e-13 for r in rows)

    def test_needs_three_levels(self):
        with pytest.raises(ValueError):
            rc.convergence_order(np.sin, (0.0, 1.0), 2)

    def test_dyadic_nesting(self):
        grids = list(rc.dyadic_grids((0.0, 1.0), 3, base_intervals=4, jitter=0.2, seed=3))
        assert [g.size for g in grids] == [5, 9, 17]
        assert np.array_equal(grids[1][::2], grids[0])


def test_translate_and_clip_means_agree_to_second_order():
    # on sin over [0.6, 2.5] both indicators keep one sign, so the two
    # policies differ only through the mean; that difference is O(h^2)
    prev, slopes = None, []
    for grid in rc.dyadic_grids((0.6, 2.5), 6, 16):
        g = rc.GridFunction.sample(np.sin, grid)
        diff = rc.reconstruct(g, "pph") - rc.reconstruct(g, "pph", means.SignPolicy.translate())
        h2 = np.diff(grid)[1:-1]
        gap = float(np.max(np.abs(diff) / (h2 * h2 / 8)))
        if prev is not None:
            slopes.append(np.log2(prev / gap))
        prev = gap
    assert slopes[-1] >= 1.95

