import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle
from harmonic_kit import geometry, means
from harmonic_kit.errors import LengthError, NoConvergence, UnsupportedDimension

W3 = [Fraction(1, 5), Fraction(1, 5), Fraction(3, 5)]


def close(x, y, rel=1e-14):
    return abs(x - float(y)) <= rel * max(1.0, abs(float(y)))


@pytest.mark.parametrize("variant", ["thm3", "thm4"])
def test_xbar_and_b_match_oracle(variant):
    scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6], variant)
    for got, want in zip(scene.x_bar, oracle.xbar([3, 4, 6], W3, variant)):
        assert close(got, want)
    for got, want in zip(scene.b, oracle.b_coefficients([3, 4, 6], W3, variant)):
        assert close(got, want)


def test_thm4_xbar_exact_values():
    assert oracle.xbar([3, 4, 6], W3, "thm4") == [Fraction(4, 13), Fraction(3, 13), Fraction(20, 13)]
    assert oracle.b_coefficients([3, 4, 6], W3, "thm4") == [Fraction(-26, 9), Fraction(-52, 15)]


def test_cap_coefficients_simplified_equal_literal():
    scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6], "thm4")
    lit = oracle.c_coefficients_literal([3, 4, 6], W3)
    assert lit == [Fraction(26, 9), Fraction(52, 15)]
    for got, want in zip(scene.c, lit):
        assert close(got, want)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_literal_and_simplified_cap_agree_exactly(n, rnd):
    a = [Fraction(rnd.randint(1, 40), rnd.randint(1, 9)) for _ in range(n)]
    w = oracle.normalize([rnd.randint(1, 20) for _ in range(n)])
    h = oracle.harmonic(a, w)
    xb = oracle.xbar(a, w, "thm4")
    simplified = [h * (Fraction(1, n) - w[-1]) / ((n - 1) * x * (x - 1)) for x in xb[: n - 1]]
    assert simplified == oracle.c_coefficients_literal(a, w)


@pytest.mark.parametrize("variant", ["thm3", "thm4"])
def test_residuals_vanish_at_xbar(variant):
    scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6], variant)
    assert max(abs(r) for r in geometry.surface_residuals(scene, scene.x_bar)) <= 1e-12
    with pytest.raises(LengthError):
        geometry.surface_residuals(scene, scene.x_bar[:-1])


def test_prism_heights():
    scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6])
    ht = geometry.prism_heights(scene)
    assert math.isclose(ht["h_at_xbar"], 60 / 13, rel_tol=1e-12)
    assert math.isclose(ht["m_at_barycenter"], 5.0, rel_tol=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_uniform_weights_degenerate(n):
    a = [1.0 + 0.7 * k for k in range(n)]
    w = [Fraction(1, n)] * n
    assert all(b == 0 for b in oracle.b_coefficients(a, w, "thm4"))
    assert all(b == 0 for b in oracle.b_coefficients(a, w, "thm3"))
    assert all(c == 0 for c in oracle.c_coefficients_literal(a, w))
    for variant in ("thm3", "thm4"):
        scene = geometry.build_scene(a, means.uniform_weights(n), variant)
        assert scene.degenerate
        assert all(abs(v) <= 1e-14 for v in scene.b + scene.c)


def test_corollary_scene():
    scene = geometry.build_scene([3, 6], [0.6, 0.4], "corollary")
    assert scene.x_bar[-1] == scene.h_w == 3.75
    assert scene.h_star == 7.5
    assert scene.degenerate


def test_corollary_three_point_value():
    # a/w = (15, 70/3, 100/3); H_w = 2100/293
    wq = oracle.normalize([Fraction(4, 10), Fraction(3, 10), Fraction(3, 10)])
    assert oracle.harmonic([6, 7, 10], wq) == Fraction(2100, 293)
    scene = geometry.corollary_scene([6, 7, 10], [0.4, 0.3, 0.3])
    assert close(scene.x_bar[-1], Fraction(2100, 293))
    assert math.isclose(3 * scene.x_bar[-1], scene.h_star, rel_tol=1e-12)


class TestParabolaPair:
    a1, a2, w1, w2 = 14.0, 10.0, 0.7, 0.3

    @pytest.mark.parametrize("case", [1, 2, 3])
    def test_curves_meet_at_xh(self, case):
        p = geometry.parabola_pair_2d(self.a1, self.a2, self.w1, self.w2, case)
        assert p.x_h == pytest.approx(0.625, abs=1e-15)
        assert p.p1(p.x_h) == pytest.approx(p.y_h, rel=1e-13)
        assert p.p2(p.x_h) == pytest.approx(p.y_h, rel=1e-13)
        assert p.p1(0.0) == pytest.approx(0.0, abs=1e-13)
        assert p.p1(1.0) == pytest.approx(self.a1, rel=1e-13)
        assert p.p2(0.0) == pytest.approx(self.a2, rel=1e-13)
        assert p.p2(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_chord_height_at_xh_is_harmonic_mean(self):
        p = geometry.parabola_pair_2d(self.a1, self.a2, self.w1, self.w2)
        assert geometry.chord_height(self.a1, self.a2, p.x_h) == pytest.approx(12.5, rel=1e-14)

    def test_case_heights(self):
        h = 12.5
        ys = [geometry.parabola_pair_2d(self.a1, self.a2, self.w1, self.w2, c).y_h for c in (1, 2, 3)]
        assert ys == pytest.approx([self.w2 * h, self.w1 * h, h / 2], rel=1e-13)

    def test_case1_parabola_through_three_points(self):
        p = geometry.parabola_pair_2d(self.a1, self.a2, self.w1, self.w2, 1)
        pts = [(0, 0), (p.x_h, p.y_h), (1, self.a1)]
        want = oracle.interpolating_quadratic(pts)
        assert p.p1.coefficients() == pytest.approx([float(v) for v in want], rel=1e-12, abs=1e-12)

    def test_rejects_unknown_case(self):
        with pytest.raises(ValueError):
            geometry.parabola_pair_2d(1.0, 2.0, 0.5, 0.5, 4)

    @pytest.mark.parametrize("variant, case", [("thm3", 1), ("thm4", 3)])
    def test_n2_scene_matches_planar_case(self, variant, case):
        # base coordinate x_1 runs from B_2 (x=0) to B_1 (x=1); the planar
        # construction puts a_2 at 0 and a_1 at 1
        scene = geometry.build_scene([self.a1, self.a2], [self.w1, self.w2], variant)
        pair = geometry.parabola_pair_2d(self.a1, self.a2, self.w1, self.w2, case)
        xs = np.linspace(0.0, 1.0, 11)
        v1 = [scene.surfaces[0].value((x, 0.0)) for x in xs]
        assert np.allclose(v1, pair.p1(xs), rtol=1e-12, atol=1e-12)
        assert scene.x_bar == pytest.approx((pair.x_h, pair.y_h), rel=1e-14)


def test_quadratic_rejects_nonfinite():
    with pytest.raises(ValueError):
        geometry.Quadratic1D(float("nan"), 0.0, 0.0)


class TestNewton:
    def test_converges_from_barycenter(self):
        scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6])
        r = geometry.numeric_intersection(scene, list(scene.barycenter) + [scene.m_w])
        assert np.allclose(r.x, scene.x_bar, atol=1e-12)
        assert r.residual <= 1e-10

    def test_zero_iterations_at_solution(self):
        scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6])
        r = geometry.numeric_intersection(scene, scene.x_bar)
        assert r.iterations == 0

    def test_stall_raises_with_last_iterate(self):
        # n = 2, thm3 with w2 > w1: the 1-d iteration map has a second root
        # w2 / (w2 - w1) > 1, so starts past the vertex run into x = 1
        scene = geometry.build_scene([5.0, 5.0], [0.2, 0.8], "thm3")
        with pytest.raises(NoConvergence) as info:
            geometry.numeric_intersection(scene, [0.99, 0.1])
        exc = info.value
        assert exc.x is not None and exc.residual > 1e-10
        assert exc.x[0] == pytest.approx(1.0, abs=1e-6)

    def test_start_shape_checked(self):
        scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6])
        with pytest.raises(LengthError):
            geometry.numeric_intersection(scene, [0.5, 0.5])

    def test_random_interior_start_in_box(self):
        scene = geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6])
        rng = np.random.default_rng(3)
        lo, hi = geometry.prism_box(scene)
        for _ in range(50):
            x = geometry.random_interior_start(scene, rng)
            assert np.all(x > lo) and np.all(x < hi)


class TestSampling:
    def test_simplex_grid_sizes(self):
        assert geometry.simplex_grid(5, 1).shape == (5, 1)
        assert geometry.simplex_grid(5, 2).shape == (15, 2)
        with pytest.raises(UnsupportedDimension):
            geometry.simplex_grid(5, 3)

    def test_prism_surfaces(self):
        fig = geometry.sample_surfaces(geometry.build_scene([3, 4, 6], [0.2, 0.2, 0.6]), 51)
        assert sorted(fig.surfaces) == ["Pi", "V1", "V2", "V3"]
        assert all(v.shape == (51 * 52 // 2, 3) for v in fig.surfaces.values())

    def test_markers_cross_check(self):
        scene = geometry.corollary_scene([3, 4, 6], [0.2, 0.2, 0.6])
        fig = geometry.sample_surfaces(scene, 5)
        m = fig.markers
        assert "Pi_star" in fig.surfaces
        assert abs(m["h_w"] - means.weighted_harmonic([3, 4, 6], [0.2, 0.2, 0.6])) <= 1e-12
        assert abs(m["h_star"] - means.scaled_uniform_harmonic([3, 4, 6], [0.2, 0.2, 0.6])) <= 1e-12
        assert m["h_star"] == scene.h_star and m["m_star"] == scene.m_star

    def test_parabola_tracks(self):
        pair = geometry.parabola_pair_2d(14, 10, 0.7, 0.3)
        fig = geometry.sample_parabola_pair(pair, 14, 10, 101)
        assert sorted(fig.surfaces) == ["chord", "p1", "p2"]
        assert fig.surfaces["p1"].shape == (101, 2)
        assert fig.markers["h_w"] == pytest.approx(12.5, rel=1e-14)

    def test_high_dimension_markers_only(self):
        fig = geometry.sample_surfaces(geometry.build_scene([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4]), 5)
        assert fig.surfaces == {} and len(fig.markers["x_bar"]) == 4


def test_failed_starts_are_boundary_stalls():
    # companion to the random-start acceptance check: no start reaches an
    # in-box point other than xbar, and every run that stops early is
    # pressed against a face of the prism box
    from harmonic_kit import verify

    rng = np.random.default_rng(11)
    res = verify.check_newton(rng, 200, starts=25)
    assert res.passed, res.example
    assert res.notes["stalled_on_boundary"] > 0


def test_three_dimensional_forms_match_general_builder():
    # n = 3 written out: b_i = H (w_3 - w_i) / (x_i (x_i - 1)) for the plane
    # cap, and c_i = (H/3 + (x_1 + x_2 - 1) a_3) / (2 x_i (x_i - 1)) for the
    # paraboloid cap
    a, w = [Fraction(3), Fraction(4), Fraction(6)], [Fraction(1, 10), Fraction(3, 10), Fraction(6, 10)]
    h = oracle.harmonic(a, w)
    x = [w[i] * h / a[i] for i in range(2)]
    b3 = [h * (w[2] - w[i]) / (x[i] * (x[i] - 1)) for i in range(2)]
    b4 = [h * (Fraction(1, 3) - w[i]) / (x[i] * (x[i] - 1)) for i in range(2)]
    c4 = [(h / 3 + (x[0] + x[1] - 1) * a[2]) / (2 * x[i] * (x[i] - 1)) for i in range(2)]
    plane = geometry.build_scene([3, 4, 6], [0.1, 0.3, 0.6], "thm3")
    para = geometry.build_scene([3, 4, 6], [0.1, 0.3, 0.6], "thm4")
    assert plane.b == pytest.approx([float(v) for v in b3], rel=1e-13)
    assert para.b == pytest.approx([float(v) for v in b4], rel=1e-13)
    assert para.c == pytest.approx([float(v) for v in c4], rel=1e-13)
