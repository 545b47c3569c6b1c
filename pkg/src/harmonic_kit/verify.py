"""Seeded randomized checks of the invariants, as run by ``harmonic-kit verify``.

Every property draws its own cases from one ``numpy.random.Generator``
(PCG64) seeded by the caller, in a fixed order, so a seed pins the whole
case set. A property reports how many cases it checked, how many failed,
and the smallest failing input it met.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import geometry, means, reconstruction
from ._backend import BACKEND
from ._pykernels import linear_midpoints as _py_linear, pph_midpoints as _py_pph
from .errors import NoConvergence

GENERATOR = "numpy.random.PCG64"

REL_TOL = 1e-12
RESIDUAL_TOL = 1e-10
NEWTON_TOL = 1e-8


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failed: int = 0
    example: Optional[dict] = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, case: dict):
        self.checked += 1
        if not ok:
            self.failed += 1
            if self.example is None or case.get("n", 0) < self.example.get("n", 0):
                self.example = case

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def random_sample(rng: np.random.Generator, n: int, lo: float = 0.5, hi: float = 10.0) -> list:
    return rng.uniform(lo, hi, n).tolist()


def random_weights(rng: np.random.Generator, n: int, floor: float = 0.0) -> list:
    """Positive weights; with ``floor`` some entries are pushed down to ``floor``."""
    w = rng.uniform(0.05, 1.0, n)
    if floor:
        k = rng.integers(1, n)
        w[rng.choice(n, size=k, replace=False)] = floor
    return (w / w.sum()).tolist()


def _rel(x, y) -> float:
    return abs(x - y) / max(1.0, abs(y))


# {{{ means


def check_gap_identity(rng, cases):
    res = PropertyResult("gap identity")
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        a = random_sample(rng, n, 0.01, 100.0)
        w = random_weights(rng, n)
        r = means.mean_gap(a, w)
        ok = abs(r.gap_direct - r.gap_closed_form) <= REL_TOL * max(1.0, r.m_w)
        res.record(ok, {"n": n, "a": a, "w": w, "gap_direct": r.gap_direct, "gap_closed_form": r.gap_closed_form})
    return res


def check_strict_bound(rng, cases):
    res = PropertyResult("strict bound")
    for k in range(cases):
        n = int(rng.integers(2, 9))
        a = random_sample(rng, n, 0.01, 100.0)
        w = random_weights(rng, n, floor=1e-6 if k % 2 else 0.0)
        h = means.weighted_harmonic(a, w)
        bound = means.min_bound(a, w)
        res.record(h < bound, {"n": n, "a": a, "w": w, "h_w": h, "min_bound": bound})
    return res


def check_mean_inequality(rng, cases):
    res = PropertyResult("mean inequality")
    for k in range(cases):
        n = int(rng.integers(2, 9))
        w = random_weights(rng, n)
        if k % 4 == 0:
            a = [float(rng.uniform(0.5, 10.0))] * n
            h, m = means.weighted_harmonic(a, w), means.weighted_arithmetic(a, w)
            ok = math.isclose(h, m, rel_tol=REL_TOL)
        else:
            a = random_sample(rng, n)
            a[0] = a[-1] * 1.5
            h, m = means.weighted_harmonic(a, w), means.weighted_arithmetic(a, w)
            ok = h < m
        res.record(ok, {"n": n, "a": a, "w": w, "h_w": h, "m_w": m})
    return res


def check_scaling(rng, cases):
    res = PropertyResult("scaling relation")
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        a, w = random_sample(rng, n), random_weights(rng, n)
        lhs = n * means.weighted_harmonic(a, w)
        rhs = means.scaled_uniform_harmonic(a, w)
        res.record(abs(lhs - rhs) <= REL_TOL * abs(rhs), {"n": n, "a": a, "w": w, "n_h_w": lhs, "h_star": rhs})
    return res


def check_symmetry(rng, cases):
    res = PropertyResult("symmetry")
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        a, w = random_sample(rng, n), random_weights(rng, n)
        perm = rng.permutation(n)
        wv = means.validate_weights(w)
        pa = [a[i] for i in perm]
        pw = means.WeightVector(tuple(wv[i] for i in perm))
        ok = means.weighted_harmonic(a, wv) == means.weighted_harmonic(pa, pw) and (
            means.weighted_arithmetic(a, wv) == means.weighted_arithmetic(pa, pw)
        )
        res.record(ok, {"n": n, "a": a, "w": w, "perm": perm.tolist()})
    return res


def closeness_slope(u, w, exponents=range(4, 13)) -> float:
    """Least-squares log2 slope of ``M_w - H_w`` for ``a = 1 + h u``."""
    hs, gaps = [], []
    for e in exponents:
        h = 2.0 ** -e
        r = means.mean_gap([1.0 + h * ui for ui in u], w)
        hs.append(math.log2(h))
        gaps.append(math.log2(r.gap_direct))
    return float(np.polyfit(hs, gaps, 1)[0])


def check_second_order(rng, cases):
    res = PropertyResult("second-order closeness")
    for _ in range(max(1, cases // 100)):
        n = int(rng.integers(2, 9))
        u = rng.uniform(-1.0, 1.0, n).tolist()
        w = random_weights(rng, n)
        slope = closeness_slope(u, w)
        res.record(abs(slope - 2.0) <= 0.05, {"n": n, "u": u, "w": w, "slope": slope})
    return res


def check_clip_bound(rng, cases):
    res = PropertyResult("clip bound")
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        v = rng.uniform(-5.0, 5.0, n)
        if rng.random() < 0.2:
            v[rng.integers(n)] = 0.0
        v = v.tolist()
        w = means.validate_weights(random_weights(rng, n))
        g = means.guarded_harmonic(v, w)
        bound = min(abs(x) / wi for x, wi in zip(v, w))
        mixed = not (all(x > 0 for x in v) or all(x < 0 for x in v))
        ok = abs(g) <= bound and (g == 0.0 if mixed else True)
        res.record(ok, {"n": n, "v": v, "w": list(w), "result": g})
    return res


# }}}


# {{{ geometry


def _scene_cases(rng, cases):
    for k in range(min(cases, 200)):
        n = int(rng.integers(2, 7))
        yield n, random_sample(rng, n), random_weights(rng, n), ("thm3", "thm4")[k % 2]


def _vertices(scene):
    n = scene.n
    out = []
    for i in range(n):
        base = [0.0] * (n - 1)
        if i < n - 1:
            base[i] = 1.0
        out.append((base, scene.heights[i]))
    return out


def check_interpolation(rng, cases):
    res = PropertyResult("surface interpolation")
    for n, a, w, variant in _scene_cases(rng, cases):
        scene = geometry.build_scene(a, w, variant)
        worst = 0.0
        for j, (base, height) in enumerate(_vertices(scene)):
            for i, s in enumerate(scene.surfaces):
                # V_i passes through P_i and B_j (j != i); the cap through P_n and B_1..B_{n-1}
                z = height if i == j else 0.0
                worst = max(worst, abs(s.residual(tuple(base) + (z,))))
        res.record(worst <= 1e-13 * max(scene.heights), {"n": n, "a": a, "w": w, "variant": variant, "worst": worst})
    return res


def check_residuals(rng, cases):
    res = PropertyResult("analytic residuals")
    for n, a, w, variant in _scene_cases(rng, cases):
        scene = geometry.build_scene(a, w, variant)
        r = max(abs(v) for v in geometry.surface_residuals(scene, scene.x_bar))
        inside = all(0.0 < x < 1.0 and abs(x * (x - 1.0)) > 0.0 for x in scene.x_bar[:-1])
        res.record(r <= RESIDUAL_TOL and inside, {"n": n, "a": a, "w": w, "variant": variant, "residual": r})
    return res


def check_heights(rng, cases):
    res = PropertyResult("prism heights")
    for n, a, w, variant in _scene_cases(rng, cases):
        scene = geometry.build_scene(a, w, variant)
        ht = geometry.prism_heights(scene)
        ok = _rel(ht["h_at_xbar"], scene.h_w) <= REL_TOL and _rel(ht["m_at_barycenter"], scene.m_w) <= REL_TOL
        res.record(ok, {"n": n, "a": a, "w": w, "variant": variant, **ht})
    return res


def on_face(x, lo, hi, rel: float = 1e-6) -> bool:
    """True when ``x`` touches a face of the box ``[lo, hi]``.

    Damping halves the step up to 30 times, so a run pushed against a face
    stops a few ``2**-30`` box widths short of it.
    """
    tol = rel * (np.asarray(hi) - np.asarray(lo))
    return bool(np.any((x - lo <= tol) | (hi - x <= tol)))


def check_newton(rng, cases, starts: int = 10):
    """Converged runs must land on ``xbar``; runs that stop early must stop on the box boundary.

    A second root inside the prism would show up as a converged run away
    from ``xbar``. Starts beyond a fold of the system head for a root outside
    the prism and stall on the box boundary; those are counted, not failed.
    """
    res = PropertyResult("newton uniqueness")
    converged = stalled = 0
    for n, a, w, variant in _scene_cases(rng, cases):
        scene = geometry.build_scene(a, w, variant)
        lo, hi = geometry.prism_box(scene)
        xb = np.array(scene.x_bar)
        ok = True
        dev = 0.0
        for _ in range(starts):
            start = geometry.random_interior_start(scene, rng)
            try:
                x = np.array(geometry.numeric_intersection(scene, start).x)
            except NoConvergence as exc:
                stalled += 1
                x = np.array(exc.x)
                if not on_face(x, lo, hi):
                    ok = False
                continue
            converged += 1
            dev = max(dev, float(np.max(np.abs(x - xb))))
            ok = ok and dev <= NEWTON_TOL
        res.record(ok, {"n": n, "a": a, "w": w, "variant": variant, "max_deviation": dev})
    res.notes = {"starts_per_scene": starts, "converged": converged, "stalled_on_boundary": stalled}
    return res


def check_degeneracy(rng, cases):
    res = PropertyResult("degeneracy")
    for n in range(2, 9):
        a = random_sample(rng, n)
        for variant in ("thm3", "thm4"):
            scene = geometry.build_scene(a, means.uniform_weights(n), variant)
            worst = max([abs(b) for b in scene.b] + [abs(c) for c in scene.c])
            res.record(worst <= 1e-14, {"n": n, "a": a, "variant": variant, "worst": worst})
    return res


def check_corollary(rng, cases):
    res = PropertyResult("corollary coherence")
    for n, a, w, _ in _scene_cases(rng, cases):
        cor = geometry.corollary_scene(a, w)
        ref = geometry.build_scene(a, w, "thm3")
        h_star = means.scaled_uniform_harmonic(a, w)
        resid = max(abs(v) for v in geometry.surface_residuals(cor, cor.x_bar))
        ok = (
            cor.x_bar[:-1] == ref.x_bar[:-1]
            and cor.x_bar[-1] == cor.h_w
            and _rel(cor.x_bar[-1], h_star / n) <= REL_TOL
            and resid <= RESIDUAL_TOL
        )
        res.record(ok, {"n": n, "a": a, "w": w})
    return res


# }}}


# {{{ reconstruction


def _random_stencil(rng):
    x = np.cumsum(rng.uniform(0.1, 2.0, 4)) + rng.uniform(-3.0, 3.0)
    f = rng.normal(size=4)
    return reconstruction.Stencil(tuple(x.tolist()), tuple(f.tolist()))


def check_decomposition(rng, cases):
    res = PropertyResult("decomposition identity")
    for _ in range(cases):
        s = _random_stencil(rng)
        lin = reconstruction.baseline_midpoint(s)
        re = reconstruction.decompose(s).reassemble()
        scale = max(abs(v) for v in s.f)
        res.record(abs(lin - re) <= 1e-13 * max(abs(lin), scale), {"n": 4, "x": s.x, "f": s.f, "linear": lin, "reassembled": re})
    return res


def check_quadratic_reproduction(rng, cases):
    res = PropertyResult("quadratic reproduction")
    for _ in range(max(1, cases // 10)):
        grid = np.cumsum(rng.uniform(0.1, 1.0, 12))
        c = rng.normal(size=3)
        if abs(c[0]) < 0.1:
            c[0] = 0.5
        g = reconstruction.GridFunction.sample(lambda x: c[0] * x * x + c[1] * x + c[2], grid)
        lin = reconstruction.reconstruct(g, "linear")
        pph = reconstruction.reconstruct(g, "pph")
        scale = float(np.max(np.abs(g.values)))
        ok = bool(np.all(np.abs(pph - lin) <= 1e-12 * scale))
        res.record(ok, {"n": 12, "grid": grid.tolist(), "coefficients": c.tolist()})
    return res


def check_pph_bound(rng, cases):
    res = PropertyResult("pph boundedness")
    for _ in range(cases):
        s = _random_stencil(rng)
        d = reconstruction.decompose(s)
        corr = abs(reconstruction.pph_midpoint(s) - d.affine_part)
        bound = abs(d.coupling) * min(abs(di) / wi for di, wi in zip(d.indicators, d.weights))
        res.record(corr <= bound * (1 + 1e-12), {"n": 4, "x": s.x, "f": s.f})
    return res


def check_jump(rng, cases):
    res = PropertyResult("jump localization")
    for _ in range(max(1, cases // 50)):
        n = int(rng.integers(8, 40))
        jump = float(rng.uniform(0.1, 10.0)) * (1 if rng.random() < 0.5 else -1)
        g = reconstruction.step_function(n, jump, int(rng.integers(2, n - 2)))
        lo, hi = float(g.values.min()), float(g.values.max())
        lin = reconstruction.overshoot_metric(reconstruction.reconstruct(g, "linear"), lo, hi)
        pph = reconstruction.overshoot_metric(reconstruction.reconstruct(g, "pph"), lo, hi)
        ok = pph == 0.0 and abs(lin - abs(jump) / 16) <= 1e-14 * abs(jump)
        res.record(ok, {"n": n, "jump": jump, "linear": lin, "pph": pph})
    return res


def check_backend_parity(rng, cases):
    res = PropertyResult("backend parity")
    from ._backend import kernels

    for _ in range(max(1, cases // 100)):
        x = np.cumsum(rng.uniform(0.1, 1.0, 64))
        f = rng.normal(size=64)
        ok = np.array_equal(kernels.linear_midpoints(x, f), _py_linear(x, f))
        for mode, lam in ((0, 2.0), (1, 2.0), (1, 1.0)):
            ok = ok and np.array_equal(kernels.pph_midpoints(x, f, mode, lam), _py_pph(x, f, mode, lam))
        res.record(bool(ok), {"n": 64})
    return res


# }}}


PROPERTIES: list = [
    check_gap_identity,
    check_strict_bound,
    check_mean_inequality,
    check_scaling,
    check_symmetry,
    check_second_order,
    check_clip_bound,
    check_interpolation,
    check_residuals,
    check_heights,
    check_newton,
    check_degeneracy,
    check_corollary,
    check_decomposition,
    check_quadratic_reproduction,
    check_pph_bound,
    check_jump,
    check_backend_parity,
]


def run_suite(seed: int, cases: int = 1000, properties: Optional[list] = None) -> dict:
    rng = np.random.default_rng(seed)
    results = [check(rng, cases) for check in (properties or PROPERTIES)]
    return {
        "properties": [r.to_dict() for r in results],
        "summary": {
            "total": len(results),
            "passed": sum(r.passed for r in results),
            "failed": [r.name for r in results if not r.passed],
            "backend": BACKEND,
        },
    }
