"""Compiled and numpy kernels must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from harmonic_kit import _pykernels as py
from harmonic_kit import geometry
from harmonic_kit._backend import BACKEND

ck = pytest.importorskip("harmonic_kit._ckernels", reason="compiled extension not built")


def grids(seed, count=20):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(4, 60))
        x = np.cumsum(rng.uniform(0.01, 2.0, n)) - 3.0
        kind = rng.integers(3)
        if kind == 0:
            f = rng.normal(size=n)
        elif kind == 1:
            f = np.where(x > x[n // 2], 1.0, 0.0)
        else:
            f = np.sin(3 * x)
        yield x, f


@pytest.mark.parametrize("name", ["second_differences", "linear_midpoints"])
def test_linear_kernels_identical(name):
    for x, f in grids(0):
        assert np.array_equal(getattr(ck, name)(x, f), getattr(py, name)(x, f))


def test_decomposition_identical():
    for x, f in grids(1):
        for a, b in zip(ck.decomposition(x, f), py.decomposition(x, f)):
            assert np.array_equal(a, b)


@pytest.mark.parametrize("mode, lam", [(0, 2.0), (1, 2.0), (1, 1.0), (1, 0.5)])
def test_pph_identical(mode, lam):
    for x, f in grids(2):
        assert np.array_equal(ck.pph_midpoints(x, f, mode, lam), py.pph_midpoints(x, f, mode, lam))


def test_constants_agree():
    for name in ("CLIP", "TRANSLATE", "CONVERGED", "LINE_SEARCH_FAILED", "MAX_ITER", "SINGULAR"):
        assert getattr(ck, name) == getattr(py, name)


def test_newton_agrees():
    rng = np.random.default_rng(7)
    for k in range(60):
        n = int(rng.integers(2, 7))
        a = rng.uniform(0.5, 10.0, n).tolist()
        w = rng.uniform(0.05, 1.0, n).tolist()
        scene = geometry.build_scene(a, w, ("thm3", "thm4")[k % 2])
        args = geometry._system(scene)
        lo, hi = geometry.prism_box(scene)
        x0 = geometry.random_interior_start(scene, rng)
        xc, ic, rc_, sc = ck.newton_surfaces(*args, x0, lo, hi, 1e-10, 1e-12, 100, 30)
        xp, ip, rp, sp = py.newton_surfaces(*args, x0, lo, hi, 1e-10, 1e-12, 100, 30)
        assert (ic, rc_, sc) == (ip, rp, sp)
        assert np.array_equal(xc, xp)


def test_mismatched_shapes_rejected():
    for mod in (ck, py):
        with pytest.raises(ValueError):
            mod.linear_midpoints(np.arange(5.0), np.arange(4.0))


def test_backend_env_switch():
    env = dict(os.environ, HARMONIC_KIT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import harmonic_kit; print(harmonic_kit.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
    assert BACKEND == ("python" if os.environ.get("HARMONIC_KIT_PURE_PYTHON") else "cython")
