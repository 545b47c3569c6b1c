"""Prism representation of the weighted means.

The ``n`` positive arguments ``a_i`` are heights over the vertices of the
unit simplex ``B_1 = e_1, ..., B_{n-1} = e_{n-1}, B_n = 0``. The hyperplane
``Pi`` through the lifted vertices ``P_i`` has height ``H_w`` over the point
``(xbar_1, ..., xbar_{n-1})`` and ``M_w`` over the weighted barycenter. The
point ``xbar`` is the unique common point of ``n`` surfaces:

* ``n - 1`` axis paraboloids ``x_n = b_i x_i^2 + (a_i - b_i) x_i``, and
* one cap surface through ``B_1..B_{n-1}`` and ``P_n`` that is either the
  hyperplane ``sum x_i + x_n / a_n = 1`` ("thm3") or a paraboloid with
  coefficients ``c_i`` ("thm4").

The corollary construction replaces the heights by ``a_i / w_i``; every
surface then becomes a hyperplane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import means
from ._backend import kernels
from .errors import LengthError, NoConvergence, UnsupportedDimension

VARIANTS = ("thm3", "thm4", "corollary")
CASES = (1, 2, 3)


@dataclass(frozen=True)
class Quadratic1D:
    """``q2 x^2 + q1 x + q0``."""

    q2: float
    q1: float
    q0: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.q2, self.q1, self.q0)):
            raise ValueError(f"non-finite coefficients {self}")

    def __call__(self, x):
        return (self.q2 * x + self.q1) * x + self.q0

    def coefficients(self) -> tuple:
        return (self.q2, self.q1, self.q0)


@dataclass(frozen=True)
class ParabolaPair:
    p1: Quadratic1D
    p2: Quadratic1D
    x_h: float
    y_h: float
    case_id: int


def chord_height(a1: float, a2: float, x: float) -> float:
    """Top edge of the trapezoid with heights ``a2`` at 0 and ``a1`` at 1."""
    return a2 + (a1 - a2) * x


def parabola_pair_2d(a1: float, a2: float, w1: float, w2: float, case_id: int = 3) -> ParabolaPair:
    """The two parabolas of the trapezoid meeting above ``x_h``.

    ``p1`` runs through ``(0, 0)`` and ``(1, a1)``, ``p2`` through
    ``(0, a2)`` and ``(1, 0)``; both pass through ``(x_h, y_h)`` where
    ``y_h = f * a1 * x_h`` with ``f = w2/w1``, ``1`` or ``1/(2 w1)`` for
    cases 1, 2 and 3.
    """
    a1, a2 = means.validate_sample((a1, a2))
    w1, w2 = means.validate_weights((w1, w2))
    if case_id not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case_id!r}")
    h = means.weighted_harmonic((a1, a2), means.WeightVector((w1, w2)))
    xh = w1 * a2 / (w1 * a2 + w2 * a1)
    if case_id == 1:
        r = w2 / w1
        s = a1 / (1.0 - xh)
        p1 = Quadratic1D(s * (1.0 - r), -s * (xh - r), 0.0)
        p2 = Quadratic1D(0.0, -a2, a2)
        yh = r * a1 * xh
    elif case_id == 2:
        p1 = Quadratic1D(0.0, a1, 0.0)
        p2 = Quadratic1D(
            a1 / (xh - 1.0) + a2 / xh,
            -(a1 / (xh - 1.0) + a2 * (xh + 1.0) / xh),
            a2,
        )
        yh = a1 * xh
    else:
        d1 = xh * (1.0 - xh)
        d2 = xh * (xh - 1.0)
        p1 = Quadratic1D((a1 * xh - h / 2) / d1, (h / 2 - a1 * xh * xh) / d1, 0.0)
        p2 = Quadratic1D(
            (h / 2 + a2 * (xh - 1.0)) / d2,
            -(h / 2 + a2 * (xh - 1.0) * (xh + 1.0)) / d2,
            a2,
        )
        yh = a1 * xh / (2.0 * w1)
    return ParabolaPair(p1, p2, xh, yh, case_id)


# {{{ n-dimensional surfaces


@dataclass(frozen=True)
class AxisParaboloid:
    """``x_n = b x_i^2 + (height - b) x_i``; passes through ``P_i`` and every other ``B_j``."""

    axis: int
    b: float
    height: float

    def value(self, x):
        xi = x[self.axis]
        return self.b * xi * xi + (self.height - self.b) * xi

    def residual(self, x) -> float:
        return x[-1] - self.value(x)

    def gradient(self, x) -> np.ndarray:
        g = np.zeros(len(x))
        g[self.axis] = -(2.0 * self.b * x[self.axis] + self.height - self.b)
        g[-1] = 1.0
        return g


@dataclass(frozen=True)
class CapSurface:
    """Surface through ``B_1..B_{n-1}`` and ``P_n``.

    ``plane``: ``sum x_i + x_n / height = 1``, written as
    ``x_n = height (1 - sum x_i)``. ``paraboloid``:
    ``x_n = height + sum(c_i x_i^2 - (c_i + height) x_i)``.
    """

    variant: str
    height: float
    c: tuple = ()

    def value(self, x):
        base = x[:-1]
        if self.variant == "plane":
            return self.height * (1.0 - math.fsum(base))
        return self.height + math.fsum(
            ci * xi * xi - (ci + self.height) * xi for ci, xi in zip(self.c, base)
        )

    def residual(self, x) -> float:
        return x[-1] - self.value(x)

    def gradient(self, x) -> np.ndarray:
        n = len(x)
        g = np.empty(n)
        if self.variant == "plane":
            g[:-1] = self.height
        else:
            c = np.asarray(self.c)
            g[:-1] = -(2.0 * c * np.asarray(x[:-1]) - c - self.height)
        g[-1] = 1.0
        return g


@dataclass(frozen=True)
class Hyperplane:
    """``x_n = const + sum slopes_i x_i``, the plane through the lifted vertices."""

    const: float
    slopes: tuple

    def __call__(self, base: Sequence[float]) -> float:
        if len(base) != len(self.slopes):
            raise LengthError(f"expected {len(self.slopes)} base coordinates, got {len(base)}")
        return math.fsum([self.const] + [s * x for s, x in zip(self.slopes, base)])

    @classmethod
    def through_heights(cls, heights: Sequence[float]) -> "Hyperplane":
        an = heights[-1]
        return cls(an, tuple(ai - an for ai in heights[:-1]))


@dataclass(frozen=True)
class PrismScene:
    n: int
    a: tuple
    w: means.WeightVector
    variant: str
    pi_plane: Hyperplane
    surfaces: tuple
    x_bar: tuple
    h_w: float
    m_w: float
    barycenter: tuple
    pi_star_plane: Optional[Hyperplane] = None
    h_star: Optional[float] = None
    m_star: Optional[float] = None
    heights: tuple = field(default=())

    @property
    def b(self) -> tuple:
        return tuple(s.b for s in self.surfaces[:-1])

    @property
    def c(self) -> tuple:
        return self.surfaces[-1].c

    @property
    def degenerate(self) -> bool:
        """True when every surface is a hyperplane."""
        return all(b == 0.0 for b in self.b) and all(c == 0.0 for c in self.c)


def _base_point(a, w, h):
    return tuple(w[i] * h / a[i] for i in range(len(a) - 1))


def build_scene(a: Sequence[float], w, variant: str = "thm4") -> PrismScene:
    """Assemble the prism, its hyperplane, the ``n`` surfaces and ``xbar``.

    ``variant`` is ``"thm3"`` (cap is a hyperplane, ``b_i`` uses
    ``w_n - w_i``), ``"thm4"`` (cap is a paraboloid, ``b_i`` uses
    ``1/n - w_i``) or ``"corollary"`` (see :func:`corollary_scene`).
    """
    if variant == "corollary":
        return corollary_scene(a, w)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    w = means.validate_weights(w)
    a = means.validate_sample(a, len(w))
    n = len(a)
    h = means.weighted_harmonic(a, w)
    m = means.weighted_arithmetic(a, w)
    base = _base_point(a, w, h)
    if not all(0.0 < x < 1.0 for x in base):
        # excluded by the strict bound H_w < a_i / w_i unless rounding collapses it
        raise ValueError(f"degenerate scene: base point {base} not inside the unit box")
    if variant == "thm3":
        target = w[-1]
        last = w[-1] * h
    else:
        target = 1.0 / n
        last = h / n
    # "+ 0.0" turns the -0.0 of uniform weights into 0.0
    surfaces = [
        AxisParaboloid(i, h / (x * (x - 1.0)) * (target - w[i]) + 0.0, a[i]) for i, x in enumerate(base)
    ]
    if variant == "thm3":
        cap = CapSurface("plane", a[-1])
    else:
        # H_w * sum(w_j / a_j) == 1 turns the numerator H/n + (sum xbar_j - 1) a_n
        # into H (1/n - w_n), which vanishes exactly for uniform weights.
        num = h * (1.0 / n - w[-1])
        cap = CapSurface("paraboloid", a[-1], tuple(num / ((n - 1) * x * (x - 1.0)) + 0.0 for x in base))
    surfaces.append(cap)
    return PrismScene(
        n=n,
        a=a,
        w=w,
        variant=variant,
        pi_plane=Hyperplane.through_heights(a),
        surfaces=tuple(surfaces),
        x_bar=base + (last,),
        h_w=h,
        m_w=m,
        barycenter=tuple(w[:-1]),
        heights=a,
    )


def corollary_scene(a: Sequence[float], w) -> PrismScene:
    """All-hyperplane scene built on the rescaled heights ``a_i / w_i``."""
    w = means.validate_weights(w)
    a = means.validate_sample(a, len(w))
    n = len(a)
    star = tuple(ai / wi for ai, wi in zip(a, w))
    h = means.weighted_harmonic(a, w)
    m = means.weighted_arithmetic(a, w)
    uniform = means.uniform_weights(n)
    h_star = means.weighted_harmonic(star, uniform)
    m_star = means.weighted_arithmetic(star, uniform)
    base = _base_point(a, w, h)
    surfaces = [AxisParaboloid(i, 0.0, star[i]) for i in range(n - 1)]
    surfaces.append(CapSurface("plane", star[-1]))
    return PrismScene(
        n=n,
        a=a,
        w=w,
        variant="corollary",
        pi_plane=Hyperplane.through_heights(a),
        surfaces=tuple(surfaces),
        x_bar=base + (h,),
        h_w=h,
        m_w=m,
        barycenter=tuple(w[:-1]),
        pi_star_plane=Hyperplane.through_heights(star),
        h_star=h_star,
        m_star=m_star,
        heights=star,
    )


def analytic_intersection(scene: PrismScene) -> tuple:
    return scene.x_bar


def surface_residuals(scene: PrismScene, point: Sequence[float]) -> list:
    """Signed residual ``x_n - surface(x_1..x_{n-1})`` of every surface at ``point``."""
    if len(point) != scene.n:
        raise LengthError(f"point has {len(point)} coordinates, scene is {scene.n}-dimensional")
    point = tuple(float(x) for x in point)
    return [s.residual(point) for s in scene.surfaces]


def prism_heights(scene: PrismScene) -> dict:
    """Height of ``Pi`` above ``xbar`` and above the weighted barycenter."""
    return {
        "h_at_xbar": scene.pi_plane(scene.x_bar[:-1]),
        "m_at_barycenter": scene.pi_plane(scene.barycenter),
    }


# }}}


# {{{ Newton


@dataclass(frozen=True)
class NewtonResult:
    x: tuple
    iterations: int
    residual: float


_STATUS = {
    1: "line search stalled (no residual decrease inside the prism box)",
    2: "iteration limit reached",
    3: "singular Jacobian",
}


def _system(scene: PrismScene):
    cap = scene.surfaces[-1]
    b = np.array([s.b for s in scene.surfaces[:-1]])
    h = np.array([s.height for s in scene.surfaces[:-1]])
    c = np.array(cap.c, dtype=float)
    return b, h, cap.variant == "plane", cap.height, c


def numeric_intersection(
    scene: PrismScene,
    start: Sequence[float],
    *,
    tol: float = 1e-10,
    step_tol: float = 1e-12,
    max_iter: int = 100,
    max_halvings: int = 30,
) -> NewtonResult:
    """Damped Newton iteration on the ``n`` surface equations.

    The Jacobian is assembled from the quadratic forms. Each step is halved
    (at most ``max_halvings`` times) until the max-norm residual decreases
    and the iterate stays inside :func:`prism_box`; the quadratic system has
    other real roots, all outside the prism. Converged once the residual is
    below ``tol`` and the last step below ``step_tol``; a start that already
    satisfies ``tol`` returns after zero iterations.

    Raises :class:`NoConvergence` on failure. Nothing is retried.
    """
    x0 = np.array(start, dtype=float)
    if x0.shape != (scene.n,):
        raise LengthError(f"start has shape {x0.shape}, expected ({scene.n},)")
    lo, hi = prism_box(scene)
    x, iters, res, status = kernels.newton_surfaces(
        *_system(scene), x0, lo, hi, tol, step_tol, max_iter, max_halvings
    )
    x = tuple(float(v) for v in x)
    if status != 0:
        raise NoConvergence(f"Newton failed after {iters} iterations: {_STATUS[status]}", x, res, iters)
    return NewtonResult(x, int(iters), float(res))


def prism_box(scene: PrismScene) -> tuple:
    """Closed box ``[0,1]^{n-1} x [0, max height]`` holding the prism."""
    lo = np.zeros(scene.n)
    hi = np.ones(scene.n)
    hi[-1] = max(scene.heights)
    return lo, hi


def random_interior_start(scene: PrismScene, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the open box ``(0,1)^{n-1} x (0, max a_i)``."""
    lo = np.zeros(scene.n)
    hi = np.ones(scene.n)
    hi[-1] = max(scene.a)
    x = rng.uniform(lo, hi)
    return np.where(x <= 0.0, 0.5 * hi, x)


# }}}


# {{{ sampling


@dataclass
class FigureData:
    """Raw arrays behind a prism plot. ``surfaces`` maps names to ``(m, n)`` sample arrays."""

    n: int
    surfaces: dict
    markers: dict


def simplex_grid(resolution: int, dim: int) -> np.ndarray:
    """Nodes of the base simplex on a uniform barycentric lattice, lexicographic order."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    t = np.linspace(0.0, 1.0, resolution)
    if dim == 1:
        return t[:, None]
    if dim == 2:
        k = resolution - 1
        pts = [(i / k, j / k) for i in range(resolution) for j in range(resolution - i)]
        return np.array(pts)
    raise UnsupportedDimension(f"simplex sampling supports base dimension 1 or 2, got {dim}")


def _markers(scene: PrismScene) -> dict:
    uniform = means.uniform_weights(scene.n)
    star = tuple(ai / wi for ai, wi in zip(scene.a, scene.w))
    return {
        "x_bar": list(scene.x_bar),
        "barycenter": list(scene.barycenter),
        "h_w": scene.h_w,
        "m_w": scene.m_w,
        "h_star": means.weighted_harmonic(star, uniform),
        "m_star": means.weighted_arithmetic(star, uniform),
        "b": list(scene.b),
        "c": list(scene.c),
    }


def sample_surfaces(scene: PrismScene, resolution: int) -> FigureData:
    """Sample every surface and ``Pi`` over the base simplex.

    For ``n > 3`` only the markers are returned.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    markers = _markers(scene)
    if scene.n > 3:
        return FigureData(scene.n, {}, markers)
    base = simplex_grid(resolution, scene.n - 1)
    surfaces = {}
    for k, s in enumerate(scene.surfaces):
        name = f"V{k + 1}"
        vals = np.array([s.value(tuple(p) + (0.0,)) for p in base])
        surfaces[name] = np.column_stack([base, vals])
    planes = [("Pi", scene.pi_plane)]
    if scene.pi_star_plane is not None:
        planes.append(("Pi_star", scene.pi_star_plane))
    for name, plane in planes:
        vals = np.array([plane(tuple(p)) for p in base])
        surfaces[name] = np.column_stack([base, vals])
    return FigureData(scene.n, surfaces, markers)


def sample_parabola_pair(pair: ParabolaPair, a1: float, a2: float, resolution: int) -> FigureData:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    x = np.linspace(0.0, 1.0, resolution)
    h = chord_height(a1, a2, pair.x_h)
    surfaces = {
        "p1": np.column_stack([x, pair.p1(x)]),
        "p2": np.column_stack([x, pair.p2(x)]),
        "chord": np.column_stack([x, chord_height(a1, a2, x)]),
    }
    markers = {"x_h": pair.x_h, "y_h": pair.y_h, "h_w": h, "case": pair.case_id}
    return FigureData(2, surfaces, markers)


# }}}
