"""Four-point midpoint reconstruction on nonuniform grids, linear and harmonic-adapted.

The linear operator evaluates the cubic through ``x1 < x2 < x3 < x4`` at the
midpoint of ``[x2, x3]``. Written in Newton form around ``x2, x3`` its value
splits exactly into::

    (f2 + f3) / 2  -  h2**2 / 8 * (w1 * d1 + w2 * d2)

with ``d1, d2`` twice the second divided differences on ``x1..x3`` and
``x2..x4`` and ``w1 = (h2/2 + h3) / (h1 + h2 + h3)``,
``w2 = (h1 + h2/2) / (h1 + h2 + h3)``. The nonlinear operator swaps the
weighted arithmetic mean of ``d1, d2`` for the guarded weighted harmonic
mean, which stays below ``min(|d_i| / w_i)`` next to a jump and within
``O(h^2)`` of the arithmetic mean on smooth data.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import means
from ._backend import kernels
from .errors import LengthError
from .means import CLIP, SignPolicy

OPERATORS = ("linear", "pph")


@dataclass(frozen=True)
class Stencil:
    x: tuple
    f: tuple

    def __post_init__(self):
        if len(self.x) != 4 or len(self.f) != 4:
            raise LengthError("a stencil has exactly 4 nodes")
        if not all(b > a for a, b in zip(self.x, self.x[1:])):
            raise ValueError(f"stencil abscissae must be strictly increasing: {self.x}")

    @property
    def target(self) -> float:
        return 0.5 * (self.x[1] + self.x[2])


@dataclass(frozen=True)
class Decomposition:
    affine_part: float
    coupling: float
    weights: means.WeightVector
    indicators: tuple

    def reassemble(self) -> float:
        """Value of the linear operator rebuilt from its parts."""
        w1, w2 = self.weights
        d1, d2 = self.indicators
        return self.affine_part + self.coupling * (w1 * d1 + w2 * d2)


@dataclass(frozen=True)
class GridFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise LengthError("grid and values must be 1-d with equal length")
        if grid.size < 4:
            raise LengthError(f"need at least 4 nodes, got {grid.size}")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, f: Callable, grid) -> "GridFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid), dtype=float))

    @property
    def midpoints(self) -> np.ndarray:
        """Midpoints of the intervals that have a centered 4-point stencil."""
        return 0.5 * (self.grid[1:-2] + self.grid[2:-1])

    def stencil(self, j: int) -> Stencil:
        return Stencil(tuple(self.grid[j : j + 4]), tuple(self.values[j : j + 4]))


def second_differences(g: GridFunction) -> np.ndarray:
    """``2 f[x_{j-1}, x_j, x_{j+1}]`` at every interior node."""
    grid = np.asarray(g.grid if isinstance(g, GridFunction) else g[0], dtype=float)
    values = np.asarray(g.values if isinstance(g, GridFunction) else g[1], dtype=float)
    if grid.size < 3:
        raise LengthError(f"need at least 3 nodes, got {grid.size}")
    return kernels.second_differences(grid, values)


def baseline_midpoint(s: Stencil) -> float:
    """Cubic Lagrange interpolant through the stencil, evaluated at its target."""
    return float(kernels.linear_midpoints(s.x, s.f)[0])


def decompose(s: Stencil) -> Decomposition:
    affine, coupling, w1, w2, d1, d2 = (float(v[0]) for v in kernels.decomposition(s.x, s.f))
    # w1 + w2 is 1 up to rounding; keep the values as computed
    return Decomposition(affine, coupling, means.WeightVector((w1, w2)), (d1, d2))


def pph_midpoint(s: Stencil, policy: SignPolicy = CLIP) -> float:
    d = decompose(s)
    return d.affine_part + d.coupling * means.guarded_harmonic(d.indicators, d.weights, policy)


def _mode(policy: SignPolicy):
    return (kernels.CLIP, 1.0) if policy.mode == "clip" else (kernels.TRANSLATE, policy.lam)


def reconstruct(g: GridFunction, operator: str = "pph", policy: SignPolicy = CLIP) -> np.ndarray:
    """One midpoint prediction per interval with a full centered stencil.

    The first and last intervals have none; the result has ``len(grid) - 3``
    entries, aligned with :attr:`GridFunction.midpoints`.
    """
    if operator == "linear":
        return kernels.linear_midpoints(g.grid, g.values)
    if operator == "pph":
        mode, lam = _mode(policy)
        return kernels.pph_midpoints(g.grid, g.values, mode, lam)
    raise ValueError(f"operator must be one of {OPERATORS}, got {operator!r}")


def overshoot_metric(predictions: Sequence[float], lower: float, upper: float) -> float:
    if lower > upper:
        raise ValueError(f"lower={lower} exceeds upper={upper}")
    p = np.asarray(predictions, dtype=float)
    if p.size == 0:
        return 0.0
    return max(0.0, float(p.max()) - upper, lower - float(p.min()))


# {{{ convergence


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    intervals: int
    h: float
    error: float
    slope: Optional[float]


def dyadic_grids(domain, levels: int, base_intervals: int = 8, jitter: float = 0.0, seed: int = 0):
    """Yield ``levels`` grids, each the bisection of the previous.

    With ``jitter > 0`` the base grid nodes are moved by up to
    ``jitter * h`` (seeded), giving a nonuniform family with fixed mesh ratios.
    """
    a, b = map(float, domain)
    grid = np.linspace(a, b, base_intervals + 1)
    if jitter:
        h = (b - a) / base_intervals
        rng = np.random.default_rng(seed)
        grid[1:-1] += rng.uniform(-jitter, jitter, base_intervals - 1) * h
    for _ in range(levels):
        yield grid
        mid = 0.5 * (grid[:-1] + grid[1:])
        fine = np.empty(2 * grid.size - 1)
        fine[0::2] = grid
        fine[1::2] = mid
        grid = fine


def convergence_order(
    f: Callable,
    domain,
    levels: int,
    operator: str = "pph",
    policy: SignPolicy = CLIP,
    *,
    base_intervals: int = 16,
    jitter: float = 0.0,
    seed: int = 0,
) -> list:
    """Max-norm midpoint error per dyadic level and the log2 slope between levels."""
    if levels < 3:
        raise ValueError("need at least 3 refinement levels")
    rows = []
    prev = None
    for k, grid in enumerate(dyadic_grids(domain, levels, base_intervals, jitter, seed)):
        g = GridFunction.sample(f, grid)
        pred = reconstruct(g, operator, policy)
        err = float(np.max(np.abs(pred - f(g.midpoints))))
        h = float(np.max(np.diff(grid)))
        slope = None
        if prev is not None and err > 0.0 and prev[1] > 0.0:
            slope = math.log2(prev[1] / err) / math.log2(prev[0] / h)
        rows.append(ConvergenceRow(k, grid.size - 1, h, err, slope))
        prev = (h, err)
    return rows


def rows_to_dicts(rows) -> list:
    return [asdict(r) for r in rows]


# }}}


# {{{ report


@dataclass
class ReconReport:
    midpoints: list
    predictions: dict
    errors: dict
    overshoot: dict

    def to_dict(self) -> dict:
        return asdict(self)


def step_function(n: int = 16, jump: float = 1.0, at: Optional[int] = None) -> GridFunction:
    """Unit-spaced samples of ``jump * H(x - at)``."""
    at = n // 2 if at is None else at
    grid = np.arange(n, dtype=float)
    return GridFunction(grid, np.where(grid >= at, jump, 0.0))


def recon_report(
    g: GridFunction,
    operators: Sequence[str] = OPERATORS,
    policy: SignPolicy = CLIP,
    truth: Optional[Callable] = None,
) -> ReconReport:
    lower, upper = float(g.values.min()), float(g.values.max())
    mids = g.midpoints
    predictions, errors, overshoot = {}, {}, {}
    for op in operators:
        p = reconstruct(g, op, policy)
        predictions[op] = p.tolist()
        overshoot[op] = overshoot_metric(p, lower, upper)
        if truth is not None:
            errors[op] = float(np.max(np.abs(p - truth(mids))))
    return ReconReport(mids.tolist(), predictions, errors, overshoot)


# }}}
