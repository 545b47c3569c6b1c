"""Weighted arithmetic and harmonic means of positive values.

All sums go through :func:`math.fsum`, which is correctly rounded. That makes
every mean independent of argument order down to the last bit, and keeps the
small-``n`` evaluations identical to the compiled reconstruction kernels.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence, Union

from .errors import LengthError, NonPositiveArgument, NonPositiveWeight

__all__ = [
    "WeightVector",
    "MeanGapReport",
    "SignPolicy",
    "CLIP",
    "validate_weights",
    "validate_sample",
    "uniform_weights",
    "weighted_arithmetic",
    "weighted_harmonic",
    "mean_gap",
    "gap_closed_form",
    "min_bound",
    "scaled_uniform_harmonic",
    "guarded_harmonic",
    "translation_offset",
]


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive weights summing to one. Build with :func:`validate_weights`."""

    w: tuple

    def __len__(self) -> int:
        return len(self.w)

    def __iter__(self):
        return iter(self.w)

    def __getitem__(self, i):
        return self.w[i]


WeightsLike = Union[WeightVector, Sequence[float]]


def validate_weights(raw: Iterable[float]) -> WeightVector:
    """Check positivity and renormalize so the weights sum to one.

    Ratios between entries are preserved; a vector whose correctly rounded
    sum is already 1.0 is returned unchanged.
    """
    w = tuple(float(x) for x in raw)
    if len(w) < 2:
        raise LengthError(f"need at least 2 weights, got {len(w)}")
    for i, x in enumerate(w):
        if not x > 0 or not math.isfinite(x):
            raise NonPositiveWeight(f"weight w[{i}]={x!r} is not strictly positive")
    total = math.fsum(w)
    if total != 1.0:
        w = tuple(x / total for x in w)
    return WeightVector(w)


def uniform_weights(n: int) -> WeightVector:
    if n < 2:
        raise LengthError(f"need at least 2 weights, got {n}")
    return WeightVector((1.0 / n,) * n)


def validate_sample(a: Iterable[float], n: int | None = None) -> tuple:
    """Return ``a`` as a tuple of floats, all strictly positive."""
    a = tuple(float(x) for x in a)
    if len(a) < 2:
        raise LengthError(f"need at least 2 arguments, got {len(a)}")
    if n is not None and len(a) != n:
        raise LengthError(f"sample has {len(a)} entries but weights have {n}")
    for i, x in enumerate(a):
        if not x > 0 or not math.isfinite(x):
            raise NonPositiveArgument(f"argument a[{i}]={x!r} is not strictly positive")
    return a


def _weights(w: WeightsLike) -> WeightVector:
    return w if isinstance(w, WeightVector) else validate_weights(w)


def _prepare(a, w):
    w = _weights(w)
    return validate_sample(a, len(w)), w


def weighted_arithmetic(a: Sequence[float], w: WeightsLike) -> float:
    a, w = _prepare(a, w)
    return math.fsum(wi * ai for wi, ai in zip(w, a))


def weighted_harmonic(a: Sequence[float], w: WeightsLike) -> float:
    """``1 / sum(w_i / a_i)``."""
    a, w = _prepare(a, w)
    return 1.0 / math.fsum(wi / ai for wi, ai in zip(w, a))


def min_bound(a: Sequence[float], w: WeightsLike) -> float:
    """``min(a_i / w_i)``; the weighted harmonic mean is strictly below it."""
    a, w = _prepare(a, w)
    return min(ai / wi for wi, ai in zip(w, a))


def scaled_uniform_harmonic(a: Sequence[float], w: WeightsLike) -> float:
    """Uniform-weight harmonic mean of ``a_i / w_i``; equals ``n * H_w(a)``."""
    a, w = _prepare(a, w)
    n = len(a)
    return weighted_harmonic([ai / wi for wi, ai in zip(w, a)], uniform_weights(n))


def gap_closed_form(a: Sequence[float], w: WeightsLike) -> float:
    """Arithmetic-harmonic gap from the pairwise identity.

    ``M_w - H_w = sum_{i<j} w_i w_j (a_i - a_j)^2 prod_{k != i,j} a_k
    / sum_j w_j prod_{k != j} a_k``. Numerator and denominator are divided
    through by ``prod a_k`` so nothing overflows for large ``n``.
    """
    a, w = _prepare(a, w)
    n = len(a)
    pairs = math.fsum(
        w[i] * w[j] * (((a[i] - a[j]) / a[i]) * ((a[i] - a[j]) / a[j]))
        for i in range(n)
        for j in range(i + 1, n)
    )
    return pairs / math.fsum(wi / ai for wi, ai in zip(w, a))


@dataclass(frozen=True)
class MeanGapReport:
    h_w: float
    m_w: float
    gap_direct: float
    gap_closed_form: float
    min_bound: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def mean_gap(a: Sequence[float], w: WeightsLike) -> MeanGapReport:
    a, w = _prepare(a, w)
    h = weighted_harmonic(a, w)
    m = weighted_arithmetic(a, w)
    return MeanGapReport(
        h_w=h,
        m_w=m,
        gap_direct=m - h,
        gap_closed_form=gap_closed_form(a, w),
        min_bound=min_bound(a, w),
        n=len(a),
    )


@dataclass(frozen=True)
class SignPolicy:
    """How :func:`guarded_harmonic` treats arguments that are not all positive.

    ``clip`` returns 0 unless every argument has the same strict sign.
    ``translate`` shifts all arguments by ``lam * max|v| + ulp`` first and
    shifts the mean back afterwards. The offset rule is a heuristic. With
    ``lam = 1`` the most negative argument lands on ~1 ulp and the mean
    collapses towards it, so the default keeps every shifted argument at
    least ``max|v|`` away from zero.
    """

    mode: str = "clip"
    lam: float = 2.0

    def __post_init__(self):
        if self.mode not in ("clip", "translate"):
            raise ValueError(f"unknown sign policy {self.mode!r}")
        if not self.lam > 0:
            raise ValueError(f"translation factor must be > 0, got {self.lam!r}")

    @classmethod
    def translate(cls, lam: float = 2.0) -> "SignPolicy":
        return cls("translate", lam)


CLIP = SignPolicy("clip")


def translation_offset(v: Sequence[float], lam: float = 2.0) -> float:
    big = max(abs(x) for x in v)
    shift = lam * big
    lowest = min(v)
    if shift + lowest <= 0.0:
        # only reachable with lam < 1
        shift = -lowest
    return shift + math.ulp(big)


def guarded_harmonic(v: Sequence[float], w: WeightsLike, policy: SignPolicy = CLIP) -> float:
    """Weighted harmonic mean extended to signed arguments."""
    w = _weights(w)
    v = tuple(float(x) for x in v)
    if len(v) != len(w):
        raise LengthError(f"{len(v)} values but {len(w)} weights")
    if policy.mode == "clip":
        if all(x > 0.0 for x in v):
            return 1.0 / math.fsum(wi / x for wi, x in zip(w, v))
        if all(x < 0.0 for x in v):
            return -1.0 / math.fsum(wi / -x for wi, x in zip(w, v))
        return 0.0
    t = translation_offset(v, policy.lam)
    return 1.0 / math.fsum(wi / (x + t) for wi, x in zip(w, v)) - t
