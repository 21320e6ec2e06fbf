"""Closed-form rates and bounds for the binary indirect problem."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from scipy.optimize import brentq

from .core import (
    LN2,
    DomainError,
    InfeasibleDistortionError,
    LogBase,
    RegimeError,
    SourceModel,
    binary_entropy,
    check_probability,
)
from .gallager_dual import irdf

TANGENCY_XTOL = 1e-13


class CurveKind(str, enum.Enum):
    DIRECT_RDF = "direct_rdf"
    SYMMETRIC_IRDF = "symmetric_irdf"
    UPPER_BOUND = "upper_bound"
    CONVEXIFIED_UPPER_BOUND = "convexified_upper_bound"
    IRDF = "irdf"


@dataclass(frozen=True)
class RatePoint:
    D: float
    rate: float
    base: LogBase = LogBase.BITS


@dataclass(frozen=True)
class BoundCurve:
    points: tuple[RatePoint, ...]
    kind: CurveKind
    model: SourceModel

    def __post_init__(self):
        Ds = [pt.D for pt in self.points]
        if any(b <= a for a, b in zip(Ds, Ds[1:])):
            raise DomainError("curve distortions must be strictly increasing")

    @property
    def distortions(self) -> list[float]:
        return [pt.D for pt in self.points]

    @property
    def rates(self) -> list[float]:
        return [pt.rate for pt in self.points]


def _h_nats(q: float) -> float:
    return binary_entropy(q, LogBase.NATS)


def direct_rdf(alpha: float, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """Rate-distortion function of a Bernoulli(alpha) source under Hamming distortion."""
    base = LogBase.parse(base)
    alpha = check_probability(alpha, "alpha")
    alpha = min(alpha, 1.0 - alpha)
    D = float(D)
    if not D >= 0.0:
        raise DomainError(f"D={D!r} must be nonnegative")
    if D >= alpha:
        return 0.0
    return base.from_nats(_h_nats(alpha) - _h_nats(D))


def delta_ratio(D: float, p: float) -> float:
    """Normalized distortion ``(D - p) / (1 - 2p)``."""
    p = check_probability(p, "p")
    if p > 0.5:
        raise DomainError(f"p={p!r} > 1/2; canonicalize first")
    if p == 0.5:
        raise RegimeError("p = 1/2: the observation is independent of the source")
    return (float(D) - p) / (1.0 - 2.0 * p)


def symmetric_irdf(p: float, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """Indirect rate for alpha = 1/2: ``log 2 - h(Delta)`` on ``[p, 1/2)``, zero beyond."""
    base = LogBase.parse(base)
    p = check_probability(p, "p")
    D = check_probability(D, "D")
    if p > 0.5:
        raise DomainError(f"p={p!r} > 1/2; canonicalize first")
    if D < p:
        raise InfeasibleDistortionError(D, p)
    if D >= 0.5:
        return 0.0
    return base.from_nats(LN2 - _h_nats(delta_ratio(D, p)))


def _upper_bound_nats(model: SourceModel, D: float) -> float:
    delta = delta_ratio(D, model.p)
    if delta > 1.0:
        raise DomainError(f"D={D!r} exceeds 1 - p; the bound is undefined there")
    return _h_nats(model.beta) - _h_nats(delta)


def upper_bound(model: SourceModel, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """``h(beta) - h(Delta)``, valid for every ``D >= p``.

    Not clamped: the value goes negative for large D, where it carries no
    information. :func:`convexified_upper_bound` is the usable curve.
    """
    base = LogBase.parse(base)
    D = check_probability(D, "D")
    if D < model.p:
        raise InfeasibleDistortionError(D, model.p)
    return base.from_nats(_upper_bound_nats(model, D))


def _upper_bound_slope_nats(model: SourceModel, D: float) -> float:
    spread = 1.0 - 2.0 * model.p
    delta = (D - model.p) / spread
    return -math.log((1.0 - delta) / delta) / spread


def tangency_point(model: SourceModel) -> float:
    """Distortion where the tangent to the raw bound passes through (alpha, 0).

    Returns alpha itself when no closure is needed (the bound already
    vanishes at alpha, as for alpha = 1/2 or p = 0).
    """
    a, p = model.alpha, model.p
    if not p < a:
        return a
    ub_alpha = _upper_bound_nats(model, a)
    if ub_alpha <= 0.0:
        return a

    # value at D = alpha of the tangent line touching the bound at D;
    # increasing in D by convexity, -inf at p+ and ub(alpha) > 0 at alpha
    def tangent_at_alpha(D):
        return _upper_bound_nats(model, D) + _upper_bound_slope_nats(model, D) * (a - D)

    lo = p + (a - p) * 1e-15
    if lo <= p:
        lo = math.nextafter(p, 1.0)
    if tangent_at_alpha(lo) >= 0.0:
        return lo
    return brentq(tangent_at_alpha, lo, a, xtol=TANGENCY_XTOL, rtol=1e-15, maxiter=500)


def convexified_upper_bound(model: SourceModel, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """Lower convex envelope of the raw bound on [p, alpha] together with (alpha, 0).

    Follows the raw bound up to the tangency point, then the straight chord
    down to ``(alpha, 0)``, and is zero from alpha on.
    """
    base = LogBase.parse(base)
    D = check_probability(D, "D")
    if D < model.p:
        raise InfeasibleDistortionError(D, model.p)
    a = model.alpha
    if D >= a:
        return 0.0
    d_t = tangency_point(model)
    if D <= d_t:
        return base.from_nats(max(_upper_bound_nats(model, D), 0.0))
    ub_t = _upper_bound_nats(model, d_t)
    return base.from_nats(ub_t * (a - D) / (a - d_t))


def slope(p: float, D: float) -> float:
    """Magnitude of the symmetric-source rate slope, ``log((1-p-D)/(D-p)) / (1-2p)`` in nats."""
    p = check_probability(p, "p")
    D = float(D)
    if p >= 0.5:
        raise RegimeError("p >= 1/2: the slope is unbounded")
    if not p < D < 1.0 - p:
        raise DomainError(f"slope needs p < D < 1 - p, got p={p!r}, D={D!r}")
    return math.log((1.0 - p - D) / (D - p)) / (1.0 - 2.0 * p)


def evaluate(kind: CurveKind | str, model: SourceModel, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """Evaluate a curve of the given kind at one distortion."""
    kind = CurveKind(kind)
    if kind is CurveKind.DIRECT_RDF:
        return direct_rdf(model.alpha, D, base)
    if kind is CurveKind.SYMMETRIC_IRDF:
        return symmetric_irdf(model.p, D, base)
    if kind is CurveKind.UPPER_BOUND:
        return upper_bound(model, D, base)
    if kind is CurveKind.CONVEXIFIED_UPPER_BOUND:
        return convexified_upper_bound(model, D, base)
    return irdf(model, D, base)


def curve(
    kind: CurveKind | str,
    model: SourceModel,
    D_grid: Iterable[float],
    base: LogBase | str = LogBase.BITS,
) -> BoundCurve:
    """Tabulate one curve on a grid; points where it is undefined are skipped."""
    base = LogBase.parse(base)
    kind = CurveKind(kind)
    points = []
    for D in sorted(set(float(d) for d in D_grid)):
        try:
            points.append(RatePoint(D, evaluate(kind, model, D, base), base))
        except (DomainError, RegimeError):
            continue
    return BoundCurve(points=tuple(points), kind=kind, model=model)


def is_convex(xs: Sequence[float], ys: Sequence[float], slack: float = 1e-12) -> bool:
    """Discrete convexity check: successive chord slopes never decrease."""
    slopes = [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:])]
    return all(s1 >= s0 - slack for s0, s1 in zip(slopes, slopes[1:]))
