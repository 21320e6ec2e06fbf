"""Blahut-Arimoto rate-distortion solver for finite alphabets.

Used as an independent check on the dual solver: the indirect problem is
handed to it as the direct problem for Y under the amended distortion. It
works on any finite source and reproduction alphabet and shares no code
with :mod:`bsc_irdf.gallager_dual`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .amended_distortion import distortion_table
from .core import DomainError, InfeasibleDistortionError, LogBase, SolverError, SourceModel

BA_TOL = 1e-12
BA_MAX_ITER = 100_000
SLOPE_TOL = 1e-9
_MAX_SLOPE = 1e8


@dataclass(frozen=True)
class BAProblem:
    """Source distribution ``source_dist[i]`` and distortion ``distortion[i, j]``."""

    source_dist: np.ndarray
    distortion: np.ndarray
    source_labels: tuple = ()
    reproduction_labels: tuple = ()

    def __post_init__(self):
        q = np.asarray(self.source_dist, dtype=float)
        d = np.asarray(self.distortion, dtype=float)
        if q.ndim != 1 or d.ndim != 2 or d.shape[0] != q.shape[0] or d.shape[1] < 1:
            raise DomainError(f"shape mismatch: source {q.shape}, distortion {d.shape}")
        if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
            raise DomainError("source_dist must be a probability vector")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise DomainError("distortions must be finite and nonnegative")
        q.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "source_dist", q)
        object.__setattr__(self, "distortion", d)
        if not self.source_labels:
            object.__setattr__(self, "source_labels", tuple(range(q.shape[0])))
        if not self.reproduction_labels:
            object.__setattr__(self, "reproduction_labels", tuple(range(d.shape[1])))

    @property
    def min_distortion(self) -> float:
        return float(self.source_dist @ self.distortion.min(axis=1))

    @property
    def zero_rate_distortion(self) -> float:
        return float((self.source_dist @ self.distortion).min())


@dataclass(frozen=True)
class BAResult:
    rate: float
    distortion: float
    slope_param: float
    iterations: int
    converged: bool
    base: LogBase = LogBase.BITS
    marginal: Optional[np.ndarray] = None
    history: list = field(default_factory=list, repr=False)


def build_reduced_problem(model: SourceModel) -> BAProblem:
    """Direct problem for Y ~ Bernoulli(beta) under the amended distortion table."""
    table = distortion_table(model)
    return BAProblem(
        source_dist=np.array([model.beta_bar, model.beta]),
        distortion=np.array(table.entries),
        source_labels=("y=0", "y=1"),
        reproduction_labels=("xhat=0", "xhat=1"),
    )


def ba_fixed_slope(
    problem: BAProblem,
    s: float,
    tol: float = BA_TOL,
    max_iter: int = BA_MAX_ITER,
    base: LogBase | str = LogBase.BITS,
    init: Optional[Sequence[float]] = None,
    record_history: bool = False,
) -> BAResult:
    """One point on the rate-distortion curve at slope parameter ``s``.

    Alternates the test-channel update ``P(j|i) ~ q(j) exp(-s d(i, j))`` with
    the marginal update ``q = Q P`` until the rate changes by less than
    ``tol`` (nats) between iterations. Running out of iterations is reported
    through ``converged``, not raised.
    """
    base = LogBase.parse(base)
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"slope parameter must be positive, got {s!r}")
    Q = problem.source_dist
    d = problem.distortion
    # shifting each row leaves the normalized channel unchanged and avoids underflow
    kernel = np.exp(-s * (d - d.min(axis=1, keepdims=True)))
    m = d.shape[1]
    q = np.full(m, 1.0 / m) if init is None else np.asarray(init, dtype=float).copy()

    history = []
    rate = math.inf
    dist = math.nan
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        P = kernel * q
        P /= P.sum(axis=1, keepdims=True)
        q = Q @ P
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0.0, P * np.log(P / q), 0.0)
        new_rate = float(Q @ terms.sum(axis=1))
        dist = float(Q @ (P * d).sum(axis=1))
        if record_history:
            history.append((new_rate, dist))
        done = abs(new_rate - rate) < tol
        rate = new_rate
        if done:
            converged = True
            break

    return BAResult(
        rate=base.from_nats(max(rate, 0.0)),
        distortion=dist,
        slope_param=s,
        iterations=it,
        converged=converged,
        base=base,
        marginal=q,
        history=history,
    )


def ba_rate_at_distortion(
    problem: BAProblem,
    D: float,
    tol: float = SLOPE_TOL,
    base: LogBase | str = LogBase.BITS,
    ba_tol: float = BA_TOL,
    max_iter: int = BA_MAX_ITER,
) -> BAResult:
    """Rate at a prescribed distortion, by bisection on the slope parameter.

    D(s) is non-increasing in s, so the slope is bracketed by doubling and
    then bisected until ``|D(s) - D| < tol``.
    """
    base = LogBase.parse(base)
    D = float(D)
    d_min, d_max = problem.min_distortion, problem.zero_rate_distortion
    if D < d_min:
        raise InfeasibleDistortionError(D, d_min, f"distortion {D!r} below the achievable minimum {d_min!r}")
    if D >= d_max:
        return BAResult(rate=0.0, distortion=d_max, slope_param=0.0, iterations=0, converged=True, base=base)

    def solve(s):
        return ba_fixed_slope(problem, s, tol=ba_tol, max_iter=max_iter, base=base)

    total = 0
    lo, hi = 0.0, 1.0
    res = solve(hi)
    total += res.iterations
    while res.distortion >= D + tol:
        lo, hi = hi, 2.0 * hi
        if hi > _MAX_SLOPE:
            raise SolverError(f"no slope parameter reaches distortion {D!r}")
        res = solve(hi)
        total += res.iterations
    best = res

    while abs(best.distortion - D) >= tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        res = solve(mid)
        total += res.iterations
        if res.distortion > D:
            lo = mid
        else:
            hi = mid
        if abs(res.distortion - D) < abs(best.distortion - D):
            best = res

    return BAResult(
        rate=best.rate,
        distortion=best.distortion,
        slope_param=best.slope_param,
        iterations=total,
        converged=best.converged and abs(best.distortion - D) < tol,
        base=base,
        marginal=best.marginal,
    )
