"""Dual (Gallager) characterization of the indirect rate-distortion function.

For ``p < D < alpha <= 1/2`` the rate is ``h(beta) - g(r*)`` where

    g(r) = r(D - p) + log(1 - e^{-r(u+v)}) - (1-beta) log(1 - e^{-ru}) - beta log(1 - e^{-rv})

with ``u = (alpha - p)/beta`` and ``v = (1 - alpha - p)/(1 - beta)``. g is
convex in r, ``dg/dr = (D - p) - phi(r)`` and ``phi`` decreases strictly from
``1/2 - p`` to 0, so the minimizer r* is the unique root of
``phi(r) = D - p``. Every ``h(beta) - g(r)`` with r > 0 is a lower bound on
the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .amended_distortion import distortion_table
from .core import (
    DomainError,
    InfeasibleDistortionError,
    LogBase,
    RegimeError,
    SolverError,
    SourceModel,
    binary_entropy,
    bose_remainder,
    bose_remainder_prime,
    check_probability,
    inv_expm1,
    log1mexp,
)

DEFAULT_TOL = 1e-12

# Above this value of r*min(u, v) the direct form of phi is used; below it the
# pole-free remainder form.
_DIRECT_FORM_THRESHOLD = 1.0


@dataclass(frozen=True)
class UV:
    u: float
    v: float


def _require_informative(model: SourceModel) -> None:
    if not model.p < model.alpha:
        raise RegimeError(
            f"zero-information regime: p={model.p!r} >= alpha={model.alpha!r}; "
            "the rate is 0 wherever it is defined"
        )


def _require_positive_r(r: float) -> float:
    r = float(r)
    if not r > 0.0 or math.isinf(r):
        raise DomainError(f"slope parameter r must be a positive finite real, got {r!r}")
    return r


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def uv(model: SourceModel) -> UV:
    _require_informative(model)
    return UV(
        u=(model.alpha - model.p) / model.beta,
        v=(model.alpha_bar - model.p) / model.beta_bar,
    )


def rstar_equation_lhs(r: float, model: SourceModel) -> float:
    """phi(r) = (1-beta) u/(e^{ru}-1) + beta v/(e^{rv}-1) - (u+v)/(e^{r(u+v)}-1)."""
    r = _require_positive_r(r)
    c = uv(model)
    u, v, w = c.u, c.v, c.u + c.v
    b, bb = model.beta, model.beta_bar
    if r * min(u, v) > _DIRECT_FORM_THRESHOLD:
        return bb * u * inv_expm1(r * u) + b * v * inv_expm1(r * v) - w * inv_expm1(r * w)
    # 1/r poles cancel exactly because beta*u + (1-beta)*v = 1 - 2p
    return (
        (0.5 - model.p)
        + bb * u * bose_remainder(r * u)
        + b * v * bose_remainder(r * v)
        - w * bose_remainder(r * w)
    )


def rstar_equation_lhs_prime(r: float, model: SourceModel) -> float:
    """d phi / dr, strictly negative on (0, inf)."""
    r = _require_positive_r(r)
    c = uv(model)
    u, v, w = c.u, c.v, c.u + c.v
    b, bb = model.beta, model.beta_bar
    if r * min(u, v) > _DIRECT_FORM_THRESHOLD:

        def term(x):
            y = r * x
            if y > 700.0:
                return 0.0
            s = 2.0 * math.sinh(0.5 * y)
            return -(x / s) ** 2

        return bb * term(u) + b * term(v) - term(w)
    return (
        bb * u * u * bose_remainder_prime(r * u)
        + b * v * v * bose_remainder_prime(r * v)
        - w * w * bose_remainder_prime(r * w)
    )


def g(r: float, model: SourceModel, D: float) -> float:
    """Dual objective g(r) in nats."""
    r = _require_positive_r(r)
    D = check_probability(D, "D")
    c = uv(model)
    return (
        r * (D - model.p)
        + log1mexp(r * (c.u + c.v))
        - model.beta_bar * log1mexp(r * c.u)
        - model.beta * log1mexp(r * c.v)
    )


def g_prime(r: float, model: SourceModel, D: float) -> float:
    """dg/dr = (D - p) - phi(r); increasing in r, zero at r*."""
    D = check_probability(D, "D")
    return (D - model.p) - rstar_equation_lhs(r, model)


def f_values(r: float, model: SourceModel) -> tuple[float, float]:
    """Dual variables (f0, f1) that make both Gallager constraints tight."""
    r = _require_positive_r(r)
    c = uv(model)
    a, p, b, bb = model.alpha, model.p, model.beta, model.beta_bar
    tail = log1mexp(r * (c.u + c.v))
    f0 = _safe_exp(r * p * a / bb + log1mexp(r * c.u) - tail)
    f1 = _safe_exp(r * p * (1.0 - a) / b + log1mexp(r * c.v) - tail)
    return f0, f1


def gallager_constraint(r: float, model: SourceModel, f: tuple[float, float]) -> tuple[float, float]:
    """``sum_y f_y exp(-r dhat(y, xhat))`` for xhat = 0, 1 (each must be <= 1)."""
    r = _require_positive_r(r)
    d = distortion_table(model).entries
    return tuple(  # type: ignore[return-value]
        f[0] * math.exp(-r * d[0, xh]) + f[1] * math.exp(-r * d[1, xh]) for xh in (0, 1)
    )


def w_values(r: float, model: SourceModel) -> tuple[float, float]:
    """Output-letter weights (w0, w1) solving Gallager's w-condition for the tight f.

    Closed form of the 2x2 solve::

        w0 = (1-beta)/(1 - e^{-ru}) - beta/(e^{rv} - 1)
        w1 = beta/(1 - e^{-rv}) - (1-beta)/(e^{ru} - 1)

    They sum to 1 (w is the optimal reproduction marginal), tend to
    ``(1-beta, beta)`` as r grows, and w1 crosses zero exactly where the
    distortion reaches alpha.
    """
    r = _require_positive_r(r)
    c = uv(model)
    b, bb = model.beta, model.beta_bar
    one_minus_eu = -math.expm1(-r * c.u)
    one_minus_ev = -math.expm1(-r * c.v)
    w0 = bb / one_minus_eu - b * inv_expm1(r * c.v)
    w1 = b / one_minus_ev - bb * inv_expm1(r * c.u)
    return w0, w1


def w_condition(r: float, model: SourceModel, f: tuple[float, float], w: tuple[float, float]) -> tuple[float, float]:
    """``(f_y / Q(y)) sum_xhat w(xhat) exp(-r dhat(y, xhat))`` for y = 0, 1 (must equal 1)."""
    r = _require_positive_r(r)
    d = distortion_table(model).entries
    q = (model.beta_bar, model.beta)
    return tuple(  # type: ignore[return-value]
        f[y] / q[y] * (w[0] * math.exp(-r * d[y, 0]) + w[1] * math.exp(-r * d[y, 1])) for y in (0, 1)
    )


@dataclass(frozen=True)
class DualSolution:
    """Optimal slope parameter and the certificate that comes with it.

    Zero-rate solutions (``D >= alpha``) have ``r_star == 0`` and no
    certificate fields.
    """

    r_star: float
    rate: float
    base: LogBase
    g_value: float
    f0: Optional[float]
    f1: Optional[float]
    w0: Optional[float]
    w1: Optional[float]
    residual: float
    iterations: int
    bracket: Optional[tuple[float, float]]
    constraint_residual: float = 0.0
    w_condition_residual: float = 0.0
    regime: str = "interior"

    @property
    def rate_nats(self) -> float:
        return self.base.to_nats(self.rate)


def _bisect_decreasing(F, target_tol: float, max_iter: int):
    """Bracket and bisect the root of a strictly decreasing F on (0, inf)."""
    lo = hi = 1.0
    f_lo = f_hi = F(1.0)
    evals = 1
    if f_hi > 0.0:
        while f_hi > 0.0:
            lo, f_lo = hi, f_hi
            hi *= 2.0
            f_hi = F(hi)
            evals += 1
            if evals > max_iter:
                raise SolverError("could not bracket r*: phi stays above D - p")
    else:
        while f_lo <= 0.0:
            if f_lo == 0.0:
                return lo, lo, lo, f_lo, evals
            hi, f_hi = lo, f_lo
            lo *= 0.5
            f_lo = F(lo)
            evals += 1
            if evals > max_iter or lo == 0.0:
                raise SolverError("could not bracket r*: phi stays below D - p")

    r, f_r = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    while evals < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = F(mid)
        evals += 1
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        r, f_r = mid, f_mid
        if abs(f_mid) <= target_tol:
            break
    return r, lo, hi, f_r, evals


def solve_r_star(
    model: SourceModel,
    D: float,
    tol: float = DEFAULT_TOL,
    base: LogBase | str = LogBase.BITS,
    max_iter: int = 4000,
    polish: bool = True,
) -> DualSolution:
    """Find r* with phi(r*) = D - p and assemble the rate and its certificate.

    Bisection on a geometrically expanded bracket, stopped once the residual
    is below ``tol``, then a few guarded Newton steps using the closed-form
    derivative of phi.
    """
    base = LogBase.parse(base)
    D = check_probability(D, "D")
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    _require_informative(model)
    if D <= model.p:
        raise InfeasibleDistortionError(
            D, min(model.p, model.alpha),
            f"r* diverges for D <= p (D={D!r}, p={model.p!r}); the rate there is h(beta) at D = p",
        )
    h_beta = binary_entropy(model.beta, LogBase.NATS)
    if D >= model.alpha:
        return DualSolution(
            r_star=0.0, rate=0.0, base=base, g_value=h_beta,
            f0=None, f1=None, w0=None, w1=None,
            residual=0.0, iterations=0, bracket=None, regime="zero-rate",
        )

    target = D - model.p

    def F(r):
        return rstar_equation_lhs(r, model) - target

    r, lo, hi, f_r, evals = _bisect_decreasing(F, tol, max_iter)

    if polish:
        for _ in range(4):
            if f_r == 0.0:
                break
            slope = rstar_equation_lhs_prime(r, model)
            if slope >= 0.0 or not math.isfinite(slope):
                break
            cand = r - f_r / slope
            if not lo <= cand <= hi:
                break
            f_cand = F(cand)
            evals += 1
            if abs(f_cand) >= abs(f_r):
                break
            r, f_r = cand, f_cand
            if f_r > 0.0:
                lo = r
            else:
                hi = r

    if abs(f_r) > tol:
        raise SolverError(f"r* residual {f_r!r} exceeds tol {tol!r} after {evals} evaluations")

    g_val = g(r, model, D)
    # rounding can push the difference a few ulps below zero next to D = alpha
    rate_nats = max(h_beta - g_val, 0.0)
    f0, f1 = f_values(r, model)
    w0, w1 = w_values(r, model)
    cons = gallager_constraint(r, model, (f0, f1))
    wcond = w_condition(r, model, (f0, f1), (w0, w1))
    return DualSolution(
        r_star=r,
        rate=base.from_nats(rate_nats),
        base=base,
        g_value=g_val,
        f0=f0,
        f1=f1,
        w0=w0,
        w1=w1,
        residual=f_r,
        iterations=evals,
        bracket=(lo, hi),
        constraint_residual=max(abs(s - 1.0) for s in cons),
        w_condition_residual=max(abs(s - 1.0) for s in wcond),
    )


def irdf(
    model: SourceModel,
    D: float,
    base: LogBase | str = LogBase.BITS,
    tol: float = DEFAULT_TOL,
) -> float:
    """Indirect rate-distortion function R_{X|Y}(D).

    Zero for ``D >= alpha``, ``h(beta)`` at ``D = p`` and ``h(beta) - g(r*)``
    in between. Raises :class:`InfeasibleDistortionError` below
    ``min(p, alpha)``.
    """
    base = LogBase.parse(base)
    D = check_probability(D, "D")
    d_min = min(model.p, model.alpha)
    if D < d_min:
        raise InfeasibleDistortionError(D, d_min)
    if D >= model.alpha:
        return 0.0
    if D == model.p:
        # lossless description of Y
        return binary_entropy(model.beta, base)
    return solve_r_star(model, D, tol=tol, base=base).rate


def dual_lower_bound(r: float, model: SourceModel, D: float, base: LogBase | str = LogBase.BITS) -> float:
    """``h(beta) - g(r)``: a lower bound on the rate for every r > 0, tight at r*."""
    base = LogBase.parse(base)
    return base.from_nats(binary_entropy(model.beta, LogBase.NATS) - g(r, model, D))


@dataclass(frozen=True)
class AppendixDiagnostics:
    a: float
    b: float
    delta: float


def appendix_diagnostics(r: float, model: SourceModel, D: float) -> AppendixDiagnostics:
    """Auxiliary functions from the positivity and upper-bound proofs.

    ``a(r)`` and ``b(r)`` are evaluated literally from their defining expressions, with
    ``K = alpha (1-alpha)(1-2p) / (beta (1-beta))``::

        a(r) = p - D + (u+v)/(e^{r(u+v)}-1) - (1-beta)(u+v)/(e^{ru}-1)
        b(r) = p - D + (u+v)/(e^{r(u+v)}-1) - (1-beta)u/(e^{ru}-1)
               - (1-beta) v e^{-r(K-u)}/(e^{ru}-1)

    Note ``b - a = (1-beta) v (1 - e^{-r(K-u)})/(e^{ru}-1)``, which is
    positive whenever ``K > u``.

    ``delta(r) = g(r) - g_sym(r)`` is the gap between g and its
    symmetric-source counterpart; positive for alpha < 1/2, identically zero
    at alpha = 1/2, and vanishing as r grows.
    """
    r = _require_positive_r(r)
    D = check_probability(D, "D")
    c = uv(model)
    u, v, w = c.u, c.v, c.u + c.v
    a_, p, b_, bb = model.alpha, model.p, model.beta, model.beta_bar
    K = a_ * (1.0 - a_) * (1.0 - 2.0 * p) / (b_ * bb)
    common = (p - D) + w * inv_expm1(r * w) - bb * u * inv_expm1(r * u)
    a_val = common - bb * v * inv_expm1(r * u)
    b_val = common - bb * v * math.exp(-r * (K - u)) * inv_expm1(r * u)

    spread = 1.0 - 2.0 * p
    lw = log1mexp(r * w)
    lplus = math.log1p(math.exp(-r * spread)) if r * spread < 700.0 else 0.0
    delta = bb * (lw - log1mexp(r * u) - lplus) + b_ * (lw - log1mexp(r * v) - lplus)
    return AppendixDiagnostics(a=a_val, b=b_val, delta=delta)
