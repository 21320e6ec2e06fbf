"""Probability and entropy primitives plus the binary source/channel model.

Everything in this package computes in nats internally. Values that leave
the package carry a :class:`LogBase` and default to bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

LN2 = math.log(2.0)

# exp(-x) underflows to 0 in double precision well before this.
_EXP_CUTOFF = 700.0


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InfeasibleDistortionError(DomainError):
    """The requested distortion is below the smallest achievable one."""

    def __init__(self, D: float, d_min: float, message: str | None = None):
        self.D = D
        self.d_min = d_min
        super().__init__(message or f"distortion below min{{p, α}}: D={D!r} < {d_min!r}")


class RegimeError(ValueError):
    """The model is in the zero-information regime (p >= alpha).

    There the indirect rate is identically zero on its domain, so the dual
    root finder must not run.
    """

    regime = "zero-information"


class DegenerateObservationError(ValueError):
    """P(Y=1) is 0 or 1, so the observation carries no randomness at all."""


class SolverError(RuntimeError):
    """An iterative solver failed to meet its tolerance."""


class LogBase(str, enum.Enum):
    BITS = "bits"
    NATS = "nats"

    @classmethod
    def parse(cls, value: "LogBase | str") -> "LogBase":
        if isinstance(value, LogBase):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown log base {value!r}; expected 'bits' or 'nats'") from None

    def from_nats(self, value: float) -> float:
        return value / LN2 if self is LogBase.BITS else value

    def to_nats(self, value: float) -> float:
        return value * LN2 if self is LogBase.BITS else value


def check_probability(q: float, name: str = "q") -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0:  # also rejects NaN
        raise DomainError(f"{name}={q!r} is not a probability in [0, 1]")
    return q


def xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def binary_entropy(q: float, base: LogBase | str = LogBase.BITS) -> float:
    """Binary entropy ``-q log q - (1-q) log(1-q)`` with ``0 log 0 = 0``."""
    q = check_probability(q)
    return LogBase.parse(base).from_nats(-xlogx(q) - xlogx(1.0 - q))


def star(a: float, b: float) -> float:
    """Binary convolution ``a(1-b) + b(1-a)``: P(A xor B = 1) for independent bits."""
    a = check_probability(a, "a")
    b = check_probability(b, "b")
    return a * (1.0 - b) + b * (1.0 - a)


def log1mexp(x: float) -> float:
    """``log(1 - exp(-x))`` for ``x > 0`` without cancellation."""
    if x <= 0.0:
        raise DomainError(f"log1mexp needs x > 0, got {x!r}")
    if x < LN2:
        return math.log(-math.expm1(-x))
    if x > _EXP_CUTOFF:
        return 0.0
    return math.log1p(-math.exp(-x))


def inv_expm1(y: float) -> float:
    """``1 / (exp(y) - 1)`` for ``y > 0``; zero past the overflow cliff."""
    if y > _EXP_CUTOFF:
        return 0.0
    return 1.0 / math.expm1(y)


def bose_remainder(y: float) -> float:
    """``1/(e^y - 1) - 1/y + 1/2``, which is O(y) near zero.

    Summing this remainder instead of ``1/(e^y - 1)`` keeps the ``1/y`` poles
    from cancelling numerically when the slope parameter is tiny.
    """
    if y < 0.1:
        y2 = y * y
        return y * (1.0 / 12.0 - y2 * (1.0 / 720.0 - y2 * (1.0 / 30240.0 - y2 / 1209600.0)))
    return inv_expm1(y) - 1.0 / y + 0.5


def bose_remainder_prime(y: float) -> float:
    """Derivative of :func:`bose_remainder`: ``1/y^2 - 1/(4 sinh^2(y/2))``."""
    if y < 0.1:
        y2 = y * y
        return 1.0 / 12.0 - y2 * (1.0 / 240.0 - y2 * (1.0 / 6048.0 - y2 * 7.0 / 1209600.0))
    if y > _EXP_CUTOFF:
        return 1.0 / (y * y)
    s = 2.0 * math.sinh(0.5 * y)
    return 1.0 / (y * y) - 1.0 / (s * s)


@dataclass(frozen=True)
class ComplementFlags:
    """Which relabelings were applied to reach the canonical region.

    ``source``: X (and with it X-hat) was relabeled, alpha -> 1 - alpha.
    ``observation``: Y was relabeled, p -> 1 - p.
    """

    source: bool = False
    observation: bool = False


@dataclass(frozen=True)
class SourceModel:
    """Bernoulli(alpha) source seen through a BSC(p), in canonical form.

    Build one with :func:`canonicalize` unless the parameters are already
    known to satisfy ``alpha, p <= 1/2``.
    """

    alpha: float
    p: float
    flags: ComplementFlags = ComplementFlags()
    beta: float = field(init=False)

    def __post_init__(self):
        alpha = check_probability(self.alpha, "alpha")
        p = check_probability(self.p, "p")
        if alpha > 0.5 or p > 0.5:
            raise DomainError(
                f"SourceModel must be canonical (alpha, p <= 1/2), got alpha={alpha!r}, p={p!r}; "
                "use canonicalize()"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "beta", star(alpha, p))

    @property
    def alpha_bar(self) -> float:
        return 1.0 - self.alpha

    @property
    def p_bar(self) -> float:
        return 1.0 - self.p

    @property
    def beta_bar(self) -> float:
        return 1.0 - self.beta

    @property
    def informative(self) -> bool:
        """True when p < alpha, the only regime with a nontrivial rate curve."""
        return self.p < self.alpha


def canonicalize(alpha_raw: float, p_raw: float) -> SourceModel:
    """Map any (alpha, p) in [0, 1]^2 onto the equivalent model with alpha, p <= 1/2.

    Relabeling the source symbols (together with the reconstruction) and
    relabeling the observation symbols both leave every rate unchanged.
    """
    alpha_raw = check_probability(alpha_raw, "alpha")
    p_raw = check_probability(p_raw, "p")
    flip_source = alpha_raw > 0.5
    flip_obs = p_raw > 0.5
    return SourceModel(
        alpha=1.0 - alpha_raw if flip_source else alpha_raw,
        p=1.0 - p_raw if flip_obs else p_raw,
        flags=ComplementFlags(source=flip_source, observation=flip_obs),
    )
