"""Amended per-letter distortion on the observation alphabet.

The indirect problem (encode X from Y = X xor Z) is equivalent to a direct
problem for Y with distortion ``dhat(y, xhat) = P(X != xhat | Y = y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import DegenerateObservationError, DomainError, SourceModel

# Estimators are deterministic maps y -> xhat, stored as (xhat(0), xhat(1)).
Estimator = tuple[int, int]

ESTIMATORS: dict[str, Estimator] = {
    "identity": (0, 1),
    "zero": (0, 0),
    "one": (1, 1),
    "flip": (1, 0),
}


@dataclass(frozen=True)
class DistortionTable:
    """2x2 table of ``dhat``, indexed ``entries[y, xhat]``."""

    entries: np.ndarray
    model: SourceModel

    def __call__(self, y: int, xhat: int) -> float:
        return float(self.entries[y, xhat])

    def as_rows(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.entries]


def distortion_table(model: SourceModel) -> DistortionTable:
    a, p, b = model.alpha, model.p, model.beta
    if b <= 0.0 or b >= 1.0:
        raise DegenerateObservationError(
            f"P(Y=1)={b!r}: the observation is constant; use min_distortion() instead"
        )
    ab, pb, bb = 1.0 - a, 1.0 - p, 1.0 - b
    entries = np.array(
        [
            [a * p / bb, ab * pb / bb],  # y = 0: P(X=1|Y=0), P(X=0|Y=0)
            [a * pb / b, ab * p / b],  # y = 1: P(X=1|Y=1), P(X=0|Y=1)
        ]
    )
    entries.setflags(write=False)
    return DistortionTable(entries=entries, model=model)


def min_distortion(model: SourceModel) -> float:
    """Smallest achievable expected Hamming distortion, ``min(p, alpha)``."""
    return min(model.p, model.alpha)


def zero_rate_distortion(model: SourceModel) -> float:
    """Distortion of the constant reconstruction ``xhat = 0``; the rate is zero from here on."""
    return model.alpha


def optimal_estimator(model: SourceModel) -> Estimator:
    # trust the observation only when it is more reliable than the prior
    return ESTIMATORS["identity"] if model.p <= model.alpha else ESTIMATORS["zero"]


def resolve_estimator(estimator: Union[str, Sequence[int], Callable[[int], int]]) -> Estimator:
    if isinstance(estimator, str):
        try:
            return ESTIMATORS[estimator]
        except KeyError:
            raise DomainError(
                f"unknown estimator {estimator!r}; choose from {sorted(ESTIMATORS)}"
            ) from None
    if callable(estimator):
        mapping = (int(estimator(0)), int(estimator(1)))
    else:
        mapping = tuple(int(v) for v in estimator)
    if len(mapping) != 2 or any(v not in (0, 1) for v in mapping):
        raise DomainError(f"estimator must map {{0,1}} -> {{0,1}}, got {mapping!r}")
    return mapping  # type: ignore[return-value]


def expected_distortion(model: SourceModel, estimator) -> float:
    """Analytic E[d(X, xhat(Y))], computed from the joint law of (X, Y)."""
    est = resolve_estimator(estimator)
    a, p = model.alpha, model.p
    total = 0.0
    for x, px in ((0, 1.0 - a), (1, a)):
        for z, pz in ((0, 1.0 - p), (1, p)):
            y = x ^ z
            total += px * pz * (x != est[y])
    return total


@dataclass(frozen=True)
class SimulationResult:
    empirical_d: float
    empirical_dhat: float
    analytic: float
    sigma: float
    n: int
    seed: int
    estimator: Estimator
    generator: str = "numpy.random.PCG64"

    @property
    def band(self) -> tuple[float, float]:
        return self.analytic - 3.0 * self.sigma, self.analytic + 3.0 * self.sigma

    @property
    def within_band(self) -> bool:
        lo, hi = self.band
        return lo <= self.empirical_d <= hi and lo <= self.empirical_dhat <= hi

    def __iter__(self):
        # allows ``d, dhat = simulate_reduction(...)``
        return iter((self.empirical_d, self.empirical_dhat))


def simulate_reduction(model: SourceModel, estimator, n: int, seed: int) -> SimulationResult:
    """Monte-Carlo check that E[d(X, Xhat)] = E[dhat(Y, Xhat)] for a symbol-wise estimator.

    Draws ``n`` i.i.d. pairs (X, Z), forms Y = X xor Z and reports both the
    empirical Hamming distortion against X and the empirical mean of the
    amended distortion. The generator is PCG64 seeded with ``seed``.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    est = resolve_estimator(estimator)
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.random(n) < model.alpha
    z = rng.random(n) < model.p
    y = (x ^ z).astype(np.intp)
    xhat = np.asarray(est, dtype=np.intp)[y]
    empirical_d = float(np.mean(x.astype(np.intp) != xhat))

    if 0.0 < model.beta < 1.0:
        table = distortion_table(model).entries
        empirical_dhat = float(np.mean(table[y, xhat]))
    else:
        # constant Y (alpha = p = 0): X is constant too, dhat = [xhat != 0]
        empirical_dhat = float(np.mean(xhat != 0))

    analytic = expected_distortion(model, est)
    sigma = math.sqrt(analytic * (1.0 - analytic) / n)
    return SimulationResult(
        empirical_d=empirical_d,
        empirical_dhat=empirical_dhat,
        analytic=analytic,
        sigma=sigma,
        n=n,
        seed=int(seed),
        estimator=est,
    )
