"""Sample-count bounds for least squares under sub-Gaussian MDS noise.

The guarantee: for every ``N > n_required(inputs, r, eps).n``,

    P(||theta_hat - theta_0||_inf > r) < eps

provided the design entries are bounded by ``alpha``, the expected Gram matrix
has extreme eigenvalues ``sigma_min``/``sigma_max`` and the noise is a
conditionally ``delta`` sub-Gaussian martingale difference sequence.

The required count is the maximum of two terms. ``n1`` controls the noise
projection onto each column; ``nrand`` controls the probability that the
smallest eigenvalue of the empirical Gram matrix falls below ``sigma_min / 2``.
All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DomainError",
    "BoundInputs",
    "BoundResult",
    "n1",
    "nrand",
    "eigen_sample_count",
    "n_required",
    "invert_r",
    "invert_eps",
    "crossover_r",
]

# sigma_max <= p * alpha**2 is checked with this relative slack.
_TRACE_RTOL = 1e-12


class DomainError(ValueError):
    """Raised when a bound parameter lies outside its mathematical domain."""


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class BoundInputs:
    """Problem constants entering the sample-count formulas.

    Attributes:
        p: parameter dimension.
        alpha: almost-sure bound on ``|a_ni|``.
        delta: conditional sub-Gaussian parameter of the noise.
        sigma_min, sigma_max: extreme eigenvalues of ``M = E(A^T A) / N``.
    """

    p: int
    alpha: float
    delta: float
    sigma_min: float
    sigma_max: float

    def __post_init__(self):
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be a positive integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        for name in ("alpha", "delta", "sigma_min", "sigma_max"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        if self.sigma_min > self.sigma_max:
            raise DomainError(
                f"sigma_min={self.sigma_min} exceeds sigma_max={self.sigma_max}"
            )
        trace_cap = self.p * self.alpha**2
        if self.sigma_max > trace_cap * (1 + _TRACE_RTOL):
            raise DomainError(
                f"sigma_max={self.sigma_max} exceeds p*alpha^2={trace_cap}; "
                "no design with |a_ni| <= alpha has such a Gram matrix"
            )


@dataclass(frozen=True)
class BoundResult:
    """Outcome of :func:`n_required`.

    ``n1`` and ``nrand`` are the exact real-valued terms, ``n`` their ceiling
    maximum. The guarantee is strict, so ``n + 1`` is the first certified
    sample count. ``degenerate`` marks ``eps >= 2p``, where the log term is
    non-positive and every ``N`` trivially qualifies.
    """

    n1: float
    nrand: float
    n: int
    log_term: float
    degenerate: bool = False

    @property
    def n_first_certified(self) -> int:
        return self.n + 1


def _log_term(p: int, eps: float) -> float:
    eps = _positive("eps", eps)
    return math.log(2 * p / eps)


def _noise_coefficient(inputs: BoundInputs) -> float:
    # multiplies log(2p/eps) / r**2
    return 8 * inputs.alpha**2 * inputs.delta**2 / inputs.sigma_min**2


def _rand_coefficient(p: int, alpha: float, sigma_min: float, sigma_max: float) -> float:
    return (
        4 / 3 * (6 * sigma_max + sigma_min) * (p * alpha**2 + sigma_max) / sigma_min**2
    )


def n1(inputs: BoundInputs, r: float, eps: float) -> float:
    """Noise-projection term ``8 a^2 d^2 / (r^2 s_min^2) * log(2p/eps)``.

    Returns 0 when ``eps >= 2p``.
    """
    r = _positive("r", r)
    log_term = _log_term(inputs.p, eps)
    if log_term <= 0:
        return 0.0
    return _noise_coefficient(inputs) / r**2 * log_term


def nrand(inputs: BoundInputs, eps: float) -> float:
    """Eigenvalue-concentration term of the bound (independent of ``r``)."""
    log_term = _log_term(inputs.p, eps)
    if log_term <= 0:
        return 0.0
    coef = _rand_coefficient(inputs.p, inputs.alpha, inputs.sigma_min, inputs.sigma_max)
    return coef * log_term


def eigen_sample_count(
    p: int, alpha: float, sigma_min: float, sigma_max: float, eps_prime: float
) -> float:
    """Sample count beyond which ``P(lambda_min(A^T A / N) <= sigma_min / 2) <= eps_prime``.

    Same coefficient as :func:`nrand` but with ``log(p / eps_prime)``;
    ``nrand(eps)`` equals this at ``eps_prime = eps / 2``.
    """
    for name, value in (("alpha", alpha), ("sigma_min", sigma_min), ("sigma_max", sigma_max)):
        _positive(name, value)
    log_term = math.log(p / _positive("eps_prime", eps_prime))
    if log_term <= 0:
        return 0.0
    return _rand_coefficient(p, alpha, sigma_min, sigma_max) * log_term


def n_required(inputs: BoundInputs, r: float, eps: float) -> BoundResult:
    """Sample count ``N(r, eps) = max(n1, nrand)``, rounded up."""
    log_term = _log_term(inputs.p, eps)
    a = n1(inputs, r, eps)
    b = nrand(inputs, eps)
    return BoundResult(
        n1=a,
        nrand=b,
        n=math.ceil(max(a, b)),
        log_term=log_term,
        degenerate=log_term <= 0,
    )


def invert_r(inputs: BoundInputs, n: int, eps: float) -> float | None:
    """Smallest radius ``r`` with ``n1(r, eps) = n``.

    Returns ``None`` when ``n < nrand(eps)``: the eigenvalue requirement is
    not met at this ``n`` and no radius helps.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    if n < nrand(inputs, eps):
        return None
    log_term = _log_term(inputs.p, eps)
    if log_term <= 0:
        return 0.0
    return math.sqrt(_noise_coefficient(inputs) * log_term / n)


def invert_eps(inputs: BoundInputs, n: int, r: float) -> float:
    """Failure probability certified by ``n`` samples at radius ``r``.

    Inverts both terms of the bound and takes the larger; the ceiling in
    :func:`n_required` is not undone.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    r = _positive("r", r)
    two_p = 2 * inputs.p
    noise_term = two_p * math.exp(-n * r**2 / _noise_coefficient(inputs))
    coef = _rand_coefficient(inputs.p, inputs.alpha, inputs.sigma_min, inputs.sigma_max)
    rand_term = two_p * math.exp(-n / coef)
    return max(noise_term, rand_term)


def crossover_r(inputs: BoundInputs) -> float:
    """Radius where ``n1 == nrand``; ``n1`` dominates strictly below it."""
    coef = _rand_coefficient(inputs.p, inputs.alpha, inputs.sigma_min, inputs.sigma_max)
    return math.sqrt(_noise_coefficient(inputs) / coef)
