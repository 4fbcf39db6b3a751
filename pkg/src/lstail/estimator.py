"""Ordinary least squares for ``x = A theta0 + v`` and its error decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .design import DesignMatrix, gram_spectrum

__all__ = [
    "RankDeficientError",
    "LinearModelInstance",
    "EstimateResult",
    "make_instance",
    "fit",
    "coordinate_error_event",
    "noise_projection_event",
    "lemma1_rhs_event",
]


class RankDeficientError(np.linalg.LinAlgError):
    """The Gram matrix is singular, so the estimator is undefined (violates A2)."""


@dataclass(frozen=True)
class LinearModelInstance:
    A: DesignMatrix
    theta0: np.ndarray
    x: np.ndarray
    v: np.ndarray


def make_instance(A: DesignMatrix, theta0, v) -> LinearModelInstance:
    theta0 = np.asarray(theta0, float).ravel()
    v = np.asarray(v, float).ravel()
    if theta0.size != A.entries.shape[1]:
        raise ValueError(f"theta0 has {theta0.size} entries, design has {A.entries.shape[1]} columns")
    if v.size != A.N:
        raise ValueError(f"noise has {v.size} samples, design has {A.N} rows")
    return LinearModelInstance(A, theta0, A.entries @ theta0 + v, v)


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: np.ndarray
    theta0: np.ndarray
    err_inf: float
    gram_lambda_min: float
    gram_lambda_max: float
    noise_projection: np.ndarray  # A^T v / N

    @property
    def errors(self) -> np.ndarray:
        return self.theta_hat - self.theta0

    @property
    def inverse_gram_lambda_max(self) -> float:
        """``lambda_max((A^T A / N)^{-1})``, obtained as ``1 / lambda_min``."""
        return 1.0 / self.gram_lambda_min


def fit(instance: LinearModelInstance) -> EstimateResult:
    """Least-squares fit through a QR factorisation of the design.

    Raises:
        RankDeficientError: if ``A^T A`` does not have full rank.
    """
    A = instance.A.entries
    spectrum = gram_spectrum(instance.A)
    if not spectrum.rank_ok:
        raise RankDeficientError(
            "A^T A is rank deficient (assumption A2); "
            f"lambda_min={spectrum.lambda_min:.3g}, lambda_max={spectrum.lambda_max:.3g}"
        )
    q, r = np.linalg.qr(A)
    theta_hat = linalg.solve_triangular(r, q.T @ instance.x)
    return EstimateResult(
        theta_hat=theta_hat,
        theta0=instance.theta0,
        err_inf=float(np.max(np.abs(theta_hat - instance.theta0))),
        gram_lambda_min=spectrum.lambda_min,
        gram_lambda_max=spectrum.lambda_max,
        noise_projection=A.T @ instance.v / A.shape[0],
    )


def _check_index(result: EstimateResult, i: int) -> int:
    p = result.theta_hat.size
    if not 0 <= i < p:
        raise IndexError(f"coordinate {i} out of range for p={p}")
    return i


def coordinate_error_event(result: EstimateResult, i: int, r: float) -> bool:
    """Whether ``|theta_hat_i - theta0_i| > r``."""
    i = _check_index(result, i)
    return bool(abs(result.theta_hat[i] - result.theta0[i]) > r)


def noise_projection_event(result: EstimateResult, i: int, r: float, sigma_min: float) -> bool:
    """Whether ``|c_i^T v / N| > r sigma_min / 2`` (column ``i`` of ``A``)."""
    i = _check_index(result, i)
    return bool(abs(result.noise_projection[i]) > r * sigma_min / 2)


def lemma1_rhs_event(result: EstimateResult, i: int, r: float) -> bool:
    """Whether ``|c_i^T v / N| > r / lambda_max((A^T A / N)^{-1})``."""
    i = _check_index(result, i)
    return bool(abs(result.noise_projection[i]) > r * result.gram_lambda_min)
