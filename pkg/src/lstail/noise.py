"""Zero-mean sub-Gaussian martingale-difference noise and its diagnostics.

Every generator is a pure function of ``(spec, N, seed)``. The ``fir_mds``
kind models a bounded interferer passed through a ``k+1``-tap channel plus
Gaussian background noise::

    v[n] = sum_{i=0..k} j[n-i] * H[n, i] + w[n]

with ``j`` i.i.d. uniform on ``{-eta, +eta}``, channel taps ``H[n, i]``
i.i.d. ``N(0, r1**2)`` drawn afresh at each time step, and ``w`` i.i.d.
``N(0, r2**2)``. Given the past, ``v[n]`` has zero mean and is sub-Gaussian
with parameter ``sqrt((k+1) eta^2 r1^2 + r2^2)``.

``ar1`` is a planted counterexample (zero mean but correlated) used to show
that :func:`check_mds` rejects non-MDS input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats
from scipy.special import logsumexp

from .design import as_generator

__all__ = [
    "NoiseSpec",
    "NoiseSample",
    "SubGaussianReport",
    "MDSReport",
    "delta_of",
    "sample_iid",
    "sample_mds",
    "sample_noise",
    "check_subgaussian",
    "check_mds",
    "default_s_grid",
]

_PARAMS = {
    "gaussian": ("sigma",),
    "uniform_bounded": ("c",),
    "rademacher_scaled": ("c",),
    "gaussian_mixture": ("weights", "sigmas"),
    "fir_mds": ("taps", "eta", "r1", "r2"),
    "ar1": ("phi", "sigma"),
}
IID_KINDS = ("gaussian", "uniform_bounded", "rademacher_scaled", "gaussian_mixture")

# MGF check slack, in standard errors of the empirical log-MGF
MGF_SLACK_SE = 3.0
# family-wise level of the MDS bands
MDS_LEVEL = 0.99


@dataclass(frozen=True)
class NoiseSpec:
    """A zero-mean noise law. ``params`` holds the kind's parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _PARAMS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {tuple(_PARAMS)}")
        expected = set(_PARAMS[self.kind])
        got = set(self.params)
        if got != expected:
            missing, extra = expected - got, got - expected
            parts = []
            if missing:
                parts.append(f"missing {sorted(missing)}")
            if extra:
                parts.append(f"unknown {sorted(extra)}")
            raise ValueError(f"{self.kind} noise: " + ", ".join(parts))
        p = self.params
        if self.kind == "gaussian_mixture":
            w = np.asarray(p["weights"], float)
            s = np.asarray(p["sigmas"], float)
            if w.size == 0:
                raise ValueError("gaussian_mixture needs at least one component")
            if w.shape != s.shape or w.ndim != 1:
                raise ValueError("mixture weights and sigmas must be equal-length vectors")
            if np.any(w <= 0) or not math.isclose(w.sum(), 1.0, rel_tol=1e-9):
                raise ValueError("mixture weights must be positive and sum to 1")
            if np.any(s < 0):
                raise ValueError("mixture sigmas must be non-negative")
        elif self.kind == "fir_mds":
            if int(p["taps"]) != p["taps"] or p["taps"] < 1:
                raise ValueError("fir_mds taps must be a positive integer")
            for key in ("eta", "r1", "r2"):
                if p[key] < 0:
                    raise ValueError(f"fir_mds {key} must be non-negative")
        elif self.kind == "ar1":
            if not -1 < p["phi"] < 1:
                raise ValueError("ar1 needs |phi| < 1")
            if p["sigma"] < 0:
                raise ValueError("ar1 sigma must be non-negative")
        else:
            (key,) = _PARAMS[self.kind]
            if p[key] < 0:
                raise ValueError(f"{self.kind} {key} must be non-negative")

    @classmethod
    def gaussian(cls, sigma: float) -> NoiseSpec:
        return cls("gaussian", {"sigma": float(sigma)})

    @classmethod
    def uniform_bounded(cls, c: float) -> NoiseSpec:
        return cls("uniform_bounded", {"c": float(c)})

    @classmethod
    def rademacher_scaled(cls, c: float) -> NoiseSpec:
        return cls("rademacher_scaled", {"c": float(c)})

    @classmethod
    def gaussian_mixture(cls, weights, sigmas) -> NoiseSpec:
        return cls(
            "gaussian_mixture",
            {"weights": [float(x) for x in weights], "sigmas": [float(x) for x in sigmas]},
        )

    @classmethod
    def fir_mds(cls, taps: int, eta: float, r1: float, r2: float) -> NoiseSpec:
        return cls("fir_mds", {"taps": int(taps), "eta": float(eta), "r1": float(r1), "r2": float(r2)})

    @classmethod
    def ar1(cls, phi: float, sigma: float) -> NoiseSpec:
        return cls("ar1", {"phi": float(phi), "sigma": float(sigma)})

    @property
    def delta(self) -> float:
        return delta_of(self)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        d = dict(d)
        kind = d.pop("kind", None)
        if kind not in _PARAMS:
            raise ValueError(f"unknown noise kind {kind!r}; expected one of {tuple(_PARAMS)}")
        make = getattr(cls, kind)
        try:
            return make(**d)
        except TypeError:
            # reports missing/unknown keys by name
            return cls(kind, d)


@dataclass(frozen=True)
class NoiseSample:
    values: np.ndarray
    spec: NoiseSpec
    seed: object


def delta_of(spec: NoiseSpec) -> float:
    """Sub-Gaussian parameter certified for ``spec``.

    Bounded laws use Hoeffding's lemma (``c`` for support ``[-c, c]``), a
    zero-mean Gaussian scale mixture is dominated by its widest component, and
    ``fir_mds`` adds the variance proxies of its independent summands.
    ``ar1`` returns the marginal standard deviation, which certifies only the
    marginal law; the process is not an MDS.
    """
    p = spec.params
    kind = spec.kind
    if kind == "gaussian":
        return p["sigma"]
    if kind in ("uniform_bounded", "rademacher_scaled"):
        return p["c"]
    if kind == "gaussian_mixture":
        if not p["sigmas"]:
            raise ValueError("empty mixture")
        return max(p["sigmas"])
    if kind == "fir_mds":
        return math.sqrt(p["taps"] * p["eta"] ** 2 * p["r1"] ** 2 + p["r2"] ** 2)
    return p["sigma"] / math.sqrt(1 - p["phi"] ** 2)


def sample_iid(spec: NoiseSpec, N: int, seed) -> NoiseSample:
    if spec.kind not in IID_KINDS:
        raise ValueError(f"{spec.kind} noise is not i.i.d.; use sample_mds")
    rng = as_generator(seed)
    p = spec.params
    N = int(N)
    if spec.kind == "gaussian":
        v = p["sigma"] * rng.standard_normal(N)
    elif spec.kind == "uniform_bounded":
        v = rng.uniform(-p["c"], p["c"], N)
    elif spec.kind == "rademacher_scaled":
        v = p["c"] * (rng.integers(0, 2, N) * 2 - 1).astype(float)
    else:
        comp = rng.choice(len(p["weights"]), size=N, p=p["weights"])
        v = np.asarray(p["sigmas"])[comp] * rng.standard_normal(N)
    return NoiseSample(v, spec, seed)


def sample_mds(spec: NoiseSpec, N: int, seed) -> NoiseSample:
    """Sample the serially dependent kinds (``fir_mds``, and the ``ar1`` counterexample)."""
    rng = as_generator(seed)
    p = spec.params
    N = int(N)
    if spec.kind == "fir_mds":
        taps = p["taps"]
        if taps >= N:
            raise ValueError(f"taps={taps} must be smaller than N={N}")
        j = p["eta"] * (rng.integers(0, 2, N + taps - 1) * 2 - 1).astype(float)
        h = p["r1"] * rng.standard_normal((N, taps))
        w = p["r2"] * rng.standard_normal(N)
        # lagged[n, i] = j[n - i], with taps - 1 presample symbols
        lagged = np.lib.stride_tricks.sliding_window_view(j, taps)[:, ::-1]
        v = np.einsum("ni,ni->n", lagged, h) + w
    elif spec.kind == "ar1":
        phi, sigma = p["phi"], p["sigma"]
        e = sigma * rng.standard_normal(N)
        start = rng.standard_normal() * sigma / math.sqrt(1 - phi**2)
        v, _ = signal.lfilter([1.0], [1.0, -phi], e, zi=[phi * start])
    else:
        raise ValueError(f"{spec.kind} noise is i.i.d.; use sample_iid")
    return NoiseSample(v, spec, seed)


def sample_noise(spec: NoiseSpec, N: int, seed) -> NoiseSample:
    if spec.kind in IID_KINDS:
        return sample_iid(spec, N, seed)
    return sample_mds(spec, N, seed)


def default_s_grid(delta: float, points: int = 12) -> np.ndarray:
    """Symmetric grid on ``[-3/delta, 3/delta]`` without zero."""
    half = np.linspace(3 / delta / (points // 2), 3 / delta, points // 2)
    return np.concatenate([-half[::-1], half])


@dataclass(frozen=True)
class SubGaussianReport:
    s_grid: np.ndarray
    log_mgf: np.ndarray
    bound: np.ndarray
    slack: np.ndarray
    max_violation: float
    passed: bool


def check_subgaussian(values, delta: float, s_grid=None) -> SubGaussianReport:
    """Compare the empirical log-MGF against ``s^2 delta^2 / 2``.

    At each ``s`` the check passes if ``log mean(exp(s v))`` exceeds the bound
    by no more than three standard errors of the estimate (delta method).
    ``max_violation`` is the largest excess over bound plus slack; a positive
    value means failure.
    """
    v = np.asarray(values, float).ravel()
    if s_grid is None:
        s_grid = default_s_grid(delta)
    s = np.asarray(s_grid, float).ravel()
    if s.size == 0 or not np.all(np.isfinite(s)):
        raise ValueError("s_grid must be a non-empty finite vector")
    n = v.size
    sv = np.outer(s, v)
    lse = logsumexp(sv, axis=1)
    log_mgf = lse - math.log(n)
    # normalised weights give the relative variance of exp(s v) without overflow
    w = np.exp(sv - lse[:, None])
    rel_var = np.maximum(n * np.sum(w**2, axis=1) - 1, 0.0) * n / max(n - 1, 1)
    slack = MGF_SLACK_SE * np.sqrt(rel_var / n)
    bound = s**2 * delta**2 / 2
    excess = log_mgf - bound - slack
    max_violation = float(excess.max())
    return SubGaussianReport(s, log_mgf, bound, slack, max_violation, max_violation <= 0)


@dataclass(frozen=True)
class MDSReport:
    lags: np.ndarray
    autocorr: np.ndarray
    autocorr_se: np.ndarray
    regression_coeffs: np.ndarray
    regression_se: np.ndarray
    critical: float
    passed: bool

    @property
    def max_stat(self) -> float:
        """Largest absolute standardised statistic across both families."""
        z = np.concatenate([self.autocorr / self.autocorr_se, self.regression_coeffs / self.regression_se])
        return float(np.max(np.abs(z)))


def check_mds(values, max_lag: int) -> MDSReport:
    """Test ``E(v_n | past) = 0`` through lagged second moments.

    Two families of statistics are formed: normalised autocovariances
    ``sum v_n v_{n-k} / sum v_n^2`` at lags ``1..max_lag`` and the
    coefficients of regressing ``v_n`` on its ``max_lag`` predecessors. Both
    use heteroskedasticity-robust standard errors, which stay valid for
    dependent but uncorrelated MDS noise. The ``2 * max_lag`` statistics are
    compared against a Bonferroni band with 99% family-wise coverage.
    """
    v = np.asarray(values, float).ravel()
    n = v.size
    max_lag = int(max_lag)
    if max_lag < 1 or max_lag >= n / 10:
        raise ValueError(f"max_lag must be in [1, N/10), got {max_lag} for N={n}")
    lags = np.arange(1, max_lag + 1)
    denom = float(v @ v)
    critical = float(stats.norm.ppf(1 - (1 - MDS_LEVEL) / (2 * 2 * max_lag)))
    if denom == 0:
        zeros = np.zeros(max_lag)
        return MDSReport(lags, zeros, np.ones(max_lag), zeros, np.ones(max_lag), critical, True)

    rho = np.empty(max_lag)
    rho_se = np.empty(max_lag)
    for idx, k in enumerate(lags):
        prod = v[k:] * v[:-k]
        rho[idx] = prod.sum() / denom
        rho_se[idx] = math.sqrt(float(prod @ prod)) / denom

    y = v[max_lag:]
    X = np.column_stack([v[max_lag - k : n - k] for k in lags])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    xtx_inv = np.linalg.inv(X.T @ X)
    meat = (X * resid[:, None] ** 2).T @ X
    cov = xtx_inv @ meat @ xtx_inv
    coef_se = np.sqrt(np.diag(cov))

    rho_se = np.where(rho_se > 0, rho_se, np.inf)
    coef_se = np.where(coef_se > 0, coef_se, np.inf)
    passed = bool(
        np.all(np.abs(rho) <= critical * rho_se) and np.all(np.abs(coef) <= critical * coef_se)
    )
    return MDSReport(lags, rho, rho_se, coef, coef_se, critical, passed)
