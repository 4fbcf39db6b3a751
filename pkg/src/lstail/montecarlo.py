"""Reproducible Monte-Carlo verification of the sample-count bounds.

Every random draw is keyed by ``(master_seed, stream, N, trial_index,
purpose, attempt)`` through :class:`numpy.random.SeedSequence` feeding a
Philox generator, so any trial can be recomputed on its own and results do
not depend on how trials are scheduled across threads. Aggregation counts
exceedances, which is order independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import bounds, design, estimator, noise
from .design import DesignSpec
from .noise import NoiseSpec

__all__ = [
    "ExperimentConfig",
    "TailEstimate",
    "SweepRow",
    "Lemma1Report",
    "Lemma2Report",
    "CapReached",
    "PersistentRankFailure",
    "trial_seed",
    "clopper_pearson",
    "run_trial",
    "trial_errors",
    "tail_probability",
    "find_empirical_N",
    "figure1_sweep",
    "lemma1_diagnostic",
    "lemma2_diagnostic",
]

# purpose tags mixed into every seed
DESIGN_TAG = 1
NOISE_TAG = 2
LEMMA2_TAG = 3

# streams: the main search, and the fresh draw that re-validates its answer
SEARCH_STREAM = 0
REVALIDATE_STREAM = 1

MAX_RESAMPLES = 100
CI_LEVEL = 0.99
GRID_RATIO = 1.5
DEFAULT_TRIALS = 2000
DEFAULT_R_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
DEFAULT_N_CAP = 10**7


class CapReached(RuntimeError):
    """No certified sample count was found below the search cap."""


class PersistentRankFailure(RuntimeError):
    """A trial kept drawing rank-deficient designs."""


def trial_seed(master_seed: int, N: int, trial_index: int, purpose: int,
               stream: int = 0, attempt: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master_seed),
        spawn_key=(int(stream), int(N), int(trial_index), int(purpose), int(attempt)),
    )


def clopper_pearson(k: int, n: int, level: float = CI_LEVEL) -> tuple[float, float]:
    """Exact two-sided binomial interval for ``k`` successes in ``n`` trials."""
    a = 1 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class ExperimentConfig:
    design: DesignSpec
    noise: NoiseSpec
    theta0: tuple[float, ...] = ()
    epsilon: float = 0.2
    r_grid: tuple[float, ...] = DEFAULT_R_GRID
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    workers: int = 1
    n_cap: int = DEFAULT_N_CAP

    def __post_init__(self):
        theta0 = tuple(float(t) for t in self.theta0) or (0.0,) * self.design.p
        object.__setattr__(self, "theta0", theta0)
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        if len(theta0) != self.design.p:
            raise ValueError(f"theta0 has {len(theta0)} entries but p={self.design.p}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        r = np.asarray(self.r_grid)
        if r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("r_grid must be non-empty, positive and strictly ascending")
        if self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def bound_inputs(self) -> bounds.BoundInputs:
        sigma_min, sigma_max = _gram_range(self.design)
        return bounds.BoundInputs(
            p=self.design.p,
            alpha=self.design.alpha,
            delta=noise.delta_of(self.noise),
            sigma_min=sigma_min,
            sigma_max=sigma_max,
        )

    @property
    def min_samples(self) -> int:
        """Smallest sample count both the design and the noise generator accept."""
        n = self.design.p
        if self.noise.kind == "fir_mds":
            n = max(n, self.noise.params["taps"] + 1)
        return self.design.admissible(n)


def _gram_range(spec: DesignSpec) -> tuple[float, float]:
    eig = np.linalg.eigvalsh(design.expected_gram(spec))
    return float(eig[0]), float(eig[-1])


def _realize(config: ExperimentConfig, N: int, trial_index: int,
             stream: int = 0) -> tuple[estimator.EstimateResult, int]:
    """One fitted realisation and the number of rank-deficient redraws."""
    v = noise.sample_noise(
        config.noise, N, trial_seed(config.master_seed, N, trial_index, NOISE_TAG, stream)
    ).values
    for attempt in range(MAX_RESAMPLES + 1):
        seed = trial_seed(config.master_seed, N, trial_index, DESIGN_TAG, stream, attempt)
        A = design.sample(config.design, N, seed)
        try:
            return estimator.fit(estimator.make_instance(A, config.theta0, v)), attempt
        except estimator.RankDeficientError:
            if config.design.kind == "fixed_block":
                raise
    raise PersistentRankFailure(
        f"trial {trial_index} at N={N}: rank-deficient design after {MAX_RESAMPLES} resamples"
    )


def run_trial(config: ExperimentConfig, N: int, trial_index: int, stream: int = 0) -> float:
    """``||theta_hat - theta0||_inf`` for one deterministic trial."""
    return _realize(config, N, trial_index, stream)[0].err_inf


def _parallel_map(fn, n_items: int, workers: int) -> list:
    """``[fn(i) for i in range(n_items)]``, possibly on a thread pool, in index order."""
    if workers <= 1 or n_items < 2:
        return [fn(i) for i in range(n_items)]
    chunks = np.array_split(np.arange(n_items), min(workers * 4, n_items))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda idx: [fn(int(i)) for i in idx], chunks)
        return [item for part in parts for item in part]


def trial_errors(config: ExperimentConfig, N: int, trials: int | None = None,
                 stream: int = 0) -> tuple[np.ndarray, int]:
    """Errors of ``trials`` independent trials and the total number of redraws."""
    trials = config.trials if trials is None else int(trials)
    out = _parallel_map(lambda t: _realize(config, N, t, stream), trials, config.workers)
    errs = np.fromiter((res.err_inf for res, _ in out), float, count=trials)
    return errs, sum(n for _, n in out)


@dataclass(frozen=True)
class TailEstimate:
    N: int
    r: float
    exceed_count: int
    trials: int
    ci_low: float
    ci_high: float
    resamples: int = 0

    @property
    def p_hat(self) -> float:
        return self.exceed_count / self.trials

    @classmethod
    def from_errors(cls, errs: np.ndarray, N: int, r: float, resamples: int = 0) -> TailEstimate:
        k = int(np.count_nonzero(errs > r))
        lo, hi = clopper_pearson(k, errs.size)
        return cls(int(N), float(r), k, int(errs.size), lo, hi, resamples)


def tail_probability(config: ExperimentConfig, N: int, r: float, trials: int | None = None,
                     stream: int = 0) -> TailEstimate:
    """Estimate ``P(||theta_hat - theta0||_inf > r)`` with a 99% Clopper-Pearson interval."""
    trials = config.trials if trials is None else int(trials)
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    errs, resamples = trial_errors(config, N, trials, stream)
    return TailEstimate.from_errors(errs, N, r, resamples)


@dataclass
class _ErrorCache:
    """Per-``(N, stream)`` error samples, shared across radii in a sweep."""

    config: ExperimentConfig
    trials: int
    table: dict = field(default_factory=dict)

    def errors(self, N: int, stream: int) -> np.ndarray:
        key = (N, stream)
        if key not in self.table:
            self.table[key] = trial_errors(self.config, N, self.trials, stream)[0]
        return self.table[key]

    def tail(self, N: int, r: float, stream: int = SEARCH_STREAM) -> TailEstimate:
        return TailEstimate.from_errors(self.errors(N, stream), N, r)


def find_empirical_N(config: ExperimentConfig, r: float, epsilon: float | None = None,
                     trials: int | None = None, n_cap: int | None = None,
                     _cache: _ErrorCache | None = None) -> int:
    """Smallest ``N`` whose upper 99% bound on the tail probability is ``<= epsilon``.

    The search climbs a geometric grid (ratio 1.5) from the smallest admissible
    ``N`` and then bisects the last bracket. It assumes the tail is monotone
    in ``N``. The answer is re-checked on an independent stream and moved up
    one admissible step at a time until it passes.

    Raises:
        CapReached: no certified ``N`` below ``n_cap``.
    """
    epsilon = config.epsilon if epsilon is None else float(epsilon)
    n_cap = config.n_cap if n_cap is None else int(n_cap)
    cache = _cache or _ErrorCache(config, config.trials if trials is None else int(trials))
    spec = config.design
    step = spec.step

    def certified(N: int, stream: int = SEARCH_STREAM) -> bool:
        return cache.tail(N, r, stream).ci_high <= epsilon

    lo = None
    hi = config.min_samples
    while not certified(hi):
        lo = hi
        hi = spec.admissible(max(math.ceil(hi * GRID_RATIO), hi + step))
        if hi > n_cap:
            raise CapReached(f"r={r}: no certified N up to the cap {n_cap}")
    if lo is not None:
        while hi - lo > step:
            mid = lo + (hi - lo) // (2 * step) * step
            if certified(mid):
                hi = mid
            else:
                lo = mid
    while not certified(hi, REVALIDATE_STREAM):
        hi += step
        if hi > n_cap:
            raise CapReached(f"r={r}: re-validation failed up to the cap {n_cap}")
    return hi


@dataclass(frozen=True)
class SweepRow:
    r: float
    n_theory_n1: float
    n_theory_nrand: float
    n_theory: int
    n_empirical: int  # -1 when the search hit its cap
    p_hat_at_n_theory: float
    ci_low: float
    ci_high: float


def figure1_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """Theoretical and empirical sample counts for each radius in ``config.r_grid``."""
    inputs = config.bound_inputs()
    cache = _ErrorCache(config, config.trials)
    rows = []
    for r in config.r_grid:
        res = bounds.n_required(inputs, r, config.epsilon)
        try:
            n_emp = find_empirical_N(config, r, _cache=cache)
        except CapReached:
            n_emp = -1
        tail = cache.tail(config.design.admissible(res.n), r)
        rows.append(SweepRow(r, res.n1, res.nrand, res.n, n_emp, tail.p_hat, tail.ci_low, tail.ci_high))
    return rows


@dataclass(frozen=True)
class Lemma2Report:
    """Frequency of ``lambda_min(A^T A / N) <= sigma_min / 2`` at a given ``N``."""

    N: int
    epsilon_prime: float
    event_count: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def frequency(self) -> float:
        return self.event_count / self.trials

    @property
    def passed(self) -> bool:
        return self.ci_low <= self.epsilon_prime


def lemma2_diagnostic(design_spec: DesignSpec, epsilon_prime: float, trials: int,
                      master_seed: int = 0, N: int | None = None,
                      workers: int = 1) -> Lemma2Report:
    """Check the eigenvalue concentration statement at ``N = ceil(N_rand(eps'))``.

    ``N_rand`` here uses ``log(p / eps')``. A rank-deficient draw counts as an
    event, since its inverse Gram has unbounded norm.
    """
    sigma_min, sigma_max = _gram_range(design_spec)
    if N is None:
        N = math.ceil(bounds.eigen_sample_count(
            design_spec.p, design_spec.alpha, sigma_min, sigma_max, epsilon_prime))
    N = design_spec.admissible(N)

    def event(t: int) -> bool:
        A = design.sample(design_spec, N, trial_seed(master_seed, N, t, LEMMA2_TAG))
        spec = design.gram_spectrum(A)
        return (not spec.rank_ok) or spec.lambda_min <= sigma_min / 2

    k = sum(_parallel_map(event, int(trials), workers))
    lo, hi = clopper_pearson(k, int(trials))
    return Lemma2Report(N, float(epsilon_prime), k, int(trials), lo, hi)


@dataclass(frozen=True)
class Lemma1Report:
    """Per-coordinate event frequencies, side by side.

    ``lhs``: ``|err_i| > r``. ``rhs``: ``|c_i^T v / N| > r lambda_min(A^T A / N)``.
    ``psi2``: ``|c_i^T v / N| > r sigma_min / 2``. ``psi1``: ``lambda_min(A^T A / N)
    <= sigma_min / 2``. Intervals are 99% Clopper-Pearson.
    """

    N: int
    r: float
    trials: int
    lhs_count: np.ndarray
    rhs_count: np.ndarray
    psi2_count: np.ndarray
    psi1_count: int

    @property
    def lhs_hat(self) -> np.ndarray:
        return self.lhs_count / self.trials

    @property
    def rhs_hat(self) -> np.ndarray:
        return self.rhs_count / self.trials

    @property
    def lhs_ci(self) -> list[tuple[float, float]]:
        return [clopper_pearson(int(k), self.trials) for k in self.lhs_count]

    @property
    def rhs_ci(self) -> list[tuple[float, float]]:
        return [clopper_pearson(int(k), self.trials) for k in self.rhs_count]


def lemma1_diagnostic(config: ExperimentConfig, N: int, r: float,
                      trials: int | None = None, stream: int = 0) -> Lemma1Report:
    trials = config.trials if trials is None else int(trials)
    sigma_min = _gram_range(config.design)[0]
    p = config.design.p

    def events(t: int) -> np.ndarray:
        res, _ = _realize(config, N, t, stream)
        row = [
            [estimator.coordinate_error_event(res, i, r) for i in range(p)],
            [estimator.lemma1_rhs_event(res, i, r) for i in range(p)],
            [estimator.noise_projection_event(res, i, r, sigma_min) for i in range(p)],
        ]
        psi1 = res.gram_lambda_min <= sigma_min / 2
        return np.array(row, dtype=np.int64), int(psi1)

    out = _parallel_map(events, trials, config.workers)
    counts = sum(c for c, _ in out)
    return Lemma1Report(
        N=int(N), r=float(r), trials=trials,
        lhs_count=counts[0], rhs_count=counts[1], psi2_count=counts[2],
        psi1_count=sum(f for _, f in out),
    )
