"""Finite-sample tail bounds for linear least squares under sub-Gaussian
martingale-difference noise, with a reproducible Monte-Carlo harness."""

from .bounds import (
    BoundInputs,
    BoundResult,
    DomainError,
    crossover_r,
    invert_eps,
    invert_r,
    n1,
    n_required,
    nrand,
)
from .design import DesignMatrix, DesignSpec, expected_gram, gram_spectrum
from .estimator import EstimateResult, LinearModelInstance, RankDeficientError, fit, make_instance
from .montecarlo import (
    ExperimentConfig,
    SweepRow,
    TailEstimate,
    figure1_sweep,
    find_empirical_N,
    lemma1_diagnostic,
    lemma2_diagnostic,
    run_trial,
    tail_probability,
)
from .noise import NoiseSpec, check_mds, check_subgaussian, delta_of, sample_noise

__version__ = "0.1.0"
