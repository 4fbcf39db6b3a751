import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lstail.bounds import (
    BoundInputs,
    DomainError,
    crossover_r,
    eigen_sample_count,
    invert_eps,
    invert_r,
    n1,
    n_required,
    nrand,
)

# Values computed with mpmath at 40 digits:
#   12.8 * ln 20, 28 * ln 20, sqrt(12.8 ln 20 / 84), sqrt(12.8 ln 20 / 154),
#   sqrt(960 / 2100), 2p exp(-84 / 28) = 4 exp(-3)
N1_R1 = 38.34537310149108684
NRAND = 83.88050365951174782
INV_R_84 = 0.67564231433689301
INV_R_154 = 0.49899491904273094
R_STAR = 0.67612340378281326
INV_EPS_84 = 0.19914827347145577


@pytest.fixture
def fig1():
    return BoundInputs(p=2, alpha=math.sqrt(10), delta=4, sigma_min=10, sigma_max=10)


def test_n1_fig1(fig1):
    assert n1(fig1, 1, 0.2) == pytest.approx(N1_R1, rel=1e-12)
    assert n1(fig1, 0.5, 0.2) == pytest.approx(4 * N1_R1, rel=1e-12)


def test_nrand_fig1(fig1):
    assert nrand(fig1, 0.2) == pytest.approx(NRAND, rel=1e-12)


def test_log_term_vanishes_at_two_p(fig1):
    assert n1(fig1, 1, 4) == 0
    assert nrand(fig1, 4) == 0
    res = n_required(fig1, 1, 4)
    assert res.n == 0 and res.degenerate
    assert n_required(fig1, 1, 7).degenerate


def test_nrand_scale_free():
    for s in (0.5, 1.0, 7.0):
        # p * alpha^2 = s with p = 1
        inp = BoundInputs(p=1, alpha=math.sqrt(s), delta=1, sigma_min=s, sigma_max=s)
        assert nrand(inp, 0.1) == pytest.approx(56 / 3 * math.log(20), rel=1e-12)


@pytest.mark.parametrize("r, expected", [(1, 84), (1e6, 84), (0.5, 154), (0.25, 614), (2, 84)])
def test_n_required_fig1(fig1, r, expected):
    res = n_required(fig1, r, 0.2)
    assert res.n == expected
    assert res.n_first_certified == expected + 1
    assert res.n == math.ceil(max(res.n1, res.nrand))
    assert res.log_term == pytest.approx(math.log(20))


def test_invert_r_fig1(fig1):
    assert invert_r(fig1, 84, 0.2) == pytest.approx(INV_R_84, rel=1e-12)
    assert invert_r(fig1, 154, 0.2) == pytest.approx(INV_R_154, rel=1e-12)
    assert invert_r(fig1, 83, 0.2) is None


def test_invert_eps_fig1(fig1):
    assert invert_eps(fig1, 84, 1) == pytest.approx(INV_EPS_84, rel=1e-12)
    assert invert_eps(fig1, 10**6, 1) < 1e-300


def test_crossover(fig1):
    r_star = crossover_r(fig1)
    assert r_star == pytest.approx(R_STAR, rel=1e-12)
    assert n1(fig1, r_star, 0.2) == pytest.approx(nrand(fig1, 0.2), rel=1e-12)
    assert n1(fig1, r_star * 0.99, 0.2) > nrand(fig1, 0.2)
    assert n1(fig1, r_star * 1.01, 0.2) < nrand(fig1, 0.2)


def test_eigen_sample_count_matches_nrand_at_half_eps(fig1):
    direct = eigen_sample_count(2, math.sqrt(10), 10, 10, 0.1)
    assert direct == pytest.approx(nrand(fig1, 0.2), rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(p=0, alpha=1, delta=1, sigma_min=1, sigma_max=1),
        dict(p=2, alpha=0, delta=1, sigma_min=1, sigma_max=1),
        dict(p=2, alpha=1, delta=-1, sigma_min=1, sigma_max=1),
        dict(p=2, alpha=1, delta=1, sigma_min=0, sigma_max=1),
        dict(p=2, alpha=1, delta=1, sigma_min=2, sigma_max=1),
        dict(p=2, alpha=1, delta=1, sigma_min=1, sigma_max=3),  # > p alpha^2
    ],
)
def test_invalid_inputs(kwargs):
    with pytest.raises(DomainError):
        BoundInputs(**kwargs)


def test_invalid_r_and_eps(fig1):
    with pytest.raises(DomainError):
        n1(fig1, 0, 0.2)
    with pytest.raises(DomainError):
        n_required(fig1, 1, 0)
    with pytest.raises(DomainError):
        invert_r(fig1, 0, 0.2)


def test_exact_scaling(fig1):
    base = n1(fig1, 1, 0.2)
    assert n1(fig1, 0.5, 0.2) / base == pytest.approx(4, rel=1e-12)
    doubled = BoundInputs(p=2, alpha=math.sqrt(10), delta=8, sigma_min=10, sigma_max=10)
    assert n1(doubled, 1, 0.2) / base == pytest.approx(4, rel=1e-12)
    wider = BoundInputs(p=2, alpha=2 * math.sqrt(10), delta=4, sigma_min=10, sigma_max=10)
    assert n1(wider, 1, 0.2) / base == pytest.approx(4, rel=1e-12)


@st.composite
def bound_inputs(draw):
    p = draw(st.integers(1, 6))
    alpha = draw(st.floats(0.1, 10))
    delta = draw(st.floats(0.1, 10))
    sigma_max = draw(st.floats(0.01, 1)) * p * alpha**2
    sigma_min = draw(st.floats(0.01, 1)) * sigma_max
    return BoundInputs(p, alpha, delta, sigma_min, sigma_max)


radii = st.floats(1e-3, 1e2)
epsilons = st.floats(1e-6, 0.999)


@settings(max_examples=200)
@given(bound_inputs(), radii, radii, epsilons, epsilons)
def test_monotone_in_r_and_eps(inp, r_a, r_b, e_a, e_b):
    r_lo, r_hi = sorted((r_a, r_b))
    e_lo, e_hi = sorted((e_a, e_b))
    assert n_required(inp, r_hi, e_lo).n <= n_required(inp, r_lo, e_lo).n
    assert n_required(inp, r_lo, e_hi).n <= n_required(inp, r_lo, e_lo).n


@settings(max_examples=200)
@given(bound_inputs(), radii, epsilons, st.floats(1, 4))
def test_monotone_in_delta_alpha_sigma_min(inp, r, eps, factor):
    base = n_required(inp, r, eps).n
    more_noise = BoundInputs(inp.p, inp.alpha, inp.delta * factor, inp.sigma_min, inp.sigma_max)
    assert n_required(more_noise, r, eps).n >= base
    wider = BoundInputs(inp.p, inp.alpha * factor, inp.delta, inp.sigma_min, inp.sigma_max)
    assert n_required(wider, r, eps).n >= base
    worse = BoundInputs(inp.p, inp.alpha, inp.delta, inp.sigma_min / factor, inp.sigma_max)
    assert n_required(worse, r, eps).n >= base


@pytest.mark.parametrize("r", [0.25, 0.5, 1, 2])
@pytest.mark.parametrize("eps", [0.01, 0.1, 0.2])
def test_round_trips(fig1, r, eps):
    n = n_required(fig1, r, eps).n + 1
    assert invert_eps(fig1, n, r) <= eps
    solved = invert_r(fig1, n, eps)
    assert solved is not None and solved <= r


@settings(max_examples=200)
@given(bound_inputs(), radii, epsilons)
def test_round_trips_random(inp, r, eps):
    n = n_required(inp, r, eps).n + 1
    assert invert_eps(inp, n, r) <= eps * (1 + 1e-12)
    solved = invert_r(inp, n, eps)
    assert solved is not None and solved <= r * (1 + 1e-12)


@settings(max_examples=100)
@given(bound_inputs(), epsilons)
def test_growth_rate(inp, eps):
    # below the crossover n1 dominates, and n1 r^2 / log(2p/eps) is r-free
    r_star = crossover_r(inp)
    vals = [n1(inp, r, eps) * r**2 / math.log(2 * inp.p / eps) for r in (r_star / 2, r_star / 5)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-12)
    other = n1(inp, r_star / 2, eps / 3) * (r_star / 2) ** 2 / math.log(6 * inp.p / eps)
    assert other == pytest.approx(vals[0], rel=1e-12)
