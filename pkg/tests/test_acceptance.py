"""Acceptance suite. Each test prints one PASS/FAIL line; run with ``pytest tests/test_acceptance.py -v``."""

import csv
import io
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from lstail import bounds, config, montecarlo as mc
from lstail.cli import main
from lstail.design import DesignSpec, sample
from lstail.estimator import fit, make_instance
from lstail.noise import NoiseSpec

ROOT = Path(__file__).resolve().parents[1]
FIG1 = ROOT / "configs" / "figure1.toml"
SQRT10 = math.sqrt(10)


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def _cli_records(capsys, argv):
    code = main([str(a) for a in argv])
    out, _ = capsys.readouterr()
    return code, list(csv.DictReader(io.StringIO(out)))


def test_1_closed_form_reproduction(capsys, report):
    r_grid = (0.25, 0.5, 1.0, 2.0)
    code, rows = _cli_records(capsys, ["bound", "--config", FIG1, "--set", f"experiment.r_grid={list(r_grid)}"])
    got = [int(row["n"]) for row in rows]
    oracle = [math.ceil(max(12.8 * math.log(20) / r**2, 28 * math.log(20))) for r in r_grid]
    ok = code == 0 and got == oracle == [614, 154, 84, 84]
    report(1, ok, f"n_theory={got} expected={oracle}")


@pytest.mark.slow
def test_2_guarantee_soundness(report):
    cfg = replace(config.experiment_from_dict(config.load_config(FIG1)), trials=2000)
    inp = cfg.bound_inputs()
    parts = []
    ok = True
    for r in cfg.r_grid:
        n = bounds.n_required(inp, r, cfg.epsilon).n + 1
        est = mc.tail_probability(cfg, n, r)
        ok &= est.ci_low <= cfg.epsilon
        parts.append(f"r={r}:N={n},p_hat={est.p_hat:.4f},ci_low={est.ci_low:.4f}")
    report(2, ok, "; ".join(parts))


def test_3_exact_gaussian_oracle(report):
    # Rademacher(sqrt 10) makes the 1x1 Gram exactly 10, so the error is N(0, 1/(10 N)) exactly
    N, trials = 1000, 10_000
    cfg = mc.ExperimentConfig(DesignSpec.rademacher(1, SQRT10), NoiseSpec.gaussian(1.0), trials=trials, master_seed=3)
    signed = np.array([mc._realize(cfg, N, t)[0].errors[0] for t in range(trials)])
    sd = signed.std(ddof=1)
    ok = abs(sd - 0.01) <= 0.05 * 0.01
    parts = [f"sd={sd:.5f}"]
    for k in (2, 3):
        exact = 2 * stats.norm.sf(k)
        est = mc.tail_probability(cfg, N, k * 0.01)
        ok &= est.ci_low <= exact <= est.ci_high
        parts.append(f"P(err>{k}sd)={est.p_hat:.4f} exact={exact:.4f} ci=[{est.ci_low:.4f},{est.ci_high:.4f}]")
    report(3, ok, "; ".join(parts))


def test_4_noiseless_exactness(report):
    worst = 0.0
    specs = lambda p: [DesignSpec.rademacher(p, SQRT10), DesignSpec.uniform(p, 1.0)]
    count = 0
    for p in (1, 2, 5):
        rng = np.random.default_rng(p)
        for d in range(100):
            spec = specs(p)[d % 2]
            A = sample(spec, 100, 1000 * p + d)
            theta0 = rng.normal(scale=10, size=p)
            worst = max(worst, fit(make_instance(A, theta0, np.zeros(100))).err_inf)
            count += 1
    report(4, worst <= 1e-10, f"{count} designs, max err_inf={worst:.3e}")


def test_5_lemma2_validity(report):
    rep = mc.lemma2_diagnostic(DesignSpec.rademacher(2, SQRT10), 0.1, trials=10_000, master_seed=5)
    detail = f"N={rep.N} freq={rep.frequency:.4f} ci=[{rep.ci_low:.4f},{rep.ci_high:.4f}]"
    report(5, rep.passed and rep.frequency <= 0.1, detail)


BUILTINS = {
    "gaussian": 'kind = "gaussian"\nsigma = 1.0',
    "uniform_bounded": 'kind = "uniform_bounded"\nc = 2.0',
    "rademacher_scaled": 'kind = "rademacher_scaled"\nc = 1.5',
    "gaussian_mixture": 'kind = "gaussian_mixture"\nweights = [0.9, 0.1]\nsigmas = [0.5, 4.0]',
    "fir_mds": 'kind = "fir_mds"\ntaps = 3\neta = 2.0\nr1 = 1.0\nr2 = 2.0',
}


def test_6_noise_certification(capsys, tmp_path, report):
    def check(name, noise, extra=""):
        path = tmp_path / f"{name}.toml"
        path.write_text(f"[noise]\n{noise}\n[check]\nn = 100000\nmax_lag = 5\nseed = 11\n{extra}")
        return _cli_records(capsys, ["check-noise", "--config", path])

    ok = True
    parts = []
    for name, noise in BUILTINS.items():
        code, rows = check(name, noise)
        ok &= code == 0 and all(r["passed"] == "true" for r in rows)
        parts.append(f"{name}:exit={code}")
        delta = float(rows[0]["delta"])
        code, rows = check(name + "_half", noise, f"delta = {delta / 2}\n")
        ok &= code == 1 and rows[0]["passed"] == "false"
        parts.append(f"{name}(delta/2):exit={code}")
    code, rows = check("ar1", 'kind = "ar1"\nphi = 0.8\nsigma = 1.0')
    ok &= code == 1 and rows[1]["passed"] == "false"
    parts.append(f"ar1(0.8):exit={code}")
    report(6, ok, "; ".join(parts))


@pytest.mark.slow
def test_7_determinism(capsys, tmp_path, report):
    def run(name, *extra):
        path = tmp_path / name
        assert main(["figure1", "--config", str(FIG1), "--out", str(path), *extra]) == 0
        capsys.readouterr()
        return path.read_bytes()

    first = run("a.csv")
    again = run("b.csv")
    threaded = run("c.csv", "--set", "experiment.workers=8")
    ok = first == again == threaded
    report(7, ok, f"{len(first)} bytes, rerun identical={first == again}, 8 threads identical={first == threaded}")


def test_8_bound_calculus(report):
    inp = bounds.BoundInputs(p=2, alpha=SQRT10, delta=4.0, sigma_min=10.0, sigma_max=10.0)
    r_grid = (0.25, 0.5, 1.0, 2.0)
    eps_grid = (0.01, 0.1, 0.2)
    failures = []
    for eps in eps_grid:
        ns = [bounds.n_required(inp, r, eps).n for r in r_grid]
        if any(a < b for a, b in zip(ns, ns[1:])):
            failures.append(f"not nonincreasing in r at eps={eps}")
        for r in r_grid:
            base = bounds.n1(inp, r, eps)
            if abs(bounds.n1(inp, r / 2, eps) - 4 * base) > 1e-12 * 4 * base:
                failures.append(f"1/r^2 scaling at r={r}, eps={eps}")
            res = bounds.n_required(inp, r, eps)
            if bounds.invert_eps(inp, res.n + 1, r) > eps:
                failures.append(f"invert_eps round trip at r={r}, eps={eps}")
            back = bounds.invert_r(inp, res.n + 1, eps)
            if back is not None and back > r:
                failures.append(f"invert_r round trip at r={r}, eps={eps}")
    for r in r_grid:
        ns = [bounds.n_required(inp, r, eps).n for eps in eps_grid]
        if any(a < b for a, b in zip(ns, ns[1:])):
            failures.append(f"not nonincreasing in eps at r={r}")
        here = bounds.n_required(inp, r, 0.2).n
        for name, moved in (
            ("delta", replace(inp, delta=4.4)),
            ("alpha", replace(inp, alpha=4.0)),
            ("1/sigma_min", replace(inp, sigma_min=8.0)),
        ):
            if bounds.n_required(moved, r, 0.2).n < here:
                failures.append(f"not nondecreasing in {name} at r={r}")
    checked = len(r_grid) * len(eps_grid)
    report(8, not failures, f"{checked} grid points; " + ("; ".join(failures) or "all properties hold"))
