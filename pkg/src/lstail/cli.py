"""Command-line front end.

Subcommands: ``bound``, ``invert``, ``simulate``, ``figure1``, ``check-noise``.
Exit status is 0 on success, 1 when a noise check fails and 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bounds, config, design, montecarlo, noise

FIGURE1_COLUMNS = (
    "r", "n_theory_n1", "n_theory_nrand", "n_theory", "n_empirical",
    "p_hat_at_n_theory", "ci_low", "ci_high", "trials", "master_seed",
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.6g}")
    return value


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render(records: list[dict], fmt: str, columns=None) -> str:
    records = [{k: _fmt(v) for k, v in rec.items()} for rec in records]
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if columns is None:
        columns = list(dict.fromkeys(k for rec in records for k in rec))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_csv_cell(rec.get(c)) for c in columns])
    return buf.getvalue()


def _load(args, default_section=None) -> dict:
    raw = config.load_config(args.config) if args.config else {}
    raw = config.apply_overrides(raw, args.set, default_section)
    if args.trials is not None:
        raw.setdefault("experiment", {})["trials"] = args.trials
    if args.seed is not None:
        raw.setdefault("experiment", {})["master_seed"] = args.seed
        raw.setdefault("check", {})["seed"] = args.seed
    return raw


def _number(table: dict, key: str, qualified: str):
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise config.ConfigError(f"parameter {qualified} must be a number, got {value!r}", qualified)
    return value


def _bound_inputs(raw: dict) -> bounds.BoundInputs:
    """Collect bound constants from ``[bound]``, falling back to ``[design]``/``[noise]``."""
    table = dict(raw.get("bound", {}))
    if "design" in raw:
        spec = config.design_from_dict(raw["design"])
        eig = np.linalg.eigvalsh(design.expected_gram(spec))
        derived = {"p": spec.p, "alpha": spec.alpha,
                   "sigma_min": float(eig[0]), "sigma_max": float(eig[-1])}
        for key, value in derived.items():
            table.setdefault(key, value)
    if "noise" in raw and "delta" not in table:
        table["delta"] = noise.delta_of(config.noise_from_dict(raw["noise"]))
    values = {}
    for key in ("p", "alpha", "delta", "sigma_min", "sigma_max"):
        if key not in table:
            raise config.ConfigError(f"missing parameter {key!r}", key)
        values[key] = _number(table, key, key)
    return bounds.BoundInputs(**values)


def _get(raw: dict, key: str, fallback: tuple[str, str] | None = None):
    table = raw.get("bound", {})
    if key in table:
        return _number(table, key, key)
    if fallback is not None:
        section, name = fallback
        if name in raw.get(section, {}):
            return _number(raw[section], name, f"{section}.{name}")
    raise config.ConfigError(f"missing parameter {key!r}", key)


def cmd_bound(raw: dict) -> list[dict]:
    inputs = _bound_inputs(raw)
    eps = _get(raw, "eps", ("experiment", "epsilon"))
    if "r" in raw.get("bound", {}):
        radii = [_get(raw, "r")]
    elif "r_grid" in raw.get("experiment", {}):
        radii = list(raw["experiment"]["r_grid"])
    else:
        raise config.ConfigError("missing parameter 'r'", "r")
    records = []
    for r in radii:
        res = bounds.n_required(inputs, r, eps)
        records.append({
            "r": r, "eps": eps, "p": inputs.p, "alpha": inputs.alpha, "delta": inputs.delta,
            "sigma_min": inputs.sigma_min, "sigma_max": inputs.sigma_max,
            "n1": res.n1, "nrand": res.nrand, "log_term": res.log_term,
            "n": res.n, "n_first_certified": res.n_first_certified, "degenerate": res.degenerate,
        })
    return records


def cmd_invert(raw: dict, mode: str) -> list[dict]:
    inputs = _bound_inputs(raw)
    n = _get(raw, "n")
    if int(n) != n or n < 1:
        raise config.ConfigError(f"parameter 'n' must be a positive integer, got {n!r}", "n")
    n = int(n)
    if mode == "solve-r":
        eps = _get(raw, "eps", ("experiment", "epsilon"))
        r = bounds.invert_r(inputs, n, eps)
        return [{"mode": mode, "n": n, "eps": eps, "r": r, "feasible": r is not None,
                 "nrand": bounds.nrand(inputs, eps)}]
    r = _get(raw, "r")
    return [{"mode": mode, "n": n, "r": r, "eps": bounds.invert_eps(inputs, n, r)}]


def cmd_simulate(raw: dict) -> list[dict]:
    cfg = config.experiment_from_dict(raw)
    exp = raw.get("experiment", {})
    if "n" not in exp:
        raise config.ConfigError("missing parameter 'experiment.n'", "experiment.n")
    N = int(exp["n"])
    errs, resamples = montecarlo.trial_errors(cfg, N)
    records = []
    for r in cfg.r_grid:
        est = montecarlo.TailEstimate.from_errors(errs, N, r, resamples)
        records.append({
            "r": r, "N": N, "exceed_count": est.exceed_count, "trials": est.trials,
            "p_hat": est.p_hat, "ci_low": est.ci_low, "ci_high": est.ci_high,
            "resamples": est.resamples, "master_seed": cfg.master_seed,
        })
    return records


def cmd_figure1(raw: dict) -> list[dict]:
    cfg = config.experiment_from_dict(raw)
    rows = montecarlo.figure1_sweep(cfg)
    return [
        {"r": row.r, "n_theory_n1": row.n_theory_n1, "n_theory_nrand": row.n_theory_nrand,
         "n_theory": row.n_theory, "n_empirical": row.n_empirical,
         "p_hat_at_n_theory": row.p_hat_at_n_theory, "ci_low": row.ci_low,
         "ci_high": row.ci_high, "trials": cfg.trials, "master_seed": cfg.master_seed}
        for row in rows
    ]


def cmd_check_noise(raw: dict) -> tuple[list[dict], bool]:
    spec = config.noise_from_dict(config.require_section(raw, "noise"))
    check = raw.get("check", {})
    N = int(check.get("n", 100_000))
    max_lag = int(check.get("max_lag", 5))
    delta = float(check.get("delta", noise.delta_of(spec)))
    if not delta > 0:
        raise config.ConfigError("check.delta must be positive", "check.delta")
    s_grid = check.get("s_grid")
    seed = int(check.get("seed", 0))
    try:
        values = noise.sample_noise(spec, N, seed).values
        sg = noise.check_subgaussian(values, delta, s_grid)
        mds = noise.check_mds(values, max_lag)
    except ValueError as exc:
        raise config.ConfigError(f"invalid check: {exc}", "check") from exc
    records = [
        {"check": "subgaussian", "kind": spec.kind, "N": N, "delta": delta, "max_lag": None,
         "statistic": sg.max_violation, "threshold": 0.0, "passed": sg.passed},
        {"check": "mds", "kind": spec.kind, "N": N, "delta": delta, "max_lag": max_lag,
         "statistic": mds.max_stat, "threshold": mds.critical, "passed": mds.passed},
    ]
    return records, sg.passed and mds.passed


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        help="override a config entry (repeatable); bare keys go to [bound]")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--trials", type=int, help="override experiment.trials")
    common.add_argument("--seed", type=int, help="override experiment.master_seed and check.seed")

    parser = argparse.ArgumentParser(
        prog="lstail",
        description="Finite-sample tail bounds for least squares under sub-Gaussian MDS noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bound", parents=[common], help="sample count N(r, eps)")
    inv = sub.add_parser("invert", parents=[common], help="solve the bound for r or eps")
    inv.add_argument("mode", choices=("solve-r", "solve-eps"))
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo tail estimates at experiment.n")
    sub.add_parser("figure1", parents=[common], help="theory vs simulation sweep over r_grid")
    sub.add_parser("check-noise", parents=[common], help="certify sub-Gaussianity and the MDS property")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    status = EXIT_OK
    columns = None
    try:
        raw = _load(args, default_section="bound" if args.command in ("bound", "invert") else None)
        if args.command == "bound":
            records = cmd_bound(raw)
        elif args.command == "invert":
            records = cmd_invert(raw, args.mode)
        elif args.command == "simulate":
            records = cmd_simulate(raw)
        elif args.command == "figure1":
            records = cmd_figure1(raw)
            columns = FIGURE1_COLUMNS
        else:
            records, ok = cmd_check_noise(raw)
            status = EXIT_OK if ok else EXIT_CHECK_FAILED
    except (config.ConfigError, bounds.DomainError) as exc:
        print(f"lstail {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(records, args.format, columns)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
