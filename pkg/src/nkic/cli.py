"""Command-line front end.

    nkic <subcommand> [--config spec.json] [flags] [--out result.csv]

Subcommands: rate, tail, scaling, wishart, definetti, bounds.  Flags
override values from the JSON config file.  ``--out`` writes the CSV table
there and a JSON summary next to it (same stem, ``.json``); without it the
summary goes to stdout.  Worker threads come from ``--threads`` or the
NKIC_THREADS environment variable and never change the numbers.

Exit status: 0 success, 2 configuration/IO error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericError
from .experiments import (
    Latent,
    db_to_linear,
    dof_run,
    exchangeability_check,
    scaling_run,
    tail_sweep,
    wishart_tail_run,
)
from .exporders import AnalyticLaw, theorem_bounds
from .netmodel import NetworkConfig, PathLoss

SUBCOMMANDS = ("rate", "tail", "scaling", "wishart", "definetti", "bounds")
CSV_HEADER = ("snr_db", "parameter", "estimate", "stderr", "analytic_value")
CLI_LAWS = {"z_siso": "Z_siso", "x_siso": "X_siso", "beta_alpha": "beta_alpha",
            "z_mimo": "Z_mimo", "x_mimo": "X_mimo"}

DEFAULTS = {
    "rate": {"n": 2, "K": 2, "snr_db": [40.0, 80.0], "trials": 1000, "tol": 0.1},
    "tail": {"law": "z_siso", "K": 2, "snr_db": [20.0, 30.0, 40.0], "trials": 10**6, "tol": 0.15},
    "scaling": {"xi": 1.0, "K": 2, "snr_db": [20.0, 30.0, 40.0], "trials": 200, "tol": 0.2},
    "wishart": {"p": 2, "q": 2, "thresholds": [1.0], "snr_db": [20.0, 30.0, 40.0],
                "trials": 10**5, "tol": 0.25},
    "definetti": {"n": 10, "thresholds": [-1.0, 0.0, 1.0, 1.5, 2.0], "trials": 10**5},
    "bounds": {"xi": 1.0, "K": 2},
}


@dataclass
class ExperimentSpec:
    """Everything needed to rerun one experiment; round-trips through JSON."""

    subcommand: str
    n: int | None = None
    K: int | None = None
    N: int = 1
    pathloss: dict = field(default_factory=lambda: {"model": "unit"})
    snr_db: list | None = None
    trials: int | None = None
    thresholds: list | None = None
    xi: float | None = None
    n_scale: float = 1.0
    selector: str = "x_order"
    strategy: str = "fixed"
    mode: str | None = None
    law: str | None = None
    p: int | None = None
    q: int | None = None
    latent: str = "shared_mean"
    latent_scale: float = 1.0
    d: list | None = None
    expect_dof: float | None = None
    tol: float | None = None
    seed: int = 0
    out: str | None = None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("spec: expected a JSON object at top level")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown field")
        if "subcommand" not in data:
            raise ConfigError("subcommand: missing")
        return cls(**data).validated()

    def with_defaults(self):
        base = DEFAULTS.get(self.subcommand, {})
        for key, value in base.items():
            if getattr(self, key) is None:
                setattr(self, key, list(value) if isinstance(value, list) else value)
        return self

    def validated(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"subcommand: expected one of {SUBCOMMANDS}, got {self.subcommand!r}")
        self.with_defaults()
        for name in ("n", "K", "N", "trials", "p", "q", "seed"):
            value = getattr(self, name)
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
        for name in ("snr_db", "thresholds", "d"):
            value = getattr(self, name)
            if value is not None:
                if not isinstance(value, list) or not all(
                        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                    raise ConfigError(f"{name}: expected a list of numbers")
                setattr(self, name, [float(v) for v in value])
        for name in ("xi", "n_scale", "latent_scale", "expect_dof", "tol"):
            value = getattr(self, name)
            if value is not None:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{name}: expected a number, got {value!r}")
                setattr(self, name, float(value))
        if self.n is not None and self.K is not None and self.K > self.n:
            raise ConfigError(f"K: must not exceed n (K={self.K}, n={self.n})")
        if self.K is not None and self.K < 1:
            raise ConfigError(f"K: must be >= 1, got {self.K}")
        if self.N < 1:
            raise ConfigError(f"N: must be >= 1, got {self.N}")
        if self.trials is not None and self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if self.law is not None and self.law not in CLI_LAWS:
            raise ConfigError(f"law: expected one of {sorted(CLI_LAWS)}, got {self.law!r}")
        if not isinstance(self.pathloss, dict):
            raise ConfigError("pathloss: expected an object")
        try:
            PathLoss(**self.pathloss)
        except TypeError as exc:
            raise ConfigError(f"pathloss: {exc}") from None
        return self


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object at top level")
    return data


def load_spec(path) -> ExperimentSpec:
    return ExperimentSpec.from_dict(_read_json(path))


def dump_spec(spec: ExperimentSpec, path):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _build_parser():
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON experiment spec; flags override its values")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="CSV output path; the JSON summary goes next to it")
    common.add_argument("--threads", type=int, help="worker threads (default: $NKIC_THREADS or 1)")
    common.add_argument("--tol", type=float, help="pass/fail tolerance for the summary verdict")
    common.add_argument("--trials", type=int)
    common.add_argument("--snr-db", dest="snr_db", type=_floats, help="comma-separated SNR grid in dB")
    common.add_argument("--k", dest="K", type=int, help="active-set size")
    common.add_argument("--n-ant", dest="N", type=int, help="antennas per node")

    parser = _Parser(prog="nkic", description="(n,K)-user interference channel experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("rate", parents=[common], argument_default=S,
                       help="sum rate vs SNR and its DoF slope")
    p.add_argument("--n", type=int)
    p.add_argument("--strategy", choices=["fixed", "partitioned", "exhaustive", "random"])
    p.add_argument("--mode", choices=["siso", "mimo", "mimo_lb"])
    p.add_argument("--pathloss", choices=["unit", "loguniform"])
    p.add_argument("--gamma-min", dest="gamma_min", type=float)
    p.add_argument("--gamma-max", dest="gamma_max", type=float)
    p.add_argument("--expect-dof", dest="expect_dof", type=float)

    p = sub.add_parser("tail", parents=[common], argument_default=S,
                       help="tail exponent of a Z / X / (beta-alpha)^+ law")
    p.add_argument("--law", choices=sorted(CLI_LAWS))
    for flag in ("--z", "--x", "--w", "--thresholds"):
        p.add_argument(flag, dest="thresholds", type=_floats)

    p = sub.add_parser("scaling", parents=[common], argument_default=S,
                       help="best disjoint group as n = round(snr^xi) grows")
    p.add_argument("--xi", type=float)
    p.add_argument("--selector", choices=["x_order", "sum_rate"])
    p.add_argument("--n-scale", dest="n_scale", type=float)

    p = sub.add_parser("wishart", parents=[common], argument_default=S,
                       help="lower tail of Gaussian Gram eigen-orders")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--r", dest="thresholds", type=_floats)

    p = sub.add_parser("definetti", parents=[common], argument_default=S,
                       help="P(max <= x) >= P(X <= x)^n for an exchangeable family")
    p.add_argument("--n", type=int)
    p.add_argument("--x", dest="thresholds", type=_floats)
    p.add_argument("--latent", choices=["shared_mean", "iid"])
    p.add_argument("--latent-scale", dest="latent_scale", type=float)

    p = sub.add_parser("bounds", parents=[common], argument_default=S,
                       help="theorem bound formulas")
    p.add_argument("--xi", type=float)
    p.add_argument("--d", type=_floats)
    return parser


def parse_args(argv):
    ns = vars(_build_parser().parse_args(argv))
    threads = ns.pop("threads", None)
    config = ns.pop("config", None)
    data = {}
    if config is not None:
        data = _read_json(config)
        if data.get("subcommand", ns["subcommand"]) != ns["subcommand"]:
            raise ConfigError(
                f"subcommand: config is for {data['subcommand']!r}, command line asks for {ns['subcommand']!r}")
    pl = dict(data.get("pathloss") or {"model": "unit"})
    for key, target in (("pathloss", "model"), ("gamma_min", "gamma_min"), ("gamma_max", "gamma_max")):
        if key in ns:
            pl[target] = ns.pop(key)
    data.update(ns)
    data["pathloss"] = pl
    return ExperimentSpec.from_dict(data), threads


# --------------------------------------------------------------------------
# execution


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _tail_rows(est, snr_db):
    rows = []
    for s, db in enumerate(snr_db):
        for j, thr in enumerate(est.thresholds):
            b = est.analytic[j]
            rows.append((db, thr, est.exceedance[s, j], est.stderr[s, j], est.snr_grid[s] ** (-b)))
    return rows


def _tail_summary(est, tol):
    per = []
    for j, thr in enumerate(est.thresholds):
        fitted, analytic = est.fitted_exponent[j], est.analytic[j]
        if math.isinf(analytic):
            ok = bool(est.below_resolution[j])
        else:
            ok = bool(abs(fitted - analytic) <= tol) if not math.isnan(fitted) else False
        per.append({
            "threshold": float(thr),
            "fitted_exponent": None if math.isnan(fitted) else float(fitted),
            "stderr": None if math.isnan(est.ci[j]) else float(est.ci[j]),
            "analytic_exponent": None if math.isinf(analytic) else float(analytic),
            "below_resolution": bool(est.below_resolution[j]),
            "resolved": bool(est.resolved[j]),
            "pass": ok,
        })
    return {"law": est.law.law, "trials": est.trials, "thresholds": per}, all(r["pass"] for r in per)


def execute(spec: ExperimentSpec, threads=None):
    """Run ``spec``; returns (csv rows, results dict, verdict or None)."""
    cmd = spec.subcommand
    if cmd == "bounds":
        b = theorem_bounds(spec.xi, spec.K, spec.N)
        res = {"lb_siso": b.lb_siso, "ub_siso": b.ub_siso, "lb_mimo": b.lb_mimo, "zeta": b.zeta}
        if spec.d:
            res["conditions"] = [{"d": d, "xi_sufficient": b.xi_sufficient(d),
                                  "xi_necessary": b.xi_necessary(d),
                                  "xi_sufficient_mimo": b.xi_sufficient_mimo(d)} for d in spec.d]
        return [], res, None

    if cmd == "definetti":
        recs = exchangeability_check(spec.n, spec.thresholds, spec.trials, spec.seed,
                                     Latent(spec.latent, spec.latent_scale))
        rows = [(math.nan, r.x, r.lhs, r.stderr, r.rhs) for r in recs]
        res = {"points": [{"x": r.x, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin,
                           "stderr": r.stderr, "holds": r.holds} for r in recs]}
        return rows, res, all(r.holds for r in recs)

    snr = db_to_linear(spec.snr_db)
    if cmd == "tail":
        law = AnalyticLaw(CLI_LAWS[spec.law], K=spec.K, N=spec.N)
        if spec.thresholds is None:
            raise ConfigError("thresholds: give --z / --x / --w / --thresholds")
        est = tail_sweep(law, spec.thresholds, snr, spec.trials, spec.seed, threads)
        res, ok = _tail_summary(est, spec.tol)
        return _tail_rows(est, spec.snr_db), res, ok

    if cmd == "wishart":
        est = wishart_tail_run(spec.p, spec.q, spec.thresholds, snr, spec.trials, spec.seed, threads)
        res, ok = _tail_summary(est, spec.tol)
        return _tail_rows(est, spec.snr_db), res, ok

    if cmd == "scaling":
        out = scaling_run(spec.xi, spec.K, spec.N, snr, spec.trials, spec.seed,
                          spec.selector, spec.n_scale, threads)
        rows = [(db, out.n[s], out.mean[s], out.stderr[s],
                 out.limit if spec.selector == "x_order" else math.nan)
                for s, db in enumerate(spec.snr_db)]
        res = {"n": out.n.tolist(), "groups": out.groups.tolist(), "mean": out.mean.tolist(),
               "std": out.std.tolist(), "limit": out.limit,
               "bounds": {"lb_siso": out.bounds.lb_siso, "ub_siso": out.bounds.ub_siso,
                          "lb_mimo": out.bounds.lb_mimo, "zeta": out.bounds.zeta}}
        ok = None
        if spec.selector == "x_order":
            ok = bool(abs(out.mean[-1] - out.limit) <= spec.tol)
        elif out.dof is not None:
            res["dof_slope"] = out.dof.slope
        return rows, res, ok

    # rate
    n = spec.n if spec.n is not None else spec.K
    if spec.K > n:
        raise ConfigError(f"K: must not exceed n (K={spec.K}, n={n})")
    config = NetworkConfig(n, spec.K, spec.N, PathLoss(**spec.pathloss), spec.seed)
    out = dof_run(config, snr, spec.trials, spec.strategy, spec.mode, threads)
    rows = [(db, n, out.mean[s], out.stderr[s], math.nan) for s, db in enumerate(spec.snr_db)]
    res = {"mean_sum_rate": out.mean.tolist(), "dof_slope": out.dof.slope,
           "mean_realization_slope": out.mean_realization_slope, "mode": out.mode}
    ok = None
    if spec.expect_dof is not None:
        ok = bool(abs(out.dof.slope - spec.expect_dof) <= spec.tol)
    return rows, res, ok


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def render_summary(spec, results, verdict):
    doc = {"spec": spec.to_dict(), "results": results, "tolerance": spec.tol, "pass": verdict}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _print_brief(spec, results, verdict, stream):
    if spec.subcommand == "bounds":
        print(f"lb={results['lb_siso']:g} ub={results['ub_siso']:g}", file=stream)
        print(f"lb_mimo={results['lb_mimo']:g} zeta={results['zeta']:g}", file=stream)
        for c in results.get("conditions", []):
            print(f"d={c['d']:g} xi_sufficient={c['xi_sufficient']:g} "
                  f"xi_necessary={c['xi_necessary']:g} xi_sufficient_mimo={c['xi_sufficient_mimo']:g}",
                  file=stream)
        return
    if verdict is not None:
        print(f"{spec.subcommand}: {'PASS' if verdict else 'FAIL'}", file=stream)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        spec, threads = parse_args(list(sys.argv[1:] if argv is None else argv))
        if spec.out and not Path(spec.out).resolve().parent.is_dir():
            raise ConfigError(f"cannot write output {spec.out}: parent directory does not exist")
        rows, results, verdict = execute(spec, threads)
        summary = render_summary(spec, results, verdict)
        if spec.out:
            out = Path(spec.out)
            try:
                if spec.subcommand != "bounds":
                    out.write_text(render_csv(rows))
                out.with_suffix(".json").write_text(summary)
            except OSError as exc:
                raise ConfigError(f"cannot write output {out}: {exc.strerror or exc}") from None
        elif spec.subcommand != "bounds":
            stdout.write(summary)
        _print_brief(spec, results, verdict, stdout)
        return 0
    except ConfigError as exc:
        print(f"nkic: error: {exc}", file=stderr)
        return 2
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"nkic: numeric error: {exc}", file=stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
