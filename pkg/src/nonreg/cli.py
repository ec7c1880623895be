"""Command-line front end: fitting, intervals, and experiment runs.

Subcommands: ``fit`` prints a least-squares fit as JSON, ``ci`` builds one
confidence interval on a CSV dataset, ``simulate`` draws a dataset from a
model config, ``histogram`` runs the sampling-distribution study, and
``coverage`` runs the coverage study. Flags override config-file values;
the environment variable NONREG_SEED replaces the built-in seed default
when neither a flag nor a config supplies one.

Exit codes: 0 on success, 2 for validation problems (bad flags, bad
config, unreadable data, unwritable output), 3 when estimation itself
fails. Error messages go to standard error; results go to standard
output or to files under ``--out``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import bootstrap_ci_M, conditional_ci_M, learning_curve_ci
from .data import parse_class_dataset, parse_decision_dataset
from .errors import (
    BandwidthError,
    BoundaryDegeneracyError,
    EstimationError,
    ValidationError,
)
from .fit import fit_least_squares, fit_q_model
from .harness import (
    COVERAGE_METHODS,
    SCHEMA_LINE,
    _DATA_STREAM,
    experiment_from_config,
    run_coverage_study,
    run_sampling_distribution,
    write_bound_diagnostics,
    write_coverage_csv,
    write_coverage_json,
    write_sampling_csv,
)
from .intervals import (
    SearchConfig,
    adaptive_projection_interval,
    fixed_beta_interval,
    projection_interval,
    value_projection_interval,
)
from .itr import bootstrap_ci_V, value_scale
from .metrics import default_lambda
from .models import DecisionGenModel, model_from_config
from .rng import spawn

_CLASS_METHODS = ("fixed", "projection", "adaptive", "bound", "conditional", "learning-curve")
_TARGETS = {
    "fixed": "misclass_rate_at_beta",
    "projection": "optimal_rule_misclass_rate",
    "adaptive": "optimal_rule_misclass_rate",
    "bound": "fitted_rule_misclass_rate",
    "conditional": "fitted_rule_misclass_rate",
    "learning-curve": "expected_misclass_rate",
    "value-projection": "optimal_rule_value",
    "value-bound": "fitted_rule_value",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonreg",
        description="Confidence intervals for error rates and rule values of fitted linear rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: NONREG_SEED or 0)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--dry-run", action="store_true", help="validate inputs, write nothing")

    p_fit = sub.add_parser("fit", help="least-squares fit of a CSV dataset, printed as JSON")
    p_fit.add_argument("--data", required=True, help="CSV dataset path")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_ci = sub.add_parser("ci", help="one confidence interval on a CSV dataset, printed as JSON")
    p_ci.add_argument("--data", required=True, help="CSV dataset path")
    p_ci.add_argument("--method", required=True, choices=COVERAGE_METHODS)
    p_ci.add_argument("--alpha", type=float, default=None, help="interval level parameter")
    p_ci.add_argument("--omega", type=float, default=None, help="total level of projection methods")
    p_ci.add_argument("--eta", type=float, default=None, help="coefficient-set share of omega")
    p_ci.add_argument("--lambda", dest="lam", type=float, default=None, help="near-boundary threshold")
    p_ci.add_argument("--rho", type=float, default=None, help="near-boundary threshold for rule values")
    p_ci.add_argument("--B", type=int, default=None, help="bootstrap draw count")
    p_ci.add_argument("--B-outer", dest="B_outer", type=int, default=None, help="outer draws (learning-curve)")
    p_ci.add_argument("--B-inner", dest="B_inner", type=int, default=None, help="inner draws (learning-curve)")
    p_ci.add_argument("--beta", default=None, help="comma-separated coefficients (fixed method)")
    common(p_ci)
    p_ci.set_defaults(func=cmd_ci)

    p_sim = sub.add_parser("simulate", help="draw a dataset from a model config and write it as CSV")
    p_sim.add_argument("--n", type=int, default=None, help="sample size (or config key 'n')")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_hist = sub.add_parser("histogram", help="sampling-distribution study; long-format CSV per model")
    p_hist.add_argument("--tau", type=float, default=None, help="surrogate sharpness")
    common(p_hist)
    p_hist.set_defaults(func=cmd_histogram)

    p_cov = sub.add_parser("coverage", help="coverage study over the configured method grid")
    common(p_cov)
    p_cov.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EstimationError, BandwidthError, BoundaryDegeneracyError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError(f"config {path} must hold a JSON object")
    return cfg


def _pick(flag_value, cfg: dict, key: str, default):
    """Flag beats config beats built-in default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default


def _resolve_seed(flag_value, cfg: dict) -> int:
    if flag_value is not None:
        return int(flag_value)
    if "seed" in cfg:
        return int(cfg["seed"])
    env = os.environ.get("NONREG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"NONREG_SEED must be an integer, got {env!r}") from None
    return 0


def _search_config(cfg: dict) -> SearchConfig | None:
    search = cfg.get("search")
    if search is None:
        return None
    if isinstance(search, SearchConfig):
        return search
    try:
        return SearchConfig(**search)
    except TypeError as exc:
        raise ValidationError(f"bad search config: {exc}") from None


def _load_data(path, cfg: dict):
    """Parse a CSV dataset; header sniffing picks the dataset kind.

    A file whose header holds both the action and outcome columns is read
    as decision data. The optional config mapping under ``data`` forwards
    parser options (column names, intercept handling) and can force the
    kind explicitly.
    """
    options = dict(cfg.get("data", {}))
    kind = options.pop("kind", None)
    action = options.get("action_column", "a")
    outcome = options.get("outcome_column", "y")
    try:
        with open(path) as fh:
            header_line = ""
            for line in fh:
                if line.strip() and not line.lstrip().startswith("#"):
                    header_line = line
                    break
    except OSError as exc:
        raise ValidationError(f"cannot read data {path}: {exc}") from None
    header = [c.strip() for c in header_line.strip().split(",")]
    if kind is None:
        kind = "decision" if action in header and outcome in header else "class"
    if kind == "decision":
        return parse_decision_dataset(path, **options), "decision"
    if kind != "class":
        raise ValidationError(f"unknown dataset kind {kind!r}")
    options.pop("action_column", None)
    options.pop("outcome_column", None)
    options.pop("propensity_column", None)
    options.pop("interaction_columns", None)
    return parse_class_dataset(path, **options), "class"


def _parse_beta(text: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"--beta must be comma-separated numbers, got {text!r}") from None
    return np.asarray(values)


def _out_dir(args) -> Path:
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    data, kind = _load_data(args.data, cfg)
    if args.dry_run:
        return 0
    if kind == "class":
        est = fit_least_squares(data)
        se = np.sqrt(np.diag(est.sigma) / est.n)
        payload = {
            "kind": "class",
            "n": est.n,
            "coef": [float(v) for v in est.beta],
            "se": [float(v) for v in se],
        }
    else:
        qest = fit_q_model(data)
        se1 = np.sqrt(np.diag(qest.r_hat) / qest.n)
        payload = {
            "kind": "decision",
            "n": qest.n,
            "main_coef": [float(v) for v in qest.beta0],
            "rule_coef": [float(v) for v in qest.beta1],
            "rule_se": [float(v) for v in se1],
        }
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_ci(args) -> int:
    cfg = _load_config(args.config)
    method = args.method
    data, kind = _load_data(args.data, cfg)
    needs_decision = method in ("value-projection", "value-bound")
    if needs_decision != (kind == "decision"):
        want = "decision" if needs_decision else "classification"
        raise ValidationError(f"method '{method}' needs a {want} dataset")

    alpha = float(_pick(args.alpha, cfg, "alpha", 0.10))
    omega = float(_pick(args.omega, cfg, "omega", 0.10))
    eta = _pick(args.eta, cfg, "eta", None)
    eta = None if eta is None else float(eta)
    lam = _pick(args.lam, cfg, "lambda", None)
    lam = None if lam is None else float(lam)
    rho = _pick(args.rho, cfg, "rho", None)
    rho = None if rho is None else float(rho)
    B = int(_pick(args.B, cfg, "B", 1000))
    B_outer = int(_pick(args.B_outer, cfg, "B_outer", 200))
    B_inner = int(_pick(args.B_inner, cfg, "B_inner", 50))
    n_directions = int(cfg.get("n_directions", 2048))
    search = _search_config(cfg)
    seed = _resolve_seed(args.seed, cfg)
    if args.dry_run:
        return 0

    level = 1.0 - alpha
    diagnostics: dict = {}
    draws = skipped = None

    if method == "fixed":
        if args.beta is None:
            raise ValidationError("--method fixed needs --beta")
        iv = fixed_beta_interval(data, _parse_beta(args.beta), alpha)
    elif method in ("projection", "adaptive"):
        est = fit_least_squares(data)
        eta_eff = omega / 2.0 if eta is None else eta
        diagnostics = {"omega": omega, "eta": eta_eff, "alpha_split": omega - eta_eff}
        if method == "projection":
            iv = projection_interval(data, est, omega=omega, eta=eta, search=search, rng=seed)
        else:
            diagnostics["lambda"] = default_lambda(data.n) if lam is None else lam
            iv = adaptive_projection_interval(
                data, est, omega=omega, eta=eta, lam=lam, search=search, rng=seed
            )
        level = 1.0 - omega
    elif method == "bound":
        res = bootstrap_ci_M(data, alpha, B=B, lam=lam, rng=seed, n_directions=n_directions)
        iv, draws, skipped = res.interval, res.draws, res.skipped
        diagnostics = {"center": res.center, "lambda": res.lam}
    elif method == "conditional":
        res = conditional_ci_M(data, alpha, B=B, lam=lam, rng=seed, n_directions=n_directions)
        iv, draws, skipped = res.interval, res.draws, res.skipped
        diagnostics = {
            "center": res.center,
            "lambda": res.lam,
            "bandwidths": [float(b) for b in res.bandwidths],
            "effective_mass": res.effective_mass,
        }
    elif method == "learning-curve":
        res = learning_curve_ci(data, alpha, B_outer, B_inner, lam=lam, rng=seed)
        iv, draws, skipped = res.interval, res.draws, res.skipped
        diagnostics = {"center": res.center, "lambda": res.lam}
    elif method == "value-projection":
        qest = fit_q_model(data)
        eta_eff = omega / 2.0 if eta is None else eta
        diagnostics = {"omega": omega, "eta": eta_eff, "alpha_split": omega - eta_eff}
        iv = value_projection_interval(data, qest, omega=omega, eta=eta, search=search, rng=seed)
        level = 1.0 - omega
    else:
        res = bootstrap_ci_V(data, alpha, B=B, rho=rho, rng=seed, n_directions=n_directions)
        iv, draws, skipped = res.interval, res.draws, res.skipped
        diagnostics = {"center": res.center, "rho": res.rho, "value_scale": value_scale(data)}

    if draws is not None:
        diagnostics["draws"] = len(draws)
        diagnostics["skipped"] = len(skipped)
        if args.out is not None:
            scale = diagnostics.get("value_scale")
            write_bound_diagnostics(_out_dir(args) / f"draws_{method}.csv", draws, skipped, value_scale=scale)

    payload = {
        "method": method,
        "target": _TARGETS[method],
        "lo": iv.lo,
        "hi": iv.hi,
        "level": level,
        "n": data.n,
        "diagnostics": diagnostics,
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if not cfg:
        raise ValidationError("simulate needs --config with a model")
    model_cfg = cfg if isinstance(cfg.get("model"), str) else cfg.get("model")
    if model_cfg is None:
        raise ValidationError("config has no model")
    model = model_from_config(model_cfg)
    n = _pick(args.n, cfg, "n", None)
    if n is None:
        raise ValidationError("simulate needs --n or config key 'n'")
    n = int(n)
    seed = _resolve_seed(args.seed, cfg)
    # Stream (data, size 0, rep 0): the file equals the first replication
    # of a single-size study run with the same seed.
    gen = spawn(seed, _DATA_STREAM, 0, 0)
    data = model.sample(n, gen)
    if args.dry_run:
        return 0
    out = _out_dir(args) / "dataset.csv"
    _write_dataset(out, data, decision=isinstance(model, DecisionGenModel))
    print(f"wrote {out} ({n} rows)")
    return 0


def _write_dataset(path: Path, data, *, decision: bool) -> None:
    """CSV the parsers read back; intercept columns are left implicit."""
    lines = [SCHEMA_LINE]
    if decision:
        feats = data.X0[:, 1:]
        cols = [f"x{j + 1}" for j in range(feats.shape[1])]
        lines.append(",".join(cols + ["a", "y", "pi"]))
        pi = data.pi if data.pi is not None else np.full(data.n, np.nan)
        for i in range(data.n):
            row = [repr(float(v)) for v in feats[i]]
            row += [repr(float(data.a[i])), repr(float(data.y[i])), repr(float(pi[i]))]
            lines.append(",".join(row))
    else:
        feats = data.X[:, 1:]
        cols = [f"x{j + 1}" for j in range(feats.shape[1])]
        lines.append(",".join(cols + ["y"]))
        for i in range(data.n):
            row = [repr(float(v)) for v in feats[i]] + [repr(float(data.y[i]))]
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _model_tag(model_cfg: dict) -> str:
    kind = model_cfg.get("model", "model")
    for key in ("delta", "c", "q", "theta"):
        if key in model_cfg:
            value = model_cfg[key]
            if isinstance(value, (list, tuple)):
                value = "_".join(str(v) for v in value)
            return f"{kind}-{key}{value}"
    return str(kind)


def cmd_histogram(args) -> int:
    cfg = _load_config(args.config)
    if not cfg:
        raise ValidationError("histogram needs --config")
    model_cfgs = cfg.get("models")
    if model_cfgs is None:
        if "model" not in cfg:
            raise ValidationError("config needs 'model' or 'models'")
        model_cfgs = [cfg["model"]]
    base = {k: v for k, v in cfg.items() if k not in ("models", "model")}
    if args.seed is not None:
        base["seed"] = args.seed
    elif "seed" not in base:
        base["seed"] = _resolve_seed(None, cfg)
    if args.tau is not None:
        base["tau"] = args.tau
    threads = int(_pick(args.threads, cfg, "threads", 1))

    experiments = [experiment_from_config({**base, "model": m}) for m in model_cfgs]
    if args.dry_run:
        print("config ok")
        return 0
    out = _out_dir(args)  # fail before the study runs, not after

    print(f"{'model':<24}{'n':>8}{'reps':>6}{'iqr_misclass':>14}{'iqr_smooth':>12}{'failures':>10}")
    for model_cfg, ecfg in zip(model_cfgs, experiments):
        study = run_sampling_distribution(ecfg, threads=threads)
        tag = _model_tag(ecfg.model)
        write_sampling_csv(out / f"draws_{tag}.csv", study)
        for n in ecfg.sizes:
            err = study.values(n, "misclass")
            smooth = study.values(n, "smooth")
            iqr_m = float(np.subtract(*np.percentile(err, [75, 25]))) if err.size else float("nan")
            iqr_s = float(np.subtract(*np.percentile(smooth, [75, 25]))) if smooth.size else float("nan")
            fails = study.failures.get(n, 0)
            print(f"{tag:<24}{n:>8}{err.size:>6}{iqr_m:>14.5f}{iqr_s:>12.5f}{fails:>10}")
    return 0


def cmd_coverage(args) -> int:
    cfg = _load_config(args.config)
    if not cfg:
        raise ValidationError("coverage needs --config")
    merged = dict(cfg)
    if args.seed is not None:
        merged["seed"] = args.seed
    threads = int(_pick(args.threads, cfg, "threads", 1))
    ecfg = experiment_from_config(merged)
    if args.dry_run:
        print("config ok")
        return 0
    out = _out_dir(args)  # fail before the study runs, not after
    report = run_coverage_study(ecfg, threads=threads)
    write_coverage_csv(out / "coverage.csv", report)
    write_coverage_json(out / "coverage.json", report, ecfg)
    print(f"{'method':<18}{'n':>8}{'reps':>6}{'coverage':>10}{'mc_se':>8}{'width':>9}{'fail':>6}{'flag':>6}")
    for row in report.rows:
        flag = "yes" if row.flagged else ""
        print(
            f"{row.method:<18}{row.n:>8}{row.replications:>6}"
            f"{row.coverage:>10.3f}{row.mc_se:>8.3f}{row.mean_width:>9.4f}{row.failures:>6}{flag:>6}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
