"""Experiment orchestration: sampling-distribution and coverage studies.

Two studies drive everything downstream. The sampling study refits the
classifier on fresh training sets over a grid of sizes and records the
exact error rate and its smooth surrogate for each fit, in long format,
ready for histogramming. The coverage study wraps every interval method,
checks each replication's interval against the oracle target, and
aggregates per (method, size) with Monte Carlo standard errors.

Replications are the unit of parallelism. Every replication derives its
generators from (seed, replication index), so results are byte-identical
for any worker count, and adding a method to the grid never changes the
simulated datasets. Aggregation folds the per-replication results in
index order.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import bootstrap_ci_M, conditional_ci_M, learning_curve_ci
from .errors import (
    BandwidthError,
    BoundaryDegeneracyError,
    EstimationError,
    ValidationError,
)
from .fit import fit_least_squares, fit_q_model
from .intervals import (
    SearchConfig,
    adaptive_projection_interval,
    fixed_beta_interval,
    projection_interval,
    value_projection_interval,
)
from .itr import bootstrap_ci_V
from .models import (
    DecisionGenModel,
    LocalSequence,
    model_from_config,
    model_to_config,
    population_beta,
    population_beta1,
    true_misclass,
    true_smooth_surrogate,
    true_value,
)
from .rng import spawn

SCHEMA_LINE = "# schema=1"

COVERAGE_METHODS = (
    "fixed",
    "projection",
    "adaptive",
    "bound",
    "conditional",
    "learning-curve",
    "value-projection",
    "value-bound",
)
_VALUE_METHODS = frozenset({"value-projection", "value-bound"})

# Stable per-method stream offsets, keyed by name so that editing the
# method list never reroutes another method's random draws.
_METHOD_STREAM = {name: 16 + i for i, name in enumerate(COVERAGE_METHODS)}
_DATA_STREAM = 1
_ORACLE_STREAM = 2

_FAILURE_KINDS = (EstimationError, BandwidthError, BoundaryDegeneracyError)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a study run depends on, in one immutable bundle.

    ``model`` is the JSON-style mapping understood by
    :func:`nonreg.models.model_from_config`. Budgets: ``B`` is the draw
    count of the single-level bootstrap methods, ``B_outer``/``B_inner``
    the nested ones, ``n_directions`` the optimizer budget inside bound
    draws and ``curve_directions`` its (cheaper) counterpart inside the
    nested construction. ``oracle_reps`` sets the Monte Carlo budget for
    the expected-error oracle used by the learning-curve method.
    """

    model: dict
    sizes: tuple[int, ...]
    replications: int
    methods: tuple[str, ...] = ()
    alpha: float = 0.10
    omega: float = 0.10
    eta: float | None = None
    tau: float = 3.0
    B: int = 1000
    B_outer: int = 200
    B_inner: int = 50
    n_directions: int = 2048
    curve_directions: int = 256
    oracle_reps: int = 500
    lam: float | None = None
    rho: float | None = None
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        built = model_from_config(self.model)
        object.__setattr__(self, "model", model_to_config(built))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replications < 1:
            raise ValidationError("replications must be at least 1")
        if not self.sizes:
            raise ValidationError("at least one training size is required")
        min_n = _fit_dimension(built) + 2
        for n in self.sizes:
            if n < min_n:
                raise ValidationError(f"size {n} is below the minimum {min_n} for this model")
        for name, level in (("alpha", self.alpha), ("omega", self.omega), ("tau", self.tau)):
            if not np.isfinite(level) or level <= 0:
                raise ValidationError(f"{name} must be positive and finite")
        for name in ("alpha", "omega"):
            if getattr(self, name) >= 1:
                raise ValidationError(f"{name} must be below 1")
        if self.eta is not None and not 0.0 < self.eta < 1.0:
            raise ValidationError("eta must be in (0, 1)")
        for name in ("B", "B_outer", "B_inner", "n_directions", "curve_directions", "oracle_reps"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be at least 1")
        unknown = [m for m in self.methods if m not in COVERAGE_METHODS]
        if unknown:
            raise ValidationError(f"unknown methods: {unknown}; choose from {COVERAGE_METHODS}")
        decision = isinstance(built, DecisionGenModel)
        for m in self.methods:
            if (m in _VALUE_METHODS) != decision:
                kind = "decision" if m in _VALUE_METHODS else "classification"
                raise ValidationError(f"method '{m}' needs a {kind} model")


def _fit_dimension(model) -> int:
    if isinstance(model, DecisionGenModel):
        return model.p + 1 + model.p1
    return 2


def experiment_from_config(config: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a plain JSON mapping.

    Accepts the config-file schema used by the command line: ``lambda``
    and ``rho`` keys map onto the threshold fields, ``search`` may be a
    mapping of :class:`SearchConfig` fields. Report keys written by the
    emitters (``schema``, ``rows``, ``summary``, ``threads``, ``out``)
    are ignored so a coverage report is itself a valid config.
    """
    if not isinstance(config, dict):
        raise ValidationError("config must be a mapping")
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    passthrough = {"schema", "rows", "summary", "threads", "out", "lambda"}
    unknown = set(config) - known - passthrough
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    for key in known - {"search", "lam"}:
        if key in config:
            kwargs[key] = config[key]
    if "lambda" in config and "lam" in config:
        raise ValidationError("give 'lambda' or 'lam', not both")
    if "lambda" in config:
        kwargs["lam"] = config["lambda"]
    elif "lam" in config:
        kwargs["lam"] = config["lam"]
    if "search" in config:
        search = config["search"]
        if isinstance(search, dict):
            try:
                search = SearchConfig(**search)
            except TypeError as exc:
                raise ValidationError(f"bad search config: {exc}") from None
        kwargs["search"] = search
    for key in ("model", "sizes", "replications"):
        if key not in kwargs:
            raise ValidationError(f"config is missing required key '{key}'")
    return ExperimentConfig(**kwargs)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-ready mapping; inverse of :func:`experiment_from_config`."""
    out = asdict(cfg)
    out["lambda"] = out.pop("lam")
    out["search"] = asdict(cfg.search)
    out["sizes"] = list(cfg.sizes)
    out["methods"] = list(cfg.methods)
    return out


@dataclass(frozen=True)
class DrawRow:
    """One long-format record of the sampling study."""

    n: int
    rep: int
    metric: str
    value: float


@dataclass(frozen=True)
class SamplingStudy:
    rows: tuple[DrawRow, ...]
    failures: dict[int, int]

    def values(self, n: int, metric: str) -> np.ndarray:
        return np.array([r.value for r in self.rows if r.n == n and r.metric == metric])


@dataclass(frozen=True)
class CoverageRow:
    """Aggregated result for one (method, size) cell.

    ``replications`` counts the replications that produced an interval;
    ``failures`` the ones that raised an estimation-stage error. The Monte
    Carlo standard error is sqrt(coverage * (1 - coverage) / replications).
    ``truth`` averages the oracle target over the counted replications
    (it is constant for fixed targets) and ``truth_se`` carries the oracle's
    own Monte Carlo error, zero whenever the target has a closed form.
    """

    method: str
    n: int
    replications: int
    coverage: float
    mean_width: float
    mc_se: float
    failures: int
    flagged: bool
    truth: float
    truth_se: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.coverage <= 1.0:
            raise ValidationError(f"coverage must be in [0, 1], got {self.coverage}")
        if self.replications < 0 or self.failures < 0:
            raise ValidationError("counts must be nonnegative")


@dataclass(frozen=True)
class CoverageReport:
    rows: tuple[CoverageRow, ...]

    def row(self, method: str, n: int) -> CoverageRow:
        for r in self.rows:
            if r.method == method and r.n == n:
                return r
        raise KeyError(f"no row for ({method!r}, {n})")


def _model_at(model, n: int):
    return model.at(n) if isinstance(model, LocalSequence) else model


def run_sampling_distribution(cfg: ExperimentConfig, *, threads: int = 1) -> SamplingStudy:
    """Refit on fresh samples over the size grid; record exact error rates.

    For each size ``n`` and replication, draws a training set, fits the
    least-squares classifier, and evaluates the model's exact error rate
    and its smooth surrogate at the fitted coefficients. A drifting model
    is pinned at ``n`` before evaluation, so each size is scored against
    its own generative law. Fit failures are counted per size and the
    replication contributes no rows.
    """
    model = model_from_config(cfg.model)
    if isinstance(model, DecisionGenModel):
        raise ValidationError("sampling study needs a classification model")

    def one(size_idx: int, rep: int) -> tuple[DrawRow, DrawRow] | None:
        n = cfg.sizes[size_idx]
        gen = spawn(cfg.seed, _DATA_STREAM, size_idx, rep)
        data = model.sample(n, gen)
        scoring = _model_at(model, n)
        try:
            est = fit_least_squares(data)
        except _FAILURE_KINDS:
            return None
        err = true_misclass(scoring, est.beta).strict
        smooth = true_smooth_surrogate(scoring, est.beta, cfg.tau)
        return (
            DrawRow(n, rep, "misclass", err),
            DrawRow(n, rep, "smooth", smooth),
        )

    tasks = [(i, r) for i in range(len(cfg.sizes)) for r in range(cfg.replications)]
    results = _run_tasks(one, tasks, threads)
    rows: list[DrawRow] = []
    failures: dict[int, int] = {}
    for (size_idx, _), pair in zip(tasks, results):
        if pair is None:
            n = cfg.sizes[size_idx]
            failures[n] = failures.get(n, 0) + 1
        else:
            rows.extend(pair)
    return SamplingStudy(tuple(rows), failures)


def run_coverage_study(cfg: ExperimentConfig, *, threads: int = 1) -> CoverageReport:
    """Check every configured interval method against its oracle target.

    Fixed-coefficient, projection and adaptive intervals are scored
    against the error rate of the population coefficients; the bootstrap
    and conditional intervals against the error of each replication's own
    fit; the nested construction against the expected error over training
    sets, estimated once per size by an independent Monte Carlo oracle
    whose standard error is recorded. Value methods are scored against
    the closed-form rule value.
    """
    if not cfg.methods:
        raise ValidationError("coverage study needs at least one method")
    model = model_from_config(cfg.model)

    curve_truth: dict[int, tuple[float, float]] = {}
    if "learning-curve" in cfg.methods:
        for size_idx, n in enumerate(cfg.sizes):
            curve_truth[n] = _expected_misclass_oracle(model, n, cfg.oracle_reps, cfg.seed, size_idx)

    def one(method: str, size_idx: int, rep: int):
        n = cfg.sizes[size_idx]
        data_gen = spawn(cfg.seed, _DATA_STREAM, size_idx, rep)
        data = model.sample(n, data_gen)
        gen = spawn(cfg.seed, _METHOD_STREAM[method], size_idx, rep)
        try:
            interval, truth, truth_se = _run_method(method, cfg, model, n, data, gen, curve_truth)
        except _FAILURE_KINDS:
            return None
        return interval.contains(truth), interval.width, truth, truth_se

    tasks = [
        (m, i, r)
        for m in cfg.methods
        for i in range(len(cfg.sizes))
        for r in range(cfg.replications)
    ]
    results = _run_tasks(one, tasks, threads)

    per_cell: dict[tuple[str, int], list] = {(m, cfg.sizes[i]): [] for m in cfg.methods for i in range(len(cfg.sizes))}
    fail_count: dict[tuple[str, int], int] = {key: 0 for key in per_cell}
    for (m, i, _), res in zip(tasks, results):
        key = (m, cfg.sizes[i])
        if res is None:
            fail_count[key] += 1
        else:
            per_cell[key].append(res)

    rows = []
    for method in cfg.methods:
        for n in cfg.sizes:
            cell = per_cell[(method, n)]
            failures = fail_count[(method, n)]
            good = len(cell)
            if good:
                covered = sum(1 for c, _, _, _ in cell if c)
                coverage = covered / good
                mean_width = float(np.mean([w for _, w, _, _ in cell]))
                mc_se = math.sqrt(coverage * (1.0 - coverage) / good)
                truth = float(np.mean([t for _, _, t, _ in cell]))
                truth_se = float(np.mean([s for _, _, _, s in cell]))
            else:
                coverage = mean_width = mc_se = truth = truth_se = 0.0
            rows.append(
                CoverageRow(
                    method=method,
                    n=n,
                    replications=good,
                    coverage=coverage,
                    mean_width=mean_width,
                    mc_se=mc_se,
                    failures=failures,
                    flagged=failures > 0.05 * cfg.replications,
                    truth=truth,
                    truth_se=truth_se,
                )
            )
    return CoverageReport(tuple(rows))


def _run_method(method, cfg, model, n, data, gen, curve_truth):
    """Build one interval and resolve its oracle target."""
    scoring = _model_at(model, n)
    if method == "fixed":
        beta_star = population_beta(scoring)
        iv = fixed_beta_interval(data, beta_star, cfg.alpha)
        return iv, true_misclass(scoring, beta_star).strict, 0.0
    if method == "projection":
        est = fit_least_squares(data)
        iv = projection_interval(data, est, omega=cfg.omega, eta=cfg.eta, search=cfg.search, rng=gen)
        beta_star = population_beta(scoring)
        return iv, true_misclass(scoring, beta_star).strict, 0.0
    if method == "adaptive":
        est = fit_least_squares(data)
        iv = adaptive_projection_interval(
            data, est, omega=cfg.omega, eta=cfg.eta, lam=cfg.lam, search=cfg.search, rng=gen
        )
        beta_star = population_beta(scoring)
        return iv, true_misclass(scoring, beta_star).strict, 0.0
    if method == "bound":
        res = bootstrap_ci_M(data, cfg.alpha, B=cfg.B, lam=cfg.lam, rng=gen, n_directions=cfg.n_directions)
        beta_hat = fit_least_squares(data).beta
        return res.interval, true_misclass(scoring, beta_hat).strict, 0.0
    if method == "conditional":
        res = conditional_ci_M(data, cfg.alpha, B=cfg.B, lam=cfg.lam, rng=gen, n_directions=cfg.n_directions)
        beta_hat = fit_least_squares(data).beta
        return res.interval, true_misclass(scoring, beta_hat).strict, 0.0
    if method == "learning-curve":
        res = learning_curve_ci(
            data,
            cfg.alpha,
            cfg.B_outer,
            cfg.B_inner,
            lam=cfg.lam,
            rng=gen,
            n_directions=cfg.curve_directions,
        )
        truth, truth_se = curve_truth[n]
        return res.interval, truth, truth_se
    if method == "value-projection":
        qest = fit_q_model(data)
        iv = value_projection_interval(data, qest, omega=cfg.omega, eta=cfg.eta, search=cfg.search, rng=gen)
        return iv, true_value(model, population_beta1(model)), 0.0
    if method == "value-bound":
        res = bootstrap_ci_V(data, cfg.alpha, B=cfg.B, rho=cfg.rho, rng=gen, n_directions=cfg.n_directions)
        beta1_hat = fit_q_model(data).beta1
        return res.interval, true_value(model, beta1_hat), 0.0
    raise ValidationError(f"unknown method {method!r}")


def _expected_misclass_oracle(model, n, reps, seed, size_idx) -> tuple[float, float]:
    """Monte Carlo estimate of the expected error of a size-n fit.

    Independent of every study stream: refits on ``reps`` fresh training
    sets and averages the exact error of each fit. Returns (mean, se).
    """
    scoring = _model_at(model, n)
    vals = []
    for k in range(reps):
        gen = spawn(seed, _ORACLE_STREAM, size_idx, k)
        data = model.sample(n, gen)
        try:
            est = fit_least_squares(data)
        except _FAILURE_KINDS:
            continue
        vals.append(true_misclass(scoring, est.beta).strict)
    if len(vals) < 2:
        raise EstimationError("expected-error oracle failed on almost every replication")
    arr = np.asarray(vals)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def _run_tasks(fn, tasks, threads):
    """Run fn over argument tuples, preserving order; threads optional."""
    if threads < 1:
        raise ValidationError("threads must be at least 1")
    if threads == 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def write_sampling_csv(path, study: SamplingStudy) -> None:
    """Long-format draw table with a schema header comment."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(["n", "rep", "metric", "value"])
        for row in study.rows:
            writer.writerow([row.n, row.rep, row.metric, repr(row.value)])


_COVERAGE_COLUMNS = (
    "method",
    "n",
    "replications",
    "coverage",
    "mean_width",
    "mc_se",
    "failures",
    "flagged",
    "truth",
    "truth_se",
)


def write_coverage_csv(path, report: CoverageReport) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(_COVERAGE_COLUMNS)
        for row in report.rows:
            writer.writerow([getattr(row, c) for c in _COVERAGE_COLUMNS])


def write_coverage_json(path, report: CoverageReport, cfg: ExperimentConfig | None = None) -> None:
    """Machine-readable report; with ``cfg`` the file doubles as a config."""
    payload: dict = {"schema": 1}
    if cfg is not None:
        payload.update(config_to_dict(cfg))
    payload["rows"] = [asdict(row) for row in report.rows]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_bound_diagnostics(path, draws, skipped, *, value_scale: float | None = None) -> None:
    """Per-draw lower/upper record of a bootstrap bound run.

    ``draws`` are the successful draws in order, ``skipped`` the (index,
    reason) pairs the run dropped; together they tile the draw indices.
    The optional value scale is repeated on every row, matching the
    decision-rule diagnostics layout.
    """
    skipped_by_index = dict(skipped)
    total = len(draws) + len(skipped_by_index)
    columns = ["draw", "L", "U", "n_near", "skipped_reason"]
    if value_scale is not None:
        columns.append("value_scale")
    path = Path(path)
    it = iter(draws)
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for b in range(total):
            if b in skipped_by_index:
                record = [b, "", "", "", skipped_by_index[b]]
            else:
                draw = next(it)
                record = [b, repr(draw.lower), repr(draw.upper), draw.n_near, ""]
            if value_scale is not None:
                record.append(repr(value_scale))
            writer.writerow(record)
