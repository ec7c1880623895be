"""Bootstrap bound pairs for error rates of fitted rules.

The centered error statistic of a refitted rule has no single bootstrap
limit when mass sits exactly on the decision boundary, so each resampled
draw is bracketed instead of approximated: points confidently classified
by the resampled fit contribute their weighted indicators directly, and
the contribution of points near the boundary is replaced by its best and
worst case over every possible rule. Quantiles of the two bracket arrays
then give a conservative confidence interval.

Every draw's bracket is seeded with the resampled coefficient itself, so
lower <= statistic <= upper holds draw by draw, by construction, in exact
float arithmetic.

Three consumers: a marginal bootstrap interval, a kernel-conditional
variant that reweights draws by how close their coefficient landed to the
original fit, and a double-bootstrap interval for the resampling-averaged
error of the fitting procedure itself (the learning-curve target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ClassDataset, bootstrap_multiplicities
from .errors import BandwidthError, BoundaryDegeneracyError, EstimationError, ValidationError
from .fit import CoefEstimate, batched_least_squares, fit_least_squares
from .intervals import Interval
from .metrics import boundary_test_statistics, default_lambda, empirical_misclass
from .quantiles import empirical_quantile, weighted_quantile
from .rng import RngSeed, as_generator
from .signopt import evaluate_sign_objective, optimize_sign_pattern

__all__ = [
    "BoundDraw",
    "KernelConfig",
    "BootstrapCI",
    "ConditionalCI",
    "LearningCurveCI",
    "centered_bound_draw",
    "bootstrap_ci_M",
    "conditional_ci_M",
    "mn_gamma_estimate",
    "learning_curve_ci",
]

_MAX_SKIP_FRACTION = 0.05


@dataclass(frozen=True)
class BoundDraw:
    """One draw's bracket [lower, upper] around its centered statistic."""

    lower: float
    upper: float
    stat: float
    n_near: int
    beta_b: np.ndarray

    def __post_init__(self) -> None:
        if not (self.lower <= self.stat <= self.upper):
            raise EstimationError(
                f"bracket violated: {self.lower} <= {self.stat} <= {self.upper} fails"
            )


@dataclass(frozen=True)
class KernelConfig:
    """Kernel settings for the conditional interval.

    bandwidths overrides the per-coordinate rule 1.06 * sd * B^(-1/5);
    math.inf entries weight every draw equally in that coordinate.
    """

    scale: float = 1.06
    bandwidths: tuple | None = None
    min_effective_mass: float = 10.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValidationError("kernel scale must be positive")
        if self.min_effective_mass < 1.0:
            raise ValidationError("min_effective_mass must be at least 1")


@dataclass(frozen=True)
class BootstrapCI:
    interval: Interval
    center: float
    alpha: float
    lam: float
    draws: tuple
    skipped: tuple


@dataclass(frozen=True)
class ConditionalCI:
    interval: Interval
    center: float
    alpha: float
    lam: float
    draws: tuple
    skipped: tuple
    bandwidths: tuple
    effective_mass: float


@dataclass(frozen=True)
class LearningCurveCI:
    interval: Interval
    center: float
    alpha: float
    lam: float
    draws: tuple
    skipped: tuple


def centered_bound_draw(
    data: ClassDataset,
    est: CoefEstimate,
    multiplicities,
    est_b: CoefEstimate,
    lam: float,
    *,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    rng: RngSeed | int | np.random.Generator = 0,
    n_directions: int = 2048,
) -> BoundDraw:
    """Bracket sqrt(n)(P_b - P_n) of the resampled rule's error indicator.

    Points far from the boundary (under the resampled fit's own test
    statistic, or the original fit's when partition_source is "original")
    contribute exactly; near points contribute their sign-pattern sup and
    inf over all rules. The resampled coefficient seeds both problems.
    """
    w = np.asarray(multiplicities, dtype=float).ravel()
    if w.shape[0] != data.n:
        raise ValidationError("multiplicities must have one entry per sample")
    if partition_source not in ("bootstrap", "original"):
        raise ValidationError(f"unknown partition_source {partition_source!r}")
    part_est = est_b if partition_source == "bootstrap" else est
    partition = boundary_test_statistics(data, part_est, lam)
    near = partition.near_mask
    c = (w - 1.0) / math.sqrt(data.n)
    ind_b = (data.y * (data.X @ est_b.beta)) < 0.0
    far_term = float(c[~near & ind_b].sum())

    Zn = (data.y[:, None] * data.X)[near]
    cn = c[near]
    sup = optimize_sign_pattern(
        Zn, cn, sense="sup", mode=opt_mode, seeds=[est_b.beta], rng=rng, n_directions=n_directions
    )
    inf = optimize_sign_pattern(
        Zn, cn, sense="inf", mode=opt_mode, seeds=[est_b.beta], rng=rng, n_directions=n_directions
    )
    stat_near, _ = evaluate_sign_objective(Zn, cn, est_b.beta)
    return BoundDraw(
        lower=far_term + inf.value,
        upper=far_term + sup.value,
        stat=far_term + stat_near,
        n_near=int(near.sum()),
        beta_b=est_b.beta,
    )


def _bound_draws(data, lam, B, rng, partition_source, opt_mode, n_directions, min_B):
    if B < min_B:
        raise ValidationError(f"need at least {min_B} bootstrap draws, got {B}")
    est = fit_least_squares(data)
    lam = default_lambda(data.n) if lam is None else float(lam)
    gen = as_generator(rng)
    W = bootstrap_multiplicities(data.n, B, gen)
    fits = batched_least_squares(data.X, data.y, W)
    draws = []
    skipped = []
    for b in range(B):
        if not fits.ok[b]:
            skipped.append((b, "singular-refit"))
            continue
        try:
            est_b = CoefEstimate(fits.beta[b], fits.sigma[b], data.n)
            draws.append(
                centered_bound_draw(
                    data,
                    est,
                    W[b],
                    est_b,
                    lam,
                    partition_source=partition_source,
                    opt_mode=opt_mode,
                    rng=gen,
                    n_directions=n_directions,
                )
            )
        except (BoundaryDegeneracyError, ValidationError) as exc:
            skipped.append((b, type(exc).__name__))
    if len(skipped) > _MAX_SKIP_FRACTION * B:
        raise EstimationError(
            f"{len(skipped)} of {B} bootstrap draws failed; refusing to report an interval"
        )
    return est, lam, draws, skipped


def bootstrap_ci_M(
    data: ClassDataset,
    alpha: float,
    B: int = 1000,
    *,
    lam: float | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    n_directions: int = 2048,
) -> BootstrapCI:
    """Bootstrap bound-pair interval for the fitted rule's true error."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    est, lam, draws, skipped = _bound_draws(
        data, lam, B, rng, partition_source, opt_mode, n_directions, min_B=100
    )
    mhat = empirical_misclass(data, est.beta)
    uppers = np.array([d.upper for d in draws])
    lowers = np.array([d.lower for d in draws])
    u_hi = empirical_quantile(uppers, 1.0 - alpha / 2.0)
    l_lo = empirical_quantile(lowers, alpha / 2.0)
    rootn = math.sqrt(data.n)
    interval = Interval(mhat - u_hi / rootn, mhat - l_lo / rootn)
    return BootstrapCI(interval, mhat, alpha, lam, tuple(draws), tuple(skipped))


def conditional_ci_M(
    data: ClassDataset,
    alpha: float,
    B: int = 1000,
    *,
    lam: float | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
    kernel: KernelConfig | None = None,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    n_directions: int = 2048,
) -> ConditionalCI:
    """Kernel-conditional bound-pair interval for the fitted rule's error.

    Draws are weighted by a product gaussian kernel in the resampled
    coefficient, centered at the original fit, so the quantiles reflect
    the bracket distribution conditional on landing where we landed.
    Infinite bandwidths recover the marginal interval exactly.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    kernel = kernel if kernel is not None else KernelConfig()
    est, lam, draws, skipped = _bound_draws(
        data, lam, B, rng, partition_source, opt_mode, n_directions, min_B=500
    )
    betas = np.array([d.beta_b for d in draws])
    diffs = betas - est.beta[None, :]
    if kernel.bandwidths is not None:
        bw = np.asarray(kernel.bandwidths, dtype=float).ravel()
        if bw.shape[0] != est.p:
            raise ValidationError("need one bandwidth per coefficient")
        if (bw <= 0).any() or np.isnan(bw).any():
            raise BandwidthError(f"bandwidths must be positive, got {kernel.bandwidths}")
    else:
        sd = betas.std(axis=0, ddof=1)
        bw = kernel.scale * sd * len(draws) ** (-0.2)
        if (bw <= 0).any() or not np.isfinite(bw).all():
            raise BandwidthError("degenerate coefficient spread; cannot pick a bandwidth")
    with np.errstate(invalid="ignore"):
        zstd = np.where(np.isinf(bw)[None, :], 0.0, diffs / bw[None, :])
    weights = np.exp(-0.5 * np.sum(zstd * zstd, axis=1))
    total = weights.sum()
    eff = float(total * total / np.sum(weights * weights)) if total > 0 else 0.0
    if eff < kernel.min_effective_mass:
        raise BandwidthError(
            f"effective kernel mass {eff:.2f} below {kernel.min_effective_mass}; widen the bandwidth"
        )
    mhat = empirical_misclass(data, est.beta)
    uppers = np.array([d.upper for d in draws])
    lowers = np.array([d.lower for d in draws])
    u_hi = weighted_quantile(uppers, weights, 1.0 - alpha / 2.0)
    l_lo = weighted_quantile(lowers, weights, alpha / 2.0)
    rootn = math.sqrt(data.n)
    interval = Interval(mhat - u_hi / rootn, mhat - l_lo / rootn)
    return ConditionalCI(
        interval, mhat, alpha, lam, tuple(draws), tuple(skipped), tuple(bw.tolist()), eff
    )


def mn_gamma_estimate(
    data: ClassDataset,
    B_inner: int = 200,
    *,
    rng: RngSeed | int | np.random.Generator = 0,
) -> float:
    """Resampling estimate of the procedure's expected error at this n.

    Refits on B_inner resamples and averages each refitted rule's error on
    the original sample.
    """
    if B_inner < 50:
        raise ValidationError(f"need at least 50 inner draws, got {B_inner}")
    gen = as_generator(rng)
    W = bootstrap_multiplicities(data.n, B_inner, gen)
    fits = batched_least_squares(data.X, data.y, W)
    if (~fits.ok).sum() > _MAX_SKIP_FRACTION * B_inner:
        raise EstimationError("too many singular resample fits")
    betas = fits.beta[fits.ok]
    scores = (data.X @ betas.T) * data.y[:, None]
    return float((scores < 0.0).mean(axis=0).mean())


def learning_curve_ci(
    data: ClassDataset,
    alpha: float,
    B_outer: int = 200,
    B_inner: int = 50,
    *,
    lam: float | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    n_directions: int = 256,
) -> LearningCurveCI:
    """Double-bootstrap bound-pair interval for the expected error at this n.

    The target averages the refitted rule's error over resamples, so each
    outer draw's centered statistic is itself an inner-resampling average.
    Far points enter exactly; near points are bracketed by a sign-pattern
    problem in one extra dimension, whose rows pair each near point with
    each inner fit's homogenized offset. Seeds are the lifted original
    coefficient and zero, giving lower <= statistic <= upper per draw.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if B_outer < 100:
        raise ValidationError(f"need at least 100 outer draws, got {B_outer}")
    if B_inner < 25:
        raise ValidationError(f"need at least 25 inner draws, got {B_inner}")
    if partition_source not in ("bootstrap", "original"):
        raise ValidationError(f"unknown partition_source {partition_source!r}")
    n, p = data.n, data.p
    est = fit_least_squares(data)
    lam = default_lambda(n) if lam is None else float(lam)
    gen = as_generator(rng)
    rootn = math.sqrt(n)

    # shared inner fits on the original sample; they define the center too
    V = bootstrap_multiplicities(n, B_inner, gen)
    inner = batched_least_squares(data.X, data.y, V)
    if not inner.ok.all():
        raise EstimationError("singular inner resample fit on the original sample")
    scores_orig = (data.X @ inner.beta.T) * data.y[:, None]
    ind_orig = scores_orig < 0.0
    center = float(ind_orig.mean(axis=0).mean())
    # homogenized offsets of the original inner fits, one column per fit
    off_orig = data.y[:, None] * (data.X @ (rootn * (inner.beta - est.beta[None, :])).T)

    W = bootstrap_multiplicities(n, B_outer, gen)
    outer = batched_least_squares(data.X, data.y, W)

    yx = data.y[:, None] * data.X
    beta_seed = np.append(rootn * est.beta, 1.0)
    draws = []
    skipped = []
    for b in range(B_outer):
        if not outer.ok[b]:
            skipped.append((b, "singular-refit"))
            continue
        try:
            est_b = CoefEstimate(outer.beta[b], outer.sigma[b], n)
            part_est = est_b if partition_source == "bootstrap" else est
            partition = boundary_test_statistics(data, part_est, lam)
        except (BoundaryDegeneracyError, ValidationError) as exc:
            skipped.append((b, type(exc).__name__))
            continue
        w_b = W[b].astype(float)
        # resample of the resample, via the expanded index representation
        rep_idx = np.repeat(np.arange(n), W[b])
        pos = rep_idx[gen.integers(0, n, size=(B_inner, n))]
        Vb = np.zeros((B_inner, n), dtype=np.int64)
        np.add.at(Vb, (np.arange(B_inner)[:, None], pos), 1)
        dbl = batched_least_squares(data.X, data.y, Vb)
        if not dbl.ok.all():
            skipped.append((b, "singular-inner-refit"))
            continue
        near = partition.near_mask
        far = ~near
        scores_dbl = (data.X @ dbl.beta.T) * data.y[:, None]
        far_term = float(
            (w_b[far] @ (scores_dbl[far] < 0.0)).sum() - (ind_orig[far]).sum()
        ) / (rootn * B_inner)

        off_dbl = data.y[:, None] * (data.X @ (rootn * (dbl.beta - est.beta[None, :])).T)
        n_near = int(near.sum())
        if n_near:
            # rows: (near i) x (inner fit nu), double-bootstrap then original
            Z_bb = np.concatenate(
                [np.repeat(yx[near], B_inner, axis=0), off_dbl[near].reshape(-1, 1)], axis=1
            )
            Z_or = np.concatenate(
                [np.repeat(yx[near], B_inner, axis=0), off_orig[near].reshape(-1, 1)], axis=1
            )
            c_bb = np.repeat(w_b[near], B_inner) / (rootn * B_inner)
            c_or = np.full(n_near * B_inner, -1.0 / (rootn * B_inner))
            Zrows = np.vstack([Z_bb, Z_or])
            crows = np.concatenate([c_bb, c_or])
            seeds = [beta_seed, np.zeros(p + 1)]
            sup = optimize_sign_pattern(
                Zrows, crows, sense="sup", mode=opt_mode, seeds=seeds, rng=gen,
                n_directions=n_directions,
            )
            inf = optimize_sign_pattern(
                Zrows, crows, sense="inf", mode=opt_mode, seeds=seeds, rng=gen,
                n_directions=n_directions,
            )
            stat_near, _ = evaluate_sign_objective(Zrows, crows, beta_seed)
            lo_b, hi_b = far_term + inf.value, far_term + sup.value
            stat_b = far_term + stat_near
        else:
            lo_b = hi_b = stat_b = far_term
        draws.append(BoundDraw(lo_b, hi_b, stat_b, n_near, outer.beta[b]))
    if len(skipped) > _MAX_SKIP_FRACTION * B_outer:
        raise EstimationError(
            f"{len(skipped)} of {B_outer} outer draws failed; refusing to report an interval"
        )
    uppers = np.array([d.upper for d in draws])
    lowers = np.array([d.lower for d in draws])
    u_hi = empirical_quantile(uppers, 1.0 - alpha / 2.0)
    l_lo = empirical_quantile(lowers, alpha / 2.0)
    interval = Interval(center - u_hi / rootn, center - l_lo / rootn)
    return LearningCurveCI(interval, center, alpha, lam, tuple(draws), tuple(skipped))
