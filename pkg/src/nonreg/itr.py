"""Bootstrap bound pairs for the value of a fitted treatment rule.

The estimated rule treats when the interaction score x1.beta1 is
nonnegative, and the rule's value is estimated by inverse-propensity
weighting. Centered bootstrap draws of the value statistic are bracketed
the same way as error rates: samples whose interaction score is decisively
signed contribute exact weighted terms, samples near the score boundary
contribute a sign-pattern sup and inf over every candidate interaction
coefficient. Inside the brackets the rule-match indicator takes the strict
form 1{-a * x1.beta1 < 0}, which feeds the optimizer directly; the point
estimate keeps the conventional match form with sign(0) = +1. The two
agree unless a sample's score is exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import DecisionDataset, bootstrap_multiplicities
from .errors import BoundaryDegeneracyError, EstimationError, ValidationError
from .fit import (
    QCoefEstimate,
    batched_least_squares,
    evaluate_propensity,
    fit_propensity_logistic,
    fit_q_model,
    resolve_propensity,
    stacked_design,
)
from .intervals import Interval
from .metrics import NearBoundaryPartition, empirical_value
from .quantiles import empirical_quantile
from .rng import RngSeed, as_generator
from .signopt import evaluate_sign_objective, optimize_sign_pattern

__all__ = [
    "ValueBoundDraw",
    "ValueCI",
    "z_statistic",
    "default_rho",
    "value_boundary_partition",
    "empirical_value_strict",
    "value_bound_draw",
    "bootstrap_ci_V",
    "value_scale",
]

_MAX_SKIP_FRACTION = 0.05


def default_rho(n: int) -> float:
    """Default near-boundary threshold log(n) for the scaled score statistic."""
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    return math.log(n)


def z_statistic(x1, qest: QCoefEstimate):
    """Scaled interaction-score statistic n (x1.b1)^2 / (x1' R x1).

    Accepts one feature vector or a stack of rows. Large values mean the
    score's sign is settled at this sample size; values under log(n) mark
    the sample as near the treatment boundary.
    """
    x1 = np.asarray(x1, dtype=float)
    squeeze = x1.ndim == 1
    if squeeze:
        x1 = x1[None, :]
    if x1.shape[1] != qest.p1:
        raise ValidationError(f"x1 must have {qest.p1} columns, got {x1.shape[1]}")
    num = (x1 @ qest.beta1) ** 2
    denom = np.einsum("ij,jk,ik->i", x1, qest.r_hat, x1)
    if (denom <= 1e-12).any():
        raise BoundaryDegeneracyError(
            "interaction covariance puts no variance on some sample; statistic undefined"
        )
    z = qest.n * num / denom
    return float(z[0]) if squeeze else z


def value_boundary_partition(
    data: DecisionDataset, qest: QCoefEstimate, rho: float
) -> NearBoundaryPartition:
    """Split samples by whether the score statistic clears the threshold."""
    if math.isnan(rho) or rho < 0:
        raise ValidationError(f"rho must be nonnegative, got {rho}")
    z = z_statistic(data.X1, qest)
    near = z <= rho
    idx = np.arange(data.n)
    return NearBoundaryPartition(idx[near], idx[~near], float(rho), z)


def empirical_value_strict(data: DecisionDataset, beta1, *, prop=None) -> float:
    """Value estimate with the strict match form 1{-a * x1.beta1 < 0}."""
    beta1 = np.asarray(beta1, dtype=float).ravel()
    if beta1.size != data.p1:
        raise ValidationError(f"beta1 must have length {data.p1}, got {beta1.size}")
    _, res = resolve_propensity(data, prop)
    hit = ((-data.a)[:, None] * data.X1) @ beta1 < 0.0
    return float(np.mean(np.where(hit, data.y / res.pi, 0.0)))


@dataclass(frozen=True)
class ValueBoundDraw:
    """One draw's bracket [lower, upper] around its centered value statistic."""

    lower: float
    upper: float
    stat: float
    n_near: int
    beta1_b: np.ndarray

    def __post_init__(self) -> None:
        if not (self.lower <= self.stat <= self.upper):
            raise EstimationError(
                f"bracket violated: {self.lower} <= {self.stat} <= {self.upper} fails"
            )


@dataclass(frozen=True)
class ValueCI:
    interval: Interval
    center: float
    alpha: float
    rho: float
    draws: tuple
    skipped: tuple


def value_bound_draw(
    data: DecisionDataset,
    qest: QCoefEstimate,
    pi_b: np.ndarray,
    multiplicities,
    qest_b: QCoefEstimate,
    rho: float,
    *,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    rng: RngSeed | int | np.random.Generator = 0,
    n_directions: int = 2048,
) -> ValueBoundDraw:
    """Bracket sqrt(n)(P_b - P_n) of the resampled rule's value indicator.

    pi_b is this draw's propensity evaluation on the original samples; the
    resampled interaction coefficient seeds the sup and inf, so the bracket
    always contains the statistic it brackets.
    """
    w = np.asarray(multiplicities, dtype=float).ravel()
    if w.shape[0] != data.n:
        raise ValidationError("multiplicities must have one entry per sample")
    if partition_source not in ("bootstrap", "original"):
        raise ValidationError(f"unknown partition_source {partition_source!r}")
    part_est = qest_b if partition_source == "bootstrap" else qest
    partition = value_boundary_partition(data, part_est, rho)
    near = partition.near_mask
    c = (w - 1.0) * data.y / (np.asarray(pi_b, dtype=float) * math.sqrt(data.n))
    zrows = (-data.a)[:, None] * data.X1
    ind_b = (zrows @ qest_b.beta1) < 0.0
    far_term = float(c[~near & ind_b].sum())

    Zn = zrows[near]
    cn = c[near]
    sup = optimize_sign_pattern(
        Zn, cn, sense="sup", mode=opt_mode, seeds=[qest_b.beta1], rng=rng,
        n_directions=n_directions,
    )
    inf = optimize_sign_pattern(
        Zn, cn, sense="inf", mode=opt_mode, seeds=[qest_b.beta1], rng=rng,
        n_directions=n_directions,
    )
    stat_near, _ = evaluate_sign_objective(Zn, cn, qest_b.beta1)
    return ValueBoundDraw(
        lower=far_term + inf.value,
        upper=far_term + sup.value,
        stat=far_term + stat_near,
        n_near=int(near.sum()),
        beta1_b=qest_b.beta1,
    )


def bootstrap_ci_V(
    data: DecisionDataset,
    alpha: float,
    B: int = 1000,
    *,
    rho: float | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
    prop=None,
    partition_source: str = "bootstrap",
    opt_mode: str = "auto",
    n_directions: int = 2048,
) -> ValueCI:
    """Bootstrap bound-pair interval for the fitted rule's true value.

    Each draw refits the working model on the resample; a logistic
    propensity is refit on the resample too, while known propensities are
    reused as given.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if B < 100:
        raise ValidationError(f"need at least 100 bootstrap draws, got {B}")
    n = data.n
    qest = fit_q_model(data)
    rho = default_rho(n) if rho is None else float(rho)
    prop_model, prop_res = resolve_propensity(data, prop)

    gen = as_generator(rng)
    W = bootstrap_multiplicities(n, B, gen)
    design = stacked_design(data)
    fits = batched_least_squares(design, data.y, W)
    p0 = data.p0

    draws = []
    skipped = []
    for b in range(B):
        if not fits.ok[b]:
            skipped.append((b, "singular-refit"))
            continue
        try:
            beta = fits.beta[b]
            qest_b = QCoefEstimate(
                beta[:p0], beta[p0:], fits.sigma[b][p0:, p0:], n, sigma_full=fits.sigma[b]
            )
            if prop_model.kind == "logistic-fit":
                refit = fit_propensity_logistic(data.X0, data.a, sample_weight=W[b])
                pi_b = evaluate_propensity(refit, data.X0, data.a).pi
            else:
                pi_b = prop_res.pi
            draws.append(
                value_bound_draw(
                    data,
                    qest,
                    pi_b,
                    W[b],
                    qest_b,
                    rho,
                    partition_source=partition_source,
                    opt_mode=opt_mode,
                    rng=gen,
                    n_directions=n_directions,
                )
            )
        except (BoundaryDegeneracyError, EstimationError, ValidationError) as exc:
            if isinstance(exc, EstimationError) and "bracket violated" in str(exc):
                raise
            skipped.append((b, type(exc).__name__))
    if len(skipped) > _MAX_SKIP_FRACTION * B:
        raise EstimationError(
            f"{len(skipped)} of {B} bootstrap draws failed; refusing to report an interval"
        )
    center = empirical_value(data, qest.beta1, prop).value
    uppers = np.array([d.upper for d in draws])
    lowers = np.array([d.lower for d in draws])
    u_hi = empirical_quantile(uppers, 1.0 - alpha / 2.0)
    l_lo = empirical_quantile(lowers, alpha / 2.0)
    rootn = math.sqrt(n)
    interval = Interval(center - u_hi / rootn, center - l_lo / rootn)
    return ValueCI(interval, center, alpha, rho, tuple(draws), tuple(skipped))


def value_scale(data: DecisionDataset, prop=None) -> float:
    """Mean |y| / pi, the scale of the weighted value terms; a diagnostic."""
    _, res = resolve_propensity(data, prop)
    return float(np.mean(np.abs(data.y) / res.pi))
