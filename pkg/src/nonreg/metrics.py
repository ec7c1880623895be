"""Empirical error and value functionals with variance estimates.

All misclassification indicators are strict (a point exactly on the rule's
boundary is never counted as an error), matching the population functional.
The near/far partition splits samples by how confidently the fitted score
separates them from zero, and drives the hybrid functional used by the
adaptive projection interval.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import ClassDataset, DecisionDataset
from .errors import BoundaryDegeneracyError, ValidationError
from .fit import CoefEstimate, PropensityModel, classify, resolve_propensity
from .models import AtomModel, MixtureModel, true_smooth_surrogate

__all__ = [
    "NearBoundaryPartition",
    "ValueEstimate",
    "empirical_misclass",
    "misclass_sd",
    "smooth_surrogate",
    "default_lambda",
    "boundary_test_statistics",
    "empirical_G",
    "rho_hat",
    "empirical_value",
]


def empirical_misclass(data: ClassDataset, beta) -> float:
    """Fraction of samples with y * x.beta strictly negative."""
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != data.p:
        raise ValidationError(f"beta must have length {data.p}, got {beta.size}")
    return float(np.mean(data.y * (data.X @ beta) < 0.0))


def misclass_sd(m):
    """Binomial standard deviation sqrt(m(1-m)), elementwise on arrays."""
    arr = np.asarray(m, dtype=float)
    if np.isnan(arr).any() or (arr < 0.0).any() or (arr > 1.0).any():
        raise ValidationError(f"rate must be in [0,1], got {m!r}")
    out = np.sqrt(arr * (1.0 - arr))
    return float(out) if np.isscalar(m) or arr.ndim == 0 else out


def smooth_surrogate(data_or_model, beta, tau: float = 3.0) -> float:
    """Smoothed error E expit(-tau * y * x.beta), empirical or exact.

    Given a dataset, averages over the sample; given a generative model,
    returns the exact population value.
    """
    if isinstance(data_or_model, ClassDataset):
        if tau <= 0:
            raise ValidationError(f"tau must be positive, got {tau!r}")
        data = data_or_model
        beta = np.asarray(beta, dtype=float).ravel()
        if beta.size != data.p:
            raise ValidationError(f"beta must have length {data.p}, got {beta.size}")
        return float(np.mean(expit(-tau * data.y * (data.X @ beta))))
    return true_smooth_surrogate(data_or_model, beta, tau)


def default_lambda(n: int) -> float:
    """Near-boundary threshold log(n)/n: shrinks, but slower than 1/n."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    return math.log(n) / n


@dataclass(frozen=True)
class NearBoundaryPartition:
    """Sample split by the boundary test statistic against a threshold.

    ``statistic[i]`` is (x_i.beta)^2 / (x_i' Sigma x_i), small when the
    score is within estimation noise of zero. ``near`` holds the indices
    with statistic <= lam, ``far`` the rest.
    """

    near: np.ndarray
    far: np.ndarray
    lam: float
    statistic: np.ndarray

    @property
    def near_mask(self) -> np.ndarray:
        mask = np.zeros(self.statistic.shape[0], dtype=bool)
        mask[self.near] = True
        return mask

    @property
    def n_near(self) -> int:
        return int(self.near.size)


def boundary_test_statistics(
    data: ClassDataset, est: CoefEstimate, lam: float
) -> NearBoundaryPartition:
    """Partition samples by closeness of their score to the boundary.

    lam = +inf marks every point near. Every quadratic form x' Sigma x must
    be positive; a zero denominator means the covariance estimate is
    degenerate along a data direction.
    """
    if est.beta.size != data.p:
        raise ValidationError("estimate dimension does not match data")
    lam = float(lam)
    if math.isnan(lam) or lam < 0:
        raise ValidationError(f"lambda must be nonnegative, got {lam!r}")
    scores = data.X @ est.beta
    denom = np.einsum("ij,jk,ik->i", data.X, est.sigma, data.X)
    if (denom <= 1e-12).any():
        raise BoundaryDegeneracyError(
            "x' Sigma x is not bounded away from zero on this sample"
        )
    stat = scores**2 / denom
    near_mask = stat <= lam
    idx = np.arange(data.n)
    return NearBoundaryPartition(idx[near_mask], idx[~near_mask], lam, stat)


def _hybrid_indicators(
    data: ClassDataset, beta_hat, beta, partition: NearBoundaryPartition
) -> np.ndarray:
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if beta_hat.size != data.p or beta.size != data.p:
        raise ValidationError(f"coefficients must have length {data.p}")
    if partition.statistic.shape[0] != data.n:
        raise ValidationError("partition does not match data")
    margin_hat = data.y * (data.X @ beta_hat)
    margin = data.y * (data.X @ beta)
    near = partition.near_mask
    return np.where(near, margin < 0.0, margin_hat < 0.0).astype(float)


def empirical_G(data: ClassDataset, beta_hat, beta, partition: NearBoundaryPartition) -> float:
    """Hybrid error rate: fitted rule on far points, candidate on near ones."""
    return float(_hybrid_indicators(data, beta_hat, beta, partition).mean())


def rho_hat(data: ClassDataset, beta_hat, beta, partition: NearBoundaryPartition) -> float:
    """Uncentered-n standard deviation of the hybrid error indicators."""
    return float(_hybrid_indicators(data, beta_hat, beta, partition).std(ddof=0))


@dataclass(frozen=True)
class ValueEstimate:
    """IPW mean outcome of a rule with its plug-in standard deviation.

    ``warning`` is set when more than 10% of the propensities had to be
    clipped, a sign the positivity assumption is strained.
    """

    value: float
    sd: float
    n: int
    n_clipped: int
    warning: bool


def empirical_value(
    data: DecisionDataset, beta1, prop: PropensityModel | None = None
) -> ValueEstimate:
    """Inverse-propensity-weighted mean outcome of a = sign(x1.beta1).

    Averages y * 1{rule matches the observed action} / P(A=a|x); the sd is
    the uncentered-n standard deviation of those per-sample terms.
    """
    beta1 = np.asarray(beta1, dtype=float).ravel()
    if beta1.size != data.p1:
        raise ValidationError(f"beta1 must have length {data.p1}, got {beta1.size}")
    _, pres = resolve_propensity(data, prop)
    matches = classify(beta1, data.X1) == data.a
    u = data.y * matches / pres.pi
    warn = pres.n_clipped > 0.1 * data.n
    if warn:
        warnings.warn(
            f"propensity clipped on {pres.n_clipped}/{data.n} samples; "
            "value estimate may be unstable",
            stacklevel=2,
        )
    return ValueEstimate(
        float(u.mean()), float(u.std(ddof=0)), data.n, pres.n_clipped, warn
    )
