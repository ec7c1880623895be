"""Least-squares fitting with sandwich covariances, and propensity models.

The sandwich matrices are scaled as covariance estimates of
sqrt(n) * (estimate - target): bread and meat are both per-sample averages,
so no extra n factor appears downstream. Boundary test statistics and
confidence ellipsoids all build on that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import ClassDataset, DecisionDataset
from .errors import EstimationError, ValidationError

__all__ = [
    "CoefEstimate",
    "QCoefEstimate",
    "PropensityModel",
    "PropensityResult",
    "BatchedFit",
    "COND_LIMIT",
    "PROPENSITY_EPS",
    "fit_least_squares",
    "fit_q_model",
    "classify",
    "batched_least_squares",
    "fit_propensity_logistic",
    "evaluate_propensity",
    "resolve_propensity",
]

COND_LIMIT = 1e12
PROPENSITY_EPS = 1e-3


def _validated_sigma(sigma: np.ndarray, what: str) -> np.ndarray:
    sym = 0.5 * (sigma + sigma.T)
    if np.abs(sigma - sigma.T).max() > 1e-10 * max(1.0, np.abs(sigma).max()):
        raise EstimationError(f"{what} is not symmetric")
    eigmin = float(np.linalg.eigvalsh(sym).min())
    if eigmin < -1e-10 * max(1.0, np.abs(sym).max()):
        raise EstimationError(f"{what} has negative eigenvalue {eigmin:.3e}")
    sym.flags.writeable = False
    return sym


@dataclass(frozen=True)
class CoefEstimate:
    """Fitted coefficient with sandwich covariance of sqrt(n)(b - b*)."""

    beta: np.ndarray
    sigma: np.ndarray
    n: int

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float).ravel()
        sigma = np.asarray(self.sigma, dtype=float)
        p = beta.size
        if sigma.shape != (p, p):
            raise ValidationError(f"sigma must be {p}x{p}, got {sigma.shape}")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", _validated_sigma(sigma, "sigma"))
        object.__setattr__(self, "n", int(self.n))

    @property
    def p(self) -> int:
        return self.beta.size


@dataclass(frozen=True)
class QCoefEstimate:
    """Joint working-model fit split into main and interaction blocks.

    ``r_hat`` is the interaction sub-block of the joint sandwich covariance;
    ``sigma_full`` keeps the whole matrix for callers that partition samples
    with the full statistic.
    """

    beta0: np.ndarray
    beta1: np.ndarray
    r_hat: np.ndarray
    n: int
    sigma_full: np.ndarray | None = None

    def __post_init__(self) -> None:
        beta0 = np.asarray(self.beta0, dtype=float).ravel()
        beta1 = np.asarray(self.beta1, dtype=float).ravel()
        beta0.flags.writeable = False
        beta1.flags.writeable = False
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "beta1", beta1)
        object.__setattr__(self, "r_hat", _validated_sigma(np.asarray(self.r_hat, dtype=float), "r_hat"))
        object.__setattr__(self, "n", int(self.n))
        if self.sigma_full is not None:
            full = np.array(self.sigma_full, dtype=float)
            full.flags.writeable = False
            object.__setattr__(self, "sigma_full", full)

    @property
    def p0(self) -> int:
        return self.beta0.size

    @property
    def p1(self) -> int:
        return self.beta1.size


def _sandwich_core(X: np.ndarray, y: np.ndarray, *, ridge: bool, what: str):
    n, p = X.shape
    gram = (X.T @ X) / n
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        if not ridge:
            raise EstimationError(
                f"{what}: Gram matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}",
                cond=cond,
            )
        gram = gram + (1e-8 * np.trace(gram) / p) * np.eye(p)
    beta = np.linalg.solve(gram, (X.T @ y) / n)
    resid = y - X @ beta
    meat = (X * (resid**2)[:, None]).T @ X / n
    half = np.linalg.solve(gram, meat)
    sigma = np.linalg.solve(gram, half.T).T
    return beta, 0.5 * (sigma + sigma.T), cond


def fit_least_squares(data: ClassDataset, *, ridge: bool = False) -> CoefEstimate:
    """Least-squares linear fit of labels on features with sandwich sigma.

    Requires n > p and a Gram matrix with condition number below 1e12;
    ``ridge=True`` substitutes a small ridge (1e-8 * trace/p) instead of
    failing on an ill-conditioned Gram.
    """
    if data.n <= data.p:
        raise ValidationError(f"need n > p to fit, got n={data.n}, p={data.p}")
    beta, sigma, _ = _sandwich_core(data.X, data.y, ridge=ridge, what="fit_least_squares")
    return CoefEstimate(beta, sigma, data.n)


def stacked_design(data: DecisionDataset) -> np.ndarray:
    """Joint regressors (x0, a*x1) of the action-interaction working model."""
    return np.hstack([data.X0, data.a[:, None] * data.X1])


def fit_q_model(data: DecisionDataset, *, ridge: bool = False) -> QCoefEstimate:
    """Joint least squares for outcome on (x0, a*x1); splits the blocks."""
    p = data.p0 + data.p1
    if data.n <= p:
        raise ValidationError(f"need n > p0+p1 to fit, got n={data.n}, p0+p1={p}")
    Z = stacked_design(data)
    beta, sigma, _ = _sandwich_core(Z, data.y, ridge=ridge, what="fit_q_model")
    k = data.p0
    return QCoefEstimate(
        beta[:k], beta[k:], sigma[k:, k:], data.n, sigma_full=sigma
    )


def classify(beta, x):
    """Rule label sign(x.beta) with sign(0) = +1; vectorized over rows."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    score = x @ beta
    if np.ndim(score) == 0:
        return 1.0 if float(score) >= 0.0 else -1.0
    return np.where(score >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class BatchedFit:
    """Vectorized least-squares fits over bootstrap multiplicity rows.

    ``ok[b]`` is False when draw b had an ill-conditioned Gram matrix; its
    beta/sigma rows are filled with NaN and must be skipped by the caller.
    """

    beta: np.ndarray  # (B, p)
    sigma: np.ndarray  # (B, p, p)
    ok: np.ndarray  # (B,) bool


def batched_least_squares(X: np.ndarray, y: np.ndarray, W: np.ndarray) -> BatchedFit:
    """Fit every multiplicity-weighted resample in one vectorized pass.

    W has shape (B, n) with rows summing to n. Each row's fit matches
    fit_least_squares on the corresponding expanded resample.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    W = np.asarray(W, dtype=float)
    n, p = X.shape
    if W.ndim != 2 or W.shape[1] != n or y.shape != (n,):
        raise ValidationError("shape mismatch between design, labels, and multiplicities")
    outer = (X[:, :, None] * X[:, None, :]).reshape(n, p * p)
    gram = (W @ outer).reshape(-1, p, p) / n
    rhs = (W @ (X * y[:, None])) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(gram)
    ok = np.isfinite(cond) & (cond < COND_LIMIT)
    safe = np.where(ok[:, None, None], gram, np.eye(p)[None])
    beta = np.linalg.solve(safe, rhs[:, :, None])[:, :, 0]
    resid = y[None, :] - beta @ X.T
    meat = ((W * resid**2) @ outer).reshape(-1, p, p) / n
    half = np.linalg.solve(safe, meat)
    sigma = np.linalg.solve(safe, half.transpose(0, 2, 1)).transpose(0, 2, 1)
    sigma = 0.5 * (sigma + sigma.transpose(0, 2, 1))
    beta[~ok] = np.nan
    sigma[~ok] = np.nan
    return BatchedFit(beta, sigma, ok)


@dataclass(frozen=True)
class PropensityModel:
    """How P(A = a | X = x) is obtained: known or logistically fitted.

    kind 'known-constant' uses ``value`` as P(A=+1); 'known-column' reads the
    dataset's stored per-sample propensities; 'logistic-fit' scores the main
    features with ``coef``.
    """

    kind: str
    value: float | None = None
    coef: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("known-constant", "known-column", "logistic-fit"):
            raise ValidationError(f"unknown propensity kind {self.kind!r}")
        if self.kind == "known-constant":
            if self.value is None or not 0.0 < self.value < 1.0:
                raise ValidationError("known-constant propensity needs value in (0,1)")
        if self.kind == "logistic-fit" and self.coef is None:
            raise ValidationError("logistic-fit propensity needs fitted coefficients")


@dataclass(frozen=True)
class PropensityResult:
    """Per-sample P(A=a_i|x_i), clipped into (eps, 1-eps), with clip count."""

    pi: np.ndarray
    n_clipped: int


def fit_propensity_logistic(
    X0: np.ndarray, a: np.ndarray, max_iter: int = 100, sample_weight=None
) -> PropensityModel:
    """Maximum-likelihood logistic regression of the action on main features.

    Plain Newton iteration; raises after ``max_iter`` steps without meeting
    the gradient tolerance. Perfectly separated actions converge to a
    saturated fit whose evaluated propensities all clip downstream.
    sample_weight supports refits on resampled data via multiplicities.
    """
    X0 = np.asarray(X0, dtype=float)
    t = (np.asarray(a, dtype=float).ravel() + 1.0) / 2.0
    n, p = X0.shape
    if sample_weight is None:
        sw = np.ones(n)
    else:
        sw = np.asarray(sample_weight, dtype=float).ravel()
        if sw.shape[0] != n or (sw < 0).any():
            raise ValidationError("sample_weight must be nonnegative, one per row")
    norm = sw.sum()
    if norm <= 0:
        raise ValidationError("sample_weight must have positive total")
    gamma = np.zeros(p)
    for _ in range(max_iter):
        prob = expit(X0 @ gamma)
        grad = X0.T @ (sw * (t - prob)) / norm
        if np.abs(grad).max() < 1e-10:
            return PropensityModel("logistic-fit", coef=tuple(map(float, gamma)))
        w = sw * np.clip(prob * (1.0 - prob), 1e-12, None)
        hess = (X0 * w[:, None]).T @ X0 / norm
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise EstimationError("propensity fit failed: singular Hessian") from None
        gamma = gamma + step
    raise EstimationError(f"propensity fit did not converge in {max_iter} iterations")


def evaluate_propensity(
    model: PropensityModel,
    x0: np.ndarray,
    a: np.ndarray,
    known_pi: np.ndarray | None = None,
) -> PropensityResult:
    """P(A = a_i | x_i) for each row, clipped into (eps, 1-eps)."""
    a = np.asarray(a, dtype=float).ravel()
    if model.kind == "known-constant":
        p_plus = np.full(a.shape, float(model.value))
    elif model.kind == "known-column":
        if known_pi is None:
            raise ValidationError("known-column propensity needs the dataset's pi column")
        pi = np.asarray(known_pi, dtype=float).ravel()
        clipped = np.clip(pi, PROPENSITY_EPS, 1.0 - PROPENSITY_EPS)
        return PropensityResult(clipped, int((clipped != pi).sum()))
    else:
        p_plus = expit(np.asarray(x0, dtype=float) @ np.asarray(model.coef, dtype=float))
    pi = np.where(a > 0, p_plus, 1.0 - p_plus)
    clipped = np.clip(pi, PROPENSITY_EPS, 1.0 - PROPENSITY_EPS)
    return PropensityResult(clipped, int((clipped != pi).sum()))


def resolve_propensity(
    data: DecisionDataset, prop: PropensityModel | None = None
) -> tuple[PropensityModel, PropensityResult]:
    """Pick and evaluate a propensity source for the dataset.

    Priority when ``prop`` is not given: the dataset's known column, then a
    logistic fit on the main features. An explicit model is used as-is.
    """
    if prop is None:
        prop = (
            PropensityModel("known-column")
            if data.pi is not None
            else fit_propensity_logistic(data.X0, data.a)
        )
    result = evaluate_propensity(prop, data.X0, data.a, known_pi=data.pi)
    return prop, result
