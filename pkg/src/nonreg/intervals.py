"""Confidence sets for misclassification and decision-value targets.

Four families live here. Fixed-coefficient Wald intervals for the error of
a given rule; Wald ellipsoids for the fitted coefficient; projection
intervals that union the fixed-coefficient interval over an ellipsoid; and
the adaptive variant whose per-coefficient interval swaps indicators only
on points near the decision boundary. The value-targeted versions do the
same for treatment-rule value, without truncation to [0, 1].

Projections are computed by evaluating the per-coefficient interval on a
candidate set inside the ellipsoid: its center, the axis endpoints, and
uniform interior and boundary draws. Every candidate is a genuine member,
so the reported interval is always a subset of the exact projection. In
one or two dimensions the objective is piecewise constant on angular
sectors of the coefficient, and the envelope is completed exactly by
enumerating the sectors that intersect the ellipsoid's visibility cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ClassDataset, DecisionDataset
from .errors import EstimationError, ValidationError
from .fit import COND_LIMIT, CoefEstimate, QCoefEstimate, resolve_propensity
from .metrics import (
    NearBoundaryPartition,
    boundary_test_statistics,
    default_lambda,
    empirical_G,
    empirical_misclass,
    empirical_value,
    misclass_sd,
    rho_hat,
)
from .quantiles import chi2_quantile, normal_quantile
from .rng import RngSeed, as_generator
from .signopt import _canonical_lines, _side_values

__all__ = [
    "Interval",
    "EllipsoidSet",
    "SearchConfig",
    "wald_ellipsoid",
    "fixed_beta_interval",
    "w_interval",
    "projection_interval",
    "adaptive_projection_interval",
    "value_fixed_interval",
    "value_projection_interval",
]

_MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValidationError(f"interval is empty: lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, *, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


@dataclass(frozen=True)
class SearchConfig:
    """Candidate budget for projection searches.

    exact_low_dim additionally enumerates angular sectors when the
    coefficient has one or two components, making the envelope exact there.
    """

    n_interior: int = 4096
    n_boundary: int = 512
    exact_low_dim: bool = True

    def __post_init__(self) -> None:
        if self.n_interior < 0 or self.n_boundary < 0:
            raise ValidationError("candidate counts must be nonnegative")


@dataclass(frozen=True)
class EllipsoidSet:
    """The set {b: (b - center)' shape (b - center) <= radius2}."""

    center: np.ndarray
    shape: np.ndarray
    radius2: float
    eta: float

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=float).ravel()
        shape = np.asarray(self.shape, dtype=float)
        if shape.shape != (center.size, center.size):
            raise ValidationError("shape matrix must be p x p")
        if not (np.isfinite(center).all() and np.isfinite(shape).all()):
            raise ValidationError("ellipsoid parameters must be finite")
        sym_err = np.abs(shape - shape.T).max() if center.size else 0.0
        if sym_err > 1e-10 * max(1.0, np.abs(shape).max()):
            raise ValidationError("shape matrix must be symmetric")
        if np.linalg.eigvalsh(shape).min() <= 0:
            raise ValidationError("shape matrix must be positive definite")
        if not (self.radius2 > 0 and math.isfinite(self.radius2)):
            raise ValidationError("radius2 must be positive")
        center.flags.writeable = False
        shape.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)

    @property
    def p(self) -> int:
        return self.center.size

    def mahalanobis2(self, beta) -> float:
        d = np.asarray(beta, dtype=float).ravel() - self.center
        return float(d @ self.shape @ d)

    def contains(self, beta, *, tol: float = _MEMBERSHIP_TOL) -> bool:
        return self.mahalanobis2(beta) <= self.radius2 * (1.0 + tol)


def wald_ellipsoid(est: CoefEstimate, eta: float) -> EllipsoidSet:
    """Wald confidence ellipsoid for the fitted coefficient.

    Shape matrix is n times the inverse sandwich covariance; the radius is
    the chi-square quantile with one degree of freedom per coefficient.
    """
    if not 0.0 < eta < 1.0:
        raise ValidationError(f"eta must be in (0, 1), got {eta}")
    return _ellipsoid_from(est.beta, est.sigma, est.n, eta)


def _ellipsoid_from(center: np.ndarray, sigma: np.ndarray, n: int, eta: float) -> EllipsoidSet:
    p = center.size
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise EstimationError(
            f"covariance is numerically singular (cond={cond:.3e}); no ellipsoid", cond=float(cond)
        )
    Q = n * np.linalg.solve(sigma, np.eye(p))
    Q = (Q + Q.T) / 2.0
    return EllipsoidSet(center.copy(), Q, chi2_quantile(1.0 - eta, p), eta)


def _ellipsoid_points(ell: EllipsoidSet, config: SearchConfig, rng) -> np.ndarray:
    """Center, axis endpoints, and uniform interior/boundary candidates."""
    gen = as_generator(rng)
    p = ell.p
    w, V = np.linalg.eigh(ell.shape)
    half = np.sqrt(ell.radius2 / w)
    blocks = [ell.center[None, :]]
    axes = np.repeat(V.T, 2, axis=0) * np.repeat(half, 2)[:, None]
    axes[1::2] *= -1.0
    blocks.append(ell.center[None, :] + axes)
    # map of the unit ball onto the ellipsoid
    A = V * (math.sqrt(ell.radius2) / np.sqrt(w))[None, :]
    if config.n_interior > 0:
        g = gen.standard_normal((config.n_interior, p))
        nrm = np.linalg.norm(g, axis=1)
        nrm[nrm == 0] = 1.0
        u = g / nrm[:, None]
        s = gen.random(config.n_interior) ** (1.0 / p)
        blocks.append(ell.center[None, :] + (u * s[:, None]) @ A.T)
    if config.n_boundary > 0:
        g = gen.standard_normal((config.n_boundary, p))
        nrm = np.linalg.norm(g, axis=1)
        nrm[nrm == 0] = 1.0
        blocks.append(ell.center[None, :] + (g / nrm[:, None]) @ A.T)
    return np.vstack(blocks)


def _split_level(omega, alpha, eta):
    if omega is None:
        if alpha is None or eta is None:
            raise ValidationError("need omega, or both alpha and eta")
        omega = alpha + eta
    if alpha is None and eta is None:
        alpha = omega / 2.0
        eta = omega - alpha
    elif alpha is None:
        alpha = omega - eta
    elif eta is None:
        eta = omega - alpha
    for name, v in (("omega", omega), ("alpha", alpha), ("eta", eta)):
        if not 0.0 < v < 1.0:
            raise ValidationError(f"{name} must be in (0, 1), got {v}")
    if abs((alpha + eta) - omega) > 1e-12:
        raise ValidationError("alpha + eta must equal omega")
    return alpha, eta


def _misclass_envelope(mhat: np.ndarray, n: int, alpha: float) -> tuple[float, float]:
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * misclass_sd(mhat) / math.sqrt(n)
    los = np.maximum(0.0, mhat - half)
    his = np.minimum(1.0, mhat + half)
    return float(los.min()), float(his.max())


def fixed_beta_interval(data: ClassDataset, beta, alpha: float) -> Interval:
    """Wald interval for the error of the fixed rule given by beta."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    mhat = empirical_misclass(data, beta)
    lo, hi = _misclass_envelope(np.array([mhat]), data.n, alpha)
    return Interval(lo, hi)


def w_interval(
    data: ClassDataset,
    est: CoefEstimate,
    beta,
    alpha: float,
    *,
    partition: NearBoundaryPartition | None = None,
    lam: float | None = None,
) -> Interval:
    """Hybrid interval: candidate indicators near the boundary, fitted ones far.

    The center is the hybrid error estimate and the standard deviation is
    the empirical sd of the per-sample hybrid indicators.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if partition is None:
        partition = boundary_test_statistics(data, est, default_lambda(data.n) if lam is None else lam)
    g = empirical_G(data, est.beta, beta, partition)
    rho = rho_hat(data, est.beta, beta, partition)
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * rho / math.sqrt(data.n)
    return Interval(max(0.0, g - half), min(1.0, g + half))


def projection_interval(
    data: ClassDataset,
    est: CoefEstimate,
    *,
    omega: float | None = None,
    alpha: float | None = None,
    eta: float | None = None,
    search: SearchConfig | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
) -> Interval:
    """Union of fixed-coefficient intervals over the Wald ellipsoid.

    The overall level omega is split as alpha (interval) plus eta
    (ellipsoid), both omega/2 unless given explicitly.
    """
    alpha, eta = _split_level(omega, alpha, eta)
    search = search if search is not None else SearchConfig()
    if est.p != data.p:
        raise ValidationError("estimate and data dimension mismatch")
    ell = wald_ellipsoid(est, eta)
    B = _ellipsoid_points(ell, search, rng)
    mhat = _misclass_profile(data, B)
    lo, hi = _misclass_envelope(mhat, data.n, alpha)
    if search.exact_low_dim and data.p == 1:
        for rep in _signed_reps_1d(ell):
            iv = fixed_beta_interval(data, rep, alpha)
            lo, hi = min(lo, iv.lo), max(hi, iv.hi)
    elif search.exact_low_dim and data.p == 2:
        mh_extra = _exact_misclass_values(data, ell)
        if mh_extra.size:
            lo2, hi2 = _misclass_envelope(mh_extra, data.n, alpha)
            lo, hi = min(lo, lo2), max(hi, hi2)
    return Interval(lo, hi)


def adaptive_projection_interval(
    data: ClassDataset,
    est: CoefEstimate,
    *,
    omega: float | None = None,
    alpha: float | None = None,
    eta: float | None = None,
    lam: float | None = None,
    search: SearchConfig | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
) -> Interval:
    """Union of hybrid intervals over the Wald ellipsoid.

    Far from the boundary the indicator is pinned at the fitted rule, so
    only near points vary across the ellipsoid; with few near points this
    is much tighter than the plain projection.
    """
    alpha, eta = _split_level(omega, alpha, eta)
    search = search if search is not None else SearchConfig()
    if est.p != data.p:
        raise ValidationError("estimate and data dimension mismatch")
    partition = boundary_test_statistics(data, est, default_lambda(data.n) if lam is None else lam)
    ell = wald_ellipsoid(est, eta)
    B = _ellipsoid_points(ell, search, rng)
    g, rho = _w_profile(data, est.beta, partition, B)
    lo, hi = _mean_sd_envelope(g, rho, data.n, alpha, truncate=True)
    if search.exact_low_dim and data.p == 1:
        for rep in _signed_reps_1d(ell):
            iv = w_interval(data, est, rep, alpha, partition=partition)
            lo, hi = min(lo, iv.lo), max(hi, iv.hi)
    elif search.exact_low_dim and data.p == 2:
        g2, rho2 = _exact_w_values(data, est.beta, partition, ell)
        if g2.size:
            lo2, hi2 = _mean_sd_envelope(g2, rho2, data.n, alpha, truncate=True)
            lo, hi = min(lo, lo2), max(hi, hi2)
    return Interval(lo, hi)


def value_fixed_interval(
    data: DecisionDataset, beta1, alpha: float, *, prop=None
) -> Interval:
    """Wald interval for the value of the fixed treatment rule sign(x1.beta1)."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    est = empirical_value(data, beta1, prop)
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * est.sd / math.sqrt(data.n)
    return Interval(est.value - half, est.value + half)


def value_projection_interval(
    data: DecisionDataset,
    qest: QCoefEstimate,
    *,
    omega: float | None = None,
    alpha: float | None = None,
    eta: float | None = None,
    search: SearchConfig | None = None,
    rng: RngSeed | int | np.random.Generator = 0,
    prop=None,
) -> Interval:
    """Union of fixed-rule value intervals over the interaction ellipsoid."""
    alpha, eta = _split_level(omega, alpha, eta)
    search = search if search is not None else SearchConfig()
    if qest.p1 != data.p1:
        raise ValidationError("estimate and data dimension mismatch")
    pi = resolve_propensity(data, prop)[1].pi
    ell = _ellipsoid_from(qest.beta1, qest.r_hat, qest.n, eta)
    B1 = _ellipsoid_points(ell, search, rng)
    v, sd = _value_profile(data, pi, B1)
    lo, hi = _mean_sd_envelope(v, sd, data.n, alpha, truncate=False)
    if search.exact_low_dim and data.p1 == 1:
        for rep in _signed_reps_1d(ell):
            iv = value_fixed_interval(data, rep, alpha, prop=prop)
            lo, hi = min(lo, iv.lo), max(hi, iv.hi)
    elif search.exact_low_dim and data.p1 == 2:
        v2, sd2 = _exact_value_values(data, pi, ell)
        if v2.size:
            lo2, hi2 = _mean_sd_envelope(v2, sd2, data.n, alpha, truncate=False)
            lo, hi = min(lo, lo2), max(hi, hi2)
    return Interval(lo, hi)


def _mean_sd_envelope(center: np.ndarray, sd: np.ndarray, n: int, alpha: float, *, truncate: bool):
    z = normal_quantile(1.0 - alpha / 2.0)
    half = z * sd / math.sqrt(n)
    los = center - half
    his = center + half
    if truncate:
        los = np.maximum(0.0, los)
        his = np.minimum(1.0, his)
    return float(los.min()), float(his.max())


def _misclass_profile(data: ClassDataset, B: np.ndarray) -> np.ndarray:
    scores = (data.X @ B.T) * data.y[:, None]
    return np.mean(scores < 0.0, axis=0)


def _w_profile(data: ClassDataset, beta_hat: np.ndarray, partition, B: np.ndarray):
    far_neg = (data.y * (data.X @ beta_hat)) < 0.0
    scores = (data.X @ B.T) * data.y[:, None]
    hybrid = np.where(partition.near_mask[:, None], scores < 0.0, far_neg[:, None])
    return hybrid.mean(axis=0), hybrid.std(axis=0)


def _value_profile(data: DecisionDataset, pi: np.ndarray, B1: np.ndarray):
    scores = data.X1 @ B1.T
    pred = np.where(scores >= 0.0, 1.0, -1.0)
    matched = pred == data.a[:, None]
    u = np.where(matched, (data.y / pi)[:, None], 0.0)
    return u.mean(axis=0), u.std(axis=0)


def _signed_reps_1d(ell: EllipsoidSet):
    """One representative per sign of a scalar coefficient in the ellipsoid.

    The objective depends on a scalar coefficient only through its sign, so
    a positive, a negative, and (when the ellipsoid covers it) the zero
    coefficient exhaust the projection.
    """
    c = float(ell.center[0])
    halfw = math.sqrt(ell.radius2 / float(ell.shape[0, 0]))
    lo, hi = c - halfw, c + halfw
    reps = []
    if hi > 0:
        reps.append(np.array([(max(lo, 0.0) + hi) / 2.0]))
    if lo < 0:
        reps.append(np.array([(lo + min(hi, 0.0)) / 2.0]))
    if lo <= 0.0 <= hi:
        reps.append(np.array([0.0]))
    return reps


def _cone_directions(ell: EllipsoidSet, event_angles: np.ndarray):
    """Sector and boundary directions of the visibility cone of an ellipse.

    A direction d is visible when the ray {t d, t > 0} meets the ellipsoid.
    Returns sector-midpoint directions (visible), a visibility test for
    further candidates, and whether the origin itself is a member.
    """
    Q, c, r2 = ell.shape, ell.center, ell.radius2
    Qc = Q @ c
    K = float(c @ Qc) - r2

    def vis(D: np.ndarray) -> np.ndarray:
        if K <= 0:
            return np.ones(len(D), dtype=bool)
        b = D @ Qc
        q = np.einsum("ki,ij,kj->k", D, Q, D)
        return (b > 0) & (b * b >= K * q * (1.0 - 1e-12))

    extra = []
    if np.linalg.norm(c) > 0:
        extra.append(math.atan2(c[1], c[0]))
    if K > 0:
        extra.extend(_tangent_angles(Qc, Q, K))
    angles = np.concatenate([event_angles, np.asarray(extra)]) if extra else event_angles
    angles = np.unique(np.mod(angles, 2.0 * math.pi))
    if angles.size == 0:
        angles = np.array([0.0])
    nxt = np.roll(angles, -1)
    nxt[-1] += 2.0 * math.pi
    mids = (angles + nxt) / 2.0
    d_mid = np.column_stack([np.cos(mids), np.sin(mids)])
    d_mid = d_mid[vis(d_mid)]
    d_extra = None
    if extra:
        ea = np.asarray(extra)
        d_extra = np.column_stack([np.cos(ea), np.sin(ea)])
        d_extra = d_extra[vis(d_extra)]
    origin_member = K <= r2 * _MEMBERSHIP_TOL
    return d_mid, d_extra, vis, origin_member


def _tangent_angles(Qc: np.ndarray, Q: np.ndarray, K: float) -> list[float]:
    # dB'd = 0 with B = Qc Qc' - K Q marks the visibility-cone boundary
    Bm = np.outer(Qc, Qc) - K * Q
    b11, b12, b22 = float(Bm[0, 0]), float(Bm[0, 1]), float(Bm[1, 1])
    out: list[float] = []
    scale = max(abs(b11), abs(b12), abs(b22), 1e-300)
    if abs(b22) > 1e-14 * scale:
        disc = b12 * b12 - b11 * b22
        if disc >= 0:
            rt = math.sqrt(disc)
            for t in ((-b12 + rt) / b22, (-b12 - rt) / b22):
                a = math.atan2(t, 1.0)
                out.extend([a, a + math.pi])
    else:
        out.extend([0.5 * math.pi, 1.5 * math.pi])
        if abs(b12) > 1e-14 * scale:
            a = math.atan2(-b11 / (2.0 * b12), 1.0)
            out.extend([a, a + math.pi])
    return out


def _line_geometry(rows: np.ndarray, weights: np.ndarray):
    lines, group, r_sign, s_plus, s_minus = _canonical_lines(rows, weights)
    rot = np.column_stack([-lines[:, 1], lines[:, 0]])
    ang = np.arctan2(rot[:, 1], rot[:, 0])
    events = np.concatenate([ang, ang + math.pi])
    return lines, group, r_sign, s_plus, s_minus, rot, events


def _exact_misclass_values(data: ClassDataset, ell: EllipsoidSet) -> np.ndarray:
    """Error rates attained on the visibility cone, sector by sector."""
    rows = data.y[:, None] * data.X
    keep = np.linalg.norm(rows, axis=1) > 0
    if not keep.any():
        return np.array([0.0])
    w = np.full(int(keep.sum()), 1.0 / data.n)
    lines, group, r_sign, s_plus, s_minus, rot, events = _line_geometry(rows[keep], w)
    d_mid, d_extra, vis, origin = _cone_directions(ell, events)
    vals = []
    if len(d_mid):
        vals.append(_side_values(lines, s_plus, s_minus, d_mid).sum(axis=0))
    if d_extra is not None and len(d_extra):
        vals.append(_side_values(lines, s_plus, s_minus, d_extra).sum(axis=0))
    rays = np.vstack([rot, -rot])
    ray_line = np.concatenate([np.arange(len(lines))] * 2)
    rv = vis(rays)
    if rv.any():
        contrib = _side_values(lines, s_plus, s_minus, rays[rv])
        vals.append(contrib.sum(axis=0) - contrib[ray_line[rv], np.arange(int(rv.sum()))])
    if origin:
        vals.append(np.array([0.0]))
    return np.concatenate(vals) if vals else np.array([])


def _exact_w_values(data: ClassDataset, beta_hat: np.ndarray, partition, ell: EllipsoidSet):
    """Hybrid mean and sd attained on the visibility cone.

    Only near points react to the coefficient, so the sector lines come
    from near rows alone; far rows keep the fitted-rule indicator.
    """
    far_neg = (data.y * (data.X @ beta_hat)) < 0.0
    near = partition.near_mask
    rows = (data.y[:, None] * data.X)[near]
    keep = np.linalg.norm(rows, axis=1) > 0
    empty = np.array([])
    if near.sum() == 0 or not keep.any():
        return empty, empty
    rows = rows[keep]
    lines, group, r_sign, s_plus, s_minus, rot, events = _line_geometry(rows, np.ones(len(rows)))
    d_mid, d_extra, vis, origin = _cone_directions(ell, events)

    near_idx = np.where(near)[0][keep]

    def hybrid_stats(D: np.ndarray, excl_line: np.ndarray | None = None):
        ldots = lines @ D.T
        row_sign = r_sign[:, None] * ldots[group]
        if excl_line is not None:
            row_sign[group[:, None] == excl_line[None, :]] = 0.0
        hyb = np.repeat(far_neg[:, None], D.shape[0], axis=1).astype(float)
        hyb[near_idx] = row_sign < 0.0
        return hyb.mean(axis=0), hyb.std(axis=0)

    gs, rhos = [], []
    for D in (d_mid, d_extra):
        if D is not None and len(D):
            g, r = hybrid_stats(D)
            gs.append(g)
            rhos.append(r)
    rays = np.vstack([rot, -rot])
    ray_line = np.concatenate([np.arange(len(lines))] * 2)
    rv = vis(rays)
    if rv.any():
        g, r = hybrid_stats(rays[rv], ray_line[rv])
        gs.append(g)
        rhos.append(r)
    if origin:
        hyb = far_neg.astype(float).copy()
        hyb[near_idx] = 0.0
        gs.append(np.array([hyb.mean()]))
        rhos.append(np.array([hyb.std()]))
    if not gs:
        return empty, empty
    return np.concatenate(gs), np.concatenate(rhos)


def _exact_value_values(data: DecisionDataset, pi: np.ndarray, ell: EllipsoidSet):
    """Value mean and sd attained on the visibility cone.

    Rule matching uses sign with sign(0) = +1, so rows exactly on a
    boundary line count as recommending +1; ray candidates therefore pin
    their own rows' score to zero rather than trusting float dust.
    """
    rows = data.X1
    keep = np.linalg.norm(rows, axis=1) > 0
    yopi = data.y / pi
    base = np.where(data.a == 1.0, yopi, 0.0)  # contribution of sign-zero rows
    empty = np.array([])
    if not keep.any():
        u = base
        return np.array([u.mean()]), np.array([u.std()])
    lines, group, r_sign, s_plus, s_minus, rot, events = _line_geometry(rows[keep], np.ones(int(keep.sum())))
    d_mid, d_extra, vis, origin = _cone_directions(ell, events)
    keep_idx = np.where(keep)[0]

    def value_stats(D: np.ndarray, excl_line: np.ndarray | None = None):
        ldots = lines @ D.T
        row_sign = r_sign[:, None] * ldots[group]
        if excl_line is not None:
            row_sign[group[:, None] == excl_line[None, :]] = 0.0
        pred = np.where(row_sign < 0.0, -1.0, 1.0)
        u = np.repeat(base[:, None], D.shape[0], axis=1)
        u[keep_idx] = np.where(pred == data.a[keep_idx, None], yopi[keep_idx, None], 0.0)
        return u.mean(axis=0), u.std(axis=0)

    vs, sds = [], []
    for D in (d_mid, d_extra):
        if D is not None and len(D):
            v, s = value_stats(D)
            vs.append(v)
            sds.append(s)
    rays = np.vstack([rot, -rot])
    ray_line = np.concatenate([np.arange(len(lines))] * 2)
    rv = vis(rays)
    if rv.any():
        v, s = value_stats(rays[rv], ray_line[rv])
        vs.append(v)
        sds.append(s)
    if origin:
        u = np.where(data.a == 1.0, yopi, 0.0)
        vs.append(np.array([u.mean()]))
        sds.append(np.array([u.std()]))
    if not vs:
        return empty, empty
    return np.concatenate(vs), np.concatenate(sds)
