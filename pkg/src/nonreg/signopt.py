"""Optimization of weighted sign patterns of linear scores.

The objective is sup (or inf) over beta of sum_i c_i * 1{z_i.beta < 0}.
Only the sign pattern of the scores matters, and the patterns are the cells
of the hyperplane arrangement {z_i.beta = 0}, so the problem is
combinatorial. Dimensions 1-3 are solved exactly by enumerating cells,
sphere edges, and vertices; higher dimensions use random directions with
LP-certified single-point polish and return an attainable value (a lower
bound on the sup, mirrored for the inf).

The indicator is strict. Candidates constructed to lie on data hyperplanes
force-exclude the defining rows instead of trusting their floating-point
dot products; everywhere else evaluation is plain strict comparison.
Collinear rows are grouped by the bits of their sign-canonical unit
direction, which is exact for duplicated or negated rows (the kinds of
collinearity resampled data produces). Mathematically collinear rows with
unequal bit patterns are treated as distinct hyperplanes; the attainability
guarantee is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import ValidationError
from .rng import RngSeed, as_generator

__all__ = [
    "SignPatternProblem",
    "OptResult",
    "optimize_sign_pattern",
    "evaluate_sign_objective",
]

_POLISH_MAX_POINTS = 256
_POLISH_STARTS = 8
_POLISH_MAX_FLIPS = 50
_LP_MARGIN = 1e-6
_CROSS_TOL = 1e-12


def evaluate_sign_objective(Z, c, beta, *, exclude_tol: float = 0.0):
    """Objective value and membership of the pattern {i: z_i.beta < 0}.

    With exclude_tol > 0, rows with |z_i.beta| <= exclude_tol * |z_i||beta|
    count as boundary rows and are excluded; use this to score a candidate
    that was constructed to lie on one or more data hyperplanes.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z.reshape(-1, 1)
    c = np.asarray(c, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    dots = Z @ beta
    neg = dots < 0.0
    if exclude_tol > 0.0:
        scale = np.linalg.norm(Z, axis=1) * float(np.linalg.norm(beta))
        neg &= np.abs(dots) > exclude_tol * scale
    return float(c[neg].sum()), neg


@dataclass(frozen=True)
class OptResult:
    """An attained objective value with the coefficient that attains it.

    ``selected`` marks the rows counted in ``value``; ``mode`` records
    whether the search was an exact cell enumeration or stochastic. The
    witness may lie exactly on data hyperplanes (some optimal patterns are
    realized only there), so score it with a positive ``exclude_tol``.
    """

    value: float
    beta: np.ndarray
    mode: str
    selected: np.ndarray


@dataclass(frozen=True)
class SignPatternProblem:
    """Points, weights, and labels of one sup/inf sign-pattern problem."""

    x: np.ndarray
    c: np.ndarray
    y: np.ndarray | None = None
    sense: str = "sup"

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        c = np.asarray(self.c, dtype=float).ravel()
        if x.shape[0] != c.shape[0]:
            raise ValidationError("points and weights must have the same length")
        if not (np.isfinite(x).all() and np.isfinite(c).all()):
            raise ValidationError("points and weights must be finite")
        if self.sense not in ("sup", "inf"):
            raise ValidationError(f"sense must be 'sup' or 'inf', got {self.sense!r}")
        y = np.ones(x.shape[0]) if self.y is None else np.asarray(self.y, dtype=float).ravel()
        if y.shape[0] != x.shape[0]:
            raise ValidationError("labels must match points")
        x.flags.writeable = False
        c.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "y", y)

    @property
    def z_rows(self) -> np.ndarray:
        return self.y[:, None] * self.x

    def solve(self, **kwargs) -> OptResult:
        return optimize_sign_pattern(self.z_rows, self.c, sense=self.sense, **kwargs)


def _canonical_lines(Z: np.ndarray, c: np.ndarray):
    """Group rows into oriented hyperplane bundles.

    Returns unit directions (one per distinct hyperplane), each row's group
    index, the row's orientation relative to the group direction, and the
    summed weights on each side. A row with orientation +1 scores negative
    exactly when its group direction does.
    """
    norms = np.linalg.norm(Z, axis=1)
    u = Z / norms[:, None]
    flip = np.zeros(len(u), dtype=bool)
    undecided = np.ones(len(u), dtype=bool)
    for j in range(u.shape[1]):
        col = u[:, j]
        flip |= undecided & (col < 0)
        undecided &= col == 0
    u = np.where(flip[:, None], -u, u) + 0.0
    lines, group = np.unique(u, axis=0, return_inverse=True)
    group = group.ravel()
    r_sign = np.where(flip, -1.0, 1.0)
    s_plus = np.zeros(len(lines))
    s_minus = np.zeros(len(lines))
    plus = r_sign > 0
    np.add.at(s_plus, group[plus], c[plus])
    np.add.at(s_minus, group[~plus], c[~plus])
    return lines, group, r_sign, s_plus, s_minus


def _side_values(lines: np.ndarray, s_plus: np.ndarray, s_minus: np.ndarray, dirs: np.ndarray):
    """Per-line contributions at each direction: (L, K) matrix.

    A line whose direction has positive dot with d puts its minus-oriented
    rows on the negative side, and vice versa; zero dots contribute nothing.
    """
    dots = lines @ dirs.T
    return np.where(dots > 0, s_minus[:, None], 0.0) + np.where(dots < 0, s_plus[:, None], 0.0)


def _selected_rows(lines, group, r_sign, d, excluded=()):
    ldots = lines @ d
    row_dots = r_sign * ldots[group]
    sel = row_dots < 0.0
    if len(excluded):
        sel &= ~np.isin(group, np.asarray(excluded))
    return sel


def _exact_1d(Z: np.ndarray, c: np.ndarray):
    z = Z[:, 0]
    cands = []
    for b in (1.0, -1.0):
        sel = (z * b) < 0.0
        cands.append((float(c[sel].sum()), np.array([b]), sel))
    cands.append((0.0, np.zeros(1), np.zeros(len(z), dtype=bool)))
    return max(cands, key=lambda t: t[0])


def _exact_2d(Z: np.ndarray, c: np.ndarray):
    lines, group, r_sign, s_plus, s_minus = _canonical_lines(Z, c)
    L = len(lines)
    rot = np.column_stack([-lines[:, 1], lines[:, 0]])
    ang = np.arctan2(rot[:, 1], rot[:, 0])
    events = np.concatenate([ang, ang + math.pi])
    events = np.unique(np.mod(events, 2.0 * math.pi))
    nxt = np.roll(events, -1)
    nxt[-1] += 2.0 * math.pi
    mids = (events + nxt) / 2.0
    d_mid = np.column_stack([np.cos(mids), np.sin(mids)])
    contrib_mid = _side_values(lines, s_plus, s_minus, d_mid)
    vals_mid = contrib_mid.sum(axis=0)

    d_ray = np.vstack([rot, -rot])
    ray_line = np.concatenate([np.arange(L), np.arange(L)])
    contrib_ray = _side_values(lines, s_plus, s_minus, d_ray)
    vals_ray = contrib_ray.sum(axis=0) - contrib_ray[ray_line, np.arange(2 * L)]

    best_val, best_d, best_excl = 0.0, None, ()
    k = int(np.argmax(vals_mid))
    if vals_mid[k] > best_val:
        best_val, best_d, best_excl = float(vals_mid[k]), d_mid[k], ()
    k = int(np.argmax(vals_ray))
    if vals_ray[k] > best_val:
        best_val, best_d, best_excl = float(vals_ray[k]), d_ray[k], (int(ray_line[k]),)
    if best_d is None:
        return 0.0, np.zeros(2), np.zeros(len(Z), dtype=bool)
    sel = _selected_rows(lines, group, r_sign, best_d, best_excl)
    return best_val, np.asarray(best_d, dtype=float), sel


def _orthobasis(u: np.ndarray):
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(u)))] = 1.0
    a = np.cross(u, axis)
    a /= np.linalg.norm(a)
    b = np.cross(u, a)
    b /= np.linalg.norm(b)
    return a, b


def _exact_3d(Z: np.ndarray, c: np.ndarray):
    lines, group, r_sign, s_plus, s_minus = _canonical_lines(Z, c)
    L = len(lines)
    candidates: list[tuple[np.ndarray, tuple[int, ...]]] = []

    for i in range(L):
        for j in range(i + 1, L):
            v = np.cross(lines[i], lines[j])
            nv = np.linalg.norm(v)
            if nv < _CROSS_TOL:
                continue
            v = v / nv
            candidates.append((v, (i, j)))
            candidates.append((-v, (i, j)))

    for l in range(L):
        a, b = _orthobasis(lines[l])
        angs = []
        for j in range(L):
            if j == l:
                continue
            v = np.cross(lines[l], lines[j])
            nv = np.linalg.norm(v)
            if nv < _CROSS_TOL:
                continue
            v = v / nv
            for w in (v, -v):
                angs.append(math.atan2(float(w @ b), float(w @ a)))
        if angs:
            events = np.unique(np.mod(np.asarray(angs), 2.0 * math.pi))
            nxt = np.roll(events, -1)
            nxt[-1] += 2.0 * math.pi
            mids = (events + nxt) / 2.0
        else:
            mids = np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])
        for phi in mids:
            m = math.cos(phi) * a + math.sin(phi) * b
            candidates.append((m, (l,)))
            # Push off the circle into the two adjacent open cells, staying
            # inside the corridor where no other hyperplane flips.
            margins = np.abs(lines @ m)
            margins[l] = np.inf
            step = 0.5 * float(margins.min())
            if step < 1e-14:
                continue
            step = min(step, 0.1)
            for sgn in (1.0, -1.0):
                d = m + sgn * step * lines[l]
                candidates.append((d / np.linalg.norm(d), ()))

    best_val, best_d, best_excl = 0.0, None, ()
    if candidates:
        dirs = np.array([d for d, _ in candidates])
        contrib = _side_values(lines, s_plus, s_minus, dirs)
        totals = contrib.sum(axis=0)
        for k, (_, excl) in enumerate(candidates):
            v = float(totals[k] - contrib[list(excl), k].sum()) if excl else float(totals[k])
            if v > best_val:
                best_val, best_d, best_excl = v, dirs[k], excl
    if best_d is None:
        return 0.0, np.zeros(3), np.zeros(len(Z), dtype=bool)
    sel = _selected_rows(lines, group, r_sign, best_d, best_excl)
    return best_val, np.asarray(best_d, dtype=float), sel


def _exact_dispatch(Z: np.ndarray, c: np.ndarray):
    m, p = Z.shape
    if p > 1:
        _, svals, basis = np.linalg.svd(Z, full_matrices=False)
        r = int((svals > svals[0] * 1e-12).sum())
        if r < p:
            value, beta_r, sel = _exact_dispatch(Z @ basis[:r].T, c)
            return value, basis[:r].T @ beta_r, sel
    if p == 1:
        return _exact_1d(Z, c)
    if p == 2:
        return _exact_2d(Z, c)
    if p == 3:
        return _exact_3d(Z, c)
    raise ValidationError(f"exact mode supports p <= 3, got p={p}")


def _pattern_feasible(Zhat: np.ndarray, S: np.ndarray):
    """LP realizability check of a sign pattern, with witness.

    Feasible means some beta puts every member strictly negative (margin
    above the solver tolerance) and no nonmember negative. beta = 0, t = 0
    is always feasible, so only the attained margin decides.
    """
    m, p = Zhat.shape
    A = np.zeros((m, p + 1))
    A[S, :p] = Zhat[S]
    A[S, p] = 1.0
    A[~S, :p] = -Zhat[~S]
    obj = np.zeros(p + 1)
    obj[p] = -1.0
    res = linprog(
        obj,
        A_ub=A,
        b_ub=np.zeros(m),
        bounds=[(-1.0, 1.0)] * p + [(0.0, 1.0)],
        method="highs",
    )
    if res.status == 0 and res.x is not None and res.x[p] > _LP_MARGIN:
        return True, res.x[:p].copy()
    return False, None


def _stochastic(Z: np.ndarray, c: np.ndarray, gen: np.random.Generator, n_directions: int, polish: bool):
    m, p = Z.shape
    half = max(1, n_directions // 2)
    G = gen.standard_normal((half, p))
    norms = np.linalg.norm(G, axis=1)
    D = G[norms > 0] / norms[norms > 0, None]
    D = np.vstack([D, -D])
    neg = (Z @ D.T) < 0.0
    vals = c @ neg
    order = np.argsort(vals)[::-1]
    k0 = int(order[0])
    best = (max(float(vals[k0]), 0.0), D[k0].copy(), neg[:, k0].copy())
    if float(vals[k0]) <= 0.0:
        best = (0.0, np.zeros(p), np.zeros(m, dtype=bool))

    if polish and m <= _POLISH_MAX_POINTS:
        Zhat = Z / np.linalg.norm(Z, axis=1)[:, None]
        flip_order = np.argsort(-np.abs(c))
        seen: set[bytes] = set()
        for k in order[:_POLISH_STARTS]:
            S = neg[:, int(k)].copy()
            key = S.tobytes()
            if key in seen:
                continue
            seen.add(key)
            val = float(c[S].sum())
            witness = D[int(k)].copy()
            for _ in range(_POLISH_MAX_FLIPS):
                accepted = False
                for i in flip_order:
                    i = int(i)
                    gain = -c[i] if S[i] else c[i]
                    if gain <= 0.0:
                        continue
                    S[i] = not S[i]
                    ok, w = _pattern_feasible(Zhat, S)
                    if ok:
                        val += float(gain)
                        witness = w
                        accepted = True
                        break
                    S[i] = not S[i]
                if not accepted:
                    break
            if val > best[0]:
                best = (val, witness, S.copy())
    return best


def optimize_sign_pattern(
    Z,
    c,
    *,
    sense: str = "sup",
    mode: str = "auto",
    seeds=None,
    rng: RngSeed | int | np.random.Generator = 0,
    n_directions: int = 2048,
    polish: bool = True,
    exact_limit: int = 18,
) -> OptResult:
    """Best attainable weighted sign-pattern objective, with witness.

    sense 'sup' maximizes, 'inf' minimizes (computed by weight negation).
    mode 'auto' picks exact enumeration for p <= 2, for p = 3 up to
    ``exact_limit`` nonzero rows, and stochastic search otherwise. Rows
    equal to zero never score and are ignored. Every coefficient in
    ``seeds`` is also scored (strict float comparison) and the result is
    never below the best seed, which is what makes sandwiched bound pairs
    safe: pass the resampled fit as a seed.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z.reshape(-1, 1)
    c = np.asarray(c, dtype=float).ravel()
    m, p = Z.shape
    if c.shape[0] != m:
        raise ValidationError("weights must match rows")
    if not (np.isfinite(Z).all() and np.isfinite(c).all()):
        raise ValidationError("rows and weights must be finite")
    if p < 1:
        raise ValidationError("dimension must be at least 1")
    if mode not in ("auto", "exact", "stochastic"):
        raise ValidationError(f"unknown mode {mode!r}")
    if sense == "inf":
        res = optimize_sign_pattern(
            Z,
            -c,
            sense="sup",
            mode=mode,
            seeds=seeds,
            rng=rng,
            n_directions=n_directions,
            polish=polish,
            exact_limit=exact_limit,
        )
        return OptResult(-res.value, res.beta, res.mode, res.selected)
    if sense != "sup":
        raise ValidationError(f"sense must be 'sup' or 'inf', got {sense!r}")

    nz = np.linalg.norm(Z, axis=1) > 0.0
    Zn = Z[nz]
    cn = c[nz]

    if mode == "exact" and p > 3:
        raise ValidationError(f"exact mode supports p <= 3, got p={p}")
    if mode == "auto":
        if p <= 2 or (p == 3 and len(Zn) <= exact_limit):
            mode = "exact"
        else:
            mode = "stochastic"

    value, beta, sel_n = 0.0, np.zeros(p), np.zeros(len(Zn), dtype=bool)
    used_mode = mode
    if len(Zn) > 0:
        if mode == "exact":
            value, beta, sel_n = _exact_dispatch(Zn, cn)
        else:
            value, beta, sel_n = _stochastic(Zn, cn, as_generator(rng), n_directions, polish)
    else:
        used_mode = "exact"
    if value < 0.0:
        value, beta, sel_n = 0.0, np.zeros(p), np.zeros(len(Zn), dtype=bool)

    selected = np.zeros(m, dtype=bool)
    selected[nz] = sel_n

    for s in seeds or ():
        s = np.asarray(s, dtype=float).ravel()
        if s.shape[0] != p:
            raise ValidationError("seed dimension mismatch")
        sval, smask = evaluate_sign_objective(Z, c, s)
        if sval > value:
            value, beta, selected = sval, s.copy(), smask

    return OptResult(float(value), np.asarray(beta, dtype=float), used_mode, selected)
