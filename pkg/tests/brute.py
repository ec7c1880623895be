"""Brute-force oracles for the weighted sign-pattern objective.

Independent of the package optimizer on purpose: feasibility of a
selection pattern is decided by plane geometry (p <= 2) or by a linear
program (p = 3), and the value comes from explicit enumeration.
"""

import itertools
import math

import numpy as np
from scipy.optimize import linprog

_TOL = 1e-9


def objective(Z, c, beta):
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    return float(c[Z @ beta < 0.0].sum())


def sup_1d(Z, c):
    z = np.asarray(Z, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    # beta > 0 selects rows with z < 0, beta < 0 the rows with z > 0,
    # beta = 0 selects nothing
    return max(0.0, float(c[z < 0].sum()), float(c[z > 0].sum()))


def _candidate_angles(Z):
    angles = set()
    for z in Z:
        base = math.atan2(z[1], z[0])
        angles.add((base + math.pi / 2.0) % (2.0 * math.pi))
        angles.add((base - math.pi / 2.0) % (2.0 * math.pi))
    ordered = sorted(angles)
    mids = []
    for i, a in enumerate(ordered):
        span = (ordered[(i + 1) % len(ordered)] - a) % (2.0 * math.pi)
        if span == 0.0:
            span = 2.0 * math.pi
        mids.append((a + span / 2.0) % (2.0 * math.pi))
    return ordered + mids


def patterns_2d(Z):
    """Every realizable strict-selection pattern for plane coefficients.

    The selection pattern is constant on each stratum of the central line
    arrangement with normals Z, so probing every boundary ray, every
    sector midpoint, and the origin enumerates all of them.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    pats = {(False,) * len(Z)}
    nz = np.linalg.norm(Z, axis=1) > 0.0
    for theta in _candidate_angles(Z[nz]) if nz.any() else []:
        beta = np.array([math.cos(theta), math.sin(theta)])
        pats.add(tuple((Z @ beta < 0.0).tolist()))
    return pats


def sup_2d(Z, c):
    c = np.asarray(c, dtype=float).ravel()
    best = 0.0
    for pat in patterns_2d(Z):
        best = max(best, float(c[np.array(pat, dtype=bool)].sum()))
    return best


def sup_subsets_2d(Z, c):
    """Max weight over all 2^m subsets that pass the feasibility test."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    feasible = patterns_2d(Z)
    best = 0.0
    for mask in itertools.product((False, True), repeat=len(Z)):
        if mask in feasible:
            best = max(best, float(c[np.array(mask, dtype=bool)].sum()))
    return best


def _lp_witness(sel_rows, exc_rows, p):
    """Coefficient strictly separating the selection, or None.

    Maximizes the selected margin t under z.beta <= -t (selected rows),
    z.beta >= 0 (excluded rows), |beta_j| <= 1. The constraints form a
    cone, so the box costs no generality.
    """
    n_sel, n_exc = len(sel_rows), len(exc_rows)
    A = np.zeros((n_sel + n_exc, p + 1))
    if n_sel:
        A[:n_sel, :p] = sel_rows
        A[:n_sel, p] = 1.0
    if n_exc:
        A[n_sel:, :p] = -np.asarray(exc_rows)
    cobj = np.zeros(p + 1)
    cobj[p] = -1.0
    res = linprog(
        cobj,
        A_ub=A,
        b_ub=np.zeros(n_sel + n_exc),
        bounds=[(-1.0, 1.0)] * p + [(0.0, 1.0)],
        method="highs",
    )
    if not res.success or res.x[p] <= _TOL:
        return None
    return res.x[:p]


def sup_dfs(Z, c):
    """Exact sup by depth-first search over selection patterns.

    A parent node's witness certifies any child it already satisfies
    strictly, so the linear program only runs at genuine branch points.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    c = np.asarray(c, dtype=float).ravel()
    nz = np.linalg.norm(Z, axis=1) > 0.0
    Zr, cr = Z[nz], c[nz]
    order = np.argsort(-np.abs(cr))
    Zr, cr = Zr[order], cr[order]
    m, p = Zr.shape
    pos_tail = np.concatenate([np.cumsum(np.maximum(cr, 0.0)[::-1])[::-1], [0.0]])
    best = 0.0

    def recurse(i, sel_rows, exc_rows, witness, value):
        nonlocal best
        if value + pos_tail[i] < best:
            return
        if i == m:
            best = max(best, value)
            return
        z = Zr[i]
        for take in (True, False):
            if take:
                held = witness is not None and z @ witness < -_TOL
                nxt = (sel_rows + [z], exc_rows)
            else:
                held = witness is not None and z @ witness >= 0.0
                nxt = (sel_rows, exc_rows + [z])
            w = witness if held else _lp_witness(nxt[0], nxt[1], p)
            if w is None:
                continue
            recurse(i + 1, nxt[0], nxt[1], w, value + (cr[i] if take else 0.0))

    recurse(0, [], [], np.zeros(p), 0.0)
    return best


def sup_value(Z, c):
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] == 1:
        return sup_1d(Z, c)
    if Z.shape[1] == 2:
        return sup_2d(Z, c)
    return sup_dfs(Z, c)


def inf_value(Z, c):
    return -sup_value(Z, np.negative(c))
