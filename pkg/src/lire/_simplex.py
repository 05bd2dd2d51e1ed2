"""Dense two-phase simplex for small linear programs.

Solves min c.v subject to A v <= b, v >= 0 on a plain tableau. Bland's rule
keeps pivoting deterministic and cycle-free. The solver targets the small
systems produced by tree paths; it makes no attempt at sparse or large-scale
efficiency.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalDiagnosticError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_PIVOTS = 20000


def _pivot(tab: np.ndarray, r: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    coeff = tab[:, col].copy()
    coeff[row] = 0.0
    tab -= np.outer(coeff, tab[row])
    r -= r[col] * tab[row]
    basis[row] = col
    if not np.isfinite(tab).all() or not np.isfinite(r).all():
        raise NumericalDiagnosticError("simplex tableau became non-finite")


def _run(tab: np.ndarray, r: np.ndarray, basis: np.ndarray, n_cols: int) -> str:
    """Pivot until optimal or unbounded. Entering column: lowest index with a
    negative reduced cost. Leaving row: minimum ratio, ties broken by lowest
    basis index (Bland)."""
    for _ in range(MAX_PIVOTS):
        enter = -1
        for j in range(n_cols):
            if r[j] < -PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        col = tab[:, enter]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        leave = tied[np.argmin(basis[tied])]
        _pivot(tab, r, basis, int(leave), enter)
    raise NumericalDiagnosticError("simplex pivot limit exceeded")


def solve_lp(c, A, b) -> tuple[str, np.ndarray | None, float]:
    """Solve min c.v s.t. A v <= b, v >= 0.

    Returns (status, v, objective). v is None unless status is "optimal".
    """
    A = np.array(A, dtype=np.float64, ndmin=2)
    b = np.asarray(b, dtype=np.float64).ravel()
    c = np.asarray(c, dtype=np.float64).ravel()
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP shapes")
    if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
        raise ValueError("LP inputs must be finite")
    if m == 0:
        # only v >= 0 remains; optimum of a nonnegative-cost objective is 0
        if (c < 0).any():
            return UNBOUNDED, None, float("-inf")
        return OPTIMAL, np.zeros(n), 0.0

    # rows with negative rhs are negated, flipping their slack sign, and those
    # rows get an artificial variable so a basic feasible start always exists
    neg = b < 0
    A = np.where(neg[:, None], -A, A)
    b = np.abs(b)
    slack = np.diag(np.where(neg, -1.0, 1.0))
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    art = np.zeros((m, n_art))
    art[art_rows, np.arange(n_art)] = 1.0

    tab = np.hstack([A, slack, art, b[:, None]])
    basis = np.where(neg, 0, n + np.arange(m)).astype(np.int64)
    basis[art_rows] = n + m + np.arange(n_art)
    n_cols = n + m + n_art

    if n_art:
        # phase 1: minimize the sum of artificials
        c1 = np.zeros(n_cols + 1)
        c1[n + m : n + m + n_art] = 1.0
        r = c1 - tab[art_rows].sum(axis=0)
        status = _run(tab, r, basis, n_cols)
        if status != OPTIMAL:
            raise NumericalDiagnosticError("phase 1 cannot be unbounded")
        phase1_obj = float(tab[np.isin(basis, n + m + np.arange(n_art)), -1].sum())
        if phase1_obj > FEAS_TOL:
            return INFEASIBLE, None, 0.0
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] < n + m:
                continue
            row = tab[i, : n + m]
            cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if cand.size:
                _pivot(tab, np.zeros(n_cols + 1), basis, i, int(cand[0]))
            else:
                keep[i] = False
        tab = tab[keep]
        basis = basis[keep]

    # phase 2 on the original objective, artificial columns removed
    tab = np.hstack([tab[:, : n + m], tab[:, -1:]])
    n_cols = n + m
    c2 = np.concatenate([c, np.zeros(m), [0.0]])
    r = c2.copy()
    for i in range(len(basis)):
        if c2[basis[i]] != 0.0:
            r -= c2[basis[i]] * tab[i]
    status = _run(tab, r, basis, n_cols)
    if status != OPTIMAL:
        return status, None, float("-inf")

    v = np.zeros(n)
    for i, bi in enumerate(basis):
        if bi < n:
            v[bi] = tab[i, -1]
    return OPTIMAL, v, float(c @ v)
