"""Small dense linear programs.

A two-phase tableau simplex with Bland's rule, meant for the few dozen
variables that arise when enforcing a target sequence. Solves

    min c @ x   s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-11


@dataclass
class LPResult:
    x: np.ndarray | None
    fun: float
    status: str  # "optimal", "infeasible" or "unbounded"
    iterations: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    others = np.abs(T[:, col]) > 0
    others[row] = False
    T[others] -= np.outer(T[others, col], T[row])


def _run(T: np.ndarray, basis: list, ncols: int, max_iter: int) -> tuple:
    """Minimise the objective stored in the last row over columns ``< ncols``."""
    m = T.shape[0] - 1
    it = 0
    while it < max_iter:
        cost = T[-1, :ncols]
        enter = next((j for j in range(ncols) if cost[j] < -_EPS), None)
        if enter is None:
            return "optimal", it
        col = T[:m, enter]
        ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > _EPS]
        if not ratios:
            return "unbounded", it
        best = min(r for r, _, _ in ratios)
        # Bland: among tied rows leave with the smallest basic index
        _, _, leave = min(((r, b, i) for r, b, i in ratios if r <= best + _EPS), key=lambda t: t[1])
        _pivot(T, leave, enter)
        basis[leave] = enter
        it += 1
    raise RuntimeError(f"simplex did not finish within {max_iter} pivots")


def linprog_dense(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 10000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    rows, rhs, kinds = [], [], []
    if A_ub is not None:
        for a, b in zip(np.atleast_2d(np.asarray(A_ub, dtype=float)), np.asarray(b_ub, dtype=float)):
            rows.append(a)
            rhs.append(b)
            kinds.append("ub")
    if A_eq is not None:
        for a, b in zip(np.atleast_2d(np.asarray(A_eq, dtype=float)), np.asarray(b_eq, dtype=float)):
            rows.append(a)
            rhs.append(b)
            kinds.append("eq")
    m = len(rows)
    if m == 0:
        if np.any(c < 0):
            return LPResult(None, -np.inf, "unbounded")
        return LPResult(np.zeros(n), 0.0, "optimal")
    n_slack = kinds.count("ub")
    # columns: x | slacks | artificials | rhs
    width = n + n_slack + m + 1
    T = np.zeros((m + 1, width))
    basis = []
    s = 0
    for i, (a, b, kind) in enumerate(zip(rows, rhs, kinds)):
        T[i, :n] = a
        if kind == "ub":
            T[i, n + s] = 1.0
            s += 1
        T[i, -1] = b
        if b < 0:
            T[i] *= -1.0
        T[i, n + n_slack + i] = 1.0
        basis.append(n + n_slack + i)
    # phase one: minimise the sum of artificials
    T[-1, :] = -T[:m].sum(axis=0)
    T[-1, n + n_slack : n + n_slack + m] = 0.0
    _, it1 = _run(T, basis, n + n_slack, max_iter)
    if -T[-1, -1] > 1e-8 * max(1.0, np.abs(rhs).max()):
        return LPResult(None, np.inf, "infeasible", it1)
    # drive remaining artificials out of the basis
    for i, bvar in enumerate(basis):
        if bvar >= n + n_slack:
            col = next((j for j in range(n + n_slack) if abs(T[i, j]) > _EPS), None)
            if col is not None:
                _pivot(T, i, col)
                basis[i] = col
    T = np.delete(T, np.s_[n + n_slack : n + n_slack + m], axis=1)
    keep = [i for i, bvar in enumerate(basis) if bvar < n + n_slack]
    T = np.vstack([T[keep], np.zeros((1, T.shape[1]))])
    basis = [basis[i] for i in keep]
    # phase two
    T[-1, :n] = c
    for i, bvar in enumerate(basis):
        if T[-1, bvar] != 0:
            T[-1] -= T[-1, bvar] * T[i]
    status, it2 = _run(T, basis, n + n_slack, max_iter)
    if status != "optimal":
        return LPResult(None, -np.inf, status, it1 + it2)
    x = np.zeros(n + n_slack)
    for i, bvar in enumerate(basis):
        x[bvar] = T[i, -1]
    return LPResult(x[:n], float(c @ x[:n]), "optimal", it1 + it2)
