"""Leader-follower enforcement of a target sequence.

The follower sequences the jobs either with the fair greedy or with
Smith's rule. The leader changes intercepts or slopes, at minimum total
cost, so that the follower ends up with the leader's target order.
Positions are counted from the front: ``P_j`` is the completion time of the
``j``-th job of the target order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adjust import Adjustment, adjusted_instance
from .core import TOL, Infeasible, Instance, Schedule, UnsupportedVariant, evaluate_schedule
from .lp import linprog_dense
from .maxmin import greedy_order

FOLLOWERS = ("fair_greedy", "wspt")


@dataclass(frozen=True)
class TargetSpec:
    target_order: tuple
    follower: str = "fair_greedy"
    mode: str = "intercept"
    signed: bool = False
    tie_margin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "target_order", tuple(str(i) for i in self.target_order))
        if self.follower not in FOLLOWERS:
            raise ValueError(f"unknown follower {self.follower!r}")
        if self.mode not in ("intercept", "slope"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.follower == "wspt" and self.mode == "intercept":
            raise UnsupportedVariant("intercepts do not influence Smith's rule")
        if len(set(self.target_order)) != len(self.target_order):
            raise ValueError("target order repeats a job")


def _setup(inst: Instance, spec: TargetSpec):
    if not inst.all_linear or inst.has_release:
        raise UnsupportedVariant("enforcement needs linear utilities without release dates")
    if sorted(spec.target_order) != sorted(inst.ids):
        raise ValueError("target order must list every job exactly once")
    idx = [inst.index(i) for i in spec.target_order]
    a = np.array([inst.jobs[k].utility.a for k in idx], dtype=float)
    b = np.array([inst.jobs[k].utility.b for k in idx], dtype=float)
    p = np.array([inst.jobs[k].p for k in idx], dtype=float)
    return idx, a, b, p, np.cumsum(p)


def _result(inst: Instance, spec: TargetSpec, delta, extra=None) -> Adjustment:
    ids = spec.target_order
    adj = Adjustment(
        {i: float(d) for i, d in zip(ids, delta)},
        math.fsum(abs(float(d)) for d in delta),
        math.nan,
        spec.mode,
        diagnostics=dict(extra or {}),
    )
    mod = adjusted_instance(inst, adj)
    adj.achieved_u_min = evaluate_schedule(mod, Schedule.earliest(mod, ids)).u_min
    return adj


def _margin(idx, j, l, spec):
    # the greedy breaks exact ties towards the smaller position in the instance
    return spec.tie_margin if idx[l] < idx[j] else 0.0


def enforce_nonneg(inst: Instance, spec: TargetSpec) -> Adjustment:
    """Cheapest nonnegative intercept raise or slope cut, by a forward pass.

    Each position only has to beat the jobs before it at its own target
    completion time, so the deltas are fixed one position at a time.
    """
    if spec.signed:
        raise ValueError("use enforce_signed for signed modifications")
    idx, a, b, p, P = _setup(inst, spec)
    n = len(idx)
    delta = np.zeros(n)
    if spec.follower == "wspt":
        ratio = a[0] / p[0]
        for j in range(1, n):
            lim = ratio * p[j]
            delta[j] = max(0.0, a[j] - lim)
            ratio = min(ratio, (a[j] - delta[j]) / p[j])
        return _result(inst, spec, delta)
    if spec.mode == "intercept":
        bt = b.copy()
        for j in range(1, n):
            need = max(bt[l] - a[l] * P[j] + _margin(idx, j, l, spec) for l in range(j))
            delta[j] = max(0.0, need - (b[j] - a[j] * P[j]))
            bt[j] = b[j] + delta[j]
        return _result(inst, spec, delta)
    at = a.copy()
    for j in range(1, n):
        need = max(a[j] - at[l] + (b[l] - b[j] + _margin(idx, j, l, spec)) / P[j] for l in range(j))
        delta[j] = max(0.0, need)
        if delta[j] > a[j] + TOL:
            raise Infeasible(
                f"position {j + 1} (job {spec.target_order[j]!r}) needs a slope cut of {delta[j]:.6g} > a={a[j]:.6g}"
            )
        delta[j] = min(delta[j], a[j])
        at[j] = a[j] - delta[j]
    return _result(inst, spec, delta)


# ---------------------------------------------------------------------------
# Signed modifications
# ---------------------------------------------------------------------------


def _constraints(a, b, p, P, spec: TargetSpec):
    """Rows ``G @ delta >= h`` encoding the follower's choice at every position."""
    n = len(a)
    G, h = [], []
    for j in range(1, n):
        for i in range(j):
            row = np.zeros(n)
            if spec.follower == "wspt":
                # (a_j - d_j)/p_j <= (a_i - d_i)/p_i
                row[j], row[i] = 1.0, -p[j] / p[i]
                rhs = a[j] - p[j] / p[i] * a[i]
            elif spec.mode == "intercept":
                row[j], row[i] = 1.0, -1.0
                rhs = b[i] - b[j] - (a[i] - a[j]) * P[j]
            else:
                row[j], row[i] = P[j], -P[j]
                rhs = b[i] - b[j] - (a[i] - a[j]) * P[j]
            G.append(row)
            h.append(rhs)
    return np.array(G).reshape(-1, n), np.array(h)


def _signed_lp(a, b, p, P, spec: TargetSpec):
    n = len(a)
    G, h = _constraints(a, b, p, P, spec)
    # delta = plus - minus; minimise sum(plus + minus)
    A_ub = np.hstack([-G, G])
    b_ub = -h
    if spec.mode == "slope":
        A_ub = np.vstack([A_ub, np.hstack([np.eye(n), -np.eye(n)])])
        b_ub = np.concatenate([b_ub, a])
    res = linprog_dense(np.ones(2 * n), A_ub, b_ub)
    if res.status != "optimal":
        raise Infeasible(f"enforcement LP is {res.status}")
    return res.x[:n] - res.x[n:], res.fun, res.iterations


def ratio_dp(a, p):
    """Signed slope changes that make ``a/p`` non-increasing along the given order.

    ``c[j][r]`` is the cost of giving position ``j`` ratio ``R[r]`` plus the
    cheapest sorted completion of the positions after it; only original
    ratios ``R = {a_i/p_i}`` need to be considered.

    Returns
    -------
    (delta, cost, table, ratios)
    """
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    n = a.size
    R = np.unique(a / p)
    m = R.size
    c = np.zeros((n, m))
    for j in range(n - 1, -1, -1):
        own = np.abs(a[j] - p[j] * R)
        if j == n - 1:
            c[j] = own
        else:
            c[j] = own + np.minimum.accumulate(c[j + 1])
    r = int(np.argmin(c[0]))
    choice = [r]
    for j in range(1, n):
        r = int(np.argmin(c[j][: r + 1]))
        choice.append(r)
    delta = a - p * R[choice]
    return delta, float(c[0].min()), c, R


def enforce_signed(inst: Instance, spec: TargetSpec, method: str = "lp") -> Adjustment:
    """Minimum ``sum |delta_j|`` enforcement when changes of either sign are allowed.

    ``lp`` works for every follower/mode pair. ``dp`` is the ratio-grid
    recursion for Smith's rule with slope changes.
    """
    if not spec.signed:
        raise ValueError("use enforce_nonneg for nonnegative modifications")
    idx, a, b, p, P = _setup(inst, spec)
    if method == "dp":
        if spec.follower != "wspt" or spec.mode != "slope":
            raise UnsupportedVariant("the ratio DP applies to Smith's rule with slope changes only")
        delta, cost, _, _ = ratio_dp(a, p)
        return _result(inst, spec, delta, {"method": "dp", "objective": cost})
    if method != "lp":
        raise ValueError(f"unknown method {method!r}")
    delta, cost, iters = _signed_lp(a, b, p, P, spec)
    return _result(inst, spec, delta, {"method": "lp", "objective": cost, "iterations": iters})


def verify_target(inst_modified: Instance, spec: TargetSpec, rtol: float = 1e-9) -> bool:
    """Does the follower produce the target order on the modified instance?

    Exact ties count as satisfied when the target is one of the orders the
    follower could produce under some tie-breaking rule.
    """
    ids = list(spec.target_order)
    if sorted(ids) != sorted(inst_modified.ids):
        return False
    if spec.follower == "wspt":
        jobs = [inst_modified.job(i) for i in ids]
        ratios = [j.utility.a / j.p for j in jobs]
        return all(ratios[k + 1] <= ratios[k] + rtol * max(1.0, abs(ratios[k])) for k in range(len(ratios) - 1))
    order = [inst_modified.jobs[k].id for k in greedy_order(inst_modified)]
    if order == ids:
        return True
    P = 0.0
    prefix = []
    for i in ids:
        P += inst_modified.job(i).p
        prefix.append(P)
    for j in range(1, len(ids)):
        T = prefix[j]
        uj = float(inst_modified.job(ids[j]).utility(T))
        for l in range(j):
            ul = float(inst_modified.job(ids[l]).utility(T))
            if uj < ul - rtol * max(1.0, abs(ul), abs(uj)):
                return False
    return True
