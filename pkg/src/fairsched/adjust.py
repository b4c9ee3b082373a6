"""Budgeted utility modification on top of the fair greedy schedule.

The fair schedule is computed once; the modes below raise the lowest
utilities to a common level without changing the job sequence.

========================  ====================================================
``intercept_up``          raise ``b_j``: ``sum Δb_j <= B`` and ``Δb_j >= 0``
``slope_down``            lower ``a_j``: ``sum Δa_j <= B`` and ``0 <= Δa_j <= a_j``
``intercept_signed``      ``Δb_j`` of either sign, net sum at most ``B``
``slope_signed``          ``Δa_j`` of either sign, net sum at most ``B``
========================  ====================================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    INF,
    TOL,
    AreaParam,
    Instance,
    Linear,
    Schedule,
    SolveReport,
    UnsupportedVariant,
    evaluate_schedule,
)
from .maxmin import greedy_order, max_min_greedy

MODES = ("intercept_up", "slope_down", "intercept_signed", "slope_signed")


@dataclass
class Adjustment:
    """Per-job parameter change (``Δb_j`` or ``Δa_j``) and what it bought."""

    per_job_delta: dict
    budget_used: float
    achieved_u_min: float
    mode: str = ""
    level: float = math.nan
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Water level and break job
# ---------------------------------------------------------------------------


def _need(values, weights, v: float) -> float:
    """Budget needed to lift every value ``<= v`` up to ``v``."""
    return math.fsum(w * (v - x) for x, w in zip(values, weights) if x <= v)


def _finish(values, weights, budget: float, v: float) -> tuple:
    """Canonical ``(break value, level)`` for a proposed break value ``v``.

    Both break searches end here, so they return bit-identical results
    even if their partial sums were rounded differently.
    """
    distinct = sorted(set(values))
    k = distinct.index(v)
    while k > 0 and _need(values, weights, distinct[k]) > budget:
        k -= 1
    while k + 1 < len(distinct) and _need(values, weights, distinct[k + 1]) <= budget:
        k += 1
    v = distinct[k]
    low = [(x, w) for x, w in zip(values, weights) if x <= v]
    level = (budget + math.fsum(w * x for x, w in low)) / math.fsum(w for _, w in low)
    return v, max(level, v)


def break_value_iterative(values, budget: float, weights=None) -> float:
    """Largest value ``v`` such that lifting everything below it to ``v`` fits the budget.

    Scans the distinct values upwards and recomputes the need each time.
    """
    weights = [1.0] * len(values) if weights is None else weights
    distinct = sorted(set(values))
    v = distinct[0]
    for cand in distinct[1:]:
        if _need(values, weights, cand) > budget:
            break
        v = cand
    return v


def break_value_select(values, budget: float, weights=None) -> float:
    """Same answer as :func:`break_value_iterative` in expected linear time.

    Median splits in the style of the knapsack split item: the values at or
    below an affordable pivot are folded into running totals and dropped;
    otherwise the upper part is dropped.
    """
    x = np.asarray(values, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    base_w = 0.0
    base_wx = 0.0
    best = float(x.min())
    while x.size:
        mid = x.size // 2
        pivot = np.partition(x, mid)[mid]
        le = x <= pivot
        sw = base_w + w[le].sum()
        swx = base_wx + (w[le] * x[le]).sum()
        if pivot * sw - swx <= budget:
            best = float(pivot)
            base_w, base_wx = sw, swx
            x, w = x[~le], w[~le]
        else:
            keep = x < pivot
            x, w = x[keep], w[keep]
    return best


def water_level(values: Sequence[float], budget: float, weights=None, method: str = "select") -> float:
    """Level ``L`` with ``sum_j w_j * max(0, L - values_j) = budget``."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    values = [float(v) for v in values]
    weights = [1.0] * len(values) if weights is None else [float(w) for w in weights]
    if method == "select":
        v = break_value_select(values, budget, weights)
    elif method == "iterative":
        v = break_value_iterative(values, budget, weights)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(values, weights, budget, v)[1]


# ---------------------------------------------------------------------------
# Budgeted adjustment
# ---------------------------------------------------------------------------


def _require_linear(inst: Instance, what: str):
    if not inst.all_linear:
        raise UnsupportedVariant(f"{what} needs linear utilities")
    if inst.has_release:
        raise UnsupportedVariant(f"{what} does not handle release dates")
    if any(j.utility.a <= 0 for j in inst.jobs):
        raise UnsupportedVariant(f"{what} needs a_j > 0 for every job")


def adjusted_instance(inst: Instance, adj: Adjustment) -> Instance:
    """Instance with the adjustment applied to every job's parameters."""
    slope = adj.mode.startswith("slope")
    jobs = []
    for j in inst.jobs:
        d = adj.per_job_delta.get(j.id, 0.0)
        u = j.utility
        jobs.append(j.with_utility(Linear(max(0.0, u.a - d), u.b) if slope else Linear(u.a, u.b + d)))
    return inst.replace(jobs)


def budget_adjust(inst: Instance, mode: str, budget: float, method: str = "select"):
    """Spend ``budget`` on parameter changes to maximise the minimum utility.

    The greedy fair schedule is kept fixed; the returned report scores the
    modified instance on it.

    Parameters
    ----------
    mode : str
        One of ``intercept_up``, ``slope_down``, ``intercept_signed``,
        ``slope_signed``.
    method : {"select", "iterative"}
        Break-job search for the nonnegative modes.

    Returns
    -------
    (Adjustment, SolveReport)
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not budget >= 0:
        raise ValueError("budget must be nonnegative")
    _require_linear(inst, "budget_adjust")
    base = max_min_greedy(inst)
    C = base.schedule.completions(inst)
    ids = inst.ids
    u = [base.per_job_utility[i] for i in ids]
    c = [C[i] for i in ids]
    b = [j.utility.b for j in inst.jobs]
    a = [j.utility.a for j in inst.jobs]
    n = inst.n

    if mode == "intercept_up":
        w = [1.0] * n
        v = break_value_select(u, budget, w) if method == "select" else break_value_iterative(u, budget, w)
        v, L = _finish(u, w, budget, v)
        delta = [L - u[k] if u[k] <= v else 0.0 for k in range(n)]
    elif mode == "slope_down":
        w = [1.0 / ck for ck in c]
        v = break_value_select(u, budget, w) if method == "select" else break_value_iterative(u, budget, w)
        v, L = _finish(u, w, budget, v)
        # a job whose slope reaches zero cannot rise further, so the level stops there
        cap = min(b[k] for k in range(n) if u[k] <= v)
        L = min(L, cap)
        delta = [min(a[k], (L - u[k]) / c[k]) if u[k] < L else 0.0 for k in range(n)]
    elif mode == "intercept_signed":
        L = (budget + math.fsum(u)) / n
        delta = [L - uk for uk in u]
    else:
        L = (budget + math.fsum(uk / ck for uk, ck in zip(u, c))) / math.fsum(1.0 / ck for ck in c)
        L = min(L, min(b))
        delta = [(L - u[k]) / c[k] for k in range(n)]

    adj = Adjustment(dict(zip(ids, delta)), math.fsum(delta), math.nan, mode, L, {"method": method})
    report = evaluate_schedule(adjusted_instance(inst, adj), base.schedule, diagnostics={"iterations": n, "tolerance": TOL})
    adj.achieved_u_min = report.u_min
    return adj, report


# ---------------------------------------------------------------------------
# Fixed area
# ---------------------------------------------------------------------------


def area_schedule(inst: Instance) -> SolveReport:
    """Fair schedule for fixed-area utilities: non-decreasing ``A_j``, ties by position."""
    if not all(isinstance(j.utility, AreaParam) for j in inst.jobs):
        raise UnsupportedVariant("area_schedule needs area-parameterised utilities on every job")
    horizons = {j.utility.P for j in inst.jobs}
    if len(horizons) != 1 or abs(horizons.pop() - inst.P) > TOL:
        raise UnsupportedVariant("every area utility must use the instance's total duration as horizon")
    if inst.has_release:
        raise UnsupportedVariant("area_schedule does not handle release dates")
    order = sorted(range(inst.n), key=lambda k: (inst.jobs[k].utility.A, k))
    sched = Schedule.earliest(inst, [inst.jobs[k].id for k in order])
    return evaluate_schedule(inst, sched, diagnostics={"iterations": 1, "tolerance": 0.0})


# ---------------------------------------------------------------------------
# Single-agent curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SawtoothCurve:
    """Utility of one agent as a function of its own parameter change.

    ``pieces`` holds ``(lo, hi, slope, intercept)``: on ``[lo, hi)`` the
    utility is ``intercept + slope * delta``. ``local_maxima`` are the left
    limits at each drop.
    """

    pieces: tuple
    local_maxima: tuple
    job: str = ""
    mode: str = ""

    def value(self, delta: float) -> float:
        for lo, hi, slope, icpt in self.pieces:
            if lo - TOL <= delta < hi or (delta == hi and hi == self.pieces[-1][1]):
                return icpt + slope * delta
        raise ValueError(f"delta={delta} outside [0, {self.pieces[-1][1]}]")

    def best(self, budget: float) -> tuple:
        """Best ``(delta, utility)`` with ``delta <= budget``."""
        budget = min(budget, self.pieces[-1][1])
        best = (budget, self.value(budget))
        for d, v in self.local_maxima:
            if d <= budget and v > best[1]:
                best = (d, v)
        return best


def _curve_terms(inst: Instance, k: int, mode: str):
    """``(base(C), gain(C), make(delta))`` for the agent at dense index ``k``."""
    u = inst.jobs[k].utility
    if mode == "area":
        if not isinstance(u, AreaParam):
            raise UnsupportedVariant("area mode needs area-parameterised utilities")
        return (lambda C: u.A * u.slope_in_area(C) + u.offset), u.slope_in_area, (lambda d: AreaParam(u.A + d, u.P, u.offset))
    if not isinstance(u, Linear):
        raise UnsupportedVariant(f"{mode} mode needs linear utilities")
    if mode == "intercept":
        return u, (lambda C: 1.0), (lambda d: Linear(u.a, u.b + d))
    if mode == "slope":
        return u, (lambda C: C), (lambda d: Linear(max(0.0, u.a - d), u.b))
    raise UnsupportedVariant(f"unknown curve mode {mode!r}")


def single_agent_curve(inst: Instance, i, mode: str, delta_max: float) -> SawtoothCurve:
    """Sawtooth curve of agent ``i`` when only its own utility is modified.

    The fair greedy is re-solved at each structural breakpoint; at a
    breakpoint the modified agent wins the tie and moves behind the job it
    has just caught up with.
    """
    if mode in ("intercept", "slope") and (not inst.all_linear or inst.has_release):
        raise UnsupportedVariant(f"{mode} mode needs linear utilities without release dates")
    if mode == "area" and not all(isinstance(j.utility, AreaParam) for j in inst.jobs):
        raise UnsupportedVariant("area mode needs area-parameterised utilities on every job")
    k = inst.index(i)
    if mode == "slope" and delta_max > inst.jobs[k].utility.a + TOL:
        raise ValueError("slope decrease cannot exceed the slope itself")
    if delta_max < 0:
        raise ValueError("delta_max must be nonnegative")
    base, gain, make = _curve_terms(inst, k, mode)
    job = inst.jobs[k]
    p = inst.p
    pieces, maxima = [], []
    lo = 0.0
    while True:
        mod = inst.replace(job.with_utility(make(lo)) if q == k else inst.jobs[q] for q in range(inst.n))
        order = greedy_order(mod, favor=k)
        comp = np.cumsum(p[order])
        pos = order.index(k)
        Ci = float(comp[pos])
        slope, icpt = float(gain(Ci)), float(base(Ci))
        nxt = INF
        for q, Cq in zip(order[pos + 1 :], comp[pos + 1 :]):
            Cq = float(Cq)
            hit = (float(inst.jobs[q].utility(Cq)) - float(base(Cq))) / float(gain(Cq))
            if hit > lo:
                nxt = min(nxt, hit)
        if nxt >= delta_max:
            pieces.append((lo, float(delta_max), slope, icpt))
            break
        pieces.append((lo, nxt, slope, icpt))
        maxima.append((nxt, icpt + slope * nxt))
        lo = nxt
    return SawtoothCurve(tuple(pieces), tuple(maxima), job.id, mode)
