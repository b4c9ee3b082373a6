"""Fair-schedule solvers without release dates.

``max_min_greedy`` builds the sequence backwards: at the current end time
``T`` it places the remaining job with the highest utility at ``T``.
``binary_search_maxmin`` is the generic alternative that turns a utility
target into per-job deadlines and asks a feasibility oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    INF,
    TOL,
    ContractViolation,
    Infeasible,
    Instance,
    Schedule,
    SolveReport,
    UnsupportedVariant,
    due_date_for,
    evaluate_schedule,
)


@dataclass(frozen=True)
class BinarySearchConfig:
    lo: float | None = None
    hi: float | None = None
    eps: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError("lo must not exceed hi")

    def resolve(self, inst: Instance) -> "BinarySearchConfig":
        """Fill missing bounds with ``min_j u_j(horizon)`` and ``max_j u_j(0)``."""
        lo = self.lo
        hi = self.hi
        if lo is None:
            cbar = inst.horizon()
            lo = min(float(j.utility(cbar)) for j in inst.jobs)
        if hi is None:
            hi = max(float(j.utility(0.0)) for j in inst.jobs)
        return BinarySearchConfig(lo, max(lo, hi), self.eps, self.max_iter)


@dataclass
class SearchResult:
    value: float
    witness: object
    iterations: int


def _linear_arrays(inst: Instance):
    a = np.array([j.utility.a for j in inst.jobs], dtype=float)
    b = np.array([j.utility.b for j in inst.jobs], dtype=float)
    return a, b


def greedy_order(inst: Instance, deadlines: Sequence | None = None, favor: int | None = None) -> list:
    """Backward greedy sequence as dense indices.

    Exact utility ties go to the smallest index, except that ``favor``
    (a dense index) wins every tie it takes part in. With ``deadlines``
    only jobs whose deadline is at least the current end time compete.
    """
    n = inst.n
    p = inst.p
    dl = None if deadlines is None else np.asarray(deadlines, dtype=float)
    remaining = np.ones(n, dtype=bool)
    order = [0] * n
    T = float(inst.P)
    linear = inst.all_linear
    if linear:
        a, b = _linear_arrays(inst)
    for pos in range(n - 1, -1, -1):
        if linear:
            vals = b - a * T
        else:
            vals = np.array([float(inst.jobs[k].utility(T)) if remaining[k] else -INF for k in range(n)])
        ok = remaining if dl is None else remaining & (dl >= T - TOL)
        if not ok.any():
            raise Infeasible(f"no job can complete at T={T} without missing its deadline")
        vals = np.where(ok, vals, -INF)
        best = vals.max()
        k = int(np.argmax(vals))
        if favor is not None and ok[favor] and vals[favor] == best:
            k = favor
        order[pos] = k
        remaining[k] = False
        T -= p[k]
    return order


def edd_check(jobs: Sequence, ids: Sequence | None = None):
    """Earliest-due-date feasibility.

    ``jobs`` is a sequence of ``(p, due)`` pairs. Returns ``(ok, schedule)``
    where the schedule runs the jobs back to back from 0 in EDD order
    (ties by position) and ``ok`` says whether every job meets its due date.
    """
    ids = [str(i) for i in ids] if ids is not None else [str(k) for k in range(len(jobs))]
    order = sorted(range(len(jobs)), key=lambda k: (jobs[k][1] if jobs[k][1] is not None else INF, k))
    t = 0.0
    ok = True
    entries = []
    for k in order:
        p, due = jobs[k]
        entries.append((ids[k], t))
        t += p
        if due is not None and t > due + TOL:
            ok = False
    return ok, Schedule(tuple(entries))


def _require_no_release(inst: Instance, what: str):
    if inst.has_release:
        raise UnsupportedVariant(f"{what} does not handle release dates")


def max_min_greedy(inst: Instance, deadlines: bool = False) -> SolveReport:
    """Optimal fair schedule for jobs released at time 0.

    With ``deadlines=True`` every job's due date is a hard deadline; the
    instance must then be EDD-feasible.
    """
    _require_no_release(inst, "max_min_greedy")
    dl = None
    if deadlines:
        if any(j.d is None for j in inst.jobs):
            raise UnsupportedVariant("deadline variant needs a due date on every job")
        ok, _ = edd_check([(j.p, j.d) for j in inst.jobs], inst.ids)
        if not ok:
            raise Infeasible("no schedule meets every deadline (EDD has a late job)")
        dl = [j.d for j in inst.jobs]
    order = greedy_order(inst, dl)
    sched = Schedule.earliest(inst, [inst.jobs[k].id for k in order])
    return evaluate_schedule(inst, sched, diagnostics={"iterations": inst.n, "tolerance": 0.0})


def binary_search_maxmin(
    inst: Instance,
    feasible: Callable[[np.ndarray], object],
    cfg: BinarySearchConfig | None = None,
) -> SearchResult:
    """Largest utility target accepted by ``feasible``, up to ``cfg.eps``.

    Each candidate target ``t`` is mapped to deadlines
    ``d_j = latest completion with u_j(C) >= t`` which are passed to
    ``feasible``. The predicate returns a witness (anything truthy, usually
    a schedule) or ``None``. It must be monotone: accepted targets form a
    down-set.
    """
    cfg = (cfg or BinarySearchConfig()).resolve(inst)
    utils = [j.utility for j in inst.jobs]

    def probe(t):
        return feasible(np.array([due_date_for(u, t) for u in utils]))

    lo, hi = cfg.lo, cfg.hi
    w_lo = probe(lo)
    if not w_lo:
        raise ContractViolation(f"lower bound {lo} is not feasible")
    it = 1
    w_hi = probe(hi)
    it += 1
    if w_hi:
        return SearchResult(hi, w_hi, it)
    while hi - lo > cfg.eps:
        if it >= cfg.max_iter:
            raise ContractViolation(f"binary search did not converge in {cfg.max_iter} iterations")
        mid = lo + (hi - lo) / 2
        if mid <= lo or mid >= hi:
            break
        w = probe(mid)
        it += 1
        if w:
            lo, w_lo = mid, w
        else:
            hi = mid
    return SearchResult(lo, w_lo, it)


def edd_feasibility(inst: Instance):
    """Feasibility predicate for :func:`binary_search_maxmin` on no-release instances."""
    p = [j.p for j in inst.jobs]

    def feasible(due):
        ok, sched = edd_check(list(zip(p, due)), inst.ids)
        return sched if ok else None

    return feasible


def binary_search_solve(inst: Instance, cfg: BinarySearchConfig | None = None) -> SolveReport:
    """Fair schedule through the binary-search framework with an EDD oracle."""
    _require_no_release(inst, "binary_search_solve")
    cfg = cfg or BinarySearchConfig()
    res = binary_search_maxmin(inst, edd_feasibility(inst), cfg)
    return evaluate_schedule(
        inst, res.witness, diagnostics={"iterations": res.iterations, "tolerance": cfg.eps, "target": res.value}
    )


def system_optimal_linear(inst: Instance) -> SolveReport:
    """Smith's rule: non-increasing ``a_j / p_j``, ties by position."""
    _require_no_release(inst, "system_optimal_linear")
    if not inst.all_linear:
        raise UnsupportedVariant("Smith's rule needs linear utilities")
    ratio = [j.utility.a / j.p for j in inst.jobs]
    order = sorted(range(inst.n), key=lambda k: (-ratio[k], k))
    sched = Schedule.earliest(inst, [inst.jobs[k].id for k in order])
    return evaluate_schedule(inst, sched, diagnostics={"iterations": 1, "tolerance": 0.0})
