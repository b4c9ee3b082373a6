"""Rescheduling with a new high-priority agent.

A fair schedule for the original jobs is given. A new job arrives and
should finish as early as possible, subject to one of three restrictions
on the original agents, who may receive nonnegative compensation
``beta_j`` from a budget ``R``:

* ``NA1`` -- every agent keeps its old utility: ``u_j(s) + beta_j >= u_j(old)``
* ``NA2`` -- the total utility does not drop: ``sum u_j(s) + R >= sum u_j(old)``
* ``NA3`` -- no agent falls below the old minimum: ``u_j(s) + beta_j >= u_F``

NA1 and NA2 are solved exactly by a subset DP over the jobs placed before
the new one; NA3 uses a binary search on the new job's completion time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .adjust import water_level
from .core import (
    INF,
    TOL,
    ContractViolation,
    Infeasible,
    Instance,
    Job,
    PiecewiseLinear,
    Schedule,
    SizeLimitExceeded,
    UnsupportedVariant,
    evaluate_schedule,
)
from .maxmin import BinarySearchConfig, greedy_order, max_min_greedy, system_optimal_linear

VARIANTS = ("NA1", "NA2", "NA3")


@dataclass(frozen=True)
class ReschedProblem:
    """Original instance and schedule, the arriving job and the budget.

    ``lower_bound`` replaces ``u_F`` in NA3 (e.g. the minimum utility of a
    system-optimal initial schedule); by default it is the minimum utility
    of ``base_schedule``.
    """

    base: Instance
    base_schedule: Schedule
    new_job: Job
    budget_R: float = 0.0
    variant: str = "NA3"
    lower_bound: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not math.isfinite(self.budget_R):
            raise ValueError("budget R must be finite")
        # a negative aggregate budget asks the original jobs for a net gain
        if self.variant != "NA2" and self.budget_R < 0:
            raise ValueError("budget R must be nonnegative")
        if self.new_job.id in self.base.ids:
            raise ValueError(f"new job id {self.new_job.id!r} clashes with an original job")
        self.base_schedule.validate(self.base)
        if self.base.has_release or self.new_job.r > 0:
            raise UnsupportedVariant("rescheduling does not handle release dates")

    @classmethod
    def from_base(cls, base: Instance, new_job: Job, budget_R=0.0, variant="NA3", initial="fair"):
        """Build the problem with the fair (or system-optimal) initial schedule."""
        if initial == "fair":
            sched = max_min_greedy(base).schedule
        elif initial == "system":
            sched = system_optimal_linear(base).schedule
        else:
            raise ValueError(f"unknown initial schedule {initial!r}")
        return cls(base, sched, new_job, float(budget_R), variant)

    def combined(self) -> Instance:
        return Instance(self.base.jobs + (self.new_job,))

    def reference_utilities(self) -> dict:
        return evaluate_schedule(self.base, self.base_schedule).per_job_utility

    def bound(self) -> float:
        if self.lower_bound is not None:
            return float(self.lower_bound)
        return min(self.reference_utilities().values())

    def with_variant(self, variant: str, budget_R: float | None = None) -> "ReschedProblem":
        R = self.budget_R if budget_R is None else budget_R
        return ReschedProblem(self.base, self.base_schedule, self.new_job, R, variant, self.lower_bound)


def disruption(prob: ReschedProblem, s: Schedule, comp: Mapping) -> dict:
    """``delta_j = u_j(s) + beta_j - u_j(old)`` for every original job."""
    inst = prob.combined()
    s.validate(inst)
    base_ids = set(prob.base.ids)
    for k, v in comp.items():
        if str(k) not in base_ids:
            raise ContractViolation(f"compensation for unknown job {k!r}")
        if v < 0:
            raise ContractViolation(f"negative compensation {v} for job {k!r}")
    ref = prob.reference_utilities()
    C = s.completions(inst)
    return {
        j.id: float(j.utility(C[j.id])) + float(comp.get(j.id, 0.0)) - ref[j.id]
        for j in prob.base.jobs
    }


# ---------------------------------------------------------------------------
# NA1 / NA2: subset DP
# ---------------------------------------------------------------------------


def _subset_tables(prob: ReschedProblem):
    """Best before-block and after-block scores for every subset.

    NA1 minimises the total loss against the old utilities, NA2 maximises
    the total change and NA3 minimises the total shortfall below the bound. ``front[S]`` packs ``S`` from time 0, ``back[T]``
    packs ``T`` so that it ends at the new makespan.
    """
    jobs = prob.base.jobs
    n = len(jobs)
    ref = prob.reference_utilities()
    p = np.array([j.p for j in jobs])
    E = float(p.sum()) + prob.new_job.p
    if prob.variant == "NA1":
        def score(k, C):
            return -max(0.0, ref[jobs[k].id] - float(jobs[k].utility(C)))
    elif prob.variant == "NA3":
        bound = prob.bound()

        def score(k, C):
            return -max(0.0, bound - float(jobs[k].utility(C)))
    else:
        def score(k, C):
            return float(jobs[k].utility(C)) - ref[jobs[k].id]
    size = 1 << n
    psum = np.zeros(size)
    for m in range(1, size):
        low = (m & -m).bit_length() - 1
        psum[m] = psum[m & (m - 1)] + p[low]
    front = [-INF] * size
    back = [-INF] * size
    front_arg = [-1] * size
    back_arg = [-1] * size
    front[0] = back[0] = 0.0
    for m in range(1, size):
        for k in range(n):
            if not m >> k & 1:
                continue
            rest = m ^ (1 << k)
            v = front[rest] + score(k, psum[m])
            if v > front[m]:
                front[m], front_arg[m] = v, k
            v = back[rest] + score(k, E - psum[m] + p[k])
            if v > back[m]:
                back[m], back_arg[m] = v, k
    return psum, front, back, front_arg, back_arg


def _unwind(mask, arg, reverse):
    seq = []
    while mask:
        k = arg[mask]
        seq.append(k)
        mask ^= 1 << k
    return seq[::-1] if reverse else seq


def _solve_subset(prob: ReschedProblem, max_n: int):
    n = prob.base.n
    if n > max_n:
        raise SizeLimitExceeded(f"{n} original jobs exceed the exact-solver cap of {max_n}")
    psum, front, back, front_arg, back_arg = _subset_tables(prob)
    full = (1 << n) - 1
    R = prob.budget_R
    unew = prob.new_job.utility
    best = None
    for S in range(full + 1):
        total = front[S] + back[full ^ S]
        ok = total + R >= -TOL
        if not ok:
            continue
        C = psum[S] + prob.new_job.p
        key = (float(unew(C)), -C)
        if best is None or key > best[0]:
            best = (key, S)
    if best is None:
        raise Infeasible("no order satisfies the disruption constraints")
    S = best[1]
    jobs = prob.base.jobs
    before = _unwind(S, front_arg, reverse=True)
    after = _unwind(full ^ S, back_arg, reverse=False)
    order = [jobs[k].id for k in before] + [prob.new_job.id] + [jobs[k].id for k in after]
    return order, 2 ** n


# ---------------------------------------------------------------------------
# NA3: binary search on the new job's completion time
# ---------------------------------------------------------------------------


def _indicator(prob: ReschedProblem, target: float, low: float, high: float) -> Job:
    """New job with utility ``high`` up to ``target`` and ``low`` afterwards."""
    # the jump sits past the target by more than the deadline step-back, so
    # completing exactly on the target still counts
    jump = target + 4 * TOL * max(1.0, abs(target))
    return prob.new_job.with_utility(PiecewiseLinear.late_step(0.0, high, jump, low))


def _na3_bounds(prob: ReschedProblem):
    inst = prob.combined()
    high = max(float(j.utility(0.0)) for j in inst.jobs) + 1.0
    low = min(float(j.utility(inst.P)) for j in inst.jobs) - 1.0
    return high, low


def _na3_check(prob: ReschedProblem, target: float, method: str):
    """Schedule whose new job completes by ``target`` and that passes the NA3 test, else ``None``."""
    base = prob.base
    high, low = _na3_bounds(prob)
    if method == "bigm":
        aux = Instance(base.jobs + (_indicator(prob, target, low, high),))
        order = greedy_order(aux)
    elif method == "deadline":
        aux = Instance(base.jobs + (prob.new_job.with_utility(PiecewiseLinear((0.0,), (high,))),))
        dl = [INF] * base.n + [target]
        try:
            order = greedy_order(aux, deadlines=dl)
        except Infeasible:
            return None
    else:
        raise ValueError(f"unknown NA3 method {method!r}")
    inst = prob.combined()
    sched = Schedule.earliest(inst, [inst.jobs[k].id for k in order])
    C = sched.completions(inst)
    if C[prob.new_job.id] > target + TOL:
        return None
    vals = [float(j.utility(C[j.id])) for j in base.jobs]
    level = water_level(vals, prob.budget_R) if prob.budget_R > 0 else min(vals)
    if level < prob.bound() - TOL:
        return None
    return sched, vals, level


def _solve_na3(prob: ReschedProblem, cfg: BinarySearchConfig | None, method: str):
    inst = prob.combined()
    pn = prob.new_job.p
    E = inst.P
    integral = all(float(j.p).is_integer() for j in inst.jobs)
    top = _na3_check(prob, E, method)
    if top is None:
        raise Infeasible("even appending the new job last violates the lower bound")
    iterations = 1
    best = top
    if integral:
        lo, hi = int(pn), int(E)
        while lo < hi:
            mid = (lo + hi) // 2
            iterations += 1
            w = _na3_check(prob, mid, method)
            if w is not None:
                best, hi = w, mid
            else:
                lo = mid + 1
    else:
        cfg = cfg or BinarySearchConfig()
        w = _na3_check(prob, pn, method)
        iterations += 1
        if w is not None:
            best = w
        else:
            lo, hi = pn, E
            while hi - lo > cfg.eps and iterations < cfg.max_iter:
                mid = lo + (hi - lo) / 2
                iterations += 1
                w = _na3_check(prob, mid, method)
                if w is not None:
                    best, hi = w, mid
                else:
                    lo = mid
    sched, vals, level = best
    comp = {j.id: max(0.0, level - v) if prob.budget_R > 0 else 0.0 for j, v in zip(prob.base.jobs, vals)}
    return sched, comp, iterations


def resched_solve(
    prob: ReschedProblem,
    cfg: BinarySearchConfig | None = None,
    max_n: int = 9,
    method: str = "bigm",
):
    """Best completion for the new job under the problem's variant.

    Parameters
    ----------
    max_n : int
        Cap on the number of original jobs for the exact subset DP.
    method : {"bigm", "deadline", "exact"}
        NA3 routine. ``bigm`` and ``deadline`` bisect on the new job's
        completion time; each probe runs the fair greedy (with an indicator
        utility for the new job, or with the target as its only deadline)
        and then spends ``R`` by water-filling. ``exact`` runs the subset
        DP on the total shortfall below the bound. The two bisection
        routines are exact for ``R = 0``; for ``R > 0`` the greedy probe can
        reject a target that an order with a lower minimum but a smaller
        total shortfall would meet, so ``exact`` may finish the new job
        earlier.

    Returns
    -------
    (SolveReport, dict)
        Report over all ``n + 1`` jobs and the compensation per original job.
        For NA2 the compensation map is all zeros and the budget is reported
        in aggregate under ``diagnostics["aggregate_budget"]``.
    """
    inst = prob.combined()
    ref = prob.reference_utilities()
    if prob.variant in ("NA1", "NA2") or method == "exact":
        order, evaluated = _solve_subset(prob, max_n)
        sched = Schedule.earliest(inst, order)
        rep = evaluate_schedule(inst, sched, diagnostics={"iterations": evaluated, "tolerance": TOL})
        if prob.variant == "NA1":
            comp = {i: max(0.0, ref[i] - rep.per_job_utility[i]) for i in prob.base.ids}
        elif prob.variant == "NA3":
            bound = prob.bound()
            comp = {i: max(0.0, bound - rep.per_job_utility[i]) for i in prob.base.ids}
        else:
            comp = {i: 0.0 for i in prob.base.ids}
            change = math.fsum(rep.per_job_utility[i] - ref[i] for i in prob.base.ids)
            rep.diagnostics["aggregate_budget"] = prob.budget_R
            rep.diagnostics["slack"] = change + prob.budget_R
    else:
        sched, comp, iterations = _solve_na3(prob, cfg, method)
        rep = evaluate_schedule(inst, sched, diagnostics={"iterations": iterations, "tolerance": TOL})
    rep.diagnostics["new_job_utility"] = rep.per_job_utility[prob.new_job.id]
    return rep, comp


def resched_lexicographic(prob: ReschedProblem, priority: Sequence):
    """Earliest completions for an ordered list of jobs, one after another.

    Each job in ``priority`` (ids from the combined instance) gets the
    earliest completion that keeps the NA3 test satisfied given the
    deadlines already fixed for the jobs before it; that completion then
    becomes its deadline.

    Returns
    -------
    (SolveReport, dict)
        The final schedule and the fixed deadline per listed job.
    """
    if prob.variant != "NA3":
        raise UnsupportedVariant("the lexicographic extension is defined for NA3 only")
    inst = prob.combined()
    base = prob.base
    high, _ = _na3_bounds(prob)
    fixed: dict = {}

    def check(target_id, target):
        dl = dict(fixed)
        dl[target_id] = target
        jobs = []
        for j in inst.jobs:
            u = j.utility
            if j.id == prob.new_job.id:
                u = PiecewiseLinear((0.0,), (high,))
            jobs.append(j.with_utility(u))
        aux = Instance(tuple(jobs))
        try:
            order = greedy_order(aux, deadlines=[dl.get(j.id, INF) for j in inst.jobs])
        except Infeasible:
            return None
        sched = Schedule.earliest(inst, [inst.jobs[k].id for k in order])
        C = sched.completions(inst)
        if any(C[i] > d + TOL for i, d in dl.items()):
            return None
        vals = [float(j.utility(C[j.id])) for j in base.jobs]
        level = water_level(vals, prob.budget_R) if prob.budget_R > 0 else min(vals)
        return sched if level >= prob.bound() - TOL else None

    sched = None
    for jid in priority:
        jid = str(jid)
        job = inst.job(jid)
        lo, hi = job.p, inst.P
        best = check(jid, hi)
        if best is None:
            raise Infeasible(f"no feasible schedule once job {jid!r} is added to the priority list")
        integral = all(float(j.p).is_integer() for j in inst.jobs)
        if integral:
            lo, hi = int(lo), int(hi)
            while lo < hi:
                mid = (lo + hi) // 2
                w = check(jid, mid)
                if w is not None:
                    best, hi = w, mid
                else:
                    lo = mid + 1
        else:
            while hi - lo > 1e-9:
                mid = lo + (hi - lo) / 2
                w = check(jid, mid)
                if w is not None:
                    best, hi = w, mid
                else:
                    lo = mid
        fixed[jid] = best.completions(inst)[jid]
        sched = best
    rep = evaluate_schedule(inst, sched, diagnostics={"iterations": len(fixed), "tolerance": TOL})
    return rep, fixed
