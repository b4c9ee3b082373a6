"""Due-date variants: late-job minimisation and the bounded-late fair search."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import TOL, Infeasible, Instance, Schedule, SolveReport, UnsupportedVariant, evaluate_schedule
from .maxmin import BinarySearchConfig, binary_search_maxmin


@dataclass(frozen=True)
class LateReport:
    on_time: tuple
    late: tuple
    U_star: int
    schedule: Schedule


def moore_hodgson(jobs: Sequence, ids: Sequence | None = None) -> LateReport:
    """Minimum number of late jobs.

    ``jobs`` holds ``(p, due)`` pairs. Jobs are swept in EDD order; whenever
    the current one finishes late, the longest job kept so far is ejected
    (equal lengths: the earlier position goes). On-time jobs run EDD from
    time 0 and late jobs follow in position order.
    """
    ids = [str(i) for i in ids] if ids is not None else [str(k) for k in range(len(jobs))]
    order = sorted(range(len(jobs)), key=lambda k: (jobs[k][1], k))
    kept = []
    heap = []
    t = 0.0
    ejected = set()
    for k in order:
        p, due = jobs[k]
        kept.append(k)
        heapq.heappush(heap, (-p, k))
        t += p
        if t > due + TOL:
            negp, out = heapq.heappop(heap)
            t += negp
            ejected.add(out)
    on_time = [k for k in order if k not in ejected]
    late = sorted(ejected)
    entries = []
    t = 0.0
    for k in on_time + late:
        entries.append((ids[k], t))
        t += jobs[k][0]
    return LateReport(
        tuple(ids[k] for k in on_time),
        tuple(ids[k] for k in late),
        len(late),
        Schedule(tuple(entries)),
    )


def bounded_late_maxmin(inst: Instance, k: int, cfg: BinarySearchConfig | None = None) -> SolveReport:
    """Best minimum utility over on-time jobs when at most ``k`` jobs are late.

    For a target ``t`` each job gets the deadline ``min(d_j, latest completion
    reaching t)`` and the target is accepted when Moore-Hodgson leaves at
    most ``k`` jobs late. Late jobs are appended after the on-time block,
    reported with utility 0 and excluded from ``u_min``. At least one job
    must be on time, so ``k >= n`` behaves like ``k = n - 1``.
    """
    if inst.has_release:
        raise UnsupportedVariant("bounded_late_maxmin does not handle release dates")
    if any(j.d is None for j in inst.jobs):
        raise UnsupportedVariant("every job needs a due date")
    p = [j.p for j in inst.jobs]
    d = np.array([j.d for j in inst.jobs], dtype=float)
    base = moore_hodgson(list(zip(p, d)), inst.ids)
    if k < base.U_star:
        raise Infeasible(f"at least U*={base.U_star} jobs are late in every schedule, k={k} is too small")
    if base.U_star == inst.n:
        raise Infeasible("no job can finish by its due date")
    cfg = cfg or BinarySearchConfig()

    def feasible(due):
        rep = moore_hodgson(list(zip(p, np.minimum(d, due))), inst.ids)
        return rep if rep.U_star <= min(k, inst.n - 1) else None

    res = binary_search_maxmin(inst, feasible, cfg)
    late_rep = res.witness
    report = evaluate_schedule(
        inst,
        late_rep.schedule,
        counted=late_rep.on_time,
        diagnostics={"iterations": res.iterations, "tolerance": cfg.eps, "target": res.value},
    )
    report.diagnostics["late"] = list(late_rep.late)
    return report
