"""Release-date variants.

* one job with a positive release date: pseudo-polynomial DPs over
  ``(P1, P2)`` states for both the fair and the sum objective
* unit processing times: the backward slot greedy and assignment models
* equal processing times: binary search over a feasibility kernel that may
  insert unforced idle time
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .core import (
    INF,
    TOL,
    Infeasible,
    Instance,
    Schedule,
    SolveReport,
    UnsupportedVariant,
    due_date_for,
    evaluate_schedule,
)
from .maxmin import BinarySearchConfig, binary_search_maxmin


@dataclass(frozen=True)
class DpState:
    P1: int
    P2: int


def _is_int(x) -> bool:
    return float(x).is_integer()


def _split_released(inst: Instance):
    released = [k for k, j in enumerate(inst.jobs) if j.r > 0]
    if len(released) != 1:
        raise UnsupportedVariant(f"expected exactly one job with a positive release date, found {len(released)}")
    if not all(_is_int(j.p) for j in inst.jobs) or not _is_int(inst.jobs[released[0]].r):
        raise UnsupportedVariant("the single-release DP needs integer durations and release date")
    x = released[0]
    others = [k for k in range(inst.n) if k != x]
    return x, others


def _candidate_values(inst: Instance) -> np.ndarray:
    """Every utility value reachable at an integer completion time."""
    times = np.arange(0, int(inst.horizon()) + 1, dtype=float)
    vals = np.concatenate([j.utility.eval_array(times) for j in inst.jobs])
    return np.unique(vals)


def _fair_dp(inst: Instance, x: int, others: list, s: int, due: np.ndarray):
    """Before/after split for a fixed start ``s`` of the released job.

    Returns ``(before, edd)``: the dense indices placed before the released
    job and the EDD order used, or ``None`` when no split meets every
    deadline in ``due``.
    """
    p = inst.p
    px = p[x]
    if s + px > due[x] + TOL:
        return None
    end_x = s + px
    seq = sorted(others, key=lambda k: (due[k], k))
    states = {0: 0}  # P1 -> bitmask of jobs placed before (P2 follows from the prefix sum)
    done = 0.0
    for k in seq:
        pk = p[k]
        nxt = {}
        for P1, mask in states.items():
            P2 = done - P1
            c_before = P1 + pk
            if c_before <= s + TOL and c_before <= due[k] + TOL:
                nxt.setdefault(c_before, mask | (1 << k))
            if end_x + P2 + pk <= due[k] + TOL:
                nxt.setdefault(P1, mask)
        if not nxt:
            return None
        states = nxt
        done += pk
    mask = next(iter(states.values()))
    return [k for k in seq if mask >> k & 1], seq


def _split_schedule(inst: Instance, x: int, others: list, before: list, s: float, key) -> Schedule:
    before_set = set(before)
    first = sorted(before, key=key)
    last = sorted((k for k in others if k not in before_set), key=key)
    entries = []
    t = 0.0
    for k in first:
        entries.append((inst.jobs[k].id, t))
        t += inst.jobs[k].p
    entries.append((inst.jobs[x].id, float(s)))
    t = s + inst.jobs[x].p
    for k in last:
        entries.append((inst.jobs[k].id, t))
        t += inst.jobs[k].p
    return Schedule(tuple(entries))


def dp_single_release(
    inst: Instance,
    objective: str = "maxmin",
    cfg: BinarySearchConfig | None = None,
    search: str = "values",
) -> SolveReport:
    """Exact solver when exactly one job has a positive release date.

    The released job's start ``s`` ranges over ``r, r+1, ..., r+P``; every
    other job goes either before it (finishing by ``s``) or after it.

    Parameters
    ----------
    objective : {"maxmin", "sum"}
        ``maxmin`` searches over utility targets; each target is tested by
        a DP that walks the jobs in EDD order of their target deadlines.
        ``sum`` walks the jobs in Smith order and keeps the best total per
        state (linear utilities only).
    search : {"values", "eps"}
        ``values`` bisects over the finite set of utilities reachable at
        integer completion times, which makes the result exact. ``eps``
        uses the generic bisection with ``cfg``.
    """
    x, others = _split_released(inst)
    r = int(inst.jobs[x].r)
    P = int(round(sum(inst.jobs[k].p for k in others)))
    starts = range(r, r + P + 1)
    if objective == "sum":
        return _sum_single_release(inst, x, others, starts)
    if objective != "maxmin":
        raise ValueError(f"unknown objective {objective!r}")
    utils = [j.utility for j in inst.jobs]

    def feasible(due):
        for s in starts:
            split = _fair_dp(inst, x, others, s, due)
            if split is not None:
                return (s,) + split
        return None

    iterations = 0
    if search == "values":
        cand = _candidate_values(inst)
        lo, hi = 0, len(cand) - 1
        best = None
        # largest index whose target is feasible; index 0 is the global minimum and always feasible
        while lo <= hi:
            mid = (lo + hi) // 2
            iterations += 1
            w = feasible(np.array([due_date_for(u, cand[mid]) for u in utils]))
            if w is not None:
                best, lo = w, mid + 1
            else:
                hi = mid - 1
        if best is None:
            raise Infeasible("no start of the released job admits a schedule")
        witness = best
        tol = 0.0
    elif search == "eps":
        cfg = cfg or BinarySearchConfig()
        res = binary_search_maxmin(inst, feasible, cfg)
        witness, iterations, tol = res.witness, res.iterations, cfg.eps
    else:
        raise ValueError(f"unknown search mode {search!r}")
    s, before, edd = witness
    rank = {k: i for i, k in enumerate(edd)}
    sched = _split_schedule(inst, x, others, before, s, key=rank.__getitem__)
    return evaluate_schedule(inst, sched, diagnostics={"iterations": iterations, "tolerance": tol, "start": s})


def _sum_single_release(inst: Instance, x: int, others: list, starts) -> SolveReport:
    if not inst.all_linear:
        raise UnsupportedVariant("the sum-objective DP needs linear utilities")
    p = inst.p
    px = p[x]
    ux = inst.jobs[x].utility
    seq = sorted(others, key=lambda k: (-inst.jobs[k].utility.a / p[k], k))
    best_val, best = -INF, None
    states_seen = 0
    for s in starts:
        end_x = s + px
        states = {0.0: (0.0, 0)}  # P1 -> (value, before mask)
        done = 0.0
        for k in seq:
            u = inst.jobs[k].utility
            pk = p[k]
            nxt = {}
            for P1, (val, mask) in states.items():
                P2 = done - P1
                c_before = P1 + pk
                if c_before <= s + TOL:
                    cand = (val + u(c_before), mask | (1 << k))
                    if c_before not in nxt or cand[0] > nxt[c_before][0]:
                        nxt[c_before] = cand
                cand = (val + u(end_x + P2 + pk), mask)
                if P1 not in nxt or cand[0] > nxt[P1][0]:
                    nxt[P1] = cand
            states = nxt
            states_seen += len(states)
            done += pk
        for P1, (val, mask) in sorted(states.items()):
            total = val + ux(end_x)
            if total > best_val + TOL:
                best_val, best = total, (s, [k for k in seq if mask >> k & 1])
    s, before = best
    rank = {k: i for i, k in enumerate(seq)}
    sched = _split_schedule(inst, x, others, before, s, key=rank.__getitem__)
    return evaluate_schedule(inst, sched, diagnostics={"iterations": states_seen, "tolerance": 0.0, "start": s})


# ---------------------------------------------------------------------------
# Unit processing times
# ---------------------------------------------------------------------------


def _check_unit(inst: Instance):
    if any(j.p != 1 for j in inst.jobs):
        raise UnsupportedVariant("unit_time_solve needs p_j = 1 for every job")
    if any(not _is_int(j.r) for j in inst.jobs):
        raise UnsupportedVariant("unit_time_solve needs integer release dates")


def min_makespan_slots(release: Sequence) -> np.ndarray:
    """Completion slots of the release-sorted semi-active unit schedule."""
    C = 0.0
    out = []
    for r in sorted(release):
        C = max(r + 1, C + 1)
        out.append(C)
    return np.array(out)


def _unit_greedy(inst: Instance) -> list:
    order = sorted(range(inst.n), key=lambda k: (inst.jobs[k].r, k))
    seq = []  # [dense index, completion]
    C = 0.0
    for k in order:
        C = max(inst.jobs[k].r + 1, C + 1)
        seq.append([k, C])
    placed = []
    while len(seq) > 1:
        T = seq[-1][1]
        pos = len(seq) - 1
        best_pos = pos
        best_u = float(inst.jobs[seq[pos][0]].utility(T))
        # walk back while the job at ``pos`` could itself move one slot earlier
        while seq[pos][1] - 1 > inst.jobs[seq[pos][0]].r:
            pos -= 1
            u = float(inst.jobs[seq[pos][0]].utility(T))
            if u > best_u:
                best_u, best_pos = u, pos
        k, _ = seq.pop(best_pos)
        for e in seq[best_pos:]:
            e[1] -= 1
        placed.append((k, T))
    placed.append((seq[0][0], seq[0][1]))
    placed.sort(key=lambda e: e[1])
    return placed


def _assignment(inst: Instance, objective: str) -> list:
    slots = min_makespan_slots([j.r for j in inst.jobs])
    r = inst.r
    feas = slots[None, :] >= r[:, None] + 1 - TOL
    U = np.vstack([j.utility.eval_array(slots) for j in inst.jobs])
    if objective == "sum":
        big = 1.0 + 2.0 * (np.abs(U[feas]).sum() + 1.0)
        cost = np.where(feas, -U, big)
        rows, cols = linear_sum_assignment(cost)
        if not feas[rows, cols].all():
            raise Infeasible("no feasible slot assignment")
        return sorted(((int(i), float(slots[c])) for i, c in zip(rows, cols)), key=lambda e: e[1])
    # bottleneck: largest threshold that still admits a perfect matching
    values = np.unique(U[feas])
    lo, hi = 0, len(values) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((feas & (U >= values[mid])).astype(np.int8))
        match = maximum_bipartite_matching(graph, perm_type="column")
        if (match >= 0).all():
            best, lo = match, mid + 1
        else:
            hi = mid - 1
    if best is None:
        raise Infeasible("no feasible slot assignment")
    return sorted(((i, float(slots[c])) for i, c in enumerate(best)), key=lambda e: e[1])


def unit_time_solve(inst: Instance, objective: str = "maxmin", method: str = "greedy") -> SolveReport:
    """Unit-length jobs with integer release dates.

    Both methods use the slots of the minimum-makespan semi-active schedule.
    ``greedy`` fills the last slot with the best job that can be moved to
    the end without increasing the makespan (fair objective only).
    ``assignment`` solves a bottleneck (fair) or sum assignment between
    jobs and slots; job ``i`` fits slot ``C`` iff ``C >= r_i + 1``.
    """
    _check_unit(inst)
    if objective not in ("maxmin", "sum"):
        raise ValueError(f"unknown objective {objective!r}")
    if method == "greedy":
        if objective != "maxmin":
            raise UnsupportedVariant("the slot greedy handles the fair objective only")
        placed = _unit_greedy(inst)
    elif method == "assignment":
        placed = _assignment(inst, objective)
    else:
        raise ValueError(f"unknown method {method!r}")
    sched = Schedule(tuple((inst.jobs[k].id, C - 1.0) for k, C in placed))
    return evaluate_schedule(inst, sched, diagnostics={"iterations": inst.n, "tolerance": 0.0, "method": method})


# ---------------------------------------------------------------------------
# Equal processing times
# ---------------------------------------------------------------------------


def _in_region(t: float, regions) -> tuple | None:
    for lo, hi in regions:
        if lo + TOL < t < hi - TOL:
            return lo, hi
    return None


def equal_time_feasible(p: float, jobs: Sequence, ids: Sequence | None = None):
    """Can every job start in ``[r_j, d_j - p]`` without overlap?

    ``jobs`` holds ``(r, deadline)`` pairs. Forbidden start regions are
    derived for each release date (latest-first) by packing the jobs that
    are released no earlier and due no later backwards from each deadline;
    EDD list scheduling that never starts a job inside a forbidden region
    then meets every deadline whenever any schedule does.
    Returns ``(ok, schedule)``; the schedule is ``None`` when infeasible.
    """
    n = len(jobs)
    ids = [str(i) for i in ids] if ids is not None else [str(k) for k in range(n)]
    r = [float(a) for a, _ in jobs]
    d = [float(b) for _, b in jobs]
    if any(d[k] < r[k] + p - TOL for k in range(n)):
        return False, None
    regions: list = []
    deadlines = sorted({x for x in d if math.isfinite(x)})
    for ri in sorted(set(r), reverse=True):
        for dk in deadlines:
            if dk < ri + p - TOL:
                continue
            group = sorted((k for k in range(n) if r[k] >= ri - TOL and d[k] <= dk + TOL), key=lambda k: -d[k])
            if not group:
                continue
            c = INF
            for k in group:
                s = min(d[k], c) - p
                hit = _in_region(s, regions)
                while hit is not None:
                    s = hit[0]
                    hit = _in_region(s, regions)
                c = s
            if c < ri - TOL:
                return False, None
            if c < ri + p - TOL:
                regions.append((c - p, ri))
    # EDD list scheduling around the forbidden regions
    left = set(range(n))
    t = 0.0
    entries = []
    while left:
        t = max(t, min(r[k] for k in left))
        hit = _in_region(t, regions)
        while hit is not None:
            t = hit[1]
            hit = _in_region(t, regions)
        ready = [k for k in left if r[k] <= t + TOL]
        if not ready:
            continue
        k = min(ready, key=lambda q: (d[q], q))
        if t + p > d[k] + TOL:
            return False, None
        entries.append((ids[k], t))
        left.discard(k)
        t += p
    return True, Schedule(tuple(entries))


def equal_time_maxmin(inst: Instance, cfg: BinarySearchConfig | None = None) -> SolveReport:
    """Fair schedule for equal durations and arbitrary release dates.

    The returned schedule may leave the machine idle while a job is
    waiting when that helps a later, more urgent job.
    """
    p = inst.jobs[0].p
    if any(j.p != p for j in inst.jobs):
        raise UnsupportedVariant("equal_time_maxmin needs a common duration")
    cfg = cfg or BinarySearchConfig()
    pairs_r = [j.r for j in inst.jobs]

    def feasible(due):
        ok, sched = equal_time_feasible(p, list(zip(pairs_r, due)), inst.ids)
        return sched if ok else None

    res = binary_search_maxmin(inst, feasible, cfg)
    return evaluate_schedule(
        inst, res.witness, diagnostics={"iterations": res.iterations, "tolerance": cfg.eps, "target": res.value}
    )
