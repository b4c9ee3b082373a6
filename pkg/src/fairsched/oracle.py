"""Brute-force reference solvers.

Every permutation is scheduled with earliest starts. Because utilities
never increase with completion time, earliest starts are best for every
job at once, so the enumeration is exact for fair, sum and late-count
objectives. Evaluation is vectorised over blocks of permutations.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .adjust import water_level
from .core import (
    INF,
    TOL,
    Infeasible,
    Instance,
    Schedule,
    SizeLimitExceeded,
    SolveReport,
    evaluate_schedule,
)

OBJECTIVES = ("maxmin", "sum", "late_count")

_BLOCK = 40320


@dataclass(frozen=True)
class OracleConfig:
    max_n: int = 9
    objective: str = "maxmin"
    start_policy: str = "earliest"
    max_late: int | None = None

    def __post_init__(self):
        if self.max_n > 10:
            raise ValueError("max_n is capped at 10 (10! permutations)")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.start_policy not in ("earliest", "grid"):
            raise ValueError(f"unknown start policy {self.start_policy!r}")


def permutation_blocks(n: int, block: int = _BLOCK) -> Iterator[np.ndarray]:
    it = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(it, block))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int16)


def completion_matrix(perms: np.ndarray, p: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``C[m, j]``: completion of job ``j`` under permutation ``m`` (earliest starts)."""
    m, n = perms.shape
    C = np.empty((m, n))
    t = np.zeros(m)
    rows = np.arange(m)
    for k in range(n):
        jobs = perms[:, k]
        t = np.maximum(t, r[jobs]) + p[jobs]
        C[rows, jobs] = t
    return C


def utilities_at(inst: Instance, C: np.ndarray) -> np.ndarray:
    U = np.empty_like(C)
    for j, job in enumerate(inst.jobs):
        U[:, j] = job.utility.eval_array(C[:, j])
    return U


def _score(inst, cfg, C, U):
    """Per-permutation score (higher is better) and the on-time mask."""
    if cfg.max_late is not None or cfg.objective == "late_count":
        due = np.array([INF if j.d is None else j.d for j in inst.jobs])
        on_time = C <= due + TOL
    else:
        on_time = np.ones_like(C, dtype=bool)
    if cfg.objective == "late_count":
        score = on_time.sum(axis=1).astype(float)
    elif cfg.objective == "maxmin":
        score = np.where(on_time, U, INF).min(axis=1)
    else:
        score = np.where(on_time, U, 0.0).sum(axis=1)
    if cfg.max_late is not None:
        late = (~on_time).sum(axis=1)
        score = np.where(late <= cfg.max_late, score, -INF)
    return score, on_time


def brute_force(inst: Instance, cfg: OracleConfig | None = None) -> SolveReport:
    """Best schedule over all permutations (first permutation wins ties).

    ``late_count`` maximises the number of on-time jobs; with ``max_late``
    set, late jobs are excluded from the objective and at most that many
    may be late. Due dates are ignored otherwise, so ``max_late=0`` is the
    way to treat them as hard deadlines. The ``grid`` start policy additionally tries every start
    vector on ``{r_i + k*p}`` and is meant for tiny equal-length instances.
    """
    cfg = cfg or OracleConfig()
    n = inst.n
    if n > cfg.max_n:
        raise SizeLimitExceeded(f"{n} jobs exceed the oracle cap of {cfg.max_n}")
    if cfg.start_policy == "grid":
        return _brute_force_grid(inst, cfg)
    p, r = inst.p, inst.r
    best_val, best_perm, best_on = -INF, None, None
    count = 0
    for perms in permutation_blocks(n):
        C = completion_matrix(perms, p, r)
        U = utilities_at(inst, C)
        score, on_time = _score(inst, cfg, C, U)
        k = int(np.argmax(score))
        count += len(perms)
        if best_perm is None or score[k] > best_val:
            best_val, best_perm, best_on = score[k], perms[k], on_time[k]
    if best_val == -INF:
        raise Infeasible("no permutation satisfies the late-job bound")
    order = [inst.jobs[k].id for k in best_perm]
    counted = None
    if cfg.max_late is not None:
        on_ids = [inst.jobs[k].id for k in range(n) if best_on[k]]
        late_ids = [inst.jobs[k].id for k in range(n) if not best_on[k]]
        order = [i for i in order if i in set(on_ids)] + [i for i in order if i in set(late_ids)]
        counted = on_ids
    sched = Schedule.earliest(inst, order)
    rep = evaluate_schedule(inst, sched, counted=counted, diagnostics={"iterations": count, "tolerance": 0.0})
    rep.diagnostics["objective"] = float(best_val)
    return rep


def _grid(inst: Instance) -> list:
    p = inst.jobs[0].p
    pts = {j.r + k * p for j in inst.jobs for k in range(inst.n)}
    return sorted(pts)


def _brute_force_grid(inst: Instance, cfg: OracleConfig) -> SolveReport:
    if cfg.objective != "maxmin" or cfg.max_late is not None:
        raise ValueError("grid policy supports the plain maxmin objective only")
    grid = _grid(inst)
    jobs = inst.jobs
    best = [-INF, None]

    def dfs(perm, k, t, cur_min, starts):
        if cur_min <= best[0]:
            return
        if k == len(perm):
            best[0], best[1] = cur_min, list(zip([jobs[i].id for i in perm], starts))
            return
        job = jobs[perm[k]]
        lo = max(t, job.r)
        for s in grid:
            if s < lo - TOL:
                continue
            u = float(job.utility(s + job.p))
            dfs(perm, k + 1, s + job.p, min(cur_min, u), starts + [s])

    evaluated = 0
    for perm in itertools.permutations(range(inst.n)):
        evaluated += 1
        dfs(perm, 0, 0.0, INF, [])
    sched = Schedule(tuple(best[1]))
    rep = evaluate_schedule(inst, sched, diagnostics={"iterations": evaluated, "tolerance": 0.0})
    rep.diagnostics["objective"] = float(best[0])
    return rep


def brute_force_discard(inst: Instance, k: int, cfg: OracleConfig | None = None) -> SolveReport:
    """Fair objective when up to ``k`` jobs may be dropped as late.

    Every kept set of at least ``n - k`` jobs is scheduled in every order
    from time 0; the order must meet all kept due dates. Dropped jobs follow
    the kept block and are excluded from the objective, whether or not they
    happen to finish by their due date. At least one job is always kept.
    """
    cfg = cfg or OracleConfig()
    n = inst.n
    if n > cfg.max_n:
        raise SizeLimitExceeded(f"{n} jobs exceed the oracle cap of {cfg.max_n}")
    if inst.has_release:
        raise ValueError("the discard oracle assumes no release dates")
    due = np.array([INF if j.d is None else j.d for j in inst.jobs])
    p = inst.p
    best_val, best = -INF, None
    count = 0
    # the minimum needs at least one counted job
    for size in range(max(1, n - k), n + 1):
        for kept in itertools.combinations(range(n), size):
            sub = np.array(kept)
            for perms in permutation_blocks(size):
                jobs = sub[perms]
                C = np.cumsum(p[jobs], axis=1)
                ok = (C <= due[jobs] + TOL).all(axis=1)
                U = np.empty_like(C)
                for col in range(size):
                    for j in np.unique(jobs[:, col]):
                        rows = jobs[:, col] == j
                        U[rows, col] = inst.jobs[j].utility.eval_array(C[rows, col])
                score = np.where(ok, U.min(axis=1), -INF)
                count += len(perms)
                m = int(np.argmax(score))
                if score[m] > best_val or best is None and score[m] > -INF:
                    best_val, best = float(score[m]), tuple(jobs[m])
    if best is None:
        raise Infeasible(f"more than {k} jobs, or every job, miss their due date in every schedule")
    kept_ids = [inst.jobs[j].id for j in best]
    order = kept_ids + [i for i in inst.ids if i not in set(kept_ids)]
    rep = evaluate_schedule(
        inst, Schedule.earliest(inst, order), counted=kept_ids, diagnostics={"iterations": count, "tolerance": 0.0}
    )
    rep.diagnostics["objective"] = best_val
    return rep


def brute_force_resched(prob, cfg: OracleConfig | None = None):
    """Exact rescheduling answer by enumerating all orders of ``n + 1`` jobs.

    Feasibility per order: NA1 -- total individual losses at most ``R``;
    NA2 -- aggregate utility change plus ``R`` nonnegative; NA3 -- total
    shortfall below the lower bound at most ``R`` (equivalently, the
    water level reachable with budget ``R`` is at least the bound).
    Returns ``(report, compensation)``.
    """
    cfg = cfg or OracleConfig()
    inst = prob.combined()
    n1 = inst.n
    if n1 > cfg.max_n:
        raise SizeLimitExceeded(f"{n1} jobs exceed the oracle cap of {cfg.max_n}")
    ref = prob.reference_utilities()
    base_ids = prob.base.ids
    ref_vec = np.array([ref[i] for i in base_ids])
    new_k = inst.index(prob.new_job.id)
    orig_k = np.array([inst.index(i) for i in base_ids])
    R = prob.budget_R
    bound = prob.bound()
    best_val, best_perm = -INF, None
    p, r = inst.p, inst.r
    for perms in permutation_blocks(n1):
        C = completion_matrix(perms, p, r)
        U = utilities_at(inst, C)
        Uo = U[:, orig_k]
        if prob.variant == "NA1":
            need = np.maximum(0.0, ref_vec - Uo).sum(axis=1)
            ok = need <= R + TOL
        elif prob.variant == "NA2":
            ok = (Uo - ref_vec).sum(axis=1) + R >= -TOL
        else:
            need = np.maximum(0.0, bound - Uo).sum(axis=1)
            ok = need <= R + TOL
        score = np.where(ok, U[:, new_k], -INF)
        k = int(np.argmax(score))
        if best_perm is None or score[k] > best_val:
            best_val, best_perm = score[k], perms[k]
    if best_val == -INF:
        raise Infeasible("no order satisfies the disruption constraints")
    sched = Schedule.earliest(inst, [inst.jobs[k].id for k in best_perm])
    rep = evaluate_schedule(inst, sched, diagnostics={"iterations": math.factorial(n1), "tolerance": TOL})
    comp = {i: 0.0 for i in base_ids}
    if prob.variant == "NA1":
        comp = {i: max(0.0, ref[i] - rep.per_job_utility[i]) for i in base_ids}
    elif prob.variant == "NA3":
        vals = [rep.per_job_utility[i] for i in base_ids]
        level = water_level(vals, R)
        comp = {i: max(0.0, level - rep.per_job_utility[i]) for i in base_ids}
    rep.diagnostics["objective"] = float(best_val)
    return rep, comp
