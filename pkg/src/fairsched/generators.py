"""Instance families built from classic hard problems.

Each generator maps a Partition, 3-Partition or maintenance-window
instance to a scheduling instance and records the planted yes/no answer
in ``metadata``, together with the quantity that decides it. These are
test-instance factories: at desk scale the exact solvers and the
brute-force oracle should recover every planted answer.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import Instance, Job, Linear
from .resched import ReschedProblem

FAMILIES = (
    "partition-release",
    "partition-release-sum",
    "three-partition-deadlines",
    "partition-resched",
    "maintenance-window",
    "lmax-release",
)


@dataclass
class Generated:
    family: str
    instance: Instance
    metadata: dict = field(default_factory=dict)
    problem: ReschedProblem | None = None


def has_subset_sum(values, target: int) -> bool:
    """Pseudo-polynomial subset-sum check on a Python int bitset."""
    reach = 1
    for v in values:
        reach |= reach << int(v)
    return target >= 0 and bool((reach >> int(target)) & 1)


def _has_three_partition(w, T: int) -> bool:
    w = sorted(w, reverse=True)
    bins = [0] * (len(w) // 3)

    def place(k):
        if k == len(w):
            return all(b == T for b in bins)
        tried = set()
        for i in range(len(bins)):
            if bins[i] + w[k] <= T and bins[i] not in tried:
                tried.add(bins[i])
                bins[i] += w[k]
                if place(k + 1):
                    return True
                bins[i] -= w[k]
        return False

    return place(0)


def partition_weights(rng: np.random.Generator, n: int, yes: bool, high: int = 6) -> list:
    """Random Partition weights with an even total and the requested answer."""
    if n < 2:
        raise ValueError("Partition needs at least two numbers")
    for _ in range(10000):
        w = [int(x) for x in rng.integers(1, high + 1, size=n)]
        if sum(w) % 2:
            continue
        if has_subset_sum(w, sum(w) // 2) == yes:
            return w
    raise RuntimeError(f"no {'yes' if yes else 'no'}-instance found for n={n}")


def _check_partition(weights):
    w = [int(x) for x in weights]
    if any(x <= 0 for x in w) or any(x != y for x, y in zip(w, weights)):
        raise ValueError("Partition weights must be positive integers")
    if sum(w) % 2:
        raise ValueError("Partition weights must have an even total")
    return w, sum(w) // 2


def partition_release(weights) -> Generated:
    """Fair objective, one released job.

    Item jobs have ``p = w`` and ``u = 2B - C/3``; the extra job has
    ``p = r = B`` and ``u = 5B - 2C``. The optimum ``u_min`` equals ``B``
    exactly when the weights split into two halves.
    """
    w, B = _check_partition(weights)
    n = len(w)
    jobs = [Job(str(k + 1), w[k], Linear(1 / 3, 2 * B)) for k in range(n)]
    jobs.append(Job(str(n + 1), B, Linear(2, 5 * B), r=B))
    answer = has_subset_sum(w, B)
    meta = {"answer": answer, "B": B, "threshold": B, "variant": "single-release", "objective": "maxmin"}
    return Generated("partition-release", Instance(tuple(jobs)), meta)


def partition_release_sum(weights, pbar: int = 1) -> Generated:
    """Sum objective, one released job with a steep slope.

    Item jobs have ``p = a = w``; the released job has ``p = pbar``,
    ``r = B`` and a slope large enough that it always starts at ``B``. An
    optimal schedule is balanced (the released job sits in ``[B, B+pbar]``
    with no idle time) exactly when the weights split into two halves.
    All balanced schedules share the value ``metadata["balanced_value"]``.
    """
    w, B = _check_partition(weights)
    n = len(w)
    span = 2 * B + pbar
    M = float(2 * B * span + 1)
    jobs = [Job(str(k + 1), w[k], Linear(w[k], w[k] * span)) for k in range(n)]
    jobs.append(Job(str(n + 1), pbar, Linear(M, M * span), r=B))
    sq = sum(x * x for x in w)
    # items in [0, B] and [B + pbar, span]; their sum of w*C does not depend on the split
    weighted = B * B + sq / 2 + (B + pbar) * B
    balanced = sum(x * span for x in w) - weighted + M * span - M * (B + pbar)
    answer = has_subset_sum(w, B)
    meta = {
        "answer": answer,
        "B": B,
        "pbar": pbar,
        "balanced_value": float(balanced),
        "released": str(n + 1),
        "variant": "single-release",
        "objective": "sum",
    }
    return Generated("partition-release-sum", Instance(tuple(jobs)), meta)


def three_partition_deadlines(weights, k: int = 0, sep: int = 1) -> Generated:
    """Sum objective with deadlines and at most ``k`` late jobs.

    ``3m`` item jobs (``p = w``, ``u = H - w C``, due at the common end),
    ``m - 1`` zero-utility separators of length ``sep`` due at
    ``i (T + sep)`` and ``k`` long jobs that are always late. The optimal
    total utility reaches ``metadata["u_yes"]`` exactly when the items
    split into triples of sum ``T``; otherwise it falls short by at least
    ``sep``.
    """
    w = [int(x) for x in weights]
    if len(w) % 3 or not w:
        raise ValueError("3-Partition needs 3m numbers")
    m = len(w) // 3
    W = sum(w)
    if W % m:
        raise ValueError("the total must be a multiple of m")
    T = W // m
    if not all(T < 4 * x < 2 * T for x in w):
        raise ValueError("3-Partition numbers must lie strictly between T/4 and T/2")
    E = m * T + (m - 1) * sep
    L = E
    H = max(w) * (E + k * L)
    jobs = [Job(f"i{j + 1}", w[j], Linear(w[j], H), d=E) for j in range(3 * m)]
    jobs += [Job(f"s{i}", sep, Linear(0, 0), d=i * (T + sep)) for i in range(1, m)]
    jobs += [Job(f"l{i}", L, Linear(0, 0), d=L) for i in range(1, k + 1)]
    sq = sum(x * x for x in w)
    u_yes = 3 * m * H - (sq + W * W) / 2 - sep * W * (m - 1) / 2
    meta = {
        "answer": _has_three_partition(w, T),
        "T": T,
        "k": k,
        "u_yes": float(u_yes),
        "gap": sep,
        "variant": "bounded-late",
        "objective": "sum",
    }
    return Generated("three-partition-deadlines", Instance(tuple(jobs)), meta)


def partition_resched(weights, eps: float | None = None) -> Generated:
    """Rescheduling with per-job compensation (NA1).

    ``n`` item jobs, a long steep job and a short flat job form the
    original instance; the new job has length ``B``. With budget
    ``R = M B + 3 B^2`` and ``M = 5 B^2``, the new job can finish by ``2B``
    exactly when the weights split into two halves.
    """
    w, B = _check_partition(weights)
    n = len(w)
    M = 5 * B * B
    eps = 1.0 / (4 * B) if eps is None else eps
    jobs = [Job(str(k + 1), w[k], Linear(w[k], 4 * B * (M + 2 * B))) for k in range(n)]
    jobs.append(Job(str(n + 1), M, Linear(M * M, 2.5 * M**3)))
    jobs.append(Job(str(n + 2), B, Linear(eps, 2 * M**3 - 3 * M * M * B)))
    base = Instance(tuple(jobs))
    horizon = base.P + B
    new = Job(str(n + 3), B, Linear(1, horizon))
    R = M * B + 3 * B * B
    prob = ReschedProblem.from_base(base, new, R, "NA1")
    meta = {
        "answer": has_subset_sum(w, B),
        "B": B,
        "M": M,
        "R": R,
        "deadline": 2 * B,
        "threshold": horizon - 2 * B,
        "variant": "resched",
    }
    return Generated("partition-resched", prob.combined(), meta, prob)


def maintenance_optimum(p, w, D: float, gamma: float) -> float:
    """Minimum ``sum w C`` with a break of length ``gamma`` starting by ``D``.

    The break starts right after some prefix of the sequence, so every
    (order, split) pair with a prefix ending by ``D`` is tried.
    """
    best = np.inf
    n = len(p)
    for perm in itertools.permutations(range(n)):
        t, prefix_cost, ends = 0.0, 0.0, [0.0]
        costs = [0.0]
        for j in perm:
            t += p[j]
            prefix_cost += w[j] * t
            ends.append(t)
            costs.append(prefix_cost)
        tail_w = np.cumsum([w[j] for j in reversed(perm)])[::-1].tolist() + [0.0]
        for s in range(n + 1):
            if ends[s] > D:
                break
            # every job after the split is pushed back by gamma
            best = min(best, costs[n] + gamma * tail_w[s])
    return float(best)


def maintenance_window(p, w, D: float, gamma: float, yes: bool = True) -> Generated:
    """Rescheduling with an aggregate budget (NA2).

    The new job plays the maintenance break: length ``gamma`` and target
    completion ``D + gamma``. Original jobs have ``a = w``. The budget is
    ``R = W - sum_j a_j C_j(old)`` for a threshold ``W`` set to the true
    optimum (yes) or one below it (no).
    """
    p = [float(x) for x in p]
    w = [float(x) for x in w]
    n = len(p)
    opt = maintenance_optimum(p, w, D, gamma)
    W = opt if yes else opt - 1.0
    span = sum(p) + gamma
    base = Instance.linear(p, w, [x * span for x in w])
    horizon = span
    new = Job(str(n + 1), gamma, Linear(1, horizon))
    probe = ReschedProblem.from_base(base, new, 0.0, "NA2")
    C = probe.base_schedule.completions(base)
    R = W - sum(w[k] * C[base.jobs[k].id] for k in range(n))
    prob = probe.with_variant("NA2", R)
    meta = {
        "answer": yes,
        "W": W,
        "optimum": opt,
        "R": R,
        "deadline": D + gamma,
        "threshold": horizon - (D + gamma),
        "variant": "resched",
    }
    return Generated("maintenance-window", prob.combined(), meta, prob)


def lmax_release(rng: np.random.Generator, n: int, yes: bool, big: float | None = None) -> Generated:
    """Fair objective with release dates via maximum lateness.

    ``u_j = d_j - C_j + M`` so that ``u_min >= M`` iff every job meets its
    due date. Yes-instances plant a schedule with idle gaps and set due
    dates at or after its completions; no-instances additionally give one
    job a due date before ``r + p``.
    """
    p = rng.integers(1, 5, size=n).astype(float)
    gaps = rng.integers(0, 3, size=n).astype(float)
    order = rng.permutation(n)
    r = np.zeros(n)
    d = np.zeros(n)
    t = 0.0
    for j in order:
        start = t + gaps[j]
        r[j] = float(rng.integers(0, int(start) + 1))
        t = start + p[j]
        d[j] = t + float(rng.integers(0, 3))
    if not yes:
        j = int(rng.integers(n))
        d[j] = r[j] + p[j] - 1
    M = float(big if big is not None else d.max() + p.sum() + r.max() + 1)
    jobs = [Job(str(k + 1), p[k], Linear(1, d[k] + M), r=r[k]) for k in range(n)]
    meta = {"answer": yes, "threshold": M, "variant": "general-release", "objective": "maxmin"}
    return Generated("lmax-release", Instance(tuple(jobs)), meta)


def generate(family: str, rng: np.random.Generator, yes: bool = True, size: int = 4, **kw) -> Generated:
    """Random member of ``family``; ``size`` is the number of source numbers."""
    if family == "partition-release":
        return partition_release(kw.get("weights") or partition_weights(rng, size, yes))
    if family == "partition-release-sum":
        return partition_release_sum(kw.get("weights") or partition_weights(rng, size, yes), kw.get("pbar", 1))
    if family == "three-partition-deadlines":
        weights = kw.get("weights") or ([4, 4, 5, 4, 4, 5] if yes else [4, 4, 4, 4, 4, 6])
        return three_partition_deadlines(weights, kw.get("k", 0))
    if family == "partition-resched":
        return partition_resched(kw.get("weights") or partition_weights(rng, size, yes, high=3))
    if family == "maintenance-window":
        p = rng.integers(1, 5, size=size).tolist()
        w = rng.integers(1, 5, size=size).tolist()
        D = float(rng.integers(0, int(sum(p)) + 1))
        gamma = float(rng.integers(1, 4))
        return maintenance_window(p, w, D, gamma, yes)
    if family == "lmax-release":
        return lmax_release(rng, size, yes)
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def partition_release_from_B(B: int) -> Generated:
    """Smallest yes-instance with half-sum ``B``: two items of length ``B``."""
    return partition_release([B, B])
