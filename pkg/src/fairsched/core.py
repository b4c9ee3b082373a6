"""Domain types, utility evaluation and schedule scoring.

Every solver in the package works on an immutable :class:`Instance` of
:class:`Job` objects. Utilities are non-increasing functions of the
completion time; three shapes are supported:

* :class:`Linear` -- ``b - a*C`` with ``a >= 0``
* :class:`PiecewiseLinear` -- breakpoints with optional downward jumps,
  segments closed on the left
* :class:`AreaParam` -- the best linear function of fixed area over
  ``[0, P]`` (triangle up to ``P/2``, flat afterwards)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

TOL = 1e-9

INF = math.inf


class SchedulingError(Exception):
    """Base class for all errors raised by the package."""


class UnsupportedVariant(SchedulingError):
    """The instance falls outside the variant a solver handles."""


class Infeasible(SchedulingError):
    """No schedule satisfies the hard constraints."""


class InvalidSchedule(SchedulingError):
    """A schedule violates one of its invariants."""


class ContractViolation(SchedulingError):
    """A caller-supplied object broke the documented contract."""


class SizeLimitExceeded(SchedulingError):
    """Exact enumeration requested above the configured size cap."""


# ---------------------------------------------------------------------------
# Utility functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """``u(C) = b - a*C``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= 0):
            raise ValueError(f"linear slope magnitude must be nonnegative, got a={self.a}")
        if not math.isfinite(self.b):
            raise ValueError("intercept must be finite")

    def __call__(self, C):
        return self.b - self.a * C

    def eval_array(self, C: np.ndarray) -> np.ndarray:
        return self.b - self.a * np.asarray(C, dtype=float)

    def inverse(self, target: float) -> float:
        if self.a == 0:
            return INF if self.b >= target else -INF
        if self.b < target:
            return -INF
        return (self.b - target) / self.a

    def shifted(self, delta: float) -> "Linear":
        return Linear(self.a, self.b + delta)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear non-increasing utility.

    ``times[k]`` are strictly increasing breakpoints starting at 0 and
    ``values[k]`` is the utility for completion exactly at ``times[k]``.
    On ``[times[k], times[k+1])`` the function falls linearly from
    ``values[k]`` to ``left_values[k+1]``; a downward jump happens at
    ``times[k+1]`` when ``left_values[k+1] > values[k+1]``. After the last
    breakpoint the function decreases with ``tail_slope``.
    """

    times: tuple
    values: tuple
    left_values: tuple | None = None
    tail_slope: float = 0.0

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.left_values is None:
            object.__setattr__(self, "left_values", values)
        else:
            object.__setattr__(self, "left_values", tuple(float(v) for v in self.left_values))
        left = self.left_values
        if len(times) == 0 or len(values) != len(times) or len(left) != len(times):
            raise ValueError("times, values and left_values must be nonempty and of equal length")
        if times[0] != 0.0:
            raise ValueError("first breakpoint must be at time 0")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("breakpoint times must be strictly increasing")
        if not (self.tail_slope >= 0):
            raise ValueError("tail slope must be nonnegative")
        for k in range(1, len(times)):
            if left[k] > values[k - 1] + TOL:
                raise ValueError(f"utility increases on segment ending at t={times[k]}")
            if values[k] > left[k] + TOL:
                raise ValueError(f"upward jump at t={times[k]}")

    @classmethod
    def capped(cls, cap: float, a: float, b: float) -> "PiecewiseLinear":
        """``min{cap, b - a*C}``: flat at ``cap`` until the due date ``(b-cap)/a``."""
        if a <= 0 or b <= cap:
            return cls((0.0,), (min(cap, b),), tail_slope=a)
        return cls((0.0, (b - cap) / a), (cap, cap), tail_slope=a)

    @classmethod
    def late_step(cls, a: float, b: float, due: float, late_value: float) -> "PiecewiseLinear":
        """``b - a*C`` up to ``due`` and constant ``late_value`` afterwards."""
        on_time_end = b - a * due
        if late_value > on_time_end:
            raise ValueError("late utility must not exceed the on-time utility at the due date")
        if due <= 0:
            return cls((0.0,), (late_value,))
        return cls((0.0, due), (b, late_value), (b, on_time_end))

    def _segment(self, C: float) -> int:
        return int(np.searchsorted(self.times, C, side="right")) - 1

    def __call__(self, C):
        if np.ndim(C):
            return self.eval_array(C)
        k = self._segment(C)
        if k < 0:
            return self.values[0]
        if k == len(self.times) - 1:
            return self.values[k] - self.tail_slope * (C - self.times[k])
        t0, t1 = self.times[k], self.times[k + 1]
        v0, v1 = self.values[k], self.left_values[k + 1]
        return v0 + (v1 - v0) * (C - t0) / (t1 - t0)

    def eval_array(self, C: np.ndarray) -> np.ndarray:
        C = np.asarray(C, dtype=float)
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        lv = np.asarray(self.left_values)
        k = np.clip(np.searchsorted(t, C, side="right") - 1, 0, len(t) - 1)
        out = v[k] - self.tail_slope * (C - t[k])
        inner = k < len(t) - 1
        if np.any(inner):
            ki = k[inner]
            t0, t1 = t[ki], t[ki + 1]
            out[inner] = v[ki] + (lv[ki + 1] - v[ki]) * (C[inner] - t0) / (t1 - t0)
        return out

    def inverse(self, target: float) -> float:
        times, values, left = self.times, self.values, self.left_values
        if values[0] < target:
            return -INF
        m = len(times) - 1
        if values[m] >= target:
            if self.tail_slope == 0:
                return INF
            return times[m] + (values[m] - target) / self.tail_slope
        # last segment whose start value still reaches the target
        k = max(i for i in range(m) if values[i] >= target)
        v0, v1 = values[k], left[k + 1]
        if v1 >= target:
            return times[k + 1]
        return times[k] + (v0 - target) * (times[k + 1] - times[k]) / (v0 - v1)

    def shifted(self, delta: float) -> "PiecewiseLinear":
        return PiecewiseLinear(
            self.times,
            tuple(v + delta for v in self.values),
            tuple(v + delta for v in self.left_values),
            self.tail_slope,
        )


@dataclass(frozen=True)
class AreaParam:
    """Fixed-area utility over the horizon ``[0, P]``.

    Triangle ``2A/P * (1 - C/P)`` for ``C <= P/2`` and flat ``A/P`` beyond.
    ``offset`` is only used by normalisation shifts.
    """

    A: float
    P: float
    offset: float = 0.0

    def __post_init__(self):
        if not (self.A >= 0):
            raise ValueError("area must be nonnegative")
        if not (self.P > 0):
            raise ValueError("horizon P must be positive")

    def slope_in_area(self, C: float) -> float:
        """Derivative of the utility with respect to ``A`` at completion ``C``."""
        if C <= self.P / 2:
            return 2.0 / self.P * (1.0 - C / self.P)
        return 1.0 / self.P

    def __call__(self, C):
        if np.ndim(C):
            return self.eval_array(C)
        return self.A * self.slope_in_area(C) + self.offset

    def eval_array(self, C: np.ndarray) -> np.ndarray:
        C = np.asarray(C, dtype=float)
        P = self.P
        tri = 2.0 * self.A / P * (1.0 - C / P)
        return np.where(C <= P / 2, tri, self.A / P) + self.offset

    def inverse(self, target: float) -> float:
        P, A = self.P, self.A
        flat = A / P + self.offset
        peak = 2.0 * A / P + self.offset
        if peak < target:
            return -INF
        if flat >= target:
            return INF
        return P * (1.0 - (target - self.offset) * P / (2.0 * A))

    def shifted(self, delta: float) -> "AreaParam":
        return AreaParam(self.A, self.P, self.offset + delta)

    def as_piecewise(self) -> PiecewiseLinear:
        P, A = self.P, self.A
        return PiecewiseLinear((0.0, P / 2), (2 * A / P + self.offset, A / P + self.offset))


UtilityFunction = Union[Linear, PiecewiseLinear, AreaParam]


def eval_utility(u: UtilityFunction, C: float) -> float:
    """Utility for completion at ``C``; at a jump the right-hand value holds."""
    if C < 0:
        raise ValueError("completion time must be nonnegative")
    return float(u(C))


def inverse_utility(u: UtilityFunction, target: float) -> float:
    """Latest completion time still reaching ``target``.

    Returns ``sup{C : u(C) >= target}``; ``inf`` when the utility never
    drops below the target and ``-inf`` when even ``u(0)`` misses it.
    """
    return float(u.inverse(target))


def due_date_for(u: UtilityFunction, target: float) -> float:
    """Deadline such that ``C <= deadline`` implies ``u(C) >= target``.

    Equal to :func:`inverse_utility` unless a downward jump sits at the
    supremum or just past it. The deadline then moves below the jump by more
    than the comparison tolerance, since feasibility checks accept
    ``C <= d + TOL`` and would otherwise let a job finish after the drop.
    """
    d = u.inverse(target)
    if not math.isfinite(d):
        return float(d)
    slack = 2 * TOL * max(1.0, abs(d))
    if u(d) < target - TOL:
        return float(d - slack)
    if isinstance(u, PiecewiseLinear):
        for T, v in zip(u.times[1:], u.values[1:]):
            if d < T <= d + slack and v < target - TOL:
                return float(min(d, T - slack))
    return float(d)


# ---------------------------------------------------------------------------
# Jobs, instances, schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Job:
    id: str
    p: float
    utility: UtilityFunction
    r: float = 0.0
    d: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        if not (self.p > 0):
            raise ValueError(f"job {self.id}: duration must be positive, got {self.p}")
        if not (self.r >= 0):
            raise ValueError(f"job {self.id}: release date must be nonnegative, got {self.r}")

    def with_utility(self, utility: UtilityFunction) -> "Job":
        return Job(self.id, self.p, utility, self.r, self.d)


@dataclass(frozen=True)
class Instance:
    """A nonempty job set. Dense index ``k`` is the position in ``jobs``."""

    jobs: tuple
    P: float = field(init=False)

    def __post_init__(self):
        jobs = tuple(self.jobs)
        object.__setattr__(self, "jobs", jobs)
        if not jobs:
            raise ValueError("an instance needs at least one job")
        ids = [j.id for j in jobs]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ValueError(f"duplicate job id {dup!r}")
        object.__setattr__(self, "P", float(sum(j.p for j in jobs)))
        object.__setattr__(self, "_index", {j.id: k for k, j in enumerate(jobs)})

    @classmethod
    def linear(cls, p, a, b, r=None, d=None, ids=None) -> "Instance":
        """Convenience constructor for linear-utility instances."""
        n = len(p)
        ids = ids or [str(k + 1) for k in range(n)]
        r = r if r is not None else [0.0] * n
        d = d if d is not None else [None] * n
        return cls(tuple(Job(ids[k], p[k], Linear(a[k], b[k]), r[k], d[k]) for k in range(n)))

    def __len__(self):
        return len(self.jobs)

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def ids(self) -> list:
        return [j.id for j in self.jobs]

    def index(self, job_id) -> int:
        return self._index[str(job_id)]

    def job(self, job_id) -> Job:
        return self.jobs[self.index(job_id)]

    @property
    def p(self) -> np.ndarray:
        return np.array([j.p for j in self.jobs], dtype=float)

    @property
    def r(self) -> np.ndarray:
        return np.array([j.r for j in self.jobs], dtype=float)

    @property
    def has_release(self) -> bool:
        return any(j.r > 0 for j in self.jobs)

    @property
    def all_linear(self) -> bool:
        return all(isinstance(j.utility, Linear) for j in self.jobs)

    def horizon(self) -> float:
        """Upper bound on every completion time of an idle-minimal schedule."""
        return max(j.r for j in self.jobs) + self.P

    def replace(self, jobs) -> "Instance":
        return Instance(tuple(jobs))


@dataclass(frozen=True)
class Schedule:
    """Ordered ``(job id, start time)`` pairs; idle time is allowed."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(i), float(s)) for i, s in self.entries))

    @property
    def order(self) -> list:
        return [i for i, _ in self.entries]

    @property
    def starts(self) -> dict:
        return dict(self.entries)

    def completions(self, inst: Instance) -> dict:
        return {i: s + inst.job(i).p for i, s in self.entries}

    @classmethod
    def earliest(cls, inst: Instance, order: Sequence) -> "Schedule":
        """Start every job as soon as released and the machine is free."""
        t = 0.0
        entries = []
        for jid in order:
            job = inst.job(jid)
            s = max(t, job.r)
            entries.append((job.id, s))
            t = s + job.p
        return cls(tuple(entries))

    def validate(self, inst: Instance, tol: float = TOL) -> None:
        seen = set()
        prev_end = -INF
        for pos, (jid, s) in enumerate(self.entries):
            if jid not in inst._index:
                raise InvalidSchedule(f"entry {pos}: unknown job id {jid!r}")
            if jid in seen:
                raise InvalidSchedule(f"entry {pos}: job {jid!r} appears twice")
            seen.add(jid)
            job = inst.job(jid)
            if s < job.r - tol:
                raise InvalidSchedule(f"entry {pos}: job {jid!r} starts at {s} before its release {job.r}")
            if s < prev_end - tol:
                raise InvalidSchedule(f"entry {pos}: job {jid!r} starts at {s} before the machine is free at {prev_end}")
            prev_end = s + job.p
        if len(seen) != inst.n:
            missing = [i for i in inst.ids if i not in seen]
            raise InvalidSchedule(f"jobs missing from schedule: {missing}")


@dataclass
class SolveReport:
    schedule: Schedule
    per_job_utility: dict
    u_min: float
    u_glob: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def order(self) -> list:
        return self.schedule.order


def evaluate_schedule(
    inst: Instance,
    s: Schedule,
    counted: Iterable | None = None,
    diagnostics: Mapping | None = None,
) -> SolveReport:
    """Score a schedule.

    ``counted`` restricts ``u_min``/``u_glob`` to a subset of jobs (used
    when late jobs are discarded); excluded jobs are reported with utility 0.
    """
    s.validate(inst)
    comp = s.completions(inst)
    keep = set(inst.ids) if counted is None else {str(i) for i in counted}
    util = {}
    for jid in s.order:
        util[jid] = float(inst.job(jid).utility(comp[jid])) if jid in keep else 0.0
    vals = [util[j] for j in util if j in keep]
    u_min = min(vals) if vals else INF
    u_glob = math.fsum(vals)
    return SolveReport(s, util, u_min, u_glob, dict(diagnostics or {}))


def normalize_and_ranges(inst: Instance, ranges: bool = True):
    """Shift utilities to be nonnegative and compute attainable ranges.

    Returns ``(shifted_instance, shift, ranges)`` where ``ranges`` maps each
    id to ``a_j * (P - p_j)``. Ranges are only known in closed form for
    linear utilities without release dates; pass ``ranges=False`` to get
    the shift alone for other instances.
    """
    cbar = inst.horizon()
    shift = max(0.0, -min(float(j.utility(cbar)) for j in inst.jobs))
    shifted = inst if shift == 0 else inst.replace(j.with_utility(j.utility.shifted(shift)) for j in inst.jobs)
    if not ranges:
        return shifted, shift, None
    if not inst.all_linear or inst.has_release:
        raise UnsupportedVariant("utility ranges are available only for linear utilities without release dates")
    rng = {j.id: j.utility.a * (inst.P - j.p) for j in inst.jobs}
    return shifted, shift, rng


def normalized_utilities(report: SolveReport, ranges: Mapping) -> dict:
    """Utility divided by the agent's attainable range (zero ranges map to inf)."""
    out = {}
    for jid, u in report.per_job_utility.items():
        rg = ranges[jid]
        out[jid] = u / rg if rg > 0 else INF
    return out


def utility_matrix(inst: Instance, times: np.ndarray) -> np.ndarray:
    """``M[j, t]`` = utility of job ``j`` completing at ``times[t]``."""
    times = np.asarray(times, dtype=float)
    return np.vstack([j.utility.eval_array(times) for j in inst.jobs])
