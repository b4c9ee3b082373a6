"""Command-line front end: instance documents, solver dispatch, reports.

Instance documents are JSON objects::

    {"version": "fairsched/1",
     "jobs": [{"id": "1", "p": 2, "r": 0, "d": null,
               "utility": {"kind": "linear", "a": 1, "b": 10}}],
     "resched": {"new_job": {...}, "budget": 0, "problem": "NA3"},
     "metadata": {...}}

``utility.kind`` is ``linear`` (``a``, ``b``), ``piecewise`` (``times``,
``values``, optional ``left_values``, ``tail_slope``) or ``area`` (``A``,
``P``). ``resched`` and ``metadata`` are optional. Unknown keys are rejected.

CSV reports have the columns ``id,start,completion,utility`` followed by
footer lines ``# key,value``. Numbers use ``repr`` so they re-parse exactly.

Exit codes: 0 solved, 2 infeasible, 3 unsupported variant, 4 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import generators
from .adjust import adjusted_instance, area_schedule, budget_adjust
from .bilevel import TargetSpec, enforce_nonneg, enforce_signed
from .core import (
    AreaParam,
    Infeasible,
    Instance,
    Job,
    Linear,
    PiecewiseLinear,
    Schedule,
    SchedulingError,
    SizeLimitExceeded,
    SolveReport,
    UnsupportedVariant,
    evaluate_schedule,
)
from .duedates import bounded_late_maxmin
from .maxmin import BinarySearchConfig, binary_search_solve, max_min_greedy, system_optimal_linear
from .oracle import OracleConfig, brute_force, brute_force_discard
from .release import dp_single_release, equal_time_maxmin, unit_time_solve
from .resched import ReschedProblem, resched_solve

FORMAT_VERSION = "fairsched/1"

EXIT_OK, EXIT_INFEASIBLE, EXIT_UNSUPPORTED, EXIT_INPUT = 0, 2, 3, 4

VARIANTS = (
    "maxmin",
    "binary-search",
    "wspt",
    "single-release",
    "unit-time",
    "equal-time",
    "bounded-late",
    "adjust",
    "area",
    "resched",
    "bilevel",
)


class InputError(Exception):
    """Document problem with a stable code and the offending location."""

    def __init__(self, code: str, where: str, message: str):
        super().__init__(f"{code} at {where}: {message}")
        self.code = code
        self.where = where


# error codes
E_SYNTAX = "E_SYNTAX"
E_SCHEMA = "E_SCHEMA"
E_DUPLICATE_ID = "E_DUPLICATE_ID"
E_NEGATIVE_DURATION = "E_NEGATIVE_DURATION"
E_INCREASING_UTILITY = "E_INCREASING_UTILITY"
E_INVARIANT = "E_INVARIANT"

_JOB_KEYS = {"id", "p", "r", "d", "utility"}
_UTILITY_KEYS = {
    "linear": {"kind", "a", "b"},
    "piecewise": {"kind", "times", "values", "left_values", "tail_slope"},
    "area": {"kind", "A", "P"},
}
_TOP_KEYS = {"version", "jobs", "resched", "metadata", "variant"}


@dataclass
class Document:
    instance: Instance
    resched: dict | None = None
    metadata: dict | None = None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(E_SCHEMA, where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InputError(E_SCHEMA, where, "number must be finite")
    return float(value)


def _strict_keys(obj, allowed: set, where: str, required=()):
    if not isinstance(obj, dict):
        raise InputError(E_SCHEMA, where, "expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise InputError(E_SCHEMA, where, f"unknown field(s) {extra}")
    for key in required:
        if key not in obj:
            raise InputError(E_SCHEMA, where, f"missing field {key!r}")


def _parse_utility(obj, where: str):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError(E_SCHEMA, where, "utility needs a 'kind'")
    kind = obj["kind"]
    if kind not in _UTILITY_KEYS:
        raise InputError(E_SCHEMA, where, f"unknown utility kind {kind!r}")
    if kind == "linear":
        _strict_keys(obj, _UTILITY_KEYS[kind], where, ("a", "b"))
        a = _number(obj["a"], where + ".a")
        if a < 0:
            raise InputError(E_INCREASING_UTILITY, where + ".a", f"slope magnitude a={a} makes utility increase")
        return Linear(a, _number(obj["b"], where + ".b"))
    if kind == "area":
        _strict_keys(obj, _UTILITY_KEYS[kind], where, ("A", "P"))
        try:
            return AreaParam(_number(obj["A"], where + ".A"), _number(obj["P"], where + ".P"))
        except ValueError as exc:
            raise InputError(E_INVARIANT, where, str(exc)) from None
    _strict_keys(obj, _UTILITY_KEYS[kind], where, ("times", "values"))
    times = [_number(t, f"{where}.times[{i}]") for i, t in enumerate(obj["times"])]
    values = [_number(v, f"{where}.values[{i}]") for i, v in enumerate(obj["values"])]
    left = obj.get("left_values")
    if left is not None:
        left = [_number(v, f"{where}.left_values[{i}]") for i, v in enumerate(left)]
    tail = _number(obj.get("tail_slope", 0.0), where + ".tail_slope")
    try:
        return PiecewiseLinear(tuple(times), tuple(values), None if left is None else tuple(left), tail)
    except ValueError as exc:
        code = E_INCREASING_UTILITY if ("increase" in str(exc) or "upward" in str(exc) or "tail" in str(exc)) else E_INVARIANT
        raise InputError(code, where, str(exc)) from None


def _parse_job(obj, where: str) -> Job:
    _strict_keys(obj, _JOB_KEYS, where, ("id", "p", "utility"))
    jid = obj["id"]
    if not isinstance(jid, (str, int)) or isinstance(jid, bool):
        raise InputError(E_SCHEMA, where + ".id", "id must be a string or integer")
    jid = str(jid)
    where = f"{where} (job {jid!r})"
    p = _number(obj["p"], where + ".p")
    if p <= 0:
        raise InputError(E_NEGATIVE_DURATION, where + ".p", f"duration must be positive, got {p}")
    r = _number(obj.get("r", 0.0), where + ".r")
    if r < 0:
        raise InputError(E_NEGATIVE_DURATION, where + ".r", f"release date must be nonnegative, got {r}")
    d = obj.get("d")
    d = None if d is None else _number(d, where + ".d")
    return Job(jid, p, _parse_utility(obj["utility"], where + ".utility"), r, d)


def parse_document(text: str) -> Document:
    """Parse and validate an instance document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(E_SYNTAX, f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    _strict_keys(obj, _TOP_KEYS, "document", ("version", "jobs"))
    if obj["version"] != FORMAT_VERSION:
        raise InputError(E_SCHEMA, "version", f"unsupported version {obj['version']!r}")
    if not isinstance(obj["jobs"], list) or not obj["jobs"]:
        raise InputError(E_SCHEMA, "jobs", "expected a nonempty list")
    jobs, seen = [], set()
    for k, item in enumerate(obj["jobs"]):
        job = _parse_job(item, f"jobs[{k}]")
        if job.id in seen:
            raise InputError(E_DUPLICATE_ID, f"jobs[{k}]", f"duplicate job id {job.id!r}")
        seen.add(job.id)
        jobs.append(job)
    resched = obj.get("resched")
    if resched is not None:
        _strict_keys(resched, {"new_job", "budget", "problem"}, "resched", ("new_job",))
        new = _parse_job(resched["new_job"], "resched.new_job")
        if new.id in seen:
            raise InputError(E_DUPLICATE_ID, "resched.new_job", f"duplicate job id {new.id!r}")
        resched = {
            "new_job": new,
            "budget": _number(resched.get("budget", 0.0), "resched.budget"),
            "problem": resched.get("problem", "NA3"),
        }
    return Document(Instance(tuple(jobs)), resched, obj.get("metadata"))


def parse_instance(text: str) -> Instance:
    return parse_document(text).instance


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _utility_obj(u) -> dict:
    if isinstance(u, Linear):
        return {"kind": "linear", "a": u.a, "b": u.b}
    if isinstance(u, AreaParam):
        return {"kind": "area", "A": u.A, "P": u.P}
    out = {"kind": "piecewise", "times": list(u.times), "values": list(u.values)}
    if tuple(u.left_values) != tuple(u.values):
        out["left_values"] = list(u.left_values)
    out["tail_slope"] = u.tail_slope
    return out


def _job_obj(job: Job) -> dict:
    out = {"id": job.id, "p": job.p, "utility": _utility_obj(job.utility)}
    if job.r:
        out["r"] = job.r
    if job.d is not None:
        out["d"] = job.d
    return out


def emit_document(inst: Instance, resched: dict | None = None, metadata: dict | None = None) -> str:
    doc = {"version": FORMAT_VERSION, "jobs": [_job_obj(j) for j in inst.jobs]}
    if resched is not None:
        doc["resched"] = {
            "new_job": _job_obj(resched["new_job"]),
            "budget": resched.get("budget", 0.0),
            "problem": resched.get("problem", "NA3"),
        }
    if metadata:
        doc["metadata"] = metadata
    return json.dumps(doc, indent=1)


def emit(inst: Instance) -> str:
    return emit_document(inst)


def _scalar(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def emit_report(inst: Instance, rep: SolveReport, fmt: str = "table") -> str:
    starts = rep.schedule.starts
    comp = rep.schedule.completions(inst)
    rows = [(i, starts[i], comp[i], rep.per_job_utility[i]) for i in rep.schedule.order]
    footer = [("u_min", rep.u_min), ("u_glob", rep.u_glob)]
    footer += [(k, _scalar(v)) for k, v in sorted(rep.diagnostics.items()) if isinstance(_scalar(v), (int, float, str))]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "start", "completion", "utility"])
        for i, s, c, u in rows:
            w.writerow([i, repr(float(s)), repr(float(c)), repr(float(u))])
        for k, v in footer:
            buf.write(f"# {k},{repr(float(v)) if isinstance(v, float) else v}\n")
        return buf.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    width = max(2, max(len(i) for i, *_ in rows))
    lines = [f"{'id':>{width}}  {'start':>12}  {'completion':>12}  {'utility':>14}"]
    for i, s, c, u in rows:
        lines.append(f"{i:>{width}}  {s:>12.6g}  {c:>12.6g}  {u:>14.8g}")
    lines.append("")
    lines += [f"{k}: {v:.10g}" if isinstance(v, float) else f"{k}: {v}" for k, v in footer]
    return "\n".join(lines) + "\n"


def parse_report(text: str):
    """Read a CSV report back into ``(Schedule, footer dict)``."""
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    footer = {}
    for ln in text.splitlines():
        if ln.startswith("# "):
            k, v = ln[2:].split(",", 1)
            try:
                footer[k] = float(v)
            except ValueError:
                footer[k] = v
    rows = list(csv.DictReader(body))
    return Schedule(tuple((r["id"], float(r["start"])) for r in rows)), footer


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _bs_cfg(args):
    return BinarySearchConfig(eps=args.eps) if args.eps is not None else None


def solve_document(doc: Document, args) -> tuple:
    """Run the solver named by ``args.variant`` and return its report (modified
    instance for ``adjust`` and ``bilevel``, combined instance for ``resched``)."""
    inst = doc.instance
    v = args.variant
    objective = args.objective or "maxmin"
    if v == "maxmin":
        return inst, max_min_greedy(inst, deadlines=any(j.d is not None for j in inst.jobs))
    if v == "binary-search":
        return inst, binary_search_solve(inst, _bs_cfg(args))
    if v == "wspt":
        return inst, system_optimal_linear(inst)
    if v == "single-release":
        return inst, dp_single_release(inst, objective, _bs_cfg(args))
    if v == "unit-time":
        return inst, unit_time_solve(inst, objective, args.method or "greedy")
    if v == "equal-time":
        return inst, equal_time_maxmin(inst, _bs_cfg(args))
    if v == "bounded-late":
        if objective != "maxmin":
            raise UnsupportedVariant("with a late-job bound only the fair objective has a solver")
        return inst, bounded_late_maxmin(inst, args.k if args.k is not None else 0, _bs_cfg(args))
    if v == "adjust":
        adj, rep = budget_adjust(inst, args.mode or "intercept_up", args.budget or 0.0)
        rep.diagnostics["budget_used"] = adj.budget_used
        rep.diagnostics["level"] = adj.level
        return adjusted_instance(inst, adj), rep
    if v == "area":
        return inst, area_schedule(inst)
    if v == "resched":
        if doc.resched is None:
            raise UnsupportedVariant("resched needs a 'resched' block naming the new job")
        R = args.budget if args.budget is not None else doc.resched["budget"]
        prob = ReschedProblem.from_base(inst, doc.resched["new_job"], R, doc.resched["problem"])
        rep, comp = resched_solve(prob, _bs_cfg(args), method=args.method or "bigm")
        rep.diagnostics["compensation"] = math.fsum(comp.values())
        return prob.combined(), rep
    if v == "bilevel":
        if not args.target:
            raise UnsupportedVariant("bilevel needs --target")
        mode = args.mode or "intercept"
        signed = mode.endswith("_signed")
        spec = TargetSpec(args.target.split(","), args.follower, mode.split("_")[0], signed)
        adj = enforce_signed(inst, spec) if signed else enforce_nonneg(inst, spec)
        mod = adjusted_instance(inst, adj)
        rep = evaluate_schedule(mod, Schedule.earliest(mod, spec.target_order))
        rep.diagnostics["budget_used"] = adj.budget_used
        return mod, rep
    raise UnsupportedVariant(f"unknown variant {v!r}")


def _oracle_objective(inst, rep, args) -> str:
    objective = args.objective or "maxmin"
    try:
        if args.variant == "bounded-late":
            ref = brute_force_discard(inst, args.k or 0)
        else:
            # due dates bind only through max_late; zero makes them hard
            late = 0 if any(j.d is not None for j in inst.jobs) else None
            ref = brute_force(inst, OracleConfig(objective=objective, max_late=late))
    except (SizeLimitExceeded, Infeasible) as exc:
        return f"oracle: skipped ({exc})"
    mine = rep.u_min if objective == "maxmin" else rep.u_glob
    theirs = ref.u_min if objective == "maxmin" else ref.u_glob
    return f"oracle: {objective} solver={mine:.10g} oracle={theirs:.10g} diff={mine - theirs:.3g}"


def run_file(path: str, args) -> tuple:
    """Solve one file; returns ``(exit code, stdout text, stderr text)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = parse_document(fh.read())
    except OSError as exc:
        return EXIT_INPUT, "", f"{path}: {exc}\n"
    except InputError as exc:
        return EXIT_INPUT, "", f"{path}: {exc}\n"
    except ValueError as exc:
        return EXIT_INPUT, "", f"{path}: {E_INVARIANT}: {exc}\n"
    try:
        inst, rep = solve_document(doc, args)
    except Infeasible as exc:
        return EXIT_INFEASIBLE, "", f"{path}: infeasible: {exc}\n"
    except UnsupportedVariant as exc:
        return EXIT_UNSUPPORTED, "", f"{path}: unsupported: {exc}\n"
    except (SchedulingError, ValueError) as exc:
        return EXIT_INPUT, "", f"{path}: {type(exc).__name__}: {exc}\n"
    err = ""
    if args.oracle and args.variant not in ("adjust", "bilevel", "resched", "area"):
        err = _oracle_objective(inst, rep, args) + "\n"
    return EXIT_OK, emit_report(inst, rep, args.format), err


def _cmd_solve(args) -> int:
    paths = args.inputs
    if args.jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda p: run_file(p, args), paths))
    else:
        results = [run_file(p, args) for p in paths]
    code = EXIT_OK
    for path, (rc, out, err) in zip(paths, results):
        if len(paths) > 1 and out:
            sys.stdout.write(f"== {path}\n")
        sys.stdout.write(out)
        sys.stderr.write(err)
        code = max(code, rc)
    return code


def _cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.family == "partition-release" and args.B is not None:
        g = generators.partition_release_from_B(args.B)
    else:
        try:
            g = generators.generate(args.family, rng, yes=not args.no, size=args.size)
        except ValueError as exc:
            sys.stderr.write(f"{exc}\n")
            return EXIT_INPUT
    resched = None
    if g.problem is not None:
        base = g.problem.base
        resched = {"new_job": g.problem.new_job, "budget": g.problem.budget_R, "problem": g.problem.variant}
    else:
        base = g.instance
    meta = {"family": g.family, **{k: _scalar(v) for k, v in g.metadata.items()}}
    text = emit_document(base, resched, meta)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairsched", description="Fair single-machine scheduling")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve instance documents")
    s.add_argument("inputs", nargs="+", help="instance document path(s)")
    s.add_argument("--variant", required=True, choices=VARIANTS)
    s.add_argument("--objective", choices=("maxmin", "sum"))
    s.add_argument("--k", type=int, help="late-job bound for bounded-late")
    s.add_argument("--budget", type=float, help="adjustment or rescheduling budget")
    s.add_argument(
        "--mode",
        help="adjust: intercept_up|slope_down|intercept_signed|slope_signed; "
        "bilevel: intercept|slope|intercept_signed|slope_signed",
    )
    s.add_argument("--method", help="unit-time: greedy|assignment; resched: bigm|deadline|exact")
    s.add_argument("--target", help="bilevel target order, comma separated ids")
    s.add_argument("--follower", default="fair_greedy", choices=("fair_greedy", "wspt"))
    s.add_argument("--eps", type=float, help="binary-search tolerance")
    s.add_argument("--format", default="table", choices=("table", "csv"))
    s.add_argument("--oracle", action="store_true", help="cross-check against brute force (n <= 9)")
    s.add_argument("--jobs", type=int, default=1, help="worker threads across input files")
    s.set_defaults(func=_cmd_solve)
    g = sub.add_parser("gen", help="generate a hardness-family instance")
    g.add_argument("--family", required=True, choices=generators.FAMILIES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=4, help="count of source numbers")
    g.add_argument("--B", type=int, help="partition-release: half-sum of a two-item yes-instance")
    g.add_argument("--no", action="store_true", help="plant a no-instance")
    g.add_argument("-o", "--output")
    g.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
