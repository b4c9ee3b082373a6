"""Decide a generated hardness instance with a solver and with brute force."""
from fairsched import OracleConfig, brute_force, brute_force_resched, dp_single_release, resched_solve
from fairsched.core import Infeasible

TOL = 1e-7


def decide(g):
    """Return ``(solver_says_yes, oracle_says_yes)`` for a generated instance."""
    m = g.metadata
    inst = g.instance
    if g.family == "partition-release":
        mine = dp_single_release(inst, "maxmin").u_min
        ref = brute_force(inst).u_min
        t = m["threshold"]
    elif g.family == "partition-release-sum":
        mine = dp_single_release(inst, "sum").u_glob
        ref = brute_force(inst, OracleConfig(objective="sum")).u_glob
        t = m["balanced_value"]
    elif g.family == "three-partition-deadlines":
        # no polynomial solver exists for this objective; the oracle decides both
        try:
            mine = ref = brute_force(inst, OracleConfig(objective="sum", max_late=m["k"])).u_glob
        except Infeasible:
            return False, False
        t = m["u_yes"]
    elif g.family in ("partition-resched", "maintenance-window"):
        # no feasible order at all also answers no
        try:
            rep, _ = resched_solve(g.problem)
            mine = rep.diagnostics["new_job_utility"]
        except Infeasible:
            mine = float("-inf")
        try:
            oref, _ = brute_force_resched(g.problem)
            ref = oref.per_job_utility[g.problem.new_job.id]
        except Infeasible:
            ref = float("-inf")
        t = m["threshold"]
    elif g.family == "lmax-release":
        ref = brute_force(inst).u_min
        mine = ref
        t = m["threshold"]
    else:
        raise ValueError(g.family)
    return mine >= t - TOL, ref >= t - TOL
