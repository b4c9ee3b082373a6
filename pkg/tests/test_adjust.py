import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from fairsched import (
    AreaParam,
    Instance,
    TargetSpec,
    UnsupportedVariant,
    adjusted_instance,
    area_schedule,
    budget_adjust,
    greedy_order,
    max_min_greedy,
    single_agent_curve,
    verify_target,
    water_level,
)
from fairsched.adjust import MODES, break_value_iterative, break_value_select

from conftest import random_linear


def positive_slopes(rng, n):
    inst = random_linear(rng, n)
    return Instance.linear(inst.p.tolist(), [max(1.0, j.utility.a) for j in inst.jobs], [j.utility.b for j in inst.jobs])


def lp_level(u, C, a, mode, budget):
    """Best minimum utility on the fixed schedule, as a small LP in (delta, t)."""
    n = len(u)
    gain = np.ones(n) if mode.startswith("intercept") else np.asarray(C, dtype=float)
    # maximise t  s.t.  t - gain_j delta_j <= u_j,  sum delta <= budget
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = -np.diag(gain)
    A[:n, n] = 1.0
    A[n, :n] = 1.0
    rhs = np.concatenate([u, [budget]])
    lower = 0.0 if mode in ("intercept_up", "slope_down") else None
    upper = (lambda k: a[k]) if mode.startswith("slope") else (lambda k: None)
    bounds = [(lower, upper(k)) for k in range(n)] + [(None, None)]
    res = linprog(np.r_[np.zeros(n), -1.0], A_ub=A, b_ub=rhs, bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


def test_zero_budget_is_no_change():
    inst = Instance.linear([1, 2, 3], [1, 2, 1], [10, 12, 15])
    fair = max_min_greedy(inst).u_min
    for mode in ("intercept_up", "slope_down"):
        adj, rep = budget_adjust(inst, mode, 0.0)
        assert all(d == 0 for d in adj.per_job_delta.values())
        assert rep.u_min == fair == adj.achieved_u_min


def test_two_tied_jobs():
    inst = Instance.linear([1, 1], [1, 1], [3, 3])
    adj, rep = budget_adjust(inst, "intercept_up", 1.0)
    second = rep.order[1]
    assert adj.per_job_delta[second] == 1.0
    assert adj.per_job_delta[rep.order[0]] == 0.0
    assert rep.u_min == 2.0


def test_large_budget_intercept_level():
    inst = Instance.linear([1, 2, 3], [1, 2, 1], [10, 12, 15])
    base = max_min_greedy(inst)
    u = np.array(list(base.per_job_utility.values()))
    budget = 3 * (u.max() - u.min()) + 6
    adj, rep = budget_adjust(inst, "intercept_up", budget)
    assert adj.level == pytest.approx((budget + u.sum()) / 3)
    assert all(v == pytest.approx(adj.level) for v in rep.per_job_utility.values())


def test_slope_modes_need_positive_slopes():
    inst = Instance.linear([1, 2], [0, 1], [5, 5])
    with pytest.raises(UnsupportedVariant):
        budget_adjust(inst, "slope_down", 1.0)


def test_water_level_closed_form():
    assert water_level([1, 2, 6], 3) == 3.0
    assert water_level([1, 2, 6], 0) == 1.0
    assert water_level([0, 0], 4, weights=[1, 3]) == 1.0


def test_break_value_select_equals_iterative_random():
    rng = np.random.default_rng(41)
    for _ in range(500):
        n = int(rng.integers(1, 30))
        values = rng.integers(-20, 20, n).astype(float).tolist()
        weights = rng.uniform(0.1, 3, n).tolist() if rng.random() < 0.5 else None
        budget = float(rng.uniform(0, 50))
        assert water_level(values, budget, weights, "select") == water_level(values, budget, weights, "iterative")
        w = weights or [1.0] * n
        assert break_value_select(values, budget, w) == break_value_iterative(values, budget, w)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=20),
    st.floats(0, 1e4, allow_nan=False),
)
def test_water_level_spends_budget(values, budget):
    L = water_level(values, budget)
    assert L >= min(values)
    spent = math.fsum(max(0.0, L - v) for v in values)
    assert spent == pytest.approx(budget, rel=1e-9, abs=1e-6)


@pytest.mark.parametrize("mode", MODES)
def test_level_matches_lp(mode):
    rng = np.random.default_rng(42)
    for _ in range(80):
        inst = positive_slopes(rng, int(rng.integers(1, 7)))
        budget = float(rng.integers(0, 25))
        adj, rep = budget_adjust(inst, mode, budget)
        base = max_min_greedy(inst)
        C = base.schedule.completions(inst)
        ids = base.order
        u = np.array([base.per_job_utility[i] for i in ids])
        Cs = [C[i] for i in ids]
        a = [inst.job(i).utility.a for i in ids]
        assert rep.u_min == pytest.approx(lp_level(u, Cs, a, mode, budget), abs=1e-6)
        assert rep.order == base.order


def test_intercept_level_on_exact_grid():
    """With integer data the optimum level is a multiple of 1/12 for n <= 4."""
    rng = np.random.default_rng(43)
    grid = np.arange(-200 * 12, 200 * 12 + 1) / 12
    for _ in range(100):
        inst = positive_slopes(rng, int(rng.integers(1, 5)))
        budget = float(rng.integers(0, 15))
        u = np.array(list(max_min_greedy(inst).per_job_utility.values()))
        need = np.maximum(0.0, grid[:, None] - u[None, :]).sum(axis=1)
        best = grid[need <= budget + 1e-12].max()
        assert budget_adjust(inst, "intercept_up", budget)[1].u_min == pytest.approx(best, abs=1e-9)


@pytest.mark.parametrize("mode", ["intercept_up", "intercept_signed"])
def test_intercept_rerun_keeps_order(mode):
    rng = np.random.default_rng(44)
    for _ in range(200):
        inst = positive_slopes(rng, int(rng.integers(1, 7)))
        adj, _ = budget_adjust(inst, mode, float(rng.integers(0, 20)))
        assert max_min_greedy(adjusted_instance(inst, adj)).order == max_min_greedy(inst).order


@pytest.mark.parametrize("mode", ["slope_down", "slope_signed"])
def test_slope_rerun_keeps_order_unless_a_slope_vanishes(mode):
    """A slope cut to zero leaves a constant utility that ties; the order then
    changes but the base order stays a greedy choice with the same value."""
    rng = np.random.default_rng(45)
    for _ in range(200):
        inst = positive_slopes(rng, int(rng.integers(1, 7)))
        adj, rep = budget_adjust(inst, mode, float(rng.integers(0, 20)))
        mod = adjusted_instance(inst, adj)
        again = max_min_greedy(mod)
        if again.order != rep.order:
            assert any(j.utility.a == 0 for j in mod.jobs)
            assert again.u_min == pytest.approx(rep.u_min, abs=1e-9)
            assert verify_target(mod, TargetSpec(rep.order))


def test_area_equal_areas_keep_id_order():
    P = 6.0
    inst = Instance.linear([1, 2, 3], [1, 1, 1], [0, 0, 0])
    inst = inst.replace(j.with_utility(AreaParam(4.0, P)) for j in inst.jobs)
    assert area_schedule(inst).order == ["1", "2", "3"]


def test_area_matches_greedy_on_explicit_functions():
    rng = np.random.default_rng(46)
    for _ in range(50):
        n = 6
        p = rng.integers(1, 5, n).astype(float)
        P = float(p.sum())
        A = rng.integers(1, 30, n).astype(float)
        inst = Instance.linear(p.tolist(), [0] * n, [0] * n)
        inst = inst.replace(j.with_utility(AreaParam(A[k], P)) for k, j in enumerate(inst.jobs))
        explicit = inst.replace(j.with_utility(j.utility.as_piecewise()) for j in inst.jobs)
        assert area_schedule(inst).u_min == pytest.approx(max_min_greedy(explicit).u_min, abs=1e-9)


def test_curve_single_piece_intercept():
    inst = Instance.linear([1, 1, 1], [1, 1, 1], [3, 10, 20])
    curve = single_agent_curve(inst, "1", "intercept", 0.5)
    assert len(curve.pieces) == 1 and curve.pieces[0][2] == 1.0


def test_curve_slope_of_last_job():
    inst = Instance.linear([1, 2, 3], [1, 1, 2], [5, 6, 40])
    last = max_min_greedy(inst).order[-1]
    a = inst.job(last).utility.a
    curve = single_agent_curve(inst, last, "slope", a)
    assert len(curve.pieces) == 1
    assert curve.pieces[0][2] == inst.P
    assert curve.best(a)[0] == a


def test_curve_breakpoints_move_the_agent():
    rng = np.random.default_rng(47)
    for _ in range(20):
        inst = positive_slopes(rng, 4)
        i = inst.ids[int(rng.integers(4))]
        curve = single_agent_curve(inst, i, "intercept", 40.0)
        k = inst.index(i)
        for lo, hi, slope, icpt in curve.pieces[:-1]:
            def position(delta):
                j = inst.jobs[k]
                mod = inst.replace(j.with_utility(j.utility.shifted(delta)) if q == k else inst.jobs[q] for q in range(4))
                return greedy_order(mod, favor=k).index(k)

            assert position(hi + 1e-6) > position(hi - 1e-6)
        # the curve value is the agent's utility under the re-solved greedy
        for delta in np.linspace(0, 40, 17):
            j = inst.jobs[k]
            mod = inst.replace(j.with_utility(j.utility.shifted(delta)) if q == k else inst.jobs[q] for q in range(4))
            order = greedy_order(mod, favor=k)
            C = np.cumsum(mod.p[order])[order.index(k)]
            assert curve.value(delta) == pytest.approx(float(mod.jobs[k].utility(C)), abs=1e-9)
