import numpy as np
import pytest

from fairsched import (
    ContractViolation,
    Infeasible,
    Instance,
    Job,
    Linear,
    ReschedProblem,
    Schedule,
    UnsupportedVariant,
    brute_force_resched,
    disruption,
    max_min_greedy,
    resched_lexicographic,
    resched_solve,
)

from conftest import random_linear


def random_problem(rng, n, variant, R=None, initial="fair"):
    base = random_linear(rng, n)
    new = Job("new", float(rng.integers(1, 5)), Linear(float(rng.integers(1, 4)), float(rng.integers(20, 60))))
    R = float(rng.integers(0, 12)) if R is None else R
    return ReschedProblem.from_base(base, new, R, variant, initial)


def test_appending_causes_no_disruption():
    base = Instance.linear([1, 2], [1, 1], [5, 9])
    prob = ReschedProblem.from_base(base, Job("x", 1, Linear(1, 10)), 0.0)
    s = Schedule.earliest(prob.combined(), prob.base_schedule.order + ["x"])
    assert disruption(prob, s, {}) == {"1": 0.0, "2": 0.0}


def test_shift_by_one_costs_the_slope():
    base = Instance.linear([1, 2], [3, 1], [50, 50])
    prob = ReschedProblem.from_base(base, Job("x", 1, Linear(1, 10)), 0.0)
    order = prob.base_schedule.order
    s = Schedule.earliest(prob.combined(), ["x"] + order)
    delta = disruption(prob, s, {})
    assert delta == {"1": -3.0, "2": -1.0}
    assert disruption(prob, s, {"1": 3.0})["1"] == 0.0
    with pytest.raises(ContractViolation):
        disruption(prob, s, {"1": -1.0})


def test_na1_zero_budget_is_zero_loss_insertion():
    base = Instance.linear([2, 2, 2, 2], [1, 1, 1, 1], [30, 30, 30, 9])
    prob = ReschedProblem.from_base(base, Job("x", 1, Linear(1, 20)), 0.0, "NA1")
    rep, comp = resched_solve(prob)
    ref, _ = brute_force_resched(prob)
    assert rep.per_job_utility["x"] == ref.per_job_utility["x"]
    assert all(v == 0 for v in comp.values())


def test_na2_large_budget_puts_new_job_first():
    rng = np.random.default_rng(51)
    prob = random_problem(rng, 4, "NA2", R=1e6)
    rep, _ = resched_solve(prob)
    assert rep.order[0] == "new"
    assert rep.per_job_utility["new"] == prob.new_job.utility(prob.new_job.p)


@pytest.mark.parametrize("variant", ["NA1", "NA2"])
def test_subset_dp_matches_oracle(variant):
    rng = np.random.default_rng(52 if variant == "NA1" else 53)
    for _ in range(100):
        prob = random_problem(rng, int(rng.integers(1, 6)), variant, initial=("fair", "system")[int(rng.integers(2))])
        rep, comp = resched_solve(prob)
        ref, _ = brute_force_resched(prob)
        assert rep.per_job_utility["new"] == pytest.approx(ref.per_job_utility["new"], abs=1e-9)
        if variant == "NA1":
            assert sum(comp.values()) <= prob.budget_R + 1e-9
        else:
            assert rep.diagnostics["slack"] >= -1e-9


def test_na2_negative_budget_demands_a_gain():
    # swapping the two original jobs gains 2 in total, so a net gain of 1 is reachable
    base = Instance.linear([1, 3], [1, 5], [10, 40])
    prob = ReschedProblem(base, Schedule.earliest(base, ["1", "2"]), Job("x", 1, Linear(1, 10)), -1.0, "NA2")
    rep, _ = resched_solve(prob)
    ref, _ = brute_force_resched(prob)
    assert rep.per_job_utility["x"] == ref.per_job_utility["x"]
    assert rep.diagnostics["slack"] >= 0
    with pytest.raises(ValueError):
        ReschedProblem(base, Schedule.earliest(base, ["1", "2"]), Job("x", 1, Linear(1, 10)), -1.0, "NA1")


@pytest.mark.parametrize("method", ["bigm", "deadline", "exact"])
def test_na3_zero_budget_matches_oracle(method):
    rng = np.random.default_rng(54)
    for _ in range(80):
        prob = random_problem(rng, int(rng.integers(1, 6)), "NA3", R=0.0)
        rep, _ = resched_solve(prob, method=method)
        ref, _ = brute_force_resched(prob)
        assert rep.per_job_utility["new"] == pytest.approx(ref.per_job_utility["new"], abs=1e-6)


def test_na3_exact_with_budget_matches_oracle():
    rng = np.random.default_rng(55)
    for _ in range(100):
        prob = random_problem(rng, int(rng.integers(1, 6)), "NA3")
        rep, comp = resched_solve(prob, method="exact")
        ref, _ = brute_force_resched(prob)
        assert rep.per_job_utility["new"] == pytest.approx(ref.per_job_utility["new"], abs=1e-9)
        assert sum(comp.values()) <= prob.budget_R + 1e-9


def test_na3_bisection_is_feasible_with_budget():
    """The greedy-probe bisection never claims more than the exact optimum."""
    rng = np.random.default_rng(56)
    for _ in range(100):
        prob = random_problem(rng, int(rng.integers(1, 6)), "NA3")
        rep, comp = resched_solve(prob, method="bigm")
        exact, _ = resched_solve(prob, method="exact")
        assert rep.per_job_utility["new"] <= exact.per_job_utility["new"] + 1e-6
        assert sum(comp.values()) <= prob.budget_R + 1e-6
        bound = prob.bound()
        for i in prob.base.ids:
            assert rep.per_job_utility[i] + comp[i] >= bound - 1e-6


def test_na3_bisection_misses_budgeted_optimum():
    """Spending the budget on one deep shortfall beats raising the fair level."""
    base = Instance.linear([1, 3], [1, 2], [30, 33])
    prob = ReschedProblem.from_base(base, Job("3", 3, Linear(3, 18)), 7.5, "NA3")
    exact, _ = resched_solve(prob, method="exact")
    ref, _ = brute_force_resched(prob)
    assert exact.per_job_utility["3"] == ref.per_job_utility["3"] == 9.0
    bigm, _ = resched_solve(prob, method="bigm")
    assert bigm.per_job_utility["3"] == 0.0


def test_lexicographic_first_job_gets_the_single_agent_optimum():
    rng = np.random.default_rng(57)
    for _ in range(30):
        prob = random_problem(rng, 4, "NA3", R=0.0)
        rep, fixed = resched_lexicographic(prob, ["new", prob.base.ids[0]])
        single, _ = resched_solve(prob)
        C = rep.schedule.completions(prob.combined())
        assert C["new"] == pytest.approx(single.schedule.completions(prob.combined())["new"])
        assert C[prob.base.ids[0]] <= fixed[prob.base.ids[0]] + 1e-9


def test_lexicographic_is_na3_only():
    rng = np.random.default_rng(58)
    with pytest.raises(UnsupportedVariant):
        resched_lexicographic(random_problem(rng, 3, "NA1"), ["new"])


def test_release_dates_unsupported():
    base = Instance.linear([1, 2], [1, 1], [5, 9], r=[0, 1])
    with pytest.raises(UnsupportedVariant):
        ReschedProblem(base, Schedule.earliest(base, ["1", "2"]), Job("x", 1, Linear(1, 10)))


def test_system_initial_schedule():
    base = Instance.linear([1, 1], [10, 1], [21, 2])
    prob = ReschedProblem.from_base(base, Job("x", 1, Linear(1, 10)), 0.0, "NA3", initial="system")
    assert prob.base_schedule.order == ["1", "2"]
    assert prob.bound() == 0.0
    assert max_min_greedy(base).order == ["2", "1"]


def test_unreachable_net_gain_is_infeasible_for_both():
    base = Instance.linear([1, 3], [1, 5], [10, 40])
    prob = ReschedProblem(base, Schedule.earliest(base, ["1", "2"]), Job("x", 1, Linear(1, 10)), -50.0, "NA2")
    with pytest.raises(Infeasible):
        resched_solve(prob)
    with pytest.raises(Infeasible):
        brute_force_resched(prob)
