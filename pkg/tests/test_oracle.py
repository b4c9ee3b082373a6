import numpy as np
import pytest
from conftest import random_linear, random_mixed

from fairsched import (
    Infeasible,
    Instance,
    OracleConfig,
    Schedule,
    SizeLimitExceeded,
    brute_force,
    brute_force_discard,
    evaluate_schedule,
)
from fairsched.oracle import completion_matrix, permutation_blocks


def test_permutation_blocks_cover_everything():
    perms = np.vstack(list(permutation_blocks(5, block=7)))
    assert perms.shape == (120, 5)
    assert len({tuple(r) for r in perms}) == 120


def test_completion_matrix_respects_release():
    perms = np.array([[0, 1], [1, 0]])
    C = completion_matrix(perms, np.array([2.0, 2.0]), np.array([0.0, 3.0]))
    assert C.tolist() == [[2.0, 5.0], [7.0, 5.0]]


def test_two_job_example(example3):
    rep = brute_force(example3)
    assert rep.u_min == 1
    assert list(rep.schedule.order) == ["2", "1"]


def test_idle_example(idle_example):
    rep = brute_force(idle_example)
    assert rep.u_min == 1
    grid = brute_force(idle_example, OracleConfig(start_policy="grid"))
    assert grid.u_min == rep.u_min


def test_grid_agrees_with_earliest():
    # utilities never increase, so idle beyond the release date cannot help
    rng = np.random.default_rng(71)
    for _ in range(60):
        n = int(rng.integers(2, 5))
        p = int(rng.integers(1, 4))
        inst = random_mixed(rng, n, release=True, pmax=3)
        inst = Instance(tuple(type(j)(j.id, p, j.utility, r=j.r) for j in inst.jobs))
        a = brute_force(inst)
        b = brute_force(inst, OracleConfig(start_policy="grid"))
        assert a.u_min == pytest.approx(b.u_min, abs=1e-9)


def test_grid_needs_plain_maxmin():
    inst = Instance.linear([1, 1], [1, 1], [5, 5])
    with pytest.raises(ValueError, match="plain maxmin"):
        brute_force(inst, OracleConfig(objective="sum", start_policy="grid"))


def test_report_is_consistent():
    rng = np.random.default_rng(72)
    for _ in range(30):
        inst = random_linear(rng, 5, release=True)
        rep = brute_force(inst)
        again = evaluate_schedule(inst, rep.schedule)
        assert again.u_min == pytest.approx(rep.u_min)
        # no order does better
        for perm in permutation_blocks(5):
            for row in perm[:50]:
                order = [inst.jobs[k].id for k in row]
                assert evaluate_schedule(inst, Schedule.earliest(inst, order)).u_min <= rep.u_min + 1e-9


def test_size_cap():
    inst = Instance.linear([1] * 10, [1] * 10, [10] * 10)
    with pytest.raises(SizeLimitExceeded):
        brute_force(inst)


def test_deadlines_infeasible():
    inst = Instance.linear([2, 2], [1, 1], [5, 5], d=[2, 2])
    # due dates are ignored unless a late-job bound is set
    assert brute_force(inst).u_min == 1
    with pytest.raises(Infeasible):
        brute_force(inst, OracleConfig(max_late=0))


def test_max_late_counts_on_time_jobs():
    inst = Instance.linear([2, 2], [1, 1], [5, 5], d=[2, 2])
    rep = brute_force(inst, OracleConfig(max_late=1))
    # the late job is left out of the minimum
    assert rep.u_min == 3
    assert rep.per_job_utility[rep.schedule.order[-1]] == 0.0  # excluded jobs report 0


def test_discard_oracle_excludes_dropped_jobs():
    inst = Instance.linear([1, 4], [1, 2], [30, 11], d=[15, 16])
    rep = brute_force_discard(inst, 1)
    # dropping the steep job leaves the other alone at time 1
    assert rep.u_min == 29
    assert brute_force_discard(inst, 0).u_min == pytest.approx(min(30 - 5, 11 - 8))
