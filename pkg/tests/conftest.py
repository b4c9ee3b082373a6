import numpy as np
import pytest

from fairsched import Instance, Job, Linear, PiecewiseLinear


def random_linear(rng, n, release=False, due=False, pmax=5, amax=4):
    p = rng.integers(1, pmax + 1, size=n).astype(float)
    a = rng.integers(0, amax + 1, size=n).astype(float)
    b = rng.integers(0, 40, size=n).astype(float)
    r = rng.integers(0, int(p.sum()), size=n).astype(float) if release else None
    d = (rng.integers(1, int(p.sum()) + 1, size=n).astype(float)).tolist() if due else None
    return Instance.linear(p.tolist(), a.tolist(), b.tolist(), r=None if r is None else r.tolist(), d=d)


def feasible_dues(rng, inst, slack=3):
    """Due dates met by a random order, so the instance is EDD-feasible."""
    order = rng.permutation(inst.n)
    C = np.cumsum(inst.p[order])
    d = np.empty(inst.n)
    d[order] = C + rng.integers(0, slack + 1, size=inst.n)
    return inst.replace(
        type(j)(j.id, j.p, j.utility, j.r, float(d[k])) for k, j in enumerate(inst.jobs)
    )


def random_piecewise(rng, horizon):
    """Non-increasing piecewise utility with a few breakpoints and maybe a drop."""
    k = int(rng.integers(1, 4))
    times = np.concatenate([[0.0], np.sort(rng.choice(np.arange(1, int(horizon) + 2), size=k - 1, replace=False))])
    v = float(rng.integers(10, 40))
    values, left = [v], [v]
    for _ in times[1:]:
        lv = values[-1] - float(rng.integers(0, 6))
        left.append(lv)
        values.append(lv - float(rng.integers(0, 3)))
    return PiecewiseLinear(tuple(times), tuple(values), tuple(left), float(rng.integers(0, 3)))


def random_mixed(rng, n, release=False, pmax=5):
    p = rng.integers(1, pmax + 1, size=n).astype(float)
    P = p.sum()
    jobs = []
    for k in range(n):
        if rng.random() < 0.5:
            u = Linear(float(rng.integers(0, 4)), float(rng.integers(0, 40)))
        else:
            u = random_piecewise(rng, P)
        r = float(rng.integers(0, int(P))) if release else 0.0
        jobs.append(Job(str(k + 1), p[k], u, r))
    return Instance(tuple(jobs))


@pytest.fixture
def example3():
    """Two unit jobs, u1 = 21 - 10C and u2 = 2 - C."""
    return Instance.linear([1, 1], [10, 1], [21, 2])


@pytest.fixture
def idle_example():
    """Equal lengths p = 2, r = (0, 1), u1 = 6 - C, u2 = 4 - C."""
    return Instance.linear([2, 2], [1, 1], [6, 4], r=[0, 1])


# acceptance lines are collected here and printed after the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[1].rstrip(":[")), s)):
            terminalreporter.write_line(line)
