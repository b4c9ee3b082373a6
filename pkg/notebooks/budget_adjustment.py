# %% [markdown]
# # Spending a budget on the worst-off agents
#
# With the fair order fixed, a budget can raise intercepts or cut slopes.
# The best use lifts the lowest utilities to a common water level.

# %%
import itertools

import numpy as np

from fairsched import Instance, Schedule, adjusted_instance, budget_adjust, evaluate_schedule, max_min_greedy, water_level

# %%
inst = Instance.linear([2, 3, 1, 4], [1, 2, 3, 1], [20, 30, 25, 24])
base = max_min_greedy(inst)
print("fair order", base.order, "utilities", base.per_job_utility)

for budget in (0, 2, 5, 10):
    adj, rep = budget_adjust(inst, "intercept_up", budget)
    print(f"budget {budget:>2}: level {adj.level:.3f}, raised {adj.per_job_delta}")

# %% [markdown]
# ## Intercepts versus slopes
#
# A slope cut of `x` on a job completing at `C` gains `x C`, so late jobs
# are cheap to lift with slopes. A slope can never go below zero, which caps
# each job at its intercept.

# %%
for mode in ("intercept_up", "slope_down", "intercept_signed", "slope_signed"):
    adj, rep = budget_adjust(inst, mode, 3.0)
    print(f"{mode:<17} u_min {rep.u_min:.3f}  spent {adj.budget_used:.3f}")

# %% [markdown]
# ## Keeping the order fixed is a restriction
#
# The adjustment keeps the fair order. Searching over every order, with the
# water level computed on each, sometimes does better. The loop below looks
# for such an instance.

# %%
rng = np.random.default_rng(3)
for trial in range(2000):
    inst = Instance.linear(rng.integers(1, 5, 4).tolist(), rng.integers(1, 5, 4).tolist(), rng.integers(5, 40, 4).tolist())
    budget = float(rng.integers(1, 10))
    fixed = budget_adjust(inst, "intercept_up", budget)[1].u_min
    best, best_order = -np.inf, None
    for perm in itertools.permutations(inst.ids):
        u = evaluate_schedule(inst, Schedule.earliest(inst, perm)).per_job_utility
        level = water_level(list(u.values()), budget)
        if level > best + 1e-9:
            best, best_order = level, perm
    if best > fixed + 1e-9:
        print("instance", [(j.p, j.utility.a, j.utility.b) for j in inst.jobs], "budget", budget)
        print(f"fixed fair order {max_min_greedy(inst).order}: level {fixed:.3f}")
        print(f"best order {list(best_order)}: level {best:.3f}")
        break

# %% [markdown]
# ## Ties after a slope cut
#
# A slope cut to zero leaves a constant utility. Re-running the greedy on the
# modified instance can then pick another order of the same value.

# %%
rng = np.random.default_rng(5)
for _ in range(500):
    inst = Instance.linear(rng.integers(1, 5, 4).tolist(), rng.integers(1, 5, 4).tolist(), rng.integers(5, 40, 4).tolist())
    adj, rep = budget_adjust(inst, "slope_down", float(rng.integers(1, 10)))
    again = max_min_greedy(adjusted_instance(inst, adj))
    if again.order != rep.order:
        print("base order", rep.order, "re-run", again.order)
        print("u_min", rep.u_min, "vs", again.u_min)
        print("slopes after the cut", {j.id: j.utility.a for j in adjusted_instance(inst, adj).jobs})
        break
