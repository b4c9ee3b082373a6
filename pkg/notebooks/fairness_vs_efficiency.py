# %% [markdown]
# # Fair versus system-optimal schedules
#
# Every job belongs to an agent whose utility falls with the job's
# completion time. The fair schedule maximises the worst agent's utility;
# the system-optimal one maximises the total. This notebook compares the
# two on a tiny hand example and on random instances.

# %%
import numpy as np

from fairsched import Instance, brute_force, max_min_greedy, system_optimal_linear

# %% [markdown]
# Two unit jobs: agent 1 has `u = 21 - 10 C`, agent 2 has `u = 2 - C`.

# %%
inst = Instance.linear([1, 1], [10, 1], [21, 2])
fair = max_min_greedy(inst)
sys_ = system_optimal_linear(inst)
print("fair  ", fair.order, fair.per_job_utility, "min", fair.u_min, "sum", fair.u_glob)
print("system", sys_.order, sys_.per_job_utility, "min", sys_.u_min, "sum", sys_.u_glob)

# %% [markdown]
# The fair order gives up 9 units of total utility to lift the worst agent
# from 0 to 1.
#
# ## Price of fairness on random instances
#
# Ratio of total utility under the fair schedule to the best total, over
# random linear instances with positive utilities at the horizon.

# %%
rng = np.random.default_rng(0)
ratios, gains = [], []
for _ in range(300):
    n = 6
    p = rng.integers(1, 6, n)
    a = rng.integers(1, 5, n)
    b = a * p.sum() + rng.integers(1, 30, n)  # every utility stays positive
    inst = Instance.linear(p.tolist(), a.tolist(), b.tolist())
    fair = max_min_greedy(inst)
    sys_ = system_optimal_linear(inst)
    ratios.append(fair.u_glob / sys_.u_glob)
    gains.append(fair.u_min - sys_.u_min)

ratios = np.array(ratios)
print(f"sum ratio: mean {ratios.mean():.4f}, worst {ratios.min():.4f}")
print(f"min utility gained by fairness: mean {np.mean(gains):.2f}, max {np.max(gains):.2f}")

# %% [markdown]
# ## The greedy against exhaustive search
#
# The backward greedy is exact for jobs released together. A quick check
# against all orders on small instances:

# %%
mismatch = 0
for _ in range(200):
    inst = Instance.linear(rng.integers(1, 5, 6).tolist(), rng.integers(0, 5, 6).tolist(), rng.integers(0, 40, 6).tolist())
    mismatch += max_min_greedy(inst).u_min != brute_force(inst).u_min
print("mismatches:", mismatch)
