"""
Cumulative privacy budget
=========================

The accountant composes per-iteration Gaussian-mechanism guarantees into a
total ``(epsilon, delta_hat)`` without running the optimizer.
"""

# %%
# The reference schedule
# ----------------------

from privdsgd import PrivacySchedule, cumulative_budget, make_schedules

s = make_schedules(a1=0.35, a2=0.3, a3=0.24, alpha=1.0, beta=0.75, gamma=0.7, K=2000)
print(s.derived())

acct = PrivacySchedule(sigma_exp=0.1, noise_offset=5, delta_exp=3, C=0.2)
ledger = cumulative_budget(s.K, s, acct, delta_sum_start=1)
print(ledger.summary())

# %%
# More noise growth or bigger batches shrink epsilon
# ---------------------------------------------------

for sigma in (-0.1, 0.1, 0.2):
    for gamma in (0.6, 0.7, 0.8):
        sg = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, gamma, 2000)
        eps = cumulative_budget(2000, sg, PrivacySchedule(sigma, 5, 3, 0.2)).total_epsilon
        print(f"sigma={sigma:+.1f} gamma={gamma:.1f}: sum eps = {eps:8.2f}")

# %%
# Batch sizes that grow fast enough make the total vanish as the horizon grows.

for K in (10**3, 10**4, 10**5):
    sk = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, 1.5, K)
    print(K, cumulative_budget(K, sk, acct, 1).total_epsilon)
