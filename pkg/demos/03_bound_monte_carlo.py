"""Checking the dwell-time bound against random switching.

Random dwell-1 signals and unit initial states are simulated; the Lyapunov
norm must stay below beta(1, t) at every recorded instant. The worst case is
attained by starting at the maximizing direction of M and switching exactly
every delta.
"""

# %%
import numpy as np

from switchrate import (
    beta,
    compute_M,
    generate_regular,
    simulate_switched,
    verify_homogeneous_bound,
    verify_switching_instants,
)
from switchrate.catalog import example_system

sys = example_system()
cert = compute_M(sys, 1.0)
print(f"M(1) = {cert.M:.10f}, argmax subsystem {cert.argmax_subsystem}, point {cert.argmax_point}")

# %%
rep = verify_homogeneous_bound(sys, cert, trials=300, seed=0)
print(f"{rep.trials} trials: {rep.violations} violations, max |x(t)| / beta = {rep.max_ratio:.6f}")
inst = verify_switching_instants(sys, cert, trials=100, seed=1)
print(f"switching instants: max |x(k delta)| / M^k = {inst.max_ratio:.6f}")

# %% [markdown]
# Adversarial start: after one dwell the norm equals M exactly.

# %%
u = generate_regular(2, 1.0, 6.0, start=cert.argmax_subsystem)
traj = simulate_switched(sys, u, cert.argmax_point, record_dt=1.0)
norms = np.linalg.norm(traj.states, axis=1)
for t, n in zip(traj.times, norms):
    print(f"t={t:3.0f}  |x|={n:.6f}  beta={beta(cert.rate, 1.0, t):.6f}")
