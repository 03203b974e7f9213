"""No uniform rate without a dwell time.

Alternating the two subsystems every 0.005 time units makes the state follow
the average system, which does not move the point (1, 0). Holding subsystem 1
after time T gives a signal with finitely many switches, hence some dwell
time, but the time needed to halve V grows without bound in T.
"""

# %%
from switchrate import generate_regular, simulate_switched, slow_convergence_demo
from switchrate.catalog import example_system

sys = example_system()
u = generate_regular(2, 0.005, 25.0)

traj = simulate_switched(sys, u, [1.0, 0.0], horizon=10.0, record_dt=1.0)
for t, x in zip(traj.times, traj.states):
    print(f"t={t:4.1f}  x={x}")

# %%
rows = slow_convergence_demo(sys, u, [1.0, 0.0], [0, 1, 2, 5, 10, 20])
print("   T   time to V <= V0/2   |x(T)|")
for r in rows:
    print(f"{r.T:4g}   {r.time_to_half:10.4f}        {r.norm_at_T:.6f}")
