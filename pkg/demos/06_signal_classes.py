"""Switching-signal classes on finite horizons.

dwell time  =>  average dwell time  =>  persistent dwell time, and a
chaotic-like signal whose constancy intervals shrink window by window
defeats every dwell time.
"""

# %%
import numpy as np

from switchrate import (
    generate_chaotic_like,
    generate_dwell_time,
    verify_average_dwell_time,
    verify_dwell_time,
    verify_persistent_dwell_time,
)

u = generate_dwell_time(seed=1, p=3, delta=0.5, horizon=10.0, law="uniform")
print(u, "switch times:", np.round(u.switch_times, 3))
print("dwell 0.5:", verify_dwell_time(u, 0.5))
print("average dwell 0.5, N0=1:", verify_average_dwell_time(u, 0.5, 1))
print("persistent dwell, T=horizon:", verify_persistent_dwell_time(u, 0.5, u.horizon).ok)

# %%
c = generate_chaotic_like(p=2, window=1.0, horizon=5.0, shrink=0.5)
for k in range(5):
    in_k = (c.switch_times >= k) & (c.switch_times < k + 1)
    print(f"window {k}: {in_k.sum():3d} pieces, longest {c.constancy_lengths()[in_k].max():.4f}")
print("dwell 0.07:", verify_dwell_time(c, 0.07))
print("persistent dwell 0.5 within 2:", verify_persistent_dwell_time(c, 0.5, 2.0).ok)
