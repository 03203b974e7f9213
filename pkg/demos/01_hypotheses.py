"""Two stable matrices whose switched combination is only weakly dissipative.

Both subsystems are Hurwitz and share the weak Lyapunov function |x|^2, yet
their average is not Hurwitz. This is the situation where a dwell time is
needed to obtain a convergence rate.
"""

# %%
import numpy as np

from switchrate import check_linearization_lyapunov, check_weak_lyapunov, is_hurwitz
from switchrate.catalog import B1, B2, example_system

sys = example_system()

# %% [markdown]
# Each matrix has characteristic polynomial l^2 + l + 1, so both eigenvalues
# have real part -1/2.

# %%
for name, B in (("B1", B1), ("B2", B2)):
    res = is_hurwitz(B)
    print(f"{name}: Hurwitz={res.is_hurwitz}, spectral abscissa={res.abscissa:+.12f}")

avg = 0.5 * (B1 + B2)
print("average:", avg.tolist(), "->", is_hurwitz(avg))

# %% [markdown]
# Along x' = B_i x, d/dt |x|^2 = -2 x2^2 <= 0: decrease is only weak, it stalls
# on the x1 axis. Sampling the unit circle and solving the generalized
# eigenproblem agree.

# %%
for rep in check_weak_lyapunov(sys, sphere_samples=4096):
    print(f"subsystem {rep.subsystem}: sampled max L_f V = {rep.worst_value:.3e} at {np.round(rep.worst_point, 4)}")
for rep in check_linearization_lyapunov(sys):
    print(f"subsystem {rep.subsystem}: exact max <x, Bx> on unit sphere = {rep.max_value:.3e}")
