"""Two-region certificate for a nonlinear switched system.

f_i(x) = B_i x - |x|^2 x keeps V = |x|^2 weakly decreasing. Near the origin
the linearizations contract by m1 per dwell; on the annulus r <= V <= R the
nonlinear flows contract V by m2. Together:
V(x(t)) <= min(1, alpha exp(-gamma t)) V(x0) on {V <= 4}.
"""

# %%
from switchrate import compute_nonlinear_certificate, verify_nonlinear_bound
from switchrate.catalog import cubic_damping_system

sys = cubic_damping_system()
cert = compute_nonlinear_certificate(sys, delta=1.0, R=4.0)
for name in ("m", "m1", "rho", "r1", "r", "m2", "alpha", "gamma"):
    print(f"{name:>5} = {getattr(cert, name):.6f}")

# %%
rep = verify_nonlinear_bound(sys, cert, trials=100, seed=0)
print(f"{rep.trials} trials, {rep.violations} violations, max ratio {rep.max_ratio:.4f}")
