"""Subsystem flows and switched trajectories.

Linear fields are propagated with matrix exponentials; polynomial fields with
either a fixed-step classical RK4 or scipy's adaptive Dormand-Prince RK45.
Switch times are always segment boundaries: no step ever crosses one.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.integrate import RK45

from .dynamics import Subsystem, SwitchedSystem, evaluate
from .errors import InputError, IntegrationError, NumericalError

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "matrix_exponential",
    "flow",
    "simulate_switched",
]

EXACT = "exact-linear"
RK4 = "rk4"
ADAPTIVE = "rk45"
AUTO = "auto"
_METHODS = {AUTO, EXACT, RK4, ADAPTIVE}


@dataclass(frozen=True)
class IntegratorConfig:
    """How flows are computed.

    ``method="auto"`` uses the exact exponential for linear fields and RK45
    (``atol=1e-10``, ``rtol=1e-9``) otherwise. ``step`` is the largest RK4
    step: each interval between record points is split into equal steps.
    """

    method: str = AUTO
    step: float = 1e-2
    rtol: float = 1e-9
    atol: float = 1e-10
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in _METHODS:
            raise InputError(f"unknown integration method {self.method!r}")
        if self.step <= 0 or self.rtol <= 0 or self.atol <= 0 or self.max_steps < 1:
            raise InputError("integrator step, tolerances and max_steps must be positive")

    def resolve(self, s: Subsystem) -> str:
        if self.method == AUTO:
            return EXACT if s.is_linear else ADAPTIVE
        if self.method == EXACT and not s.is_linear:
            raise InputError("exact-linear integration requested for a nonlinear subsystem")
        return self.method


DEFAULT_CONFIG = IntegratorConfig()


def matrix_exponential(A, t: float = 1.0) -> np.ndarray:
    """``exp(t A)`` by scaling and squaring with a Pade approximant."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(t * A)
    if not np.all(np.isfinite(E)):
        raise NumericalError(
            f"matrix exponential overflowed (||tA||_1 = {np.linalg.norm(t * A, 1):.3g})"
        )
    return E


def _rk4_steps(s, X, t, h, max_steps):
    n = max(1, int(np.ceil(t / h - 1e-12)))
    if n > max_steps:
        raise IntegrationError(
            f"{n} RK4 steps needed, max_steps is {max_steps}", 0.0, X.copy()
        )
    h = t / n
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_loop(s, X, n, h)


def _rk4_loop(s, X, n, h):
    for k in range(n):
        k1 = evaluate(s, X)
        k2 = evaluate(s, X + 0.5 * h * k1)
        k3 = evaluate(s, X + 0.5 * h * k2)
        k4 = evaluate(s, X + h * k3)
        Xn = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(Xn)):
            raise IntegrationError("state became nonfinite", k * h, X.copy())
        X = Xn
    return X


def _rk45(s, X, t0, t1, cfg, record=()):
    """Adaptive integration from ``t0`` to ``t1``; returns the states at
    ``record`` (sorted, inside ``[t0, t1]``) and at ``t1``."""
    shape = X.shape
    y0 = X.ravel()

    def rhs(_, y):
        with np.errstate(over="ignore", invalid="ignore"):
            return evaluate(s, y.reshape(shape)).ravel()

    solver = RK45(rhs, t0, y0, t1, rtol=cfg.rtol, atol=cfg.atol)
    record = list(record)
    out = []
    steps = 0
    while record and record[0] <= t0:
        out.append(X.copy())
        record.pop(0)
    while solver.status == "running":
        t_prev, y_prev = solver.t, solver.y.copy()
        msg = solver.step()
        steps += 1
        if solver.status == "failed" or not np.all(np.isfinite(solver.y)):
            raise IntegrationError(
                f"RK45 failed near t={solver.t:.6g}: {msg or 'nonfinite state'}",
                t_prev, y_prev.reshape(shape),
            )
        if steps > cfg.max_steps:
            raise IntegrationError(
                f"RK45 exceeded max_steps={cfg.max_steps}", solver.t, solver.y.reshape(shape)
            )
        if record and record[0] <= solver.t:
            dense = solver.dense_output()
            while record and record[0] <= solver.t:
                tr = record.pop(0)
                y = solver.y if tr == solver.t else dense(tr)
                out.append(np.array(y).reshape(shape))
    return out, solver.y.reshape(shape).copy()


def flow(s: Subsystem, t: float, x, cfg: Optional[IntegratorConfig] = None) -> np.ndarray:
    """``Phi_s^t(x)``; ``x`` may be one state or a batch of shape ``(n, d)``."""
    cfg = cfg or DEFAULT_CONFIG
    if t < 0:
        raise InputError("flow time must be nonnegative (no backward integration)")
    X = np.array(x, dtype=float)
    if X.shape[-1:] != (s.dimension,) or X.ndim > 2:
        raise InputError(f"state has shape {X.shape}, expected last axis {s.dimension}")
    if t == 0:
        return X
    method = cfg.resolve(s)
    if method == EXACT:
        return X @ matrix_exponential(s.matrix, t).T
    if method == RK4:
        return _rk4_steps(s, X, t, cfg.step, cfg.max_steps)
    return _rk45(s, X, 0.0, float(t), cfg)[1]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded switched trajectory.

    ``input_trace[k]`` is the subsystem active on ``[times[k], next event)``,
    i.e. the right-continuous value ``u(times[k])``.
    """

    times: np.ndarray
    states: np.ndarray
    input_trace: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self):
        return self.states[-1]


def _record_grid(u, horizon, record_dt):
    tol = 1e-12 * max(1.0, horizon)
    n = int(np.floor(horizon / record_dt + 1e-9))
    grid = record_dt * np.arange(n + 1)
    events = np.asarray(u.switch_times, dtype=float)
    events = np.append(events[events < horizon], horizon)
    # grid points within round-off of an event are replaced by the event
    pos = np.searchsorted(events, grid)
    right = events[np.minimum(pos, len(events) - 1)]
    left = events[np.maximum(pos - 1, 0)]
    near = np.minimum(np.abs(grid - right), np.abs(grid - left))
    grid = grid[(near > tol) & (grid < horizon)]
    return np.union1d(grid, events)


def simulate_switched(
    sys: SwitchedSystem,
    u,
    x0,
    horizon: Optional[float] = None,
    cfg: Optional[IntegratorConfig] = None,
    record_dt: float = 0.1,
) -> Trajectory:
    """Integrate ``x' = f_{u(t)}(x)`` from ``x0`` over ``[0, horizon]``.

    States are recorded on the grid ``k * record_dt``, at every switch time and
    at ``horizon``. Linear segments reuse cached exponentials, so long
    fast-switching runs stay cheap.
    """
    cfg = cfg or DEFAULT_CONFIG
    horizon = u.horizon if horizon is None else float(horizon)
    if horizon < 0 or horizon > u.horizon * (1 + 1e-12):
        raise InputError(f"horizon {horizon} outside the signal's domain [0, {u.horizon}]")
    if record_dt <= 0:
        raise InputError("record_dt must be positive")
    x = np.array(x0, dtype=float)
    if x.shape != (sys.dimension,):
        raise InputError(f"initial state has shape {x.shape}, expected ({sys.dimension},)")
    if horizon == 0:
        return Trajectory(np.array([0.0]), x[None, :].copy(), np.array([u.value_at(0.0)]))

    times = _record_grid(u, horizon, record_dt)
    states = np.empty((len(times), sys.dimension))
    trace = np.empty(len(times), dtype=int)
    states[0] = x
    cache = {}
    k = 0
    for seg_start, seg_end, i in u.segments(horizon):
        s = sys[i]
        method = cfg.resolve(s)
        # record indices inside (seg_start, seg_end]
        lo = k
        hi = int(np.searchsorted(times, seg_end, side="right")) - 1
        trace[lo:hi] = i
        if hi == lo:
            continue
        if method == EXACT:
            for j in range(lo, hi):
                dt = times[j + 1] - times[j]
                key = (i, round(dt, 13))
                E = cache.get(key)
                if E is None:
                    E = cache[key] = matrix_exponential(s.matrix, dt)
                x = E @ x
                if not np.all(np.isfinite(x)):
                    raise IntegrationError("state became nonfinite", times[j], states[j])
                states[j + 1] = x
        elif method == RK4:
            for j in range(lo, hi):
                x = _rk4_steps(s, x, times[j + 1] - times[j], cfg.step, cfg.max_steps)
                states[j + 1] = x
        else:
            rec, x = _rk45(s, x, times[lo], times[hi], cfg, times[lo + 1:hi])
            for j, y in enumerate(rec, start=lo + 1):
                states[j] = y
            states[hi] = x
        k = hi
    trace[-1] = u.value_at(times[-1])
    return Trajectory(times, states, trace)
