"""Piecewise-constant switching signals: representation, generators and
finite-horizon class-membership checks (dwell-time, average dwell-time,
persistent dwell-time)."""

import math
from collections import namedtuple
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError

__all__ = [
    "SwitchingSignal",
    "ClassParameters",
    "constant_signal",
    "verify_dwell_time",
    "verify_average_dwell_time",
    "verify_persistent_dwell_time",
    "generate_dwell_time",
    "generate_regular",
    "generate_chaotic_like",
    "constant_tail",
]

MAX_SWITCHES = 1_000_000
# gaps produced by float accumulation may undershoot their nominal value by ulps
_REL_TOL = 1e-12


class SwitchingSignal:
    """Right-continuous piecewise-constant input ``u: [0, horizon) -> {1..p}``.

    ``values[k]`` is active on ``[switch_times[k], switch_times[k+1])``.
    """

    __slots__ = ("switch_times", "values", "horizon")

    def __init__(self, switch_times: Sequence[float], values: Sequence[int], horizon: float):
        t = np.array(switch_times, dtype=float)
        v = np.array(values, dtype=int)
        if t.ndim != 1 or len(t) == 0 or len(t) != len(v):
            raise InputError("switch_times and values must be nonempty and of equal length")
        if t[0] != 0.0:
            raise InputError("the first switch time must be 0")
        if np.any(np.diff(t) <= 0):
            raise InputError("switch times must be strictly increasing")
        if not horizon > t[-1]:
            raise InputError("horizon must exceed the last switch time")
        if np.any(v < 1):
            raise InputError("subsystem indices are 1-based")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "switch_times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "horizon", float(horizon))

    def __setattr__(self, name, value):
        raise AttributeError("SwitchingSignal is immutable")

    def __eq__(self, other):
        if not isinstance(other, SwitchingSignal):
            return NotImplemented
        return (
            np.array_equal(self.switch_times, other.switch_times)
            and np.array_equal(self.values, other.values)
            and self.horizon == other.horizon
        )

    def __repr__(self):
        return (
            f"SwitchingSignal({len(self.values)} segments, "
            f"horizon={self.horizon:g}, max index={int(self.values.max())})"
        )

    @property
    def discontinuities(self):
        """Switch instants excluding the initial time."""
        return self.switch_times[1:]

    @property
    def n_switches(self):
        return len(self.switch_times) - 1

    def value_at(self, t):
        """``u(t)``; at ``t == horizon`` the last value is returned."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon):
            raise InputError(f"time outside [0, {self.horizon}]")
        k = np.searchsorted(self.switch_times, t, side="right") - 1
        out = self.values[k]
        return int(out) if out.ndim == 0 else out

    def segments(self, horizon: Optional[float] = None):
        """Yield ``(start, end, index)`` constancy intervals clipped to ``horizon``."""
        horizon = self.horizon if horizon is None else horizon
        ends = np.append(self.switch_times[1:], self.horizon)
        for a, b, i in zip(self.switch_times, ends, self.values):
            if a >= horizon:
                break
            yield float(a), float(min(b, horizon)), int(i)

    def constancy_lengths(self):
        ends = np.append(self.switch_times[1:], self.horizon)
        return ends - self.switch_times

    def normalized(self) -> "SwitchingSignal":
        """Merge consecutive segments that carry the same index."""
        keep = np.concatenate([[True], self.values[1:] != self.values[:-1]])
        return SwitchingSignal(self.switch_times[keep], self.values[keep], self.horizon)

    def max_index(self):
        return int(self.values.max())


@dataclass(frozen=True)
class ClassParameters:
    dwell: float = 1.0
    chatter_bound: int = 1
    persistence_period: float = 1.0
    window: float = 1.0

    def __post_init__(self):
        if self.dwell <= 0 or self.persistence_period <= 0 or self.window <= 0:
            raise InputError("dwell, persistence period and window must be positive")
        if self.chatter_bound < 0:
            raise InputError("chatter bound must be nonnegative")


def constant_signal(i: int, horizon: float) -> SwitchingSignal:
    return SwitchingSignal([0.0], [i], horizon)


# verifiers --------------------------------------------------------------

DwellCheck = namedtuple("DwellCheck", ["ok", "min_gap"])
AverageDwellCheck = namedtuple("AverageDwellCheck", ["ok", "worst_margin", "worst_window"])
PersistentCheck = namedtuple("PersistentCheck", ["ok", "witness"])


def verify_dwell_time(u: SwitchingSignal, delta: float) -> DwellCheck:
    """Check that consecutive switch times (starting from 0) are ``>= delta`` apart.

    A signal without discontinuities has ``min_gap == inf``.
    """
    if delta <= 0:
        raise InputError("dwell time must be positive")
    gaps = np.diff(u.switch_times)
    if len(gaps) == 0:
        return DwellCheck(True, math.inf)
    g = float(gaps.min())
    return DwellCheck(bool(g >= delta * (1 - _REL_TOL)), g)


def _adt_exact(s, delta):
    # For open windows hugging switches s_a..s_b the count minus tau/delta tends
    # to (b - a + 1) - (s_b - s_a)/delta = g_b - g_a + 1 with g_k = k - s_k/delta.
    g = np.arange(len(s)) - s / delta
    running_min = np.minimum.accumulate(g)
    excess = g - running_min + 1.0
    b = int(np.argmax(excess))
    a = int(np.argmax(g[: b + 1] == running_min[b]))
    return float(excess[b]), (float(s[a]), float(s[b]))


def _adt_grid(s, delta, horizon, pitch):
    grid = np.arange(0.0, horizon + pitch / 2, pitch)
    worst, window = -math.inf, (0.0, 0.0)
    for tau in grid[1:]:
        lo = np.searchsorted(s, grid, side="right")  # first switch > t
        hi = np.searchsorted(s, grid + tau, side="left")  # first switch >= t + tau
        excess = (hi - lo) - tau / delta
        j = int(np.argmax(excess))
        if excess[j] > worst:
            worst, window = float(excess[j]), (float(grid[j]), float(grid[j] + tau))
    return worst, window


def verify_average_dwell_time(
    u: SwitchingSignal,
    delta: float,
    chatter_bound: int,
    window_grid: Optional[float] = None,
) -> AverageDwellCheck:
    """Check ``N(t, t + tau) <= N0 + tau / delta`` for all windows.

    By default the supremum over all windows is computed exactly from the
    switch instants in linear time. Passing ``window_grid`` instead scans
    windows whose endpoints lie on a grid of that pitch over ``[0, horizon]``.
    ``worst_margin`` is the largest ``N - tau/delta - N0`` found (``<= 0`` when
    the check passes).
    """
    if delta <= 0 or chatter_bound < 0:
        raise InputError("need delta > 0 and chatter_bound >= 0")
    s = np.asarray(u.discontinuities)
    if len(s) == 0:
        return AverageDwellCheck(True, -float(chatter_bound), (0.0, u.horizon))
    if window_grid is None:
        worst, window = _adt_exact(s, delta)
    else:
        if window_grid <= 0:
            raise InputError("window_grid must be positive")
        worst, window = _adt_grid(s, delta, u.horizon, window_grid)
    margin = worst - chatter_bound
    return AverageDwellCheck(bool(margin <= 1e-9), margin, window)


def verify_persistent_dwell_time(u: SwitchingSignal, delta: float, period: float) -> PersistentCheck:
    """Greedily build ``t_0 < t_1 < ...`` with ``u`` constant on ``[t_k, t_k + delta)``
    and ``t_{k+1} - t_k <= period`` until the horizon minus ``period`` is covered.

    ``t_0`` must itself lie in ``[0, period]``. Each step jumps to the latest
    admissible start, which maximizes coverage.
    """
    if delta <= 0 or period <= 0:
        raise InputError("delta and period must be positive")
    tol = _REL_TOL * max(1.0, u.horizon)
    # admissible starts form the intervals [a, b - delta] of long-enough segments
    starts = [(a, max(a, b - delta)) for a, b, _ in u.segments() if b - a >= delta - tol]
    if not starts or starts[0][0] > period + tol:
        return PersistentCheck(False, [])
    t = starts[0][0]
    witness = [t]
    target = u.horizon - period
    while t < target - tol:
        limit = t + period
        # latest admissible start within the period, kept inside its interval
        reach = [max(a, min(e, limit)) for a, e in starts if a <= limit + tol and e > t]
        if not reach:
            return PersistentCheck(False, witness)
        t = max(reach)
        witness.append(t)
    return PersistentCheck(True, witness)


# generators -------------------------------------------------------------


def _next_index(rng, current, p, law):
    if p == 1:
        return 1
    if law == "round-robin":
        return current % p + 1
    if law == "uniform":
        j = int(rng.integers(1, p))  # 1..p-1, skip current
        return j if j < current else j + 1
    raise InputError(f"unknown index law {law!r}")


def generate_dwell_time(
    seed: int,
    p: int,
    delta: float,
    horizon: float,
    spread: float = 2.0,
    law: str = "round-robin",
    start: Optional[int] = None,
) -> SwitchingSignal:
    """Random signal with gaps drawn uniformly in ``[delta, spread * delta]``.

    Consecutive values always differ, so every drawn gap is a true dwell.
    """
    if p < 1 or delta <= 0 or horizon <= 0:
        raise InputError("need p >= 1, delta > 0 and horizon > 0")
    if not spread >= 1.0:
        raise InputError("spread must be >= 1")
    rng = np.random.default_rng(seed)
    current = int(rng.integers(1, p + 1)) if start is None else int(start)
    if p == 1:
        return constant_signal(1, horizon)
    times, values = [0.0], [current]
    t = 0.0
    while True:
        t = t + delta * (1.0 + (spread - 1.0) * rng.random())
        if t >= horizon:
            break
        current = _next_index(rng, current, p, law)
        times.append(t)
        values.append(current)
        if len(times) > MAX_SWITCHES:
            raise InputError("switch count exceeds the 1e6 guard")
    return SwitchingSignal(times, values, horizon)


def generate_regular(p: int, interval: float, horizon: float, start: int = 1) -> SwitchingSignal:
    """Periodic round-robin signal with equal constancy intervals."""
    if interval <= 0 or horizon <= 0:
        raise InputError("interval and horizon must be positive")
    if p == 1:
        return constant_signal(1, horizon)
    n = int(math.ceil(horizon / interval - 1e-12))
    if n > MAX_SWITCHES:
        raise InputError("switch count exceeds the 1e6 guard")
    times = interval * np.arange(n)
    values = (start - 1 + np.arange(n)) % p + 1
    return SwitchingSignal(times, values, horizon)


def generate_chaotic_like(p: int, window: float, horizon: float, shrink: float) -> SwitchingSignal:
    """Finite truncation of a chaotic input.

    Window ``k`` (``[k * window, (k+1) * window)``) is tiled by
    ``ceil(shrink**-k)`` equal constancy intervals, each no longer than
    ``window * shrink**k``; indices cycle round-robin so neighbours differ.
    """
    if not 0 < shrink < 1:
        raise InputError("shrink factor must lie in (0, 1)")
    if p < 2:
        raise InputError("a chaotic-like signal needs at least two subsystems")
    if window <= 0 or horizon <= 0:
        raise InputError("window and horizon must be positive")
    times = []
    k = 0
    while k * window < horizon:
        pieces = int(math.ceil(shrink ** (-k) - 1e-9))
        length = window / pieces
        start = k * window
        times.extend(start + length * np.arange(pieces))
        if len(times) > MAX_SWITCHES:
            raise InputError("switch count exceeds the 1e6 guard")
        k += 1
    times = np.asarray(times)
    times = times[times < horizon]
    values = np.arange(len(times)) % p + 1
    return SwitchingSignal(times, values, horizon)


def constant_tail(u: SwitchingSignal, T: float, i: int, new_horizon: Optional[float] = None) -> SwitchingSignal:
    """Signal equal to ``u`` on ``[0, T)`` and constantly ``i`` afterwards.

    The result has finitely many switches and therefore some dwell time.
    """
    new_horizon = u.horizon if new_horizon is None else float(new_horizon)
    if not 0 <= T <= u.horizon <= new_horizon:
        raise InputError("need 0 <= T <= u.horizon <= new_horizon")
    if T >= new_horizon:
        raise InputError("the constant tail must be nonempty (T < new_horizon)")
    keep = u.switch_times < T
    times = np.append(u.switch_times[keep], T) if T > 0 else np.array([0.0])
    values = np.append(u.values[keep], i) if T > 0 else np.array([i])
    return SwitchingSignal(times, values, new_horizon).normalized()
