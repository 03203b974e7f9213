"""Exponential convergence certificates under dwell-time switching.

Linear path
    ``M(delta)`` is the worst one-dwell contraction of any subsystem flow on
    the unit sphere of ``||.||_P``; any input with dwell time ``delta`` then
    satisfies ``||x(t)||_P <= beta(||x0||_P, t)`` with
    ``beta(r, t) = r * min(1, M**(-1/2) * exp(ln(M) t / (2 delta)))``.

Nonlinear path
    Near the origin the linearizations contract ``||.||_H`` by ``m1`` per
    dwell; on the annulus ``r <= V <= R`` the flows contract ``V`` by ``m2``.
    Together they give ``V(x(t)) <= min(1, alpha exp(-gamma t)) V(x0)``.

All sampled maxima are empirical: certificates store the sample counts and
seeds used, and verification routines rerun with independent seeds.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.special import gamma as gamma_fn

from ._parallel import pmap
from .dynamics import SwitchedSystem, is_hurwitz
from .errors import CertificationError, InputError, IntegrationError
from .integrate import IntegratorConfig, flow, matrix_exponential, simulate_switched
from .lyapunov import (
    PolynomialForm,
    QuadraticForm,
    check_weak_lyapunov,
    estimate_rho,
    form_sphere,
    sphere_directions,
)
from .signals import SwitchingSignal, constant_tail, generate_dwell_time

__all__ = [
    "HomogeneousCertificate",
    "RateFunction",
    "NonlinearConfig",
    "NonlinearCertificate",
    "BoundReport",
    "MCurve",
    "SlowConvergenceRow",
    "subsystem_contraction",
    "compute_M",
    "beta",
    "verify_homogeneous_bound",
    "verify_switching_instants",
    "compute_nonlinear_certificate",
    "verify_nonlinear_bound",
    "slow_convergence_demo",
    "m_delta_curve",
]

_EXACT_ALIASES = {"exact", "exact-svd", "svd"}
_SPHERE_ALIASES = {"sphere", "sphere-search"}


# ---------------------------------------------------------------------------
# maximization over spheres


def _golden_max(g, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g(c), g(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
    return (c, fc) if fc >= fd else (d, fd)


def _coordinate_golden(g, theta0, h0, iters, lower=None, upper=None):
    """Coordinate-wise golden-section ascent inside a shrinking box."""
    theta = np.array(theta0, dtype=float)
    h = np.array(h0, dtype=float)
    lower = np.full_like(theta, -np.inf) if lower is None else np.asarray(lower, float)
    upper = np.full_like(theta, np.inf) if upper is None else np.asarray(upper, float)
    best = g(theta)
    for _ in range(iters):
        moved = 0.0
        for k in range(len(theta)):
            a, b = max(theta[k] - h[k], lower[k]), min(theta[k] + h[k], upper[k])
            if b <= a:
                continue

            def gk(s, k=k):
                trial = theta.copy()
                trial[k] = s
                return g(trial)

            s, val = _golden_max(gk, a, b, 1e-4 * h[k])
            if val > best:
                moved = max(moved, abs(s - theta[k]) / h[k])
                theta[k], best = s, val
        if moved < 0.5:
            h *= 0.5
        if np.all(h < 1e-13):
            break
    return theta, best


def _batched_line_refine(objective, theta0, h0, iters, lower, upper, points=17):
    """Coordinate-wise grid line search; ``objective`` maps ``(n, k)`` parameter
    rows to ``n`` values in one call. The bracket shrinks 4x per sweep."""
    theta = np.array(theta0, dtype=float)
    h = np.array(h0, dtype=float)
    best = float(objective(theta[None, :])[0])
    grid = np.linspace(-1.0, 1.0, points)
    for _ in range(iters):
        for k in range(len(theta)):
            cand = np.clip(theta[k] + h[k] * grid, lower[k], upper[k])
            rows = np.repeat(theta[None, :], points, axis=0)
            rows[:, k] = cand
            vals = objective(rows)
            j = int(np.argmax(vals))
            if vals[j] > best:
                theta, best = rows[j], float(vals[j])
        h /= 4.0
    return theta, best


def _tangent_basis(y):
    return scipy.linalg.null_space(y[None, :])


def _chart_point(y0, basis, theta):
    y = y0 + basis @ theta
    return y / np.linalg.norm(y)


def _sample_spacing(d, n):
    if d == 2:
        return 2.0 * np.pi / n
    area = 2.0 * np.pi ** (d / 2.0) / gamma_fn(d / 2.0)
    return (area / n) ** (1.0 / (d - 1))


def _sphere_maximize(objective, d, samples, seed, refine_iters):
    """Maximize ``objective`` (vectorized over rows of unit vectors) on ``S^{d-1}``."""
    Y = sphere_directions(d, samples, seed)
    vals = objective(Y)
    j = int(np.argmax(vals))
    y0, best = Y[j], float(vals[j])
    if d == 1 or refine_iters <= 0:
        return best, y0
    basis = _tangent_basis(y0)
    h0 = np.full(d - 1, 2.0 * _sample_spacing(d, samples))
    theta, val = _coordinate_golden(
        lambda th: float(objective(_chart_point(y0, basis, th)[None, :])[0]),
        np.zeros(d - 1), h0, refine_iters,
    )
    if val > best:
        return val, _chart_point(y0, basis, theta)
    return best, y0


# ---------------------------------------------------------------------------
# linear path


def _norm_factor(V):
    """Cholesky factor ``L`` with ``||x||^2 = |L^T x|^2`` and ``L^{-T}``."""
    L = V.cholesky
    Linv_T = scipy.linalg.solve_triangular(L.T, np.eye(L.shape[0]), lower=False)
    return L, Linv_T


def _dissipation_gap(B, V, delta, Linv_T):
    """``1 - m**2`` and its minimizer, accurate when ``m`` is within round-off of 1.

    ``P - E^T P E`` equals the gramian ``int_0^delta e^{sB^T} Q e^{sB} ds`` with
    ``Q = -(B^T P + P B)``; it is read off one block exponential (Van Loan)
    instead of being formed by cancellation.
    """
    d = B.shape[0]
    P = V.norm_matrix
    Q = -(B.T @ P + P @ B)
    C = np.zeros((2 * d, 2 * d))
    C[:d, :d] = -B.T
    C[:d, d:] = Q
    C[d:, d:] = B
    F = matrix_exponential(C, delta)
    G = F[d:, d:].T @ F[:d, d:]
    S = Linv_T.T @ (0.5 * (G + G.T)) @ Linv_T
    lam, W = np.linalg.eigh(S)
    return float(lam[0]), W[:, 0]


_GAP_SWITCH = 1e-6


def _contraction(B, V, delta, method, samples, refine_iters, seed):
    """``(m, gap, x_star)`` with ``gap = 1 - m`` computed without cancellation
    on the exact path."""
    if delta <= 0:
        raise InputError("delta must be positive")
    E = matrix_exponential(B, delta)
    L, Linv_T = _norm_factor(V)
    K = L.T @ E @ Linv_T
    if method in _EXACT_ALIASES:
        _, sv, Vt = np.linalg.svd(K)
        m, y = float(sv[0]), Vt[0]
        if abs(1.0 - m) < _GAP_SWITCH:
            g, y = _dissipation_gap(B, V, delta, Linv_T)
            gap = g / (1.0 + math.sqrt(1.0 - g)) if g < 1.0 else 1.0
            return m, gap, Linv_T @ y
        return m, 1.0 - m, Linv_T @ y
    if method in _SPHERE_ALIASES:
        m, y = _sphere_maximize(
            lambda Y: np.linalg.norm(Y @ K.T, axis=1), B.shape[0], samples, seed, refine_iters
        )
        return m, 1.0 - m, Linv_T @ y
    raise InputError(f"unknown search method {method!r}")


def subsystem_contraction(B, V, delta, method="exact", samples=4096, refine_iters=50, seed=0):
    """``max ||exp(delta B) x||`` over the unit sphere of ``V``'s norm.

    Returns ``(m, x_star)`` where ``x_star`` is a norm-one maximizer.
    """
    m, _, x = _contraction(B, V, delta, method, samples, refine_iters, seed)
    return m, x


@dataclass(frozen=True)
class HomogeneousCertificate:
    """``M(delta) = max_i m_i`` and where it is attained."""

    delta: float
    M: float
    per_subsystem_m: tuple
    method: str
    argmax_point: np.ndarray
    argmax_subsystem: int
    samples: int = 0
    seed: int = 0
    gap: Optional[float] = None  # 1 - M without cancellation

    @property
    def rate(self) -> "RateFunction":
        gap = 1.0 - self.M if self.gap is None else self.gap
        return RateFunction(self.delta, self.M, math.log1p(-gap))


def _require_linear_quadratic(sys):
    if not sys.all_linear:
        raise InputError("the dwell-time rate M(delta) applies to linear subsystems only")
    V = sys.lyapunov
    if isinstance(V, PolynomialForm) and V.is_quadratic:
        return QuadraticForm(V.norm_matrix)
    if not isinstance(V, QuadraticForm):
        raise InputError("the dwell-time rate M(delta) needs a quadratic Lyapunov form")
    return V


def compute_M(sys: SwitchedSystem, delta: float, method: str = "exact", samples: int = 4096,
              refine_iters: int = 50, seed: int = 0) -> HomogeneousCertificate:
    """Worst one-dwell contraction factor ``M(delta)``.

    Raises
    ------
    CertificationError
        If some ``m_i >= 1``; the message names the subsystem.
    """
    V = _require_linear_quadratic(sys)
    if method not in _EXACT_ALIASES | _SPHERE_ALIASES:
        raise InputError(f"unknown search method {method!r}")
    ms, gaps, points = [], [], []
    for s in sys.subsystems:
        m, gap, x = _contraction(s.matrix, V, delta, method, samples, refine_iters, seed)
        ms.append(m)
        gaps.append(gap)
        points.append(x)
    for i, (m, gap) in enumerate(zip(ms, gaps), start=1):
        if not gap > 0.0:
            raise CertificationError(
                f"subsystem {i}: one-dwell contraction m = {m:.6g} >= 1 at delta = {delta:g}",
                stage=f"subsystem {i}",
            )
    j = int(np.argmin(gaps))
    # a contraction closer to 1 than double resolution is stored as the
    # largest double below 1; ``gap`` keeps the accurate distance
    M = ms[j] if gaps[j] >= _GAP_SWITCH else min(1.0 - gaps[j], math.nextafter(1.0, 0.0))
    name = "exact-svd" if method in _EXACT_ALIASES else "sphere-search"
    return HomogeneousCertificate(
        delta=float(delta),
        M=float(M),
        per_subsystem_m=tuple(float(m) for m in ms),
        method=name,
        argmax_point=points[j],
        argmax_subsystem=j + 1,
        samples=samples if name == "sphere-search" else 0,
        seed=seed,
        gap=float(gaps[j]),
    )


@dataclass(frozen=True)
class RateFunction:
    """Class-KL bound ``beta(r, t) = r min(1, M**-0.5 exp(ln(M) t / (2 delta)))``."""

    delta: float
    M: float
    log_M: Optional[float] = None  # supply when M is within round-off of 1

    def __post_init__(self):
        if not (self.delta > 0 and 0 < self.M < 1):
            raise InputError("need delta > 0 and 0 < M < 1")
        if self.log_M is None:
            object.__setattr__(self, "log_M", math.log(self.M))
        elif not self.log_M < 0:
            raise InputError("log_M must be negative")

    @property
    def decay_rate(self):
        return -self.log_M / (2.0 * self.delta)

    @property
    def overshoot(self):
        return math.exp(-self.log_M / 2.0)

    def __call__(self, r, t):
        return beta(self, r, t)


def beta(rf: RateFunction, r, t):
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    lnM = rf.log_M
    g = np.exp(-lnM / 2.0 + lnM / (2.0 * rf.delta) * t)
    out = r * np.minimum(1.0, g)
    return float(out) if out.ndim == 0 else out


@dataclass
class BoundReport:
    """Outcome of a Monte Carlo bound check."""

    trials: int
    violations: int
    max_ratio: float
    worst_trial: int
    worst_time: float
    seed: int
    tolerance: float
    examples: list = field(default_factory=list)

    @property
    def ok(self):
        return self.violations == 0


def _unit_states(V, n, rng):
    Y = rng.standard_normal((n, V.dimension))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    _, Linv_T = _norm_factor(V)
    return Y @ Linv_T.T


def verify_homogeneous_bound(sys: SwitchedSystem, cert: HomogeneousCertificate, trials: int = 1000,
                             horizon_mult: float = 20.0, seed: int = 0, rel_tol: float = 1e-8,
                             record_dt: Optional[float] = None, spread: float = 2.0,
                             law: str = "uniform") -> BoundReport:
    """Simulate random dwell-``delta`` inputs from unit initial states and
    compare ``||x(t)||_P`` to ``beta(||x0||_P, t)`` at every record point."""
    V = _require_linear_quadratic(sys)
    rf = cert.rate
    delta = cert.delta
    horizon = horizon_mult * delta
    record_dt = delta / 10.0 if record_dt is None else record_dt
    rng = np.random.default_rng(seed)
    X0 = _unit_states(V, trials, rng)
    signal_seeds = rng.integers(0, 2**63 - 1, size=trials)

    def one(k):
        u = generate_dwell_time(int(signal_seeds[k]), sys.p, delta, horizon, spread=spread, law=law)
        traj = simulate_switched(sys, u, X0[k], horizon, record_dt=record_dt)
        n = V.norm(traj.states)
        bound = beta(rf, V.norm(X0[k]), traj.times)
        ratio = n / bound
        return traj.times, ratio

    return _collect(pmap(one, range(trials)), trials, seed, rel_tol)


def _collect(results, trials, seed, rel_tol):
    violations, examples = 0, []
    worst = (-np.inf, -1, 0.0)
    for k, (times, ratio) in enumerate(results):
        bad = ratio > 1.0 + rel_tol
        if np.any(bad):
            violations += 1
            if len(examples) < 10:
                j = int(np.argmax(ratio))
                examples.append({"trial": k, "t": float(times[j]), "ratio": float(ratio[j])})
        j = int(np.nanargmax(ratio))
        if ratio[j] > worst[0]:
            worst = (float(ratio[j]), k, float(times[j]))
    return BoundReport(trials, violations, worst[0], worst[1], worst[2], seed, rel_tol, examples)


def verify_switching_instants(sys: SwitchedSystem, cert: HomogeneousCertificate, trials: int = 200,
                              periods: int = 20, seed: int = 0, rel_tol: float = 1e-8) -> BoundReport:
    """Back-to-back switching every ``delta``: check ``||x(k delta)||_P <= M**k ||x0||_P``."""
    V = _require_linear_quadratic(sys)
    rng = np.random.default_rng(seed)
    X0 = _unit_states(V, trials, rng)
    E = [matrix_exponential(s.matrix, cert.delta) for s in sys.subsystems]
    k = np.arange(periods + 1)
    bound = cert.M ** k

    def one(j):
        idx = rng_idx[j]
        x = X0[j]
        norms = [V.norm(x)]
        for i in idx:
            x = E[i] @ x
            norms.append(V.norm(x))
        return k * cert.delta, np.asarray(norms) / (bound * norms[0])

    rng_idx = rng.integers(0, sys.p, size=(trials, periods))
    return _collect(pmap(one, range(trials)), trials, seed, rel_tol)


@dataclass(frozen=True)
class MCurve:
    deltas: np.ndarray
    values: np.ndarray
    monotone: bool

    def __iter__(self):
        return iter(zip(self.deltas.tolist(), self.values.tolist()))

    def __len__(self):
        return len(self.deltas)


def m_delta_curve(sys: SwitchedSystem, deltas: Sequence[float], method: str = "exact",
                  samples: int = 4096, seed: int = 0, tol: float = 1e-9) -> MCurve:
    """``M(delta)`` on a grid; flags (and warns about) non-monotone output."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or len(deltas) == 0:
        raise InputError("delta grid must be a nonempty 1-D sequence")
    order = np.argsort(deltas, kind="stable")
    vals = np.array(pmap(lambda d: compute_M(sys, d, method, samples, seed=seed).M, deltas))
    sorted_vals = vals[order]
    monotone = bool(np.all(np.diff(sorted_vals) <= tol))
    if not monotone:
        import warnings

        warnings.warn(
            "M(delta) is not nonincreasing on the grid; sphere search may be under-resolved",
            RuntimeWarning,
            stacklevel=2,
        )
    return MCurve(deltas, vals, monotone)


# ---------------------------------------------------------------------------
# nonlinear path


@dataclass(frozen=True)
class NonlinearConfig:
    """Sampling budget and rules for :func:`compute_nonlinear_certificate`.

    ``m1_rule`` is ``"midpoint"`` (``(1 + m) / 2``) or a number in ``[m, 1)``.
    ``rho_search_radius`` defaults to ``sqrt(R / 2)``: inside the two-sided
    bound ``V <= 2 ||x||_H^2`` that ball lies in ``{V <= R}``.
    """

    m1_rule: Union[str, float] = "midpoint"
    samples: int = 1024
    radial: int = 12
    shells: int = 8
    rho_samples: int = 2048
    bisection_iters: int = 20
    refine_iters: int = 8
    r_safety: float = 0.95
    rho_search_radius: Optional[float] = None
    lyapunov_samples: int = 1024
    seed: int = 42
    integrator: IntegratorConfig = IntegratorConfig()

    def seeds(self) -> Dict[str, int]:
        names = ("lyapunov", "rho", "r1", "r1_check", "r", "m2")
        return {n: self.seed + 1000 * k for k, n in enumerate(names)}


@dataclass(frozen=True)
class NonlinearCertificate:
    delta: float
    R: float
    m: float
    m1: float
    r1: float
    rho: float
    r: float
    m2: float
    alpha: float
    gamma: float
    annulus_empty: bool
    samples: dict
    seeds: dict

    def bound(self, t):
        """``min(1, alpha exp(-gamma t))``: factor multiplying ``V(x0)``."""
        t = np.asarray(t, dtype=float)
        return np.minimum(1.0, self.alpha * np.exp(-self.gamma * t))


def _as_polynomial_form(V):
    if isinstance(V, QuadraticForm):
        return PolynomialForm.from_quadratic(V.P)
    if isinstance(V, PolynomialForm):
        return V
    raise InputError("system has no Lyapunov form")


def _level_radius(V, U, level, max_doublings=60, bisections=60):
    """Smallest ``s > 0`` with ``V(s u) >= level`` along each row ``u`` of ``U``
    (directions of unit H-norm), found by doubling then bisection."""
    n = len(U)
    hi = np.full(n, math.sqrt(level))
    for _ in range(max_doublings):
        below = V.value(hi[:, None] * U) < level
        if not np.any(below):
            break
        hi[below] *= 2.0
    else:
        raise CertificationError("Lyapunov function does not reach the requested level "
                                 "(is V proper?)", stage="level set")
    lo = np.zeros(n)
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        below = V.value(mid[:, None] * U) < level
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return hi


def _unit_h_directions(V, n, seed):
    return form_sphere(V, 1.0, n, seed)


def compute_nonlinear_certificate(sys: SwitchedSystem, delta: float, R: float,
                                  config: Optional[NonlinearConfig] = None) -> NonlinearCertificate:
    """Two-region certificate ``V(x(t)) <= min(1, alpha e^{-gamma t}) V(x0)`` on ``{V <= R}``.

    Stages, each raising :class:`CertificationError` with ``stage`` set on
    failure: hypotheses, ``m`` (exact linearized contraction), ``rho``,
    ``r1``, ``r``, ``m2``.
    """
    cfg = config or NonlinearConfig()
    if delta <= 0 or R <= 0:
        raise InputError("delta and R must be positive")
    V = _as_polynomial_form(sys.lyapunov)
    seeds = cfg.seeds()
    icfg = cfg.integrator

    # hypotheses: Hurwitz linearizations, weak decrease of V on {V <= R}
    for i, s in enumerate(sys.subsystems, start=1):
        hz = is_hurwitz(s.matrix)
        if not hz.is_hurwitz:
            raise CertificationError(
                f"linearization of subsystem {i} is not Hurwitz (abscissa {hz.abscissa:.3g})",
                stage="hypotheses",
            )
    U = _unit_h_directions(V, cfg.samples, seeds["lyapunov"])
    outer = float(np.max(_level_radius(V, U, R)))
    radii = outer * np.arange(1, cfg.shells + 1) / cfg.shells
    wl_sys = SwitchedSystem(sys.subsystems, V)
    for rep in check_weak_lyapunov(wl_sys, cfg.lyapunov_samples, radii, seed=seeds["lyapunov"]):
        if not rep.holds:
            raise CertificationError(
                f"V is not weakly decreasing along subsystem {rep.subsystem}: "
                f"L_f V = {rep.worst_value:.3g} at {rep.worst_point}",
                stage="hypotheses",
            )

    # (1) exact contraction of the linearizations in the H-norm
    lin = QuadraticForm(V.norm_matrix)
    m = max(subsystem_contraction(s.matrix, lin, delta)[0] for s in sys.subsystems)
    if not m < 1.0:
        raise CertificationError(f"linearized one-dwell contraction m = {m:.6g} >= 1", stage="m")

    # (2) m1 and the radius r1 where the nonlinear flows still contract by m1
    m1 = (1.0 + m) / 2.0 if cfg.m1_rule == "midpoint" else float(cfg.m1_rule)
    if not m <= m1 < 1.0:
        raise InputError(f"m1 = {m1} must lie in [m, 1) with m = {m}")
    search = math.sqrt(R / 2.0) if cfg.rho_search_radius is None else cfg.rho_search_radius
    rho = estimate_rho(V, search, cfg.rho_samples, seeds["rho"])
    fractions = np.arange(1, cfg.shells + 1) / cfg.shells

    def contracts(radius, seed):
        base = _unit_h_directions(V, cfg.samples, seed)
        X = np.concatenate([radius * f * base for f in fractions])
        nx = V.norm(X)
        for s in sys.subsystems:
            if np.any(V.norm(flow(s, delta, X, icfg)) > m1 * nx * (1 + 1e-12)):
                return False
        return True

    if contracts(rho, seeds["r1"]):
        r1 = rho
    else:
        lo, hi = 0.0, rho
        for _ in range(cfg.bisection_iters):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if contracts(mid, seeds["r1"]) else (lo, mid)
        r1 = lo
    for _ in range(50):
        if r1 > 0 and contracts(r1, seeds["r1_check"]):
            break
        r1 *= 0.9
    else:
        raise CertificationError("no radius passes the linearized contraction test", stage="r1")
    if r1 <= 0:
        raise CertificationError("no radius passes the linearized contraction test", stage="r1")

    # (3) r: {V < r} inside the H-ball of radius r1 (sampled, with safety factor)
    r = cfg.r_safety * float(np.min(V.value(r1 * _unit_h_directions(V, cfg.samples, seeds["r"]))))
    annulus_empty = r >= R

    # (4) m2: worst one-dwell decrease ratio of V over the annulus r <= V <= R
    if annulus_empty:
        # the near-origin region already covers {V <= R}
        r = R
        m2 = m1 * m1
    else:
        m2 = _annulus_contraction(sys, V, delta, r, R, cfg, seeds["m2"])
        if not m2 < 1.0:
            raise CertificationError(f"annulus contraction m2 = {m2:.6g} >= 1", stage="m2")

    # (5) rate constants
    alpha = 4.0 * math.exp(-math.log(m1)) * math.exp(-math.log(m2) / 2.0)
    gamma = min(-math.log(m1) / delta, -math.log(m2) / (2.0 * delta))
    return NonlinearCertificate(
        delta=float(delta), R=float(R), m=float(m), m1=float(m1), r1=float(r1), rho=float(rho),
        r=float(r), m2=float(m2), alpha=alpha, gamma=gamma, annulus_empty=annulus_empty,
        samples={"directions": cfg.samples, "radial": cfg.radial, "shells": cfg.shells,
                 "rho": cfg.rho_samples, "lyapunov": cfg.lyapunov_samples,
                 "refine_iters": cfg.refine_iters},
        seeds=seeds,
    )


def _annulus_contraction(sys, V, delta, r, R, cfg, seed):
    icfg = cfg.integrator
    U = _unit_h_directions(V, cfg.samples, seed)
    s_in = _level_radius(V, U, r)
    s_out = _level_radius(V, U, R)
    f = np.linspace(0.0, 1.0, cfg.radial)
    S = s_in[:, None] + f[None, :] * (s_out - s_in)[:, None]
    X = (S[:, :, None] * U[:, None, :]).reshape(-1, V.dimension)
    vx = V.value(X)
    inside = (vx >= r * (1 - 1e-12)) & (vx <= R * (1 + 1e-12))
    X, vx = X[inside], vx[inside]
    Linv_T = _norm_factor(V)[1]
    L = V.cholesky
    d = V.dimension
    best = -np.inf
    for s in sys.subsystems:
        ratio = V.value(flow(s, delta, X, icfg)) / vx
        j = int(np.argmax(ratio))
        best = max(best, float(ratio[j]))
        if cfg.refine_iters <= 0:
            continue
        # local refinement in (sphere chart, radial fraction) coordinates
        x0 = X[j]
        y0 = L.T @ x0
        y0 /= np.linalg.norm(y0)
        basis = _tangent_basis(y0) if d > 1 else np.zeros((d, 0))

        def points(thetas):
            Y = y0[None, :] + thetas[:, :-1] @ basis.T
            Y /= np.linalg.norm(Y, axis=1, keepdims=True)
            Udir = Y @ Linv_T.T
            a = _level_radius(V, Udir, r)
            b = _level_radius(V, Udir, R)
            return (a + thetas[:, -1] * (b - a))[:, None] * Udir

        def objective(thetas, s=s):
            P = points(thetas)
            v = V.value(P)
            ok = (v >= r * (1 - 1e-12)) & (v <= R * (1 + 1e-12))
            out = np.full(len(P), -np.inf)
            if np.any(ok):
                out[ok] = V.value(flow(s, delta, P[ok], icfg)) / v[ok]
            return out

        u0 = (Linv_T @ y0)[None, :]
        a0, b0 = _level_radius(V, u0, r)[0], _level_radius(V, u0, R)[0]
        frac0 = float(np.clip((V.norm(x0) - a0) / (b0 - a0), 0.0, 1.0)) if b0 > a0 else 0.0
        spacing = 2.0 * _sample_spacing(d, cfg.samples) if d > 1 else 0.0
        h = np.append(np.full(d - 1, spacing), 1.0 / max(cfg.radial - 1, 1))
        lower = np.append(np.full(d - 1, -np.inf), 0.0)
        upper = np.append(np.full(d - 1, np.inf), 1.0)
        _, val = _batched_line_refine(objective, np.append(np.zeros(d - 1), frac0), h,
                                      cfg.refine_iters, lower, upper)
        best = max(best, val)
    return best


def _states_in_sublevel(V, R, n, rng):
    d = V.dimension
    Y = rng.standard_normal((n, d))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    U = Y @ _norm_factor(V)[1].T
    s_out = _level_radius(V, U, R)
    # a quarter of the draws sit on the boundary V = R where the bound is tightest
    frac = rng.random(n) ** (1.0 / d)
    frac[: n // 4] = 1.0
    X = (frac * s_out)[:, None] * U
    # level-radius bisection lands just above R; pull back inside
    v = V.value(X)
    over = v > R
    X[over] *= np.sqrt(R / v[over])[:, None]
    return X


def verify_nonlinear_bound(sys: SwitchedSystem, cert: NonlinearCertificate, trials: int = 500,
                           seed: int = 0, horizon_mult: float = 10.0,
                           record_dt: Optional[float] = None, rel_tol: float = 1e-8,
                           cfg: Optional[IntegratorConfig] = None, spread: float = 2.0) -> BoundReport:
    """Random dwell-``delta`` inputs from states in ``{V <= R}``; checks
    ``V(x(t)) <= min(1, alpha e^{-gamma t}) V(x0)`` at every record point."""
    V = _as_polynomial_form(sys.lyapunov)
    delta = cert.delta
    horizon = horizon_mult * delta
    record_dt = delta / 4.0 if record_dt is None else record_dt
    rng = np.random.default_rng(seed)
    X0 = _states_in_sublevel(V, cert.R, trials, rng)
    signal_seeds = rng.integers(0, 2**63 - 1, size=trials)

    def one(k):
        u = generate_dwell_time(int(signal_seeds[k]), sys.p, delta, horizon, spread=spread,
                                law="uniform")
        traj = simulate_switched(sys, u, X0[k], horizon, cfg, record_dt)
        v0 = float(V.value(X0[k]))
        vt = V.value(traj.states)
        bound = cert.bound(traj.times) * v0
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(bound > 0, vt / bound, np.where(vt > 0, np.inf, 0.0))
        return traj.times, ratio

    return _collect(pmap(one, range(trials)), trials, seed, rel_tol)


# ---------------------------------------------------------------------------
# arbitrarily slow convergence


@dataclass(frozen=True)
class SlowConvergenceRow:
    T: float
    time_to_half: float
    norm_at_T: float


def _first_crossing(sys, u, x0, threshold, V, cfg, record_dt, horizon):
    traj = simulate_switched(sys, u, x0, horizon, cfg, record_dt)
    v = V.value(traj.states)
    below = np.nonzero(v <= threshold)[0]
    if len(below) == 0:
        return None, traj
    k = int(below[0])
    if k == 0:
        return 0.0, traj
    # refine inside (t_{k-1}, t_k]: one subsystem is active there
    t0, t1 = traj.times[k - 1], traj.times[k]
    s = sys[int(traj.input_trace[k - 1])]
    xa = traj.states[k - 1]
    lo, hi = 0.0, t1 - t0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if V.value(flow(s, mid, xa, cfg)) <= threshold:
            hi = mid
        else:
            lo = mid
    return float(t0 + hi), traj


def slow_convergence_demo(sys: SwitchedSystem, u: SwitchingSignal, x0, T_grid: Sequence[float],
                          tail_index: int = 1, cfg: Optional[IntegratorConfig] = None,
                          record_dt: float = 0.05, max_tail: float = 1e4) -> List[SlowConvergenceRow]:
    """For each ``T``, follow ``u`` on ``[0, T)`` then hold ``tail_index``; report the
    first time ``V`` falls to half its initial value.

    Each extension has finitely many switches, so it belongs to every
    dwell-time class; growth of these times with ``T`` shows that no single
    rate covers the class.
    """
    V = sys.lyapunov
    x0 = np.asarray(x0, dtype=float)
    threshold = 0.5 * float(V.value(x0))
    rows = []
    for T in T_grid:
        tail = 10.0
        while True:
            ubar = constant_tail(u, T, tail_index, max(u.horizon, T + tail))
            t_half, traj = _first_crossing(sys, ubar, x0, threshold, V, cfg, record_dt, T + tail)
            if t_half is not None:
                break
            if tail >= max_tail:
                raise IntegrationError(f"V did not halve within T + {max_tail:g}",
                                       traj.times[-1], traj.final_state)
            tail *= 4.0
        kT = int(np.searchsorted(traj.times, T))
        kT = min(kT, len(traj.times) - 1)
        rows.append(SlowConvergenceRow(float(T), t_half, float(V.norm(traj.states[kT]))))
    return rows
