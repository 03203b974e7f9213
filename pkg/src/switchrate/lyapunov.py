"""Common weak Lyapunov functions and sampled hypothesis checks.

Two representations are supported:

* :class:`QuadraticForm` -- ``V(x) = x^T P x`` with norm ``||x||_P``.
* :class:`PolynomialForm` -- ``V(x) = sum_j c_j x**e_j`` (degrees >= 2) whose
  quadratic part ``x^T (H/2) x`` defines the norm ``||x||_H``.

Both expose ``value``, ``gradient``, ``norm_matrix`` (the matrix ``Q`` with
``norm(x)**2 = x^T Q x``) and its Cholesky factor, so downstream code can treat
them uniformly.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from ._poly import gradient_tables, monomial_values
from .dynamics import Subsystem, SwitchedSystem, evaluate
from .errors import CertificationError, InputError, NumericalError

__all__ = [
    "QuadraticForm",
    "PolynomialForm",
    "WeakLyapunovReport",
    "LinearizationReport",
    "sphere_directions",
    "form_sphere",
    "p_norm",
    "h_norm",
    "lie_derivative",
    "check_weak_lyapunov",
    "check_linearization_lyapunov",
    "estimate_rho",
]


def _cholesky(Q, what):
    if not np.all(np.isfinite(Q)):
        raise InputError(f"{what} has non-finite entries")
    try:
        return np.linalg.cholesky(Q)
    except np.linalg.LinAlgError as exc:
        raise InputError(f"{what} is not positive definite") from exc


def _states(x, d):
    X = np.asarray(x, dtype=float)
    if X.shape[-1:] != (d,) or X.ndim > 2:
        raise InputError(f"state has shape {X.shape}, expected ({d},) or (n, {d})")
    return X


class QuadraticForm:
    """``V(x) = x^T P x`` for a symmetric positive definite ``P``."""

    def __init__(self, P):
        P = np.array(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InputError(f"P must be square, got shape {P.shape}")
        scale = max(np.max(np.abs(P)), np.finfo(float).tiny)
        if np.max(np.abs(P - P.T)) > 1e-12 * scale:
            raise InputError("P must be symmetric")
        P = 0.5 * (P + P.T)
        self.cholesky = _cholesky(P, "P")
        P.setflags(write=False)
        self.P = P

    @property
    def dimension(self):
        return self.P.shape[0]

    @property
    def norm_matrix(self):
        return self.P

    @property
    def hessian(self):
        return 2.0 * self.P

    def value(self, x):
        X = _states(x, self.dimension)
        return np.einsum("...i,ij,...j->...", X, self.P, X)

    def gradient(self, x):
        X = _states(x, self.dimension)
        return 2.0 * X @ self.P

    def norm(self, x):
        return np.sqrt(np.maximum(self.value(x), 0.0))

    def __eq__(self, other):
        return isinstance(other, QuadraticForm) and np.array_equal(self.P, other.P)

    def __repr__(self):
        return f"QuadraticForm(d={self.dimension})"


class PolynomialForm:
    """Polynomial Lyapunov function with positive definite Hessian at 0.

    Parameters
    ----------
    terms : sequence of ``(coeff, exponents)`` pairs
        Every exponent vector must have total degree >= 2; duplicates are
        summed.
    """

    def __init__(self, terms):
        merged = {}
        d = None
        for coeff, exps in terms:
            exps = tuple(int(e) for e in exps)
            if d is None:
                d = len(exps)
            if len(exps) != d or d == 0:
                raise InputError("all exponent vectors must share one positive length")
            if any(e < 0 for e in exps):
                raise InputError("exponents must be nonnegative")
            if sum(exps) < 2:
                raise InputError(
                    "Lyapunov terms must have degree >= 2 (V(0) = 0, dV(0) = 0)"
                )
            merged[exps] = merged.get(exps, 0.0) + float(coeff)
        if d is None:
            raise InputError("a polynomial form needs at least one term")
        self.terms = tuple((c, e) for e, c in sorted(merged.items()) if c != 0.0)
        self._d = d
        self._coeffs = np.array([c for c, _ in self.terms])
        self._exps = np.array([e for _, e in self.terms], dtype=int).reshape(-1, d)
        self._grad = gradient_tables(self._coeffs, self._exps)

        H = np.zeros((d, d))
        for c, e in self.terms:
            if sum(e) != 2:
                continue
            idx = [k for k, ek in enumerate(e) for _ in range(ek)]
            i, j = idx
            if i == j:
                H[i, i] += 2.0 * c
            else:
                H[i, j] += c
                H[j, i] += c
        self.cholesky = _cholesky(0.5 * H, "Hessian at the origin")
        H.setflags(write=False)
        self.H = H

    @classmethod
    def from_quadratic(cls, P):
        P = np.asarray(P, dtype=float)
        d = P.shape[0]
        terms = []
        for i in range(d):
            for j in range(i, d):
                e = [0] * d
                e[i] += 1
                e[j] += 1
                c = P[i, i] if i == j else P[i, j] + P[j, i]
                if c != 0.0:
                    terms.append((c, e))
        return cls(terms)

    @property
    def dimension(self):
        return self._d

    @property
    def hessian(self):
        return self.H

    @property
    def norm_matrix(self):
        return 0.5 * self.H

    @property
    def is_quadratic(self):
        return all(sum(e) == 2 for _, e in self.terms)

    def value(self, x):
        X = _states(x, self._d)
        X2 = X.reshape(-1, self._d)
        v = monomial_values(X2, self._exps) @ self._coeffs
        return v[0] if X.ndim == 1 else v

    def gradient(self, x):
        X = _states(x, self._d)
        X2 = X.reshape(-1, self._d)
        G = np.empty_like(X2)
        for k, (c, e) in enumerate(self._grad):
            G[:, k] = monomial_values(X2, e) @ c if len(c) else 0.0
        return G[0] if X.ndim == 1 else G

    def norm(self, x):
        X = _states(x, self._d)
        q = np.einsum("...i,ij,...j->...", X, self.norm_matrix, X)
        return np.sqrt(np.maximum(q, 0.0))

    def __eq__(self, other):
        return isinstance(other, PolynomialForm) and self.terms == other.terms

    def __repr__(self):
        return f"PolynomialForm(d={self._d}, {len(self.terms)} terms)"


def p_norm(q: QuadraticForm, x):
    """``sqrt(x^T P x)``."""
    return q.norm(x)


def h_norm(f, x):
    """``sqrt(x^T H x / 2)``; for a quadratic form ``H = 2P`` so this is ``p_norm``."""
    return f.norm(x)


def lie_derivative(V, s: Subsystem, x):
    """``dV(x) . f(x)``, computed from the exact gradient."""
    if V.dimension != s.dimension:
        raise InputError("Lyapunov form and subsystem dimensions differ")
    X = _states(x, s.dimension)
    return np.sum(V.gradient(X) * evaluate(s, X), axis=-1)


# sampling ---------------------------------------------------------------


def sphere_directions(d: int, n: int = 4096, seed: int = 0) -> np.ndarray:
    """Deterministic unit vectors in ``R^d``.

    ``d == 1`` gives ``+1, -1``; ``d == 2`` gives ``n`` equally spaced angles
    with a seed-dependent phase; ``d >= 3`` normalizes seeded Gaussians.
    """
    if n < 1:
        raise InputError("need at least one sample")
    if d == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng(seed)
    if d == 2:
        phase = 0.5 if seed == 0 else rng.random()
        theta = 2.0 * np.pi * (np.arange(n) + phase) / n
        return np.column_stack([np.cos(theta), np.sin(theta)])
    Y = rng.standard_normal((n, d))
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def form_sphere(V, radius=1.0, n=4096, seed=0):
    """Points with ``V.norm(x) == radius`` (the P- or H-sphere)."""
    Y = sphere_directions(V.dimension, n, seed)
    # norm(x)^2 = x^T L L^T x, so x = L^{-T} y maps the unit sphere onto it
    X = scipy.linalg.solve_triangular(V.cholesky.T, Y.T, lower=False).T
    return radius * X


@dataclass(frozen=True)
class WeakLyapunovReport:
    subsystem: int
    holds: bool
    worst_point: np.ndarray
    worst_value: float
    samples: int
    tolerance: float
    seed: int


def check_weak_lyapunov(
    sys: SwitchedSystem,
    sphere_samples: int = 4096,
    radii: Sequence[float] = (1.0,),
    tolerance: Optional[float] = None,
    seed: int = 0,
) -> List[WeakLyapunovReport]:
    """Sample ``L_f V`` on form-spheres of the given radii, per subsystem.

    The default tolerance at radius ``rho`` is ``1e-9`` times the largest
    sampled ``V`` on that sphere.
    """
    V = sys.lyapunov
    if V is None:
        raise InputError("system has no Lyapunov form")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.size == 0 or np.any(radii <= 0):
        raise InputError("radii must be positive")
    base = form_sphere(V, 1.0, sphere_samples, seed)
    X = np.concatenate([r * base for r in radii])
    if tolerance is None:
        vals = V.value(X).reshape(len(radii), -1)
        tol = np.repeat(1e-9 * np.max(np.abs(vals), axis=1), len(base))
    else:
        tol = np.full(len(X), float(tolerance))
    reports = []
    for k, s in enumerate(sys.subsystems, start=1):
        L = lie_derivative(V, s, X)
        j = int(np.argmax(L))
        reports.append(
            WeakLyapunovReport(
                subsystem=k,
                holds=bool(np.all(L <= tol)),
                worst_point=X[j].copy(),
                worst_value=float(L[j]),
                samples=len(X),
                tolerance=float(tol[j]),
                seed=seed,
            )
        )
    return reports


@dataclass(frozen=True)
class LinearizationReport:
    subsystem: int
    holds: bool
    max_value: float  # max of <x, B x>_H over the H-unit sphere
    tolerance: float


def check_linearization_lyapunov(sys: SwitchedSystem, tolerance: float = 1e-12) -> List[LinearizationReport]:
    """Exact test that ``||x||_H^2`` is weakly decreasing along each ``x' = B_i x``.

    ``max <x, B x>_H`` over the H-unit sphere is the largest generalized
    eigenvalue of ``sym(Q B)`` with respect to ``Q = H/2``.
    """
    V = sys.lyapunov
    if V is None:
        raise InputError("system has no Lyapunov form")
    Q = V.norm_matrix
    reports = []
    for k, s in enumerate(sys.subsystems, start=1):
        S = 0.5 * (Q @ s.matrix + s.matrix.T @ Q)
        try:
            lam = scipy.linalg.eigh(S, Q, eigvals_only=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"generalized eigensolver failed for subsystem {k}: {exc}") from exc
        top = float(lam[-1])
        tol = tolerance * max(1.0, float(np.max(np.abs(S))))
        reports.append(LinearizationReport(k, top <= tol, top, tol))
    return reports


def estimate_rho(
    V,
    search_radius: float,
    samples: int = 4096,
    seed: int = 0,
    shells: int = 32,
    iterations: int = 20,
) -> float:
    """Radius ``rho`` in H-norm where ``||x||^2/2 <= V(x) <= 2 ||x||^2``.

    Returns ``search_radius`` when the two-sided bound holds on every sampled
    shell inside it, otherwise bisects (``iterations`` halvings) for the
    largest passing radius.

    Raises
    ------
    CertificationError
        If no positive radius above ``search_radius * 2**-iterations`` passes.
    """
    if search_radius <= 0:
        raise InputError("search_radius must be positive")
    base = form_sphere(V, 1.0, samples, seed)
    fractions = np.arange(1, shells + 1) / shells

    def ok(rho):
        X = np.concatenate([rho * f * base for f in fractions])
        q = V.norm(X) ** 2
        v = V.value(X)
        slack = 1e-12 * q
        return bool(np.all(0.5 * q <= v + slack) and np.all(v <= 2.0 * q + slack))

    if ok(search_radius):
        return float(search_radius)
    lo, hi = 0.0, float(search_radius)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if lo <= 0.0:
        raise CertificationError(
            f"no radius above {search_radius * 2.0**-iterations:.3g} satisfies "
            "||x||_H^2 / 2 <= V(x) <= 2 ||x||_H^2", stage="rho"
        )
    return lo
