"""Vector fields of a switched system.

A :class:`Subsystem` is either linear, ``f(x) = A x``, or polynomial,
``f(x) = A x + sum_j c_j x**e_j e_{target_j}`` where every monomial has total
degree at least two, so that ``A`` is always the linearization at the origin.
"""

from collections import namedtuple
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from ._poly import monomial_values
from .errors import InputError, NumericalError

__all__ = [
    "SubsystemKind",
    "Monomial",
    "Subsystem",
    "SwitchedSystem",
    "HurwitzResult",
    "evaluate",
    "jacobian_at_origin",
    "is_hurwitz",
    "convex_combination",
]


class SubsystemKind(str, Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class Monomial:
    """One term ``coeff * x**exponents`` added to component ``target`` (0-based)."""

    target: int
    coeff: float
    exponents: Tuple[int, ...]


def _merge_terms(terms, d):
    merged = {}
    for term in terms:
        if not isinstance(term, Monomial):
            term = Monomial(int(term[0]), float(term[1]), tuple(int(e) for e in term[2]))
        exps = tuple(int(e) for e in term.exponents)
        if len(exps) != d:
            raise InputError(f"monomial exponent vector has length {len(exps)}, expected {d}")
        if any(e < 0 for e in exps):
            raise InputError("monomial exponents must be nonnegative")
        if sum(exps) < 2:
            raise InputError(
                "polynomial terms must have total degree >= 2; "
                "put the linear part in the matrix"
            )
        if not 0 <= term.target < d:
            raise InputError(f"monomial target {term.target} out of range for dimension {d}")
        if not np.isfinite(term.coeff):
            raise InputError("monomial coefficients must be finite")
        key = (int(term.target), exps)
        merged[key] = merged.get(key, 0.0) + float(term.coeff)
    return tuple(
        Monomial(t, c, e) for (t, e), c in sorted(merged.items()) if c != 0.0
    )


class Subsystem:
    """A single vector field of the family.

    Use :meth:`linear` or :meth:`polynomial` to build one. Instances are
    immutable and compare by value.
    """

    __slots__ = ("kind", "matrix", "terms", "_exps", "_scatter")

    def __init__(self, kind, matrix, terms=()):
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise InputError(f"subsystem matrix must be square and nonempty, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InputError("subsystem matrix has non-finite entries")
        kind = SubsystemKind(kind)
        d = A.shape[0]
        terms = _merge_terms(terms, d)
        if kind is SubsystemKind.LINEAR and terms:
            raise InputError("linear subsystems cannot carry polynomial terms")
        A.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "terms", terms)
        exps = np.array([t.exponents for t in terms], dtype=int).reshape(len(terms), d)
        scatter = np.zeros((len(terms), d))
        for j, t in enumerate(terms):
            scatter[j, t.target] = t.coeff
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_scatter", scatter)

    def __setattr__(self, name, value):
        raise AttributeError("Subsystem is immutable")

    @classmethod
    def linear(cls, matrix):
        return cls(SubsystemKind.LINEAR, matrix)

    @classmethod
    def polynomial(cls, matrix, terms=()):
        return cls(SubsystemKind.POLYNOMIAL, matrix, terms)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def is_linear(self):
        """True for LINEAR kind, or POLYNOMIAL with no higher order terms."""
        return self.kind is SubsystemKind.LINEAR or not self.terms

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, Subsystem):
            return NotImplemented
        return (
            self.kind is other.kind
            and np.array_equal(self.matrix, other.matrix)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.kind, self.matrix.tobytes(), self.terms))

    def __repr__(self):
        extra = f", {len(self.terms)} terms" if self.terms else ""
        return f"Subsystem({self.kind.value}, d={self.dimension}{extra})"


@dataclass(frozen=True, eq=False)
class SwitchedSystem:
    """Finite family ``f_1, ..., f_p`` plus the common Lyapunov form.

    Subsystem indices exposed to users are 1-based, as in ``u(t) in {1..p}``.
    """

    subsystems: Tuple[Subsystem, ...]
    lyapunov: Optional[object] = None

    def __post_init__(self):
        subs = tuple(self.subsystems)
        if not subs:
            raise InputError("a switched system needs at least one subsystem")
        d = subs[0].dimension
        for k, s in enumerate(subs, start=1):
            if s.dimension != d:
                raise InputError(
                    f"subsystem {k} has dimension {s.dimension}, expected {d}"
                )
        if self.lyapunov is not None and self.lyapunov.dimension != d:
            raise InputError(
                f"Lyapunov form has dimension {self.lyapunov.dimension}, expected {d}"
            )
        object.__setattr__(self, "subsystems", subs)

    @property
    def dimension(self):
        return self.subsystems[0].dimension

    @property
    def p(self):
        return len(self.subsystems)

    def __getitem__(self, index):
        """1-based access: ``sys[1]`` is the first subsystem."""
        if not 1 <= index <= self.p:
            raise IndexError(f"subsystem index {index} outside 1..{self.p}")
        return self.subsystems[index - 1]

    def __len__(self):
        return self.p

    def __eq__(self, other):
        if not isinstance(other, SwitchedSystem):
            return NotImplemented
        return self.subsystems == other.subsystems and self.lyapunov == other.lyapunov

    @property
    def all_linear(self):
        return all(s.is_linear for s in self.subsystems)


def _as_states(s, x):
    X = np.asarray(x, dtype=float)
    if X.shape[-1:] != (s.dimension,) or X.ndim > 2:
        raise InputError(
            f"state has shape {X.shape}, expected ({s.dimension},) or (n, {s.dimension})"
        )
    return X


def evaluate(s: Subsystem, x) -> np.ndarray:
    """Evaluate ``f(x)``; ``x`` may be one state ``(d,)`` or a batch ``(n, d)``."""
    X = _as_states(s, x)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    out = X2 @ s.matrix.T
    if s.terms:
        out = out + monomial_values(X2, s._exps) @ s._scatter
    return out[0] if single else out


def finite_difference_jacobian(s: Subsystem, step: float = 1e-4) -> np.ndarray:
    """Central-difference Jacobian of :func:`evaluate` at the origin."""
    d = s.dimension
    E = step * np.eye(d)
    cols = (evaluate(s, E) - evaluate(s, -E)) / (2.0 * step)
    return cols.T


def jacobian_at_origin(s: Subsystem, validate: bool = False, step: float = 1e-4):
    """Linearization ``B = Df(0)``.

    With ``validate=True`` also returns the max absolute deviation between
    ``B`` and a central finite-difference Jacobian of step ``step``.
    """
    B = np.array(s.matrix)
    if not validate:
        return B
    dev = float(np.max(np.abs(finite_difference_jacobian(s, step) - B)))
    return B, dev


HurwitzResult = namedtuple("HurwitzResult", ["is_hurwitz", "abscissa"])
HurwitzResult.__doc__ = "Outcome of :func:`is_hurwitz`: flag and spectral abscissa."


def spectral_abscissa(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError("matrix has nonfinite entries")
    try:
        eig = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigenvalue iteration did not converge for matrix with norm "
            f"{np.linalg.norm(A):.3g}: {exc}"
        ) from exc
    return float(np.max(eig.real))


def is_hurwitz(A, margin: float = 0.0) -> HurwitzResult:
    """Test whether every eigenvalue of ``A`` has real part ``< -margin``."""
    if margin < 0:
        raise InputError("margin must be nonnegative")
    a = spectral_abscissa(A)
    return HurwitzResult(a < -margin, a)


def convex_combination(sys: SwitchedSystem, v: Sequence[float]) -> Subsystem:
    """Pointwise convex combination ``sum_i v_i f_i`` as a new subsystem."""
    w = np.asarray(v, dtype=float)
    if w.shape != (sys.p,):
        raise InputError(f"expected {sys.p} weights, got shape {w.shape}")
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-12):
        raise InputError("weights must be nonnegative and sum to one")
    A = sum(wi * s.matrix for wi, s in zip(w, sys.subsystems))
    terms = [
        Monomial(t.target, wi * t.coeff, t.exponents)
        for wi, s in zip(w, sys.subsystems)
        if wi != 0.0
        for t in s.terms
    ]
    if all(s.kind is SubsystemKind.LINEAR for s in sys.subsystems):
        return Subsystem.linear(A)
    return Subsystem.polynomial(A, terms)
