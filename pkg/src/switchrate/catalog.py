"""Built-in systems used by the CLI ``example`` command, tests and demos."""

import numpy as np

from .dynamics import Monomial, Subsystem, SwitchedSystem
from .lyapunov import PolynomialForm, QuadraticForm

B1 = np.array([[0.0, -1.0], [1.0, -1.0]])
B2 = np.array([[0.0, 1.0], [-1.0, -1.0]])


def example_system() -> SwitchedSystem:
    """Two Hurwitz matrices sharing the weak Lyapunov function ``|x|^2``.

    Their average ``[[0, 0], [0, -1]]`` is not Hurwitz, so the system is not
    stable under arbitrary switching, but it is under any dwell time.
    """
    return SwitchedSystem((Subsystem.linear(B1), Subsystem.linear(B2)), QuadraticForm(np.eye(2)))


def _cubic_terms(d):
    # -|x|^2 x, component by component
    terms = []
    for i in range(d):
        for j in range(d):
            e = [0] * d
            e[i] += 1
            e[j] += 2
            terms.append(Monomial(i, -1.0, tuple(e)))
    return terms


def cubic_damping_system(matrices=(B1, B2)) -> SwitchedSystem:
    """``f_i(x) = B_i x - |x|^2 x`` with ``V = |x|^2`` as a polynomial form."""
    d = np.asarray(matrices[0]).shape[0]
    subs = tuple(Subsystem.polynomial(B, _cubic_terms(d)) for B in matrices)
    V = PolynomialForm.from_quadratic(np.eye(d))
    return SwitchedSystem(subs, V)


def embedded_example_system() -> SwitchedSystem:
    """The linear example written as polynomial subsystems with no higher terms."""
    subs = tuple(Subsystem.polynomial(B) for B in (B1, B2))
    return SwitchedSystem(subs, PolynomialForm.from_quadratic(np.eye(2)))
