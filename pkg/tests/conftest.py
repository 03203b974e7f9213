import numpy as np
import pytest

from switchrate import QuadraticForm, Subsystem, SwitchedSystem
from switchrate.catalog import B1, B2, cubic_damping_system, example_system


@pytest.fixture
def example():
    return example_system()


@pytest.fixture
def cubic():
    return cubic_damping_system()


@pytest.fixture
def b1():
    return B1.copy()


@pytest.fixture
def b2():
    return B2.copy()


def random_weak_system(rng, d, p=2):
    """Hurwitz subsystems sharing the strict Lyapunov form ``x^T P x``.

    ``B = P^{-1}(S - Q)`` with ``S`` skew and ``Q`` positive definite gives
    ``B^T P + P B = -2Q``.
    """
    G = rng.standard_normal((d, d))
    P = G @ G.T + 0.5 * np.eye(d)
    subs = []
    for _ in range(p):
        S = rng.standard_normal((d, d))
        S = S - S.T
        Q = rng.standard_normal((d, d))
        Q = Q @ Q.T + 0.1 * np.eye(d)
        subs.append(Subsystem.linear(np.linalg.solve(P, S - Q)))
    return SwitchedSystem(tuple(subs), QuadraticForm(P))
