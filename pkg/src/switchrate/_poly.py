"""Sparse monomial evaluation helpers used by vector fields and Lyapunov forms."""

import numpy as np


def monomial_values(X, exponents):
    """Evaluate monomials ``x**e`` for every row of ``X``.

    Parameters
    ----------
    X : (n, d) ndarray
    exponents : (k, d) integer ndarray

    Returns
    -------
    (n, k) ndarray
    """
    if exponents.shape[0] == 0:
        return np.zeros((X.shape[0], 0))
    out = np.ones((X.shape[0], exponents.shape[0]))
    for k in range(exponents.shape[1]):
        e = exponents[:, k]
        if np.any(e):
            out *= X[:, k:k + 1] ** e[None, :]
    return out


def gradient_tables(coeffs, exponents):
    """Precompute the derivative of ``sum c * x**e`` along each coordinate.

    Returns a list with one ``(coeffs_k, exponents_k)`` pair per coordinate.
    """
    d = exponents.shape[1]
    tables = []
    for k in range(d):
        mask = exponents[:, k] > 0
        e = exponents[mask].copy()
        c = coeffs[mask] * e[:, k]
        e[:, k] -= 1
        tables.append((c, e))
    return tables


def total_degree(exponents):
    return np.asarray(exponents, dtype=int).sum(axis=-1)
