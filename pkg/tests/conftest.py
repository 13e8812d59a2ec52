"""Shared oracles for the test suite.

The dense helpers here rebuild circuit states and derivatives from first
principles (explicit gate matrices, central finite differences) so the
fast strided kernels and shift-rule formulas in the package are checked
against independent constructions.
"""

from __future__ import annotations

import numpy as np

from avqls import AnsatzConfig


def ry_matrix(angle: float) -> np.ndarray:
    c = np.cos(0.5 * angle)
    s = np.sin(0.5 * angle)
    return np.array([[c, -s], [s, c]])


def cnot_matrix(control: int, target: int, n: int) -> np.ndarray:
    """Dense CNOT permutation. Qubit 0 is the most significant bit."""
    dim = 2 ** n
    mat = np.zeros((dim, dim))
    for col in range(dim):
        cbit = (col >> (n - 1 - control)) & 1
        row = col ^ (1 << (n - 1 - target)) if cbit else col
        mat[row, col] = 1.0
    return mat


def ry_column_matrix(angles: np.ndarray) -> np.ndarray:
    out = ry_matrix(angles[0])
    for a in angles[1:]:
        out = np.kron(out, ry_matrix(a))
    return out


def dense_ansatz_state(config: AnsatzConfig, theta: np.ndarray) -> np.ndarray:
    """Gate-by-gate matrix-product oracle for the layered circuit."""
    theta = np.asarray(theta, dtype=float)
    n = config.n
    state = np.zeros(config.dim)
    state[0] = 1.0
    state = ry_column_matrix(theta[:n]) @ state
    for layer in range(1, config.d + 1):
        for control, tgt in config.ring:
            state = cnot_matrix(control, tgt, n) @ state
        state = ry_column_matrix(theta[layer * n:(layer + 1) * n]) @ state
    return state


def fd_gradient(fun, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return grad


def fd_hessian(fun, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = x.size
    hess = np.zeros((m, m))
    f0 = fun(x)
    for i in range(m):
        ei = np.zeros_like(x)
        ei[i] = h
        hess[i, i] = (fun(x + ei) - 2.0 * f0 + fun(x - ei)) / (h * h)
        for j in range(i + 1, m):
            ej = np.zeros_like(x)
            ej[j] = h
            val = (
                fun(x + ei + ej)
                - fun(x + ei - ej)
                - fun(x - ei + ej)
                + fun(x - ei - ej)
            ) / (4.0 * h * h)
            hess[i, j] = hess[j, i] = val
    return hess


def random_system_matrix(rng: np.random.Generator, n_sites: int, kind: str) -> np.ndarray:
    """Symmetric matrix with eigenvalues pushed away from zero.

    kind selects the sign pattern: all positive, all negative, or a mix.
    Magnitudes live in [0.2, 1.0] so condition numbers stay tame and the
    prepared pencil is comfortably nonsingular.
    """
    mags = rng.uniform(0.2, 1.0, size=n_sites)
    if kind == "pd":
        eigs = mags
    elif kind == "nd":
        eigs = -mags
    elif kind == "indef":
        signs = rng.choice([-1.0, 1.0], size=n_sites)
        if np.all(signs > 0):
            signs[0] = -1.0
        if np.all(signs < 0):
            signs[0] = 1.0
        eigs = signs * mags
    else:
        raise ValueError(f"unknown kind {kind!r}")
    gauss = rng.normal(size=(n_sites, n_sites))
    q, _ = np.linalg.qr(gauss)
    return q @ np.diag(eigs) @ q.T


def random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)
