"""Classical reference solutions and solution-quality metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

__all__ = [
    "SolutionReport",
    "classical_solve",
    "solve_parametric",
    "infidelity",
    "accuracy",
    "eigen_overlaps",
]


def classical_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalized dense solution of A x = b via pivoted LU factorization."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError(f"rhs shape {b.shape} does not match matrix {a.shape}")
    lu, piv = scipy.linalg.lu_factor(a)
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * max(diag.max(), 1e-300):
        raise SingularMatrixError("matrix is singular to working precision")
    x = scipy.linalg.lu_solve((lu, piv), b)
    return x / np.linalg.norm(x)


def solve_parametric(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """Normalized solution of the pencil ((1-s) I + s A) x = b."""
    if not -1e-12 <= s <= 1.0 + 1e-12:
        raise ValueError(f"adiabatic parameter must lie in [0, 1], got {s}")
    a = np.asarray(a, dtype=float)
    pencil = (1.0 - s) * np.eye(a.shape[0]) + s * a
    return classical_solve(pencil, b)


def infidelity(x_var: np.ndarray, x_exact: np.ndarray) -> float:
    """1 - |<x_var | x_exact>|^2 for two unit vectors."""
    x_var = _checked_unit(x_var, "x_var")
    x_exact = _checked_unit(x_exact, "x_exact")
    value = 1.0 - float(np.vdot(x_var, x_exact)) ** 2
    if value < -1e-12:
        raise ValueError(f"overlap exceeded 1 beyond round-off: 1 - |o|^2 = {value}")
    return max(value, 0.0)


def accuracy(a: np.ndarray, b: np.ndarray, x_var: np.ndarray) -> float:
    """|<b | A x_var>|^2 / |A x_var|^2 with b normalized internally."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x_var = np.asarray(x_var, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],) or x_var.shape != (a.shape[0],):
        raise ValueError("vector shapes do not match the matrix")
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        raise ValueError("right-hand side must be nonzero")
    image = a @ x_var
    image_norm = np.linalg.norm(image)
    if image_norm < 1e-300:
        raise ValueError("A @ x_var is numerically zero")
    value = float(np.vdot(b / b_norm, image)) ** 2 / float(image_norm ** 2)
    return min(max(value, 0.0), 1.0)


def eigen_overlaps(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Squared overlaps of x with the unit right eigenvectors of A.

    Entries are sorted by ascending eigenvalue (real part first). For
    non-normal matrices the eigenvectors are not orthogonal and the
    overlaps need not sum to one.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if x.shape != (a.shape[0],):
        raise ValueError(f"state shape {x.shape} does not match matrix {a.shape}")
    evals, vecs = np.linalg.eig(a)
    order = np.lexsort((evals.imag, evals.real))
    overlaps = np.empty(a.shape[0])
    for out, k in enumerate(order):
        vec = vecs[:, k]
        vec = vec / np.linalg.norm(vec)
        overlaps[out] = float(np.abs(np.vdot(vec, x)) ** 2)
    return overlaps


@dataclass(frozen=True, eq=False)
class SolutionReport:
    """Final solution quality of one run, in the original problem basis."""

    x_variational: np.ndarray
    x_exact: np.ndarray
    infidelity: float
    accuracy: float
    cost_final: float
    overlaps: np.ndarray | None = None


def _checked_unit(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {x.shape}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"{name} must be unit-normalized, |{name}| = {norm}")
    return x / norm
