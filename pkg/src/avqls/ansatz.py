"""Real-valued statevector simulation of the layered Ry/CNOT ansatz.

Every gate used here (Ry rotations and CNOTs) has real matrix elements, so
states are plain float64 vectors of length 2**n. Qubit 0 is the most
significant bit of the basis index, matching the Kronecker-product
convention used for the problem matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["AnsatzConfig", "apply_ansatz", "expectation"]


@dataclass(frozen=True)
class AnsatzConfig:
    """Shape of the circuit: an initial Ry column plus d entangling layers.

    Each layer applies the CNOT ring first and a fresh Ry column after it,
    so the parameter count is n * (d + 1).
    """

    n: int
    d: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.n}")
        if self.d < 0:
            raise ValueError(f"layer count must be >= 0, got {self.d}")

    @property
    def n_params(self) -> int:
        return self.n * (self.d + 1)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    @property
    def ring(self) -> tuple[tuple[int, int], ...]:
        """CNOT pairs (control i, target (i+1) mod n), applied in index order.

        One qubit has no entangler and two qubits degenerate to a single CNOT.
        """
        if self.n == 1:
            return ()
        if self.n == 2:
            return ((0, 1),)
        return tuple((i, (i + 1) % self.n) for i in range(self.n))


def _apply_ry(psi: np.ndarray, qubit: int, angle: float, n: int) -> None:
    """Rotate `qubit` by Ry(angle) in place using a strided pair update."""
    half = 0.5 * angle
    c = math.cos(half)
    s = math.sin(half)
    view = psi.reshape(2 ** qubit, 2, -1)
    top = view[:, 0, :].copy()
    bot = view[:, 1, :]
    view[:, 0, :] = c * top - s * bot
    view[:, 1, :] = s * top + c * bot


def _apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> None:
    """Swap the target-bit amplitudes on the control=1 half, in place."""
    view = psi.reshape([2] * n)
    i10 = [slice(None)] * n
    i11 = [slice(None)] * n
    i10[control], i10[target] = 1, 0
    i11[control], i11[target] = 1, 1
    tmp = view[tuple(i10)].copy()
    view[tuple(i10)] = view[tuple(i11)]
    view[tuple(i11)] = tmp


def apply_ansatz(config: AnsatzConfig, theta: np.ndarray) -> np.ndarray:
    """Return U(theta)|0...0> as a real unit vector of length 2**n.

    theta is consumed in column order: entries [0, n) feed the initial Ry
    column, entries [k*n, (k+1)*n) feed the Ry column of layer k, and within
    a layer the CNOT ring acts before the rotations.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.n_params,):
        raise ValueError(
            f"expected {config.n_params} parameters, got shape {theta.shape}"
        )
    n = config.n
    psi = np.zeros(config.dim)
    psi[0] = 1.0
    for q in range(n):
        _apply_ry(psi, q, theta[q], n)
    for layer in range(1, config.d + 1):
        for control, target in config.ring:
            _apply_cnot(psi, control, target, n)
        block = theta[layer * n:(layer + 1) * n]
        for q in range(n):
            _apply_ry(psi, q, block[q], n)
    return psi


def expectation(state: np.ndarray, op: np.ndarray) -> float:
    """<state| op |state> for a real symmetric operator given densely."""
    state = np.asarray(state, dtype=float)
    op = np.asarray(op, dtype=float)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    if state.shape != (op.shape[0],):
        raise ValueError(
            f"state length {state.shape} does not match operator {op.shape}"
        )
    if np.abs(op - op.T).max() > 1e-10:
        raise ValueError("operator is not symmetric within 1e-10")
    return float(state @ (op @ state))
