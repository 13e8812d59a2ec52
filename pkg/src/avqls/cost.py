"""Cost operator family of the homotopy and its exact derivative machinery.

The working Hamiltonian is H(s) = A(s)^T (I - P) A(s) with A(s) = I + s*D,
D = M - I, and P the projector onto the first basis vector's complement,
P = I - e1 e1^T. Expanding in powers of s gives three fixed operators

    a_op = D^T (I - e1 e1^T) D
    b_op = D^T (I - e1 e1^T) + (I - e1 e1^T) D
    c_op = I - e1 e1^T

so that H(s) = s^2 a_op + s b_op + c_op identically. Because the expansion
is exact, expectation values of a_op and b_op measured at one value of s
reconstruct the cost (and its parameter Hessian) at any other value of s
without further circuit evaluations. Gradients and Hessians with respect to
the circuit parameters use the two-point shift rule, which is exact for Ry
generators at any shift beta with sin(beta) != 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzConfig, apply_ansatz

__all__ = [
    "DEFAULT_SHIFT",
    "CostModel",
    "HessianBundle",
    "build_cost_model",
    "assemble_hamiltonian",
    "cost",
    "cost_terms",
    "cost_extrapolate",
    "cost_gradient",
    "cost_hessian",
    "component_hessians",
    "hessian_bundle",
    "hessian_extrapolate",
]

DEFAULT_SHIFT = math.pi / 2


@dataclass(frozen=True, eq=False)
class CostModel:
    """Fixed operators of the s-expansion for one prepared matrix."""

    matrix: np.ndarray
    d_op: np.ndarray
    a_op: np.ndarray
    b_op: np.ndarray
    c_op: np.ndarray
    dim: int


def build_cost_model(source) -> CostModel:
    """Build the expansion operators for a prepared system or a raw matrix.

    `source` is either an object with a `.matrix` attribute (a prepared
    system, whose right-hand side is e1 by construction) or a square matrix
    for which the right-hand side is taken to be e1.
    """
    matrix = np.asarray(getattr(source, "matrix", source), dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got shape {matrix.shape}")
    dim = matrix.shape[0]
    d_op = matrix - np.eye(dim)
    proj = np.eye(dim)
    proj[0, 0] = 0.0
    a_op = d_op.T @ proj @ d_op
    b_op = d_op.T @ proj + proj @ d_op
    return CostModel(
        matrix=matrix, d_op=d_op, a_op=a_op, b_op=b_op, c_op=proj, dim=dim
    )


def assemble_hamiltonian(model: CostModel, s: float) -> np.ndarray:
    """Dense H(s) = s^2 a_op + s b_op + c_op."""
    _check_s(s)
    return s * s * model.a_op + s * model.b_op + model.c_op


def _check_s(s: float) -> None:
    if not -1e-12 <= s <= 1.0 + 1e-12:
        raise ValueError(f"adiabatic parameter must lie in [0, 1], got {s}")


def _terms_of_state(model: CostModel, x: np.ndarray) -> np.ndarray:
    # One matvec with D yields all three expectations:
    #   <a> = |Dx|^2 - (Dx)_1^2, <b> = 2 (x.Dx - x_1 (Dx)_1), <c> = |x|^2 - x_1^2
    y = model.d_op @ x
    x0 = x[0]
    y0 = y[0]
    ea = float(y @ y - y0 * y0)
    eb = 2.0 * float(x @ y - x0 * y0)
    ec = float(x @ x - x0 * x0)
    return np.array([ea, eb, ec])


def cost_terms(
    model: CostModel, config: AnsatzConfig, theta: np.ndarray
) -> tuple[float, float, float]:
    """Expectations (<a_op>, <b_op>, <c_op>) in the state U(theta)|0>."""
    _check_dims(model, config)
    ea, eb, ec = _terms_of_state(model, apply_ansatz(config, theta))
    return float(ea), float(eb), float(ec)


def cost(model: CostModel, config: AnsatzConfig, theta: np.ndarray, s: float) -> float:
    """C_s(theta) = <theta| H(s) |theta>."""
    _check_s(s)
    ea, eb, ec = cost_terms(model, config, theta)
    return s * s * ea + s * eb + ec


def cost_extrapolate(
    model: CostModel,
    config: AnsatzConfig,
    theta: np.ndarray,
    s: float,
    delta_s: float,
) -> float:
    """C_{s+delta_s}(theta) from expectations measured at theta only.

    Exact for any step because the cost is a quadratic polynomial in s.
    """
    _check_s(s)
    _check_s(s + delta_s)
    ea, eb, ec = cost_terms(model, config, theta)
    cost_here = s * s * ea + s * eb + ec
    return delta_s * delta_s * ea + delta_s * (2.0 * s * ea + eb) + cost_here


def cost_gradient(
    model: CostModel,
    config: AnsatzConfig,
    theta: np.ndarray,
    s: float,
    beta: float = DEFAULT_SHIFT,
) -> np.ndarray:
    """Exact gradient of C_s via the two-point shift rule."""
    _check_s(s)
    _check_beta(beta)
    theta = _check_theta(config, theta)
    n_p = config.n_params
    denom = 2.0 * math.sin(beta)
    grad3 = np.empty((n_p, 3))
    for i in range(n_p):
        shift = np.zeros(n_p)
        shift[i] = beta
        plus = _terms_of_state(model, apply_ansatz(config, theta + shift))
        minus = _terms_of_state(model, apply_ansatz(config, theta - shift))
        grad3[i] = (plus - minus) / denom
    return s * s * grad3[:, 0] + s * grad3[:, 1] + grad3[:, 2]


@dataclass(frozen=True, eq=False)
class HessianBundle:
    """Hessians of C_s and of the expansion terms, measured at one point.

    h_s is the parameter Hessian of the cost at (theta, s); k_a and k_b are
    the Hessians of <a_op> and <b_op>, which do not depend on s. grad is the
    cost gradient at (theta, s).
    """

    h_s: np.ndarray
    k_a: np.ndarray
    k_b: np.ndarray
    grad: np.ndarray
    s: float

    @property
    def n_params(self) -> int:
        return self.h_s.shape[0]


def hessian_bundle(
    model: CostModel,
    config: AnsatzConfig,
    theta: np.ndarray,
    s: float,
    beta: float = DEFAULT_SHIFT,
) -> HessianBundle:
    """Measure H_s, the component Hessians and the gradient in one pass.

    Shifted circuit evaluations are shared across the three operators, so
    the full bundle costs 2 n_p^2 + 2 n_p + 1 state preparations. Diagonal
    Hessian entries use theta +- 2 beta e_i together with the unshifted
    point; off-diagonal entries use the four double-shifted points and are
    filled symmetrically.
    """
    _check_s(s)
    _check_beta(beta)
    theta = _check_theta(config, theta)
    n_p = config.n_params
    denom = 2.0 * math.sin(beta)
    denom2 = denom * denom

    def terms_at(offset: np.ndarray) -> np.ndarray:
        return _terms_of_state(model, apply_ansatz(config, theta + offset))

    center = terms_at(np.zeros(n_p))
    grad3 = np.empty((n_p, 3))
    hess3 = np.empty((3, n_p, n_p))
    for i in range(n_p):
        e_i = np.zeros(n_p)
        e_i[i] = 1.0
        grad3[i] = (terms_at(beta * e_i) - terms_at(-beta * e_i)) / denom
        plus2 = terms_at(2.0 * beta * e_i)
        minus2 = terms_at(-2.0 * beta * e_i)
        hess3[:, i, i] = (plus2 - 2.0 * center + minus2) / denom2
        for j in range(i + 1, n_p):
            e_j = np.zeros(n_p)
            e_j[j] = 1.0
            pp = terms_at(beta * (e_i + e_j))
            pm = terms_at(beta * (e_i - e_j))
            mp = terms_at(beta * (e_j - e_i))
            mm = terms_at(-beta * (e_i + e_j))
            val = (pp - pm - mp + mm) / denom2
            hess3[:, i, j] = val
            hess3[:, j, i] = val
    k_a, k_b, h_c = hess3[0], hess3[1], hess3[2]
    h_s = s * s * k_a + s * k_b + h_c
    grad = s * s * grad3[:, 0] + s * grad3[:, 1] + grad3[:, 2]
    return HessianBundle(h_s=h_s, k_a=k_a, k_b=k_b, grad=grad, s=s)


def cost_hessian(
    model: CostModel,
    config: AnsatzConfig,
    theta: np.ndarray,
    s: float,
    beta: float = DEFAULT_SHIFT,
) -> np.ndarray:
    """Exact parameter Hessian of C_s, symmetric by construction."""
    h = hessian_bundle(model, config, theta, s, beta).h_s
    return 0.5 * (h + h.T)


def component_hessians(
    model: CostModel,
    config: AnsatzConfig,
    theta: np.ndarray,
    beta: float = DEFAULT_SHIFT,
) -> tuple[np.ndarray, np.ndarray]:
    """Hessians (K_a, K_b) of <a_op> and <b_op>; both are s-independent."""
    bundle = hessian_bundle(model, config, theta, 0.0, beta)
    return bundle.k_a, bundle.k_b


def hessian_extrapolate(bundle: HessianBundle, delta_s: float) -> np.ndarray:
    """Parameter Hessian of C_{s+delta_s} at the bundle's theta, exactly.

    H[C_{s+ds}] = ds^2 K_a + ds (2 s K_a + K_b) + H_s holds for any ds
    because the cost is quadratic in s with theta-independent coefficients.
    """
    ds = float(delta_s)
    return ds * ds * bundle.k_a + ds * (2.0 * bundle.s * bundle.k_a + bundle.k_b) + bundle.h_s


def _check_beta(beta: float) -> None:
    if abs(math.sin(beta)) < 1e-6:
        raise ValueError(f"shift angle beta={beta} has sin(beta) too close to 0")


def _check_theta(config: AnsatzConfig, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.n_params,):
        raise ValueError(
            f"expected {config.n_params} parameters, got shape {theta.shape}"
        )
    return theta


def _check_dims(model: CostModel, config: AnsatzConfig) -> None:
    if model.dim != config.dim:
        raise ValueError(
            f"model dimension {model.dim} does not match ansatz dimension {config.dim}"
        )
