"""Self-contained invariant battery behind the `verify` CLI subcommand."""

from __future__ import annotations

import numpy as np

from .ansatz import AnsatzConfig, apply_ansatz
from .cost import (
    assemble_hamiltonian,
    build_cost_model,
    cost,
    cost_extrapolate,
    cost_gradient,
    hessian_bundle,
    hessian_extrapolate,
    cost_hessian,
)
from .metrics import solve_parametric
from .problems import householder, prepare
from .schedule import default_sequence, s_of_v, v_bounds

__all__ = ["run_battery"]


def _check_schedule_endpoints() -> tuple[bool, str]:
    worst = 0.0
    for kappa in (1.0, 10.0, 100.0, 1000.0):
        v_min, v_max = v_bounds(kappa)
        worst = max(worst, abs(s_of_v(v_min, kappa)), abs(s_of_v(v_max, kappa) - 1.0))
        grid = default_sequence(kappa, 25).s_grid
        if np.any(np.diff(grid) <= 0.0):
            return False, f"grid not increasing at kappa={kappa}"
    return worst < 1e-10, f"max endpoint deviation {worst:.2e}"


def _check_householder() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    worst = 0.0
    for size in (2, 8, 32):
        b = rng.normal(size=size)
        s = householder(b)
        e1 = np.zeros(size)
        e1[0] = 1.0
        worst = max(
            worst,
            float(np.abs(s @ s.T - np.eye(size)).max()),
            float(np.abs(s - s.T).max()),
            float(np.abs(s @ (b / np.linalg.norm(b)) - e1).max()),
        )
    return worst < 1e-12, f"max defect {worst:.2e}"


def _check_norm_preservation() -> tuple[bool, str]:
    rng = np.random.default_rng(12)
    worst = 0.0
    for n, d in ((1, 0), (3, 2), (5, 1)):
        config = AnsatzConfig(n=n, d=d)
        theta = rng.uniform(-np.pi, np.pi, config.n_params)
        state = apply_ansatz(config, theta)
        worst = max(worst, abs(float(np.linalg.norm(state)) - 1.0))
    return worst < 1e-12, f"max norm drift {worst:.2e}"


def _check_extrapolation() -> tuple[bool, str]:
    rng = np.random.default_rng(13)
    config = AnsatzConfig(n=2, d=1)
    matrix = np.eye(4) + 0.3 * rng.normal(size=(4, 4))
    model = build_cost_model(matrix)
    theta = rng.uniform(-np.pi, np.pi, config.n_params)
    s, ds = 0.3, 0.45
    worst = abs(
        cost_extrapolate(model, config, theta, s, ds)
        - cost(model, config, theta, s + ds)
    )
    bundle = hessian_bundle(model, config, theta, s)
    direct = cost_hessian(model, config, theta, s + ds)
    worst = max(worst, float(np.abs(hessian_extrapolate(bundle, ds) - direct).max()))
    return worst < 1e-9, f"max extrapolation defect {worst:.2e}"


def _check_ground_state() -> tuple[bool, str]:
    rng = np.random.default_rng(14)
    basis, _ = np.linalg.qr(rng.normal(size=(8, 8)))
    matrix = basis @ np.diag(rng.uniform(0.3, 1.0, 8)) @ basis.T
    system = prepare(matrix, rng.normal(size=8))
    model = build_cost_model(system)
    e1 = np.zeros(8)
    e1[0] = 1.0
    worst = 0.0
    for s in (0.0, 0.5, 1.0):
        x = solve_parametric(system.matrix, e1, s)
        h = assemble_hamiltonian(model, s)
        worst = max(worst, abs(float(x @ h @ x)))
    return worst < 1e-10, f"max ground-state residual {worst:.2e}"


def _check_gradient() -> tuple[bool, str]:
    rng = np.random.default_rng(15)
    config = AnsatzConfig(n=2, d=1)
    model = build_cost_model(np.diag([0.5, 0.7, 0.9, 1.0]))
    theta = rng.uniform(-np.pi, np.pi, config.n_params)
    grad = cost_gradient(model, config, theta, 0.8)
    h = 1e-6
    worst = 0.0
    for i in range(config.n_params):
        step = np.zeros(config.n_params)
        step[i] = h
        fd = (
            cost(model, config, theta + step, 0.8)
            - cost(model, config, theta - step, 0.8)
        ) / (2 * h)
        worst = max(worst, abs(grad[i] - fd))
    return worst < 1e-7, f"max gradient defect {worst:.2e}"


_CHECKS = [
    ("schedule endpoints", _check_schedule_endpoints),
    ("householder algebra", _check_householder),
    ("ansatz norm preservation", _check_norm_preservation),
    ("derivative extrapolation", _check_extrapolation),
    ("ground-state identity", _check_ground_state),
    ("shift-rule gradient", _check_gradient),
]


def run_battery(echo=print) -> bool:
    """Run every invariant check, print one line each, return overall pass."""
    all_ok = True
    for name, fn in _CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        echo(f"[{'ok' : ^4}] {name}: {detail}" if ok else f"[FAIL] {name}: {detail}")
    return all_ok
