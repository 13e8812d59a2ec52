"""Classically emulated adiabatic variational solver for linear systems.

The solver follows a homotopy from the identity to the target matrix,
reoptimizing a layered Ry/CNOT ansatz at each stop from the previous
optimum, with step sizes chosen either from a condition-number schedule or
from exact Hessian extrapolation of the cost.
"""

from .ansatz import AnsatzConfig, apply_ansatz, expectation
from .config import RunConfig, config_from_dict, load_config
from .controller import (
    MinimizeResult,
    OptimizerOptions,
    RunTrace,
    StepDecision,
    StepKind,
    StepRecord,
    minimize_cost,
    propose_step,
    solve_adiabatic,
)
from .cost import (
    CostModel,
    HessianBundle,
    assemble_hamiltonian,
    build_cost_model,
    component_hessians,
    cost,
    cost_extrapolate,
    cost_gradient,
    cost_hessian,
    cost_terms,
    hessian_bundle,
    hessian_extrapolate,
)
from .errors import ConfigError, InvalidScheduleError, SingularMatrixError
from .metrics import (
    SolutionReport,
    accuracy,
    classical_solve,
    eigen_overlaps,
    infidelity,
    solve_parametric,
)
from .problems import (
    ConductivityProfile,
    PreparedSystem,
    SourceSpec,
    build_source,
    discretize_heat,
    heat_system,
    householder,
    prepare,
    recover_solution,
    sample_conductivity,
)
from .runner import build_system, emit_schedule, evaluate_run, run_single, run_sweep
from .schedule import (
    Schedule,
    condition_number,
    default_sequence,
    next_increment,
    s_of_v,
    uniform_sequence,
    v_bounds,
)

__version__ = "0.1.0"
