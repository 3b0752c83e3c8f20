"""Finite element laboratory for the 2D nonlinear p-curl eddy current problem.

Lowest-order edge elements on unit-disk triangulations, backward Euler with
damped Newton, residual a posteriori error indicators, and AC-loss accounting,
verified against manufactured solutions.
"""

from .mesh import (
    TriMesh,
    MeshError,
    MeshFormatError,
    MeshValidationError,
    disk_mesh,
    refine_uniform,
    read_mesh,
    write_mesh,
)
from .nedelec import (
    EdgeField,
    QuadratureRule,
    TRI_D5,
    EDGE_G4,
    apply_homogeneous_bc,
    basis_eval,
    boundary_values,
    curl_lp_error,
    curl_lp_norm,
    eval_field,
    interpolate,
    l2_error,
    l2_norm,
    zero_field,
)
from .assembly import (
    PowerLawParams,
    SparseSystem,
    assemble_jacobian,
    assemble_load,
    assemble_residual,
    flux,
    flux_derivative,
    mass_matrix,
    nonlinear_term,
    rho,
    solve_system,
)
from .stepper import (
    EnergyEntry,
    EnergyReport,
    NonConvergence,
    StepperConfig,
    TimeHistory,
    energy_check,
    run,
    step,
)
from .manufactured import (
    ManufacturedCase,
    MovingFront,
    RadialSmooth,
    ac_loss_exact,
    moving_front_case,
    radial_smooth_case,
)
from .estimators import (
    AccumulatedEstimate,
    AcLossReport,
    EstimatorBreakdown,
    ZeroErrorDenominator,
    ac_loss_discrete,
    ac_loss_error_bound,
    accumulate,
    effectivity_ratio,
    error_measures,
    step_estimators,
)

__version__ = "0.1.0"
