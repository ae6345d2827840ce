"""muskatsim: spectral simulation and verification toolkit for a sharp
two-fluid interface in a porous slab (graph solutions, with or without
surface tension)."""

__version__ = "0.1.0"

from .errors import (
    MuskatsimError,
    InvalidInputError,
    GridError,
    SymmetryError,
    RegimeError,
    ConfigError,
    NumericsError,
    NearSingularError,
    StagnationError,
    NearInterfaceError,
    InsufficientDataError,
)
from .grid import (
    GridSpec,
    Profile,
    Spectrum,
    NormSpec,
    make_grid,
    make_profile,
    to_spectrum,
    to_profile,
    synthesize_profile,
    spectral_derivative,
    shift_profile,
    delta_kernel,
    dealiased_product,
    dealiased_apply,
    norm,
    wiener_sobolev_constant,
)
from .kernels import (
    MultiKernelSpec,
    BKernelSpec,
    QuadratureRule,
    hilbert_transform,
    apply_A,
    apply_B,
    estimate_B_opnorm,
    a_tau_coefficient,
)
from .operators import (
    PhysParams,
    RhsEvaluation,
    curvature,
    curvature_prime,
    phi_rhs,
    phi_sigma_rhs,
    gateaux_phi,
    pv_log_identity_residual,
)
from .linear import (
    FrozenSymbol,
    ResolventReport,
    freeze_symbol,
    apply_frozen,
    solve_resolvent,
    verify_resolvent_inequality,
    resolvent_report_to_csv,
)
from .evolution import (
    DIAG_FIELDS,
    SimConfig,
    SimState,
    StepOutcome,
    global_frozen_symbol,
    step_imex,
    run,
    run_from_state,
    smoothing_diagnostic,
    rough_profile,
    write_snapshot,
    write_diagnostics,
    resume,
)
from .fields import (
    VorticityDensity,
    VelocityField2D,
    InterfaceTraces,
    vorticity_density,
    biot_savart,
    make_velocity_field,
    interface_traces,
    kinematic_consistency_report,
    kinematic_consistency_residual,
    pressure_field,
    fields_to_csv,
)
from .verify import (
    TOLERANCES,
    CheckResult,
    run_identity_checks,
    run_physics_checks,
    canonical_config,
    report_lines,
    report_to_csv,
)
from .cli import (
    CliInvocation,
    parse_config,
    make_initial,
    dispatch,
    main,
)
