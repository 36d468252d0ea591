"""Jost functions for short-range central potentials on the two-sheeted
energy surface: branch-free coefficient integration, S-matrix and phase
shifts, bound-state and resonance pole searches, and numerical
certification of single-valuedness (monodromy loops, Cauchy contours,
independent second-order oracle)."""

from .coefficient_ode import (
    CoefficientState,
    Trajectory,
    integrate_original,
    integrate_transformed,
    reconstruct_wavefunction,
    schrodinger_residual,
    transformed_rhs,
)
from .errors import (
    ConfigError,
    CutoffError,
    DomainError,
    EvaluationError,
    JostlabError,
    MatchingError,
    PoleSignal,
    StiffnessError,
    ThresholdError,
)
from .jost import JostPair, jost_pair, phase_shift, phase_shift_scan, s_matrix
from .potentials import (
    Exponential,
    Gaussian,
    PotentialSpec,
    SquareWell,
    Tabulated,
    Yukawa,
    choose_cutoff,
    evaluate,
    parse_spec,
    tail_bound,
)
from .special_functions import (
    ReducedPair,
    RiccatiValues,
    RiemannEnergy,
    Sheet,
    continue_momentum,
    momentum_first_sheet,
    reduced_bessel,
    reduced_neumann,
    reduced_pair,
    riccati_closed,
)
from .spectral import (
    CoarseGridWarning,
    GridScan,
    SpectralRoot,
    complex_zero_refine,
    find_bound_states,
    find_resonances,
    pole_scan_grid,
    winding_number,
)
from .verification import (
    CauchyReport,
    MonodromyReport,
    cauchy_residual,
    identity_suite,
    monodromy_loop,
    numerov_oracle,
    standard_identity_grid,
    verify_potential,
)

__version__ = "0.1.0"
