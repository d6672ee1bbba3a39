"""Truncated Fock-space dynamics and spectral-gap analysis for the
quadratic open quantum harmonic oscillator."""

__version__ = "0.1.0"

from .model import (
    DiagonalBoundSpec,
    ModelParams,
    TruncationSpec,
    invariant_diag,
    invariant_tail_mass,
    lerch_phi,
    nu_from_temperature,
    omega,
)
from .operators import (
    DensityMatrix,
    EquivalenceReport,
    OperatorSet,
    apply_generator,
    apply_predual,
    build_operators,
    embed,
    embedded_sector_matrix,
    two_photon_check,
    un_embed,
)
from .dynamics import (
    DecayFit,
    PositivityError,
    StepControl,
    SupportProfile,
    Trajectory,
    TransientWitnessReport,
    TruncationOverflowError,
    classical_apply,
    decay_rate,
    evolve,
    relaxation_norm,
    support_profile,
    trace_distance,
    transient_witness,
    weighted_hs_norm,
)
from .spectral import (
    GapReport,
    HardyProfile,
    RegionPoint,
    TridiagonalForm,
    condition_value,
    diagonal_gap_numeric,
    diagonal_lower_bound,
    gap_report,
    hardy_profile,
    min_eig_tridiag,
    off_diag_analytic,
    off_diag_minimizer,
    region_boundary,
    sector_form,
    tridiag_smallest_eigs,
    upper_bounds,
)
from .selftest import run_acceptance, run_criterion
