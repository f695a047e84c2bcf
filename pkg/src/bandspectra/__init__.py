"""Spectra, essential spectra and spectral distributions of self-adjoint band
operators, computed from finite sections."""

from .eigensolver import (
    EigenvalueList,
    SymTridiagonal,
    count_in_interval,
    eigenvalues,
    sturm_count,
)
from .operator_model import (
    BandOperatorSpec,
    Constant,
    Cosine,
    CosineTerm,
    Filtration,
    Periodic,
    Polynomial,
    Potential,
    Schrodinger,
    Section,
    Table,
    build_section,
    degree_estimate,
    eval_diagonal,
    filtration_norm_bound,
    periodicity_diagnostic,
)
from .schrodinger import (
    AffineForm,
    DiscretizationParams,
    build_hamiltonian,
    hamiltonian_spectrum,
    map_spectrum,
    momentum_symbol,
    position_symbol,
)
from .spectral_analysis import (
    ClassificationReport,
    PointVerdict,
    Schedule,
    SpectralDistribution,
    accumulation_rate_check,
    classify_point,
    distribution_limit,
    empirical_distribution,
    essential_spectrum_estimate,
    hausdorff_distance,
    lambda_set_estimate,
    trace_moment_oracle,
)

__version__ = "0.1.0"
