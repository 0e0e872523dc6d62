"""equifdp: false discovery proportion of the BH procedure under Gaussian
equi-correlation -- exact sampler, closed-form limit laws, and a Monte Carlo
harness that verifies the predicted convergence at desk scale.
"""

from ._version import __version__
from .errors import (
    BracketingError,
    DegenerateCrossingError,
    DomainError,
    EquifdpError,
    ParameterError,
    RegimeError,
)
from .gaussian import phi_upper, phi_upper_inv, std_normal_density
from .model import (
    FixedRho,
    ModelParams,
    PowerLaw,
    RhoSequence,
    RngStream,
    Sample,
    StepEcdf,
    ThetaOverM,
    ecdf_triple,
    sample,
    write_sample_csv,
)
from .procedures import (
    BH,
    FixedThreshold,
    RejectionResult,
    ThresholdProcedure,
    apply_procedure,
    bh_threshold,
    fdp_at,
)
from .asymptotics import (
    EMPTY_MEASURE,
    AsymptoticLaw,
    AtomicMeasure,
    MixtureCdf,
    asymptotic_law,
    bh_fixed_point,
    bh_threshold_derivative,
    disturbance_coef,
    ecdf_limit_cov,
    ecdf_variance,
    fluctuation_measures,
    limit_cov,
    threshold_derivative,
)
from .oracle import OracleParams, oracle_law, t_star_rho, transform
from .experiment import (
    ExperimentConfig,
    ExperimentSummary,
    ProbeResult,
    RateStudyResult,
    check_tolerances,
    ecdf_covariance_probe,
    ks_statistic_normal,
    rate_study,
    run,
    summary_to_dict,
    write_replicates_csv,
    write_summary_json,
)

__all__ = [
    "__version__",
    # errors
    "EquifdpError",
    "DomainError",
    "ParameterError",
    "BracketingError",
    "DegenerateCrossingError",
    "RegimeError",
    # gaussian
    "phi_upper",
    "phi_upper_inv",
    "std_normal_density",
    # model
    "ModelParams",
    "RngStream",
    "Sample",
    "StepEcdf",
    "ThetaOverM",
    "PowerLaw",
    "FixedRho",
    "RhoSequence",
    "sample",
    "ecdf_triple",
    "write_sample_csv",
    # procedures
    "BH",
    "FixedThreshold",
    "ThresholdProcedure",
    "RejectionResult",
    "bh_threshold",
    "apply_procedure",
    "fdp_at",
    # asymptotics
    "MixtureCdf",
    "AtomicMeasure",
    "EMPTY_MEASURE",
    "AsymptoticLaw",
    "bh_fixed_point",
    "bh_threshold_derivative",
    "threshold_derivative",
    "fluctuation_measures",
    "disturbance_coef",
    "ecdf_variance",
    "asymptotic_law",
    "limit_cov",
    "ecdf_limit_cov",
    # oracle
    "OracleParams",
    "transform",
    "t_star_rho",
    "oracle_law",
    # experiment
    "ExperimentConfig",
    "ExperimentSummary",
    "ProbeResult",
    "RateStudyResult",
    "run",
    "rate_study",
    "ecdf_covariance_probe",
    "ks_statistic_normal",
    "check_tolerances",
    "summary_to_dict",
    "write_replicates_csv",
    "write_summary_json",
]
