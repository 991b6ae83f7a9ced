"""Estimation of the Tsallis entropy of exponential populations with a common scale."""

from .errors import (
    CapacityError,
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    InconsistentLocationError,
    TsallisExpError,
)
from .estimators import (
    BoxBound,
    Estimate,
    EstimatorKind,
    IGPrior,
    baee,
    baee_risk_closed_form,
    batch_estimates,
    bayes,
    bz_finite,
    bz_smooth,
    c0,
    c1,
    confidence_interval,
    d_r0,
    mle_plugin,
    stein,
)
from .expmodel import (
    EntropicConfig,
    PopulationParams,
    SummaryStats,
    read_sample_csv,
    sample,
    summarize,
    theta,
    tsallis_joint,
    tsallis_single,
)
from .simlab import ExperimentGrid, PriCell, RiskReport, mc_risk, mc_risks, preset_grid, run_grid

__version__ = "0.1.0"
