"""Heavy-tailed productivity distributions, statistical equilibrium and superstatistics."""
__version__ = "0.1.0"

from .equilibrium import (
    EquilibriumTable,
    FirmDistribution,
    demand_deficit,
    demand_small_beta,
    invert_demand,
    invert_demand_gap,
    mean_demand,
    moment,
    partition_function,
    tabulate_equilibrium,
    worker_pdf,
    worker_probabilities,
)
from .exceptions import (
    CutWarning,
    DegenerateTailError,
    DivergentMomentError,
    DomainError,
    InconsistencyWarning,
    InsufficientDataError,
    NormalizabilityError,
    OutOfRangeError,
    OutOfTheoryError,
    QuadratureError,
    SchemaError,
    SuperParetoError,
)
from .gb2 import (
    Gb2Params,
    LogNormalApprox,
    gb2_cdf_lower,
    gb2_cdf_upper,
    gb2_lognormal_peak,
    gb2_pdf,
    gb2_ppf,
    gb2_sample,
    gb2_tail_upper,
)
from .pipeline import LevelFit, YearReport, analyze, analyze_year, emit_plotdata, format_report, parse_report
from .records import Panel, ProductivityRecord, aggregate, aggregate_weighted, ingest_csv, write_csv
from .superstat import (
    BetaWeight,
    DemandLaw,
    gamma_from_delta,
    generalized_boltzmann,
    infer_delta,
    infer_mu_f,
    predict_mu_w,
    sample_demand,
    worker_cdf_upper_super,
    worker_pdf_super,
)
from .synth import SynthConfig, synth_generate, synth_two_stage
from .tail_fit import (
    CutPolicy,
    FitResult,
    GB2Estimator,
    HillEstimator,
    apply_cuts,
    fit_gb2_mle,
    hill_estimator,
)
