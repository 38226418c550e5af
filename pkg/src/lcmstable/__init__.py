"""Exact and approximate inference in linear models with stable variables.

Every variable of Y = AX follows a stable law S(alpha, beta, gamma, delta)
with a common alpha. Inference runs on the four distribution parameters in
the characteristic-function domain, where these laws have closed form.
"""

from .errors import (
    AlphaMismatchError,
    DegenerateDistributionError,
    DivergenceError,
    GenerationError,
    IllConditionedAlphaWarning,
    InvalidArgumentError,
    LCMError,
    ModelParseError,
    ModelShapeError,
    ModelValidationError,
    NonphysicalScaleError,
    NonphysicalSkewError,
    NormalizationError,
    NotATreeError,
    NotConvergedError,
    NumericalError,
    SingularMatrixError,
    SpectralEstimateUnconverged,
    UnsupportedFeatureError,
    ValidationError,
)
from .exact import PosteriorResult, forward_params, posterior_params, solve_linear
from .flows import (
    FlowParamRecord,
    ObservationPartition,
    build_observation_model,
    ingest_flow_params,
    report,
    synth_planetlab_surrogate,
)
from .jacobi import JacobiOptions, JacobiTrace, iteration_rate, jacobi_init, jacobi_run, jacobi_step
from .model import (
    ConvergenceReport,
    LinearStableModel,
    build_graph,
    check_convergence_conditions,
    load_model,
    normalize_unit_diagonal,
    save_model,
    spectral_radius,
)
from .numeric import DensityGrid, OracleReport, convolution_oracle, pdf_from_cf, slicing_oracle_2var
from .stable import (
    StableParams,
    TransformedParams,
    add,
    cf_eval,
    from_transformed,
    make_cauchy,
    make_gaussian,
    make_levy,
    scale_shift,
    to_transformed,
)
from .tree import Message, TreeCheck, check_tree, csp_messages, csp_run

__version__ = "0.1.0"
