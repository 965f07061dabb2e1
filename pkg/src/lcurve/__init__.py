"""Learning-curve fitting, comparison, validation and extrapolation.

Errors are percentages in [0, 100]; training sizes are positive integers.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DataError,
    DomainError,
    IllConditionedError,
    LcurveError,
    NumericalError,
    ParseError,
)
from .fit import (  # noqa: E402
    FitConfig,
    FitResult,
    GammaSearchConfig,
    WeightingScheme,
    confidence_band,
    fit_curve,
    solve_linear,
)
from .model import (  # noqa: E402
    CurveSummary,
    ModelVariant,
    PowerLawParams,
    asymptote_linearized,
    evaluate,
    extrapolate_linearized,
    summarize,
    unsummarize,
)
from .observations import ObservationSet, SizeGroup  # noqa: E402
from .variance import VarianceModel, fit_sigma_hat, predict_variance  # noqa: E402
