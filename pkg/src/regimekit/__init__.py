"""Two-regime Markov-switching regressions with fixed or covariate-driven transitions."""

__version__ = "0.1.0"

from regimekit.model import (  # noqa: E402
    ModelSpec,
    Params,
    RegimeParams,
    TransitionMatrix,
    TransitionParams,
    pack,
    steady_state,
    transition_matrix_at,
    unpack,
)
from regimekit.timeseries import Dataset, Period, Series, align, growth_rate, load_csv  # noqa: E402
from regimekit.filtering import classify, loglikelihood, smooth  # noqa: E402
from regimekit.estimate import FitResult, aic, fit, stars  # noqa: E402
from regimekit.estimator import MarkovSwitchingRegression  # noqa: E402

__all__ = [
    "Dataset",
    "FitResult",
    "MarkovSwitchingRegression",
    "ModelSpec",
    "Params",
    "Period",
    "RegimeParams",
    "Series",
    "TransitionMatrix",
    "TransitionParams",
    "aic",
    "align",
    "classify",
    "fit",
    "growth_rate",
    "load_csv",
    "loglikelihood",
    "pack",
    "smooth",
    "stars",
    "steady_state",
    "transition_matrix_at",
    "unpack",
]
