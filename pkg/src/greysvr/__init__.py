"""Feature-weighted epsilon-SVR stock forecasting toolkit.

The library trains RBF-kernel support vector regressors whose per-feature
weights come from grey correlation analysis, and wraps them in a complete
pipeline: CSV ingestion, outlier clamping and range scaling, sentiment
indicators, factor screening, grid-searched hyperparameters, and a
weighted-vs-unweighted comparison report.
"""

from ._solver import HAVE_COMPILED, active_backend
from .errors import ConfigError, ConvergenceError, DataError, GreysvrError
from .gca import GreyWeights, grey_relational_degrees, grey_weights
from .metrics import EvalReport, compare, evaluate
from .model_selection import Grid, SplitPlan, chronological_split, grid_search, kfold_split
from .preprocess import mad_clamp, range_normalize
from .svr import Hyperparams, SvrModel, load_model, predict, save_model, train_svr

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "EvalReport",
    "GreysvrError",
    "GreyWeights",
    "Grid",
    "HAVE_COMPILED",
    "Hyperparams",
    "SplitPlan",
    "SvrModel",
    "__version__",
    "active_backend",
    "chronological_split",
    "compare",
    "evaluate",
    "grey_relational_degrees",
    "grey_weights",
    "grid_search",
    "kfold_split",
    "load_model",
    "mad_clamp",
    "predict",
    "range_normalize",
    "save_model",
    "train_svr",
]
