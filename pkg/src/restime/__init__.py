"""Residence times of 1D random walks between absorbing boundaries with defects."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BiasOutOfRangeError,
    EstimationError,
    LossOfPrecisionWarning,
    NonConvergenceError,
    NumericalCheckError,
    ValidationError,
)
from .lane import (  # noqa: E402
    HomogeneousParams,
    Lane,
    ModelA,
    ModelB,
    ModelC,
    ModelD,
    Static,
    StaticDefect,
    apply_static_defect,
    make_homogeneous_lane,
)
from .exact import exit_probabilities, mean_visits, residence_report  # noqa: E402
from .defects import effective_lane, triangular_weights  # noqa: E402

__all__ = [
    "__version__",
    "BiasOutOfRangeError",
    "EstimationError",
    "LossOfPrecisionWarning",
    "NonConvergenceError",
    "NumericalCheckError",
    "ValidationError",
    "HomogeneousParams",
    "Lane",
    "ModelA",
    "ModelB",
    "ModelC",
    "ModelD",
    "Static",
    "StaticDefect",
    "apply_static_defect",
    "make_homogeneous_lane",
    "exit_probabilities",
    "mean_visits",
    "residence_report",
    "effective_lane",
    "triangular_weights",
]
