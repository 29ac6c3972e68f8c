"""condent: k-nearest-neighbor estimation of conditional Shannon entropy
for mixed pairs (continuous features, discrete labels)."""

__version__ = "0.1.0"

from .data import Dataset
from .errors import CondentError, InconclusiveError, InvalidInputError
from .estimator import (EstimateResult, EstimatorConfig,
                        baseline_conditional_entropy, conditional_entropy,
                        kl_differential_entropy, label_entropy,
                        mutual_information, resolve_k, xi_statistic)
from .models import (ClassGaussianSpec, GroundTruth, LogisticGaussianSpec,
                     ball_label_probability, posterior, sample,
                     sphere_label_probability, true_conditional_entropy)
from .spatial import SpatialIndex, build_index

__all__ = [
    "__version__",
    "Dataset",
    "CondentError", "InconclusiveError", "InvalidInputError",
    "EstimateResult", "EstimatorConfig",
    "conditional_entropy", "mutual_information", "label_entropy",
    "kl_differential_entropy", "baseline_conditional_entropy",
    "resolve_k", "xi_statistic",
    "LogisticGaussianSpec", "ClassGaussianSpec", "GroundTruth",
    "sample", "posterior", "true_conditional_entropy",
    "ball_label_probability", "sphere_label_probability",
    "SpatialIndex", "build_index",
]
