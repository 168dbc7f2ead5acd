"""Arrays of locality-sensitive count estimators (ACE) for unsupervised anomaly detection."""

from .core import AceSketch, SaturationWarning, ScoreEstimate
from .detect import DetectionReport, detect_batch, detect_stream
from .estimators import (
    Dataset,
    EstimatorComparison,
    compare_estimators,
    exact_score,
    rse_score,
    variance_decomposition,
)
from .exceptions import (
    AceError,
    ContractViolation,
    DataError,
    DomainError,
    InconsistentDeleteError,
    UnsupportedOperationError,
)
from .io import load_dataset, load_sketch, save_sketch
from .srp import SrpFamily, collision_probability

__version__ = "0.1.0"
