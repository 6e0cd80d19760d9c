"""Discrete dynamic Bayesian network engine and clinical decision support.

Learns a daily hospital-acquired infection risk model from temporal patient
records, computes per-day infection probabilities by exact filtering, and
serves them over a CLI and an HTTP API.
"""

from .dbn import (
    DbnSpec,
    EvidenceTimeline,
    PredictionTrace,
    filter_day,
    forward_equals_unrolled,
    load_spec,
    predict_trajectory,
    save_spec,
    unroll,
)
from .evaluation import ConfusionMatrix, MetricsReport, classify, confusion, metrics
from .inference import joint_probability, posterior
from .learning import FitReport, Structure, fit_parameters
from .network import (
    Cpt,
    Dataset,
    Distribution,
    Network,
    Variable,
    load_network,
    save_network,
    validate_network,
)
from .sampling import sample

__version__ = "0.1.0"

__all__ = [
    "Cpt", "ConfusionMatrix", "Dataset", "DbnSpec", "Distribution",
    "EvidenceTimeline", "FitReport", "MetricsReport", "Network",
    "PredictionTrace", "Structure", "Variable", "classify", "confusion",
    "filter_day", "fit_parameters", "forward_equals_unrolled",
    "joint_probability", "load_network", "load_spec", "metrics",
    "posterior", "predict_trajectory", "sample", "save_network",
    "save_spec", "unroll", "validate_network", "__version__",
]
