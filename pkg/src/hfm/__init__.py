"""Harmonic fairness measure via manifolds: exact and projection-approximated
set distances under several non-binary sensitive attributes."""

from hfm.approx import ApproxParams, acceledist, approxdist, extenddist
from hfm.errors import (
    ConfigError,
    DataError,
    DegenerateAttributeError,
    HFMError,
    ZeroDistanceError,
)
from hfm.exact import exact_all_attrs, exact_attr_distance, hausdorff_two_sets
from hfm.fairness import (
    discriminative_risk,
    fairness_report,
    group_fairness,
    hfm,
    hfm_prev,
)
from hfm.model import (
    Dataset,
    DistanceReport,
    LabelChannel,
    Method,
    build_dataset,
    point_view,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxParams",
    "ConfigError",
    "DataError",
    "Dataset",
    "DegenerateAttributeError",
    "DistanceReport",
    "HFMError",
    "LabelChannel",
    "Method",
    "ZeroDistanceError",
    "acceledist",
    "approxdist",
    "build_dataset",
    "discriminative_risk",
    "exact_all_attrs",
    "exact_attr_distance",
    "extenddist",
    "fairness_report",
    "group_fairness",
    "hausdorff_two_sets",
    "hfm",
    "hfm_prev",
    "point_view",
]
