"""Expansion coding for additive exponential noise channels and exponential
sources."""

from .errors import DomainError, InfeasibleLevelError, RangeMismatchError
from .expansion import (
    BernoulliProfile,
    LevelRange,
    QaryProfile,
    binary_profile,
    level_prob,
    qary_level_dist,
    qary_profile,
    reconstruct,
    sample_expanded,
    truncated_mean,
)
from .aen import ChannelSpec, RateReport, capacity
from .source import RdPoint, SourceSpec, rd_function

__version__ = "0.1.0"

__all__ = [
    "BernoulliProfile",
    "ChannelSpec",
    "DomainError",
    "InfeasibleLevelError",
    "LevelRange",
    "QaryProfile",
    "RangeMismatchError",
    "RateReport",
    "RdPoint",
    "SourceSpec",
    "binary_profile",
    "capacity",
    "level_prob",
    "qary_level_dist",
    "qary_profile",
    "rd_function",
    "reconstruct",
    "sample_expanded",
    "truncated_mean",
]
