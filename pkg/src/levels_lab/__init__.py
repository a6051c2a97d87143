"""Interval diffeomorphisms of class C^{1+alpha} without local minimal sets.

Builds truncated models of a pair f, g acting on [0, 1], checks the
regularity estimates behind them and produces finite descent certificates.
"""
from .errors import (
    ConstructionError,
    DomainError,
    LevelsError,
    ModelInconsistencyError,
    ParameterError,
    RangeError,
    ThresholdError,
)
from .partition import LocalPoint, Params, PartitionModel, Schedule, build_partition

__version__ = "0.1.0"
