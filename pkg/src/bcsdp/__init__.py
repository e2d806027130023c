"""Bounded graph colouring bounds via semidefinite programming."""

from .graphs import (
    ConflictGraph,
    Partition,
    TimetablingInstance,
    ValidationReport,
    connected_components,
    counting_bound,
    gen_forbidden_intersection,
    gen_gnp,
    gen_kneser,
    validate_partition,
)

__version__ = "0.1.0"
