"""Exploration-space recommendation engine.

Represents a visitor's history as an order ideal of a prerequisite partial
order over points of interest, and performs fringe computation, Bayesian
state estimation, optimal path planning, diversified ranking, explanation
generation, and prerequisite inference from trajectories on that lattice.
"""

from .lattice import (
    ExplorationState,
    FringeCounters,
    SurmiseRelation,
    build_relation,
    count_ideals,
    fringe,
    fringe_incremental,
    init_counters,
    is_valid_state,
    principal_ideal,
    well_graded_chain,
)

__all__ = [
    "ExplorationState",
    "FringeCounters",
    "SurmiseRelation",
    "build_relation",
    "count_ideals",
    "fringe",
    "fringe_incremental",
    "init_counters",
    "is_valid_state",
    "principal_ideal",
    "well_graded_chain",
]

__version__ = "0.1.0"
