"""Exact state-vector simulator and planner for OAM-routed quantum networks."""

from .elements import ElementUnitary, interferometric_sorter, sorter_unitary
from .fabric import NetworkSpec, Pipeline, build, noise_sweep, transmit, verify_all_pairs
from .planner import AssignmentTable, assignment_table, resource_plan
from .state import CompositeState, SubsystemLayout

__all__ = [
    "AssignmentTable",
    "CompositeState",
    "ElementUnitary",
    "NetworkSpec",
    "Pipeline",
    "SubsystemLayout",
    "assignment_table",
    "build",
    "interferometric_sorter",
    "noise_sweep",
    "resource_plan",
    "sorter_unitary",
    "transmit",
    "verify_all_pairs",
]

__version__ = "0.1.0"
