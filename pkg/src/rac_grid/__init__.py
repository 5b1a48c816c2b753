"""Placement policy, capacity planner and simulator for a regional analysis center data grid."""

__version__ = "0.1.0"
