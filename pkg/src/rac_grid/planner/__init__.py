from rac_grid.planner.capacity import CapacityPlan, plan_capacity, render_plan
from rac_grid.planner.resources import RUN2A_REGISTRY, CenterKind, CpuSummary, ResourceEntry, cpu_summary
from rac_grid.planner.storage import (
    SiteClass,
    StorageReport,
    event_totals,
    fit_check,
    growth_projection,
    pinned_bytes_by_station,
    render_storage_table,
    storage_csv,
    storage_totals,
)

__all__ = [
    "RUN2A_REGISTRY",
    "CapacityPlan",
    "CenterKind",
    "CpuSummary",
    "ResourceEntry",
    "SiteClass",
    "StorageReport",
    "cpu_summary",
    "event_totals",
    "fit_check",
    "growth_projection",
    "pinned_bytes_by_station",
    "plan_capacity",
    "render_plan",
    "render_storage_table",
    "storage_csv",
    "storage_totals",
]
