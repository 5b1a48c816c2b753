from rac_grid.policy.placement import (
    DstPartition,
    PlacementColumn,
    PlacementPlan,
    PlacementTarget,
    PolicyOverrides,
    PolicyTable,
    TierPlacement,
    apply_overrides,
    archival_targets,
    default_policy,
    on_demand_budget,
    partition_tier,
    pinned_set,
    plan_placements,
)

__all__ = [
    "DstPartition",
    "PlacementColumn",
    "PlacementPlan",
    "PlacementTarget",
    "PolicyOverrides",
    "PolicyTable",
    "TierPlacement",
    "apply_overrides",
    "archival_targets",
    "default_policy",
    "on_demand_budget",
    "partition_tier",
    "pinned_set",
    "plan_placements",
]
