"""One planning pass: storage, CPU, fit and growth for a scenario."""

from typing import Dict, List, Mapping, Optional, Sequence

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from rac_grid.planner.resources import (
    PUBLISHED_ALLOCATED_REMOTE_GHZ,
    PUBLISHED_REQUIREMENT_GHZ,
    PUBLISHED_TOTAL_REMOTE_GHZ,
    CpuSummary,
    ResourceEntry,
    cpu_summary,
)
from rac_grid.planner.storage import (
    SiteClass,
    StorageReport,
    fit_check,
    growth_projection,
    render_storage_table,
    storage_totals,
)
from rac_grid.policy.placement import PolicyTable
from rac_grid.shared.models import DataTier, Medium, Topology, Violation
from rac_grid.shared.tracing import traced
from rac_grid.shared.units import format_bytes


class CapacityPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str
    event_counts: Dict[DataTier, int]
    reports: List[StorageReport]
    cpu: CpuSummary
    violations: List[Violation] = Field(default_factory=list)

    @property
    def base(self) -> StorageReport:
        return self.reports[0]


def plan_capacity(name: str, event_counts: Mapping[DataTier, int], policy: PolicyTable, topology: Topology,
                  registry: Sequence[ResourceEntry], years: int = 0, rate: Optional[int] = None,
                  requirement: Optional[float] = None) -> CapacityPlan:
    """Storage totals, CPU accounting, fit findings and an optional growth projection."""
    n_racs = max(1, len(topology.rac_ids()))
    with traced("planner.plan", {"scenario": name, "years": years, "racs": n_racs}):
        base = storage_totals(event_counts, policy, n_racs)
        reports = growth_projection(base, years, rate)
        cpu = cpu_summary(registry, requirement)
        violations = fit_check(base, topology, policy)
    logger.info(f"✅ Planned {name}: CAC tape {format_bytes(base.cac_tape)}, "
                f"per-RAC disk {format_bytes(base.rac_disk)}, {len(violations)} fit finding(s)")
    return CapacityPlan(scenario=name, event_counts=dict(event_counts), reports=reports, cpu=cpu,
                        violations=violations)


def render_plan(plan: CapacityPlan) -> str:
    lines = [f"Capacity plan for {plan.scenario}", "", render_storage_table(plan.base)]
    if len(plan.reports) > 1:
        lines.append("Growth projection")
        for report in plan.reports:
            lines.append(f"  year {report.year}: CAC tape {format_bytes(report.cac_tape)}, "
                         f"per-RAC disk {format_bytes(report.total(SiteClass.RAC, Medium.DISK))}")
        lines.append("")
    cpu = plan.cpu
    lines += [
        "CPU",
        f"  allocated at remote centers: {cpu.allocated_remote:g} GHz (published: about "
        f"{PUBLISHED_ALLOCATED_REMOTE_GHZ:g} GHz)",
        f"  total at remote centers:     {cpu.total_remote:g} GHz (published: over "
        f"{PUBLISHED_TOTAL_REMOTE_GHZ:g} GHz)",
        f"  central center:              {cpu.cac:g} GHz",
        f"  requirement:                 {cpu.requirement:g} GHz (published: over "
        f"{PUBLISHED_REQUIREMENT_GHZ:g} GHz)",
        f"  shortfall:                   {cpu.shortfall:g} GHz",
        "",
    ]
    if plan.violations:
        lines.append("Fit findings")
        lines += [f"  {violation}" for violation in plan.violations]
    else:
        lines.append("Fit findings: none")
    return "\n".join(lines) + "\n"
