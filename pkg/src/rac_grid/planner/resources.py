"""Regional resource registry and CPU accounting."""

from enum import Enum
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rac_grid.shared.settings import settings

# Figures quoted alongside the computed ones; they are not reconciled.
PUBLISHED_ALLOCATED_REMOTE_GHZ = 360.0
PUBLISHED_TOTAL_REMOTE_GHZ = 1800.0
PUBLISHED_REQUIREMENT_GHZ = 4000.0


class CenterKind(str, Enum):
    CAC = "CAC"
    RAC = "RAC"


class ResourceEntry(BaseModel):
    """One center's allocation to the experiment; totals are what the center owns overall."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    kind: CenterKind = CenterKind.RAC
    iacs: List[str] = Field(default_factory=list)
    cpu_allocated: float = Field(default=0.0, ge=0, description="GHz")
    cpu_total: Optional[float] = Field(default=None, ge=0, description="GHz")
    disk_allocated: float = Field(default=0.0, ge=0, description="TB")
    disk_total: Optional[float] = Field(default=None, ge=0, description="TB")
    tape: Optional[float] = Field(default=None, ge=0, description="TB")
    tape_total: Optional[float] = Field(default=None, ge=0, description="TB")
    schedule: str = ""

    @model_validator(mode="after")
    def _allocated_within_total(self) -> "ResourceEntry":
        if self.cpu_total is not None and self.cpu_allocated > self.cpu_total:
            raise ValueError(f"{self.name}: cpu_allocated {self.cpu_allocated} exceeds cpu_total {self.cpu_total}")
        if self.disk_total is not None and self.disk_allocated > self.disk_total:
            raise ValueError(f"{self.name}: disk_allocated {self.disk_allocated} exceeds disk_total {self.disk_total}")
        if self.tape is not None and self.tape_total is not None and self.tape > self.tape_total:
            raise ValueError(f"{self.name}: tape {self.tape} exceeds tape_total {self.tape_total}")
        return self


class CpuSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    allocated_remote: float
    total_remote: float
    cac: float
    requirement: float
    shortfall: float


def cpu_summary(registry: Sequence[ResourceEntry], requirement: Optional[float] = None) -> CpuSummary:
    """Remote allocations and totals against the CPU requirement.

    Centers without a published total count with their allocation.
    """
    need = settings.cpu_requirement_ghz if requirement is None else requirement
    remote = [entry for entry in registry if entry.kind != CenterKind.CAC]
    allocated = sum(entry.cpu_allocated for entry in remote)
    total = sum(entry.cpu_allocated if entry.cpu_total is None else entry.cpu_total for entry in remote)
    cac = sum(entry.cpu_allocated for entry in registry if entry.kind == CenterKind.CAC)
    return CpuSummary(
        allocated_remote=allocated,
        total_remote=total,
        cac=cac,
        requirement=need,
        shortfall=need - (allocated + cac),
    )


RUN2A_REGISTRY: List[ResourceEntry] = [
    ResourceEntry(name="GridKa @FZK", iacs=["Aachen", "Bonn", "Freiburg", "Mainz", "Munich", "Wuppertal"],
                  cpu_allocated=52, cpu_total=518, disk_allocated=5.2, disk_total=50, tape=10, tape_total=100,
                  schedule="Established RAC"),
    ResourceEntry(name="SAR @UTA", iacs=["AZ", "Cinvestav", "LA Tech", "Oklahoma", "Rice", "KU", "KSU"],
                  cpu_allocated=160, cpu_total=320, disk_allocated=25, disk_total=50,
                  schedule="Active MC production center; computing available Summer 2003"),
    ResourceEntry(name="UK", iacs=["Lancaster", "Manchester", "Imperial College", "RAL"],
                  cpu_allocated=46, cpu_total=556, disk_allocated=14, disk_total=170, tape=44,
                  schedule="Active, MC production; RAC functionality later this year"),
    ResourceEntry(name="IN2P3 @Lyon", iacs=["CCin2p3", "CEA-Saclay", "CPPM-Marseille", "IPNL-Lyon",
                                            "IRES-Strasbourg", "ISN-Grenoble", "LAL-Orsay", "LPNHE-Paris"],
                  cpu_allocated=100, disk_allocated=12, tape=200,
                  schedule="Active, MC production; RAC functionality later this year"),
    ResourceEntry(name="FNAL", kind=CenterKind.CAC, iacs=["Farm", "cab", "clued0", "Central-analysis"],
                  cpu_allocated=1800, disk_allocated=25, tape=1000, schedule="Established as CAC"),
]
