"""Simulation inputs: jobs, workload description and scenarios."""

from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ByteSize, ConfigDict, Field, model_validator

from rac_grid.catalog.dan import DanConfig
from rac_grid.policy.placement import PolicyTable
from rac_grid.shared.models import DataTier, Dataset, Topology
from rac_grid.shared.settings import settings
from rac_grid.station.storage import TapeConfig


class JobKind(str, Enum):
    ANALYSIS = "analysis"
    REPROCESSING = "reprocessing"
    MC_PRODUCTION = "mc_production"


class Job(BaseModel):
    model_config = ConfigDict(frozen=True)

    job_id: str
    region_id: str
    dataset_id: str
    tier: DataTier
    cpu_seconds_per_event: float = Field(gt=0)
    submitted_at: float = 0.0
    kind: JobKind = JobKind.ANALYSIS
    output_events: int = Field(default=0, ge=0)


class RegionWorkload(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    region_id: str
    arrival_rate: float = Field(ge=0, description="jobs per second")


def _default_tier_mix() -> Dict[JobKind, Dict[DataTier, float]]:
    return {
        JobKind.ANALYSIS: {DataTier.TMB: 1.0},
        JobKind.REPROCESSING: {DataTier.RAW: 1.0},
        JobKind.MC_PRODUCTION: {DataTier.MC_DST: 1.0},
    }


def _default_cpu() -> Dict[JobKind, float]:
    return {JobKind.ANALYSIS: 0.001, JobKind.REPROCESSING: 0.05, JobKind.MC_PRODUCTION: 0.1}


class WorkloadSpec(BaseModel):
    """Job arrivals per region plus the mixes each arrival is drawn from."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    regions: List[RegionWorkload] = Field(default_factory=list)
    popularity: Dict[str, float] = Field(default_factory=dict)
    kind_mix: Dict[JobKind, float] = Field(default_factory=lambda: {JobKind.ANALYSIS: 1.0})
    tier_mix: Dict[JobKind, Dict[DataTier, float]] = Field(default_factory=_default_tier_mix)
    cpu_seconds_per_event: Dict[JobKind, float] = Field(default_factory=_default_cpu)
    db_queries_per_job: Dict[JobKind, int] = Field(default_factory=lambda: {JobKind.REPROCESSING: 1})
    mc_events_per_job: int = Field(default=10_000, gt=0)
    max_jobs: Optional[int] = Field(default=None, ge=0)
    opportunistic_overflow: bool = False

    @model_validator(mode="after")
    def _weights_non_negative(self) -> "WorkloadSpec":
        for name, weights in (("popularity", self.popularity), ("kind_mix", self.kind_mix)):
            if any(w < 0 for w in weights.values()):
                raise ValueError(f"{name} weights must be >= 0")
        for kind, mix in self.tier_mix.items():
            if any(w < 0 for w in mix.values()):
                raise ValueError(f"tier_mix[{kind.value}] weights must be >= 0")
        for kind, seconds in self.cpu_seconds_per_event.items():
            if seconds <= 0:
                raise ValueError(f"cpu_seconds_per_event[{kind.value}] must be > 0")
        return self

    @property
    def is_empty(self) -> bool:
        return all(r.arrival_rate == 0 for r in self.regions) or self.max_jobs == 0


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    duration: float = Field(gt=0)
    seed: int = 0
    file_size: ByteSize = Field(default_factory=lambda: settings.file_size, gt=0)
    eviction: Literal["lru", "fifo"] = "lru"
    prefer_inter_rac: bool = False
    check_invariants: bool = False
    tape: TapeConfig = Field(default_factory=TapeConfig)
    dan: DanConfig = Field(default_factory=DanConfig)


class Scenario(BaseModel):
    """Everything one simulation run needs."""
    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    topology: Topology
    policy: PolicyTable
    datasets: Tuple[Dataset, ...] = ()
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    simulation: SimulationConfig

    @property
    def duration(self) -> float:
        return self.simulation.duration

    @property
    def rng_seed(self) -> int:
        return self.simulation.seed

    def with_seed(self, seed: int) -> "Scenario":
        return self.model_copy(update={"simulation": self.simulation.model_copy(update={"seed": seed})})
