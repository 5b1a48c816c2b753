"""Placement matrix, hash partitioning of fractional tiers, pinning and archival targets."""

import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rac_grid.shared.errors import EmptyRacList, PinnedOverflow
from rac_grid.shared.models import DataTier, FileRecord, Medium, Station, StationKind, Topology
from rac_grid.shared.settings import settings
from rac_grid.shared.units import min_disk_for_pinned, pin_limit


class PlacementColumn(str, Enum):
    CAC_TAPE = "cac_tape"
    CAC_DISK = "cac_disk"
    RAC_TAPE = "rac_tape"
    RAC_DISK = "rac_disk"

    @property
    def site(self) -> StationKind:
        return StationKind.CAC if self.value.startswith("cac") else StationKind.RAC

    @property
    def medium(self) -> Medium:
        return Medium.TAPE if self.value.endswith("tape") else Medium.DISK


class TierPlacement(BaseModel):
    """Coverage of one tier per site and medium; tape values above 1 are copy counts."""
    model_config = ConfigDict(frozen=True)

    cac_tape: float = Field(default=0.0, ge=0)
    cac_disk: float = Field(default=0.0, ge=0, le=1)
    rac_tape: float = Field(default=0.0, ge=0)
    rac_disk: float = Field(default=0.0, ge=0, le=1)

    def get(self, column: PlacementColumn) -> float:
        return getattr(self, column.value)


# Cells that read "Few %" in the published matrix.
FEW_PERCENT_CELLS: Tuple[Tuple[DataTier, PlacementColumn], ...] = (
    (DataTier.MC_DST, PlacementColumn.CAC_DISK),
    (DataTier.MC_DST, PlacementColumn.RAC_TAPE),
    (DataTier.MC_DST, PlacementColumn.RAC_DISK),
)

FEW = "few"

# (FNAL tape, FNAL disk, RAC tape, RAC disk) per tier.
RUN2A_MATRIX: Dict[DataTier, Tuple[object, object, object, object]] = {
    DataTier.RAW: (1.0, 0.1, 0.0, 0.0),
    DataTier.RECO: (1.0, 0.1, 0.01, 0.0),
    DataTier.DST: (1.0, 1.0, 0.1, 0.1),
    DataTier.TMB: (4.0, 1.0, 1.0, 1.0),
    DataTier.DERIVED: (4.0, 1.0, 1.0, 1.0),
    DataTier.MC_D0STAR: (0.0, 0.0, 0.0, 0.0),
    DataTier.MC_D0SIM: (0.0, 0.0, 0.0, 0.0),
    DataTier.MC_DST: (1.0, FEW, FEW, FEW),
    DataTier.MC_TMB: (1.0, 1.0, 0.0, 0.1),
    DataTier.MC_PMCS: (1.0, 1.0, 0.0, 0.1),
    DataTier.MC_ROOTTUPLE: (1.0, 0.0, 0.1, 0.0),
}


class PolicyTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    placements: Dict[DataTier, TierPlacement]
    few_percent: float = Field(default=0.05, ge=0, le=1)
    on_demand_min_fraction: float = Field(default=0.10, ge=0, lt=1)

    @model_validator(mode="after")
    def _every_tier_present(self) -> "PolicyTable":
        missing = [t.value for t in DataTier if t not in self.placements]
        if missing:
            raise ValueError(f"policy lacks tiers: {', '.join(missing)}")
        return self

    def __getitem__(self, tier: DataTier) -> TierPlacement:
        return self.placements[DataTier(tier)]

    def __getattr__(self, name: str):
        # policy.TMB style access for tier rows
        if name in DataTier.__members__:
            return self.placements[DataTier[name]]
        return super().__getattr__(name)  # type: ignore[misc]

    def fraction(self, tier: DataTier, column: PlacementColumn) -> float:
        return self.placements[tier].get(column)


def default_policy(few_percent: Optional[float] = None,
                   on_demand_min_fraction: Optional[float] = None) -> PolicyTable:
    """The published Run 2a placement matrix with "Few %" mapped to ``few_percent``."""
    few = settings.few_percent if few_percent is None else few_percent
    rows = {}
    for tier, cells in RUN2A_MATRIX.items():
        values = [few if cell == FEW else cell for cell in cells]
        rows[tier] = TierPlacement(cac_tape=values[0], cac_disk=values[1],
                                   rac_tape=values[2], rac_disk=values[3])
    return PolicyTable(
        placements=rows,
        few_percent=few,
        on_demand_min_fraction=(settings.on_demand_min_fraction
                                if on_demand_min_fraction is None else on_demand_min_fraction),
    )


class PolicyOverrides(BaseModel):
    """Scenario-file adjustments applied on top of the default matrix."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    few_percent: Optional[float] = Field(default=None, ge=0, le=1)
    on_demand_min_fraction: Optional[float] = Field(default=None, ge=0, lt=1)
    tiers: Dict[DataTier, Dict[PlacementColumn, float]] = Field(default_factory=dict)


def apply_overrides(policy: PolicyTable, overrides: PolicyOverrides) -> PolicyTable:
    """Return ``policy`` with the override values substituted."""
    rows = dict(policy.placements)
    few = policy.few_percent
    if overrides.few_percent is not None:
        few = overrides.few_percent
        for tier, column in FEW_PERCENT_CELLS:
            rows[tier] = rows[tier].model_copy(update={column.value: few})
    for tier, cells in overrides.tiers.items():
        merged = rows[tier].model_dump()
        merged.update({column.value: value for column, value in cells.items()})
        rows[tier] = TierPlacement(**merged)
    return PolicyTable(
        placements=rows,
        few_percent=few,
        on_demand_min_fraction=(policy.on_demand_min_fraction
                                if overrides.on_demand_min_fraction is None
                                else overrides.on_demand_min_fraction),
    )


def stable_hash(file_id: str) -> int:
    """Platform-independent 64-bit hash of a file id."""
    return int.from_bytes(hashlib.blake2b(file_id.encode("utf-8"), digest_size=8).digest(), "big")


def _exact(value: float) -> Fraction:
    return Fraction(repr(value))


def covered_count(n_files: int, fraction: float) -> int:
    """Files selected for a coverage fraction, rounded half up."""
    return math.floor(_exact(fraction) * n_files + Fraction(1, 2))


@dataclass(frozen=True)
class DstPartition:
    """Disjoint per-RAC shares of one tier's files."""
    shares: Dict[str, FrozenSet[str]]
    owners: Dict[str, str] = field(repr=False)

    def __getitem__(self, rac_id: str) -> FrozenSet[str]:
        return self.shares.get(rac_id, frozenset())

    def owner(self, file_id: str) -> Optional[str]:
        return self.owners.get(file_id)

    @property
    def covered(self) -> FrozenSet[str]:
        return frozenset(self.owners)


def partition_tier(files: Sequence[FileRecord], racs: Sequence[str], fraction: float) -> DstPartition:
    """Deal a tier's files over ``racs`` in stable-hash order.

    With full coverage (``len(racs) * fraction >= 1``) every file gets exactly
    one owner; otherwise each RAC receives ``round(fraction * len(files))``
    files and the rest stay unowned. Share sizes differ by at most one file.
    """
    if not racs:
        raise EmptyRacList()
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"partition fraction must be within [0, 1], got {fraction}")

    ordered = sorted(files, key=lambda f: (stable_hash(f.file_id), f.file_id))
    n_racs = len(racs)
    if _exact(fraction) * n_racs >= 1:
        selected = len(ordered)
    else:
        selected = covered_count(len(ordered), fraction) * n_racs

    owners: Dict[str, str] = {}
    buckets: Dict[str, Set[str]] = {rac: set() for rac in racs}
    for index, record in enumerate(ordered[:selected]):
        rac = racs[index % n_racs]
        owners[record.file_id] = rac
        buckets[rac].add(record.file_id)
    return DstPartition(shares={rac: frozenset(ids) for rac, ids in buckets.items()}, owners=owners)


class PlacementPlan:
    """Partitions of every fractional (tier, column) cell for one file population."""

    def __init__(self, partitions: Dict[Tuple[DataTier, PlacementColumn], DstPartition],
                 cac_id: Optional[str], rac_ids: Sequence[str]):
        self.partitions = partitions
        self.cac_id = cac_id
        self.rac_ids = list(rac_ids)

    def partition(self, tier: DataTier, column: PlacementColumn) -> Optional[DstPartition]:
        return self.partitions.get((tier, column))

    def owner(self, tier: DataTier, column: PlacementColumn, file_id: str) -> Optional[str]:
        partition = self.partitions.get((tier, column))
        return partition.owner(file_id) if partition is not None else None


def plan_placements(files: Iterable[FileRecord], policy: PolicyTable, topology: Topology) -> PlacementPlan:
    """Build the hash partitions for every column with a coverage strictly between 0 and 1."""
    by_tier: Dict[DataTier, List[FileRecord]] = defaultdict(list)
    for record in files:
        by_tier[record.tier].append(record)

    cac = topology.cac
    rac_ids = topology.rac_ids()
    partitions: Dict[Tuple[DataTier, PlacementColumn], DstPartition] = {}
    for tier, tier_files in by_tier.items():
        for column in PlacementColumn:
            fraction = policy.fraction(tier, column)
            if not 0.0 < fraction < 1.0:
                continue
            if column.site == StationKind.CAC:
                if cac is None:
                    continue
                partitions[(tier, column)] = partition_tier(tier_files, [cac.station_id], fraction)
            elif rac_ids:
                partitions[(tier, column)] = partition_tier(tier_files, rac_ids, fraction)
    return PlacementPlan(partitions, cac.station_id if cac else None, rac_ids)


def pinned_set(station: Station, files: Iterable[FileRecord], policy: PolicyTable,
               plan: PlacementPlan) -> Set[str]:
    """File ids that must sit pinned on ``station``'s disk.

    ``files`` is the population of every registered dataset. RACs pin whole
    tiers with full disk coverage plus their share of fractional tiers; the
    CAC pins tiers with full disk coverage; IACs and DASes pin nothing.
    """
    pinned: Set[str] = set()
    if station.kind == StationKind.RAC:
        for record in files:
            fraction = policy.fraction(record.tier, PlacementColumn.RAC_DISK)
            if fraction >= 1.0:
                pinned.add(record.file_id)
            elif fraction > 0.0 and plan.owner(record.tier, PlacementColumn.RAC_DISK,
                                               record.file_id) == station.station_id:
                pinned.add(record.file_id)
    elif station.kind == StationKind.CAC:
        for record in files:
            if policy.fraction(record.tier, PlacementColumn.CAC_DISK) >= 1.0:
                pinned.add(record.file_id)
    return pinned


class PlacementTarget(BaseModel):
    model_config = ConfigDict(frozen=True)

    station_id: str
    medium: Medium
    copy_count: int = 1
    pinned: bool = False


def _copies(fraction: float) -> int:
    return math.ceil(fraction) if fraction >= 1.0 else 1


def archival_targets(file: FileRecord, policy: PolicyTable, topology: Topology,
                     plan: PlacementPlan) -> List[PlacementTarget]:
    """Every (station, medium, copies) placement the policy requires for ``file``."""
    row = policy[file.tier]
    targets: List[PlacementTarget] = []

    cac = topology.cac
    if cac is not None:
        for column in (PlacementColumn.CAC_TAPE, PlacementColumn.CAC_DISK):
            fraction = row.get(column)
            if fraction <= 0.0:
                continue
            if fraction < 1.0 and plan.owner(file.tier, column, file.file_id) is None:
                continue
            if column.medium == Medium.TAPE:
                targets.append(PlacementTarget(station_id=cac.station_id, medium=Medium.TAPE,
                                               copy_count=_copies(fraction)))
            else:
                targets.append(PlacementTarget(station_id=cac.station_id, medium=Medium.DISK,
                                               pinned=fraction >= 1.0))

    for rac_id in topology.rac_ids():
        for column in (PlacementColumn.RAC_DISK, PlacementColumn.RAC_TAPE):
            fraction = row.get(column)
            if fraction <= 0.0:
                continue
            if fraction < 1.0 and plan.owner(file.tier, column, file.file_id) != rac_id:
                continue
            if column.medium == Medium.TAPE:
                targets.append(PlacementTarget(station_id=rac_id, medium=Medium.TAPE,
                                               copy_count=_copies(fraction)))
            else:
                targets.append(PlacementTarget(station_id=rac_id, medium=Medium.DISK, pinned=True))
    return targets


def on_demand_budget(station: Station, pinned_bytes: int, policy: PolicyTable) -> int:
    """Disk bytes left for the on-demand cache once ``pinned_bytes`` are pinned."""
    if pinned_bytes < 0:
        raise ValueError("pinned_bytes must be >= 0")
    disk = int(station.disk_capacity)
    if pinned_bytes > pin_limit(disk, policy.on_demand_min_fraction):
        raise PinnedOverflow(station.station_id, pinned_bytes, disk, policy.on_demand_min_fraction,
                             required_disk=min_disk_for_pinned(pinned_bytes, policy.on_demand_min_fraction))
    return disk - pinned_bytes


def pinned_bytes_of(ids: Iterable[str], sizes: Mapping[str, int]) -> int:
    return sum(sizes[file_id] for file_id in ids)
