"""Domain models for data tiers, files, stations, regions, links and topology."""

from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ByteSize, ConfigDict, Field, PrivateAttr, field_serializer, model_validator

from rac_grid.shared.errors import UnknownStation
from rac_grid.shared.units import KB


class DataTier(str, Enum):
    """Processing-stage output formats, in production order."""
    RAW = "RAW"
    RECO = "RECO"
    DST = "DST"
    TMB = "TMB"
    DERIVED = "DERIVED"
    MC_D0STAR = "MC_D0STAR"
    MC_D0SIM = "MC_D0SIM"
    MC_DST = "MC_DST"
    MC_TMB = "MC_TMB"
    MC_PMCS = "MC_PMCS"
    MC_ROOTTUPLE = "MC_ROOTTUPLE"

    @property
    def order(self) -> int:
        return _TIER_ORDER[self]

    @property
    def is_monte_carlo(self) -> bool:
        return self.value.startswith("MC_")


TIERS: Tuple[DataTier, ...] = tuple(DataTier)
_TIER_ORDER = {tier: index for index, tier in enumerate(TIERS)}

# Size/Event in kB for each tier.
EVENT_SIZES_KB: Dict[DataTier, int] = {
    DataTier.RAW: 250,
    DataTier.RECO: 500,
    DataTier.DST: 150,
    DataTier.TMB: 10,
    DataTier.DERIVED: 10,
    DataTier.MC_D0STAR: 700,
    DataTier.MC_D0SIM: 300,
    DataTier.MC_DST: 400,
    DataTier.MC_TMB: 20,
    DataTier.MC_PMCS: 20,
    DataTier.MC_ROOTTUPLE: 20,
}


def default_event_size(tier: DataTier) -> int:
    """Per-event size of ``tier`` in kilobytes."""
    return EVENT_SIZES_KB[DataTier(tier)]


def event_bytes(tier: DataTier) -> int:
    return default_event_size(tier) * KB


class StationKind(str, Enum):
    """Hierarchy level of a station; CAC > RAC > IAC > DAS."""
    CAC = "CAC"
    RAC = "RAC"
    IAC = "IAC"
    DAS = "DAS"

    @property
    def rank(self) -> int:
        return _KIND_RANK[self]

    def __gt__(self, other: "StationKind") -> bool:  # type: ignore[override]
        return self.rank > StationKind(other).rank

    def __lt__(self, other: "StationKind") -> bool:  # type: ignore[override]
        return self.rank < StationKind(other).rank

    def __ge__(self, other: "StationKind") -> bool:  # type: ignore[override]
        return self.rank >= StationKind(other).rank

    def __le__(self, other: "StationKind") -> bool:  # type: ignore[override]
        return self.rank <= StationKind(other).rank


_KIND_RANK = {StationKind.CAC: 3, StationKind.RAC: 2, StationKind.IAC: 1, StationKind.DAS: 0}


class Medium(str, Enum):
    DISK = "disk"
    TAPE = "tape"


class LinkClass(str, Enum):
    CAC_TO_RAC = "CAC_TO_RAC"
    INTER_RAC = "INTER_RAC"
    INTRA_REGION = "INTRA_REGION"


class Station(BaseModel):
    """A site in the hierarchy with its storage and CPU."""
    model_config = ConfigDict(frozen=True)

    station_id: str = Field(min_length=1)
    kind: StationKind
    region_id: str
    disk_capacity: ByteSize = Field(default=ByteSize(0), ge=0)
    tape_capacity: ByteSize = Field(default=ByteSize(0), ge=0)
    cpu_power: float = Field(default=0.0, ge=0)
    parent_id: Optional[str] = None

    @property
    def cpu_slots(self) -> int:
        """Number of 1 GHz-equivalent job slots."""
        return int(self.cpu_power)


class Region(BaseModel):
    """A region with its hub station; ``rac_id`` names the CAC for the central region."""
    model_config = ConfigDict(frozen=True)

    region_id: str = Field(min_length=1)
    name: str = ""
    rac_id: str
    members: FrozenSet[str] = frozenset()

    @field_serializer("members")
    def _sorted_members(self, members: FrozenSet[str]) -> List[str]:
        return sorted(members)


class NetworkLink(BaseModel):
    """Bidirectional link; its class is derived from the endpoints, see ``Topology.link_class``."""
    model_config = ConfigDict(frozen=True)

    endpoint_a: str
    endpoint_b: str
    bandwidth: ByteSize = Field(gt=0)
    latency: float = Field(default=0.0, ge=0)

    @property
    def key(self) -> Tuple[str, str]:
        return tuple(sorted((self.endpoint_a, self.endpoint_b)))  # type: ignore[return-value]


class FileRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    file_id: str = Field(min_length=1)
    tier: DataTier
    dataset_id: str
    size: int = Field(gt=0)
    event_count: int = Field(ge=1)
    created_at: float = 0.0


class Dataset(BaseModel):
    """Logical dataset: event counts per tier, split into files by ``generate_files``."""
    model_config = ConfigDict(frozen=True)

    dataset_id: str = Field(min_length=1)
    event_counts: Dict[DataTier, int] = Field(default_factory=dict)
    created_at: float = 0.0

    @model_validator(mode="after")
    def _non_negative_counts(self) -> "Dataset":
        for tier, count in self.event_counts.items():
            if count < 0:
                raise ValueError(f"event count for {tier.value} must be >= 0")
        return self

    def logical_size(self, tier: DataTier) -> int:
        return self.event_counts.get(tier, 0) * event_bytes(tier)


def generate_files(dataset: Dataset, file_size: int) -> List[FileRecord]:
    """Split a dataset into files of about ``file_size`` bytes per tier.

    Every file but the last of a tier holds the same number of events; the
    sizes of a tier's files add up to its logical size exactly.
    """
    files: List[FileRecord] = []
    for tier in sorted(dataset.event_counts, key=lambda t: t.order):
        events = dataset.event_counts[tier]
        if events <= 0:
            continue
        per_event = event_bytes(tier)
        per_file = max(1, file_size // per_event)
        index = 0
        remaining = events
        while remaining > 0:
            count = min(per_file, remaining)
            files.append(FileRecord(
                file_id=f"{dataset.dataset_id}/{tier.value.lower()}/{index:06d}",
                tier=tier,
                dataset_id=dataset.dataset_id,
                size=count * per_event,
                event_count=count,
                created_at=dataset.created_at,
            ))
            remaining -= count
            index += 1
    return files


class Violation(BaseModel):
    """A broken invariant located at a station, link or field."""
    model_config = ConfigDict(frozen=True)

    code: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.code}: {self.subject}"
        return f"{text} ({self.detail})" if self.detail else text


class Topology(BaseModel):
    """Stations, regions and links of one grid."""
    model_config = ConfigDict(frozen=True)

    stations: Tuple[Station, ...] = ()
    regions: Tuple[Region, ...] = ()
    links: Tuple[NetworkLink, ...] = ()

    _by_id: Dict[str, Station] = PrivateAttr(default_factory=dict)
    _regions: Dict[str, Region] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        self._by_id = {s.station_id: s for s in self.stations}
        self._regions = {r.region_id: r for r in self.regions}

    def station(self, station_id: str) -> Station:
        try:
            return self._by_id[station_id]
        except KeyError:
            raise UnknownStation(station_id) from None

    def has_station(self, station_id: str) -> bool:
        return station_id in self._by_id

    def region(self, region_id: str) -> Optional[Region]:
        return self._regions.get(region_id)

    @property
    def cac(self) -> Optional[Station]:
        for station in self.stations:
            if station.kind == StationKind.CAC:
                return station
        return None

    def stations_of_kind(self, kind: StationKind) -> List[Station]:
        return sorted((s for s in self.stations if s.kind == kind), key=lambda s: s.station_id)

    def rac_ids(self) -> List[str]:
        return [s.station_id for s in self.stations_of_kind(StationKind.RAC)]

    def region_members(self, region_id: str) -> List[Station]:
        return sorted((s for s in self.stations if s.region_id == region_id), key=lambda s: s.station_id)

    def link_class(self, endpoint_a: str, endpoint_b: str) -> Optional[LinkClass]:
        """Class implied by the endpoints, or None when no class fits."""
        a = self._by_id.get(endpoint_a)
        b = self._by_id.get(endpoint_b)
        if a is None or b is None:
            return None
        if StationKind.CAC in (a.kind, b.kind):
            # CAC to a RAC, or to a member of the CAC's own region
            cac, other = (a, b) if a.kind == StationKind.CAC else (b, a)
            if other.kind == StationKind.RAC or other.region_id == cac.region_id:
                return LinkClass.CAC_TO_RAC
            return None
        if a.region_id == b.region_id:
            return LinkClass.INTRA_REGION
        if a.kind == StationKind.RAC and b.kind == StationKind.RAC:
            return LinkClass.INTER_RAC
        return None
