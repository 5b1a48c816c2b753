"""Replica catalog with hierarchical source resolution."""

from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Set, Tuple

from loguru import logger

from rac_grid.shared.errors import (
    DuplicateFile,
    NoReplica,
    PinnedRemovalRefused,
    ScenarioParseError,
    UnknownFile,
    UnknownReplica,
)
from rac_grid.shared.models import FileRecord, Medium, StationKind, Topology
from rac_grid.shared.topology import ancestors

ReplicaKey = Tuple[str, str, Medium, int]


class Replica(NamedTuple):
    file_id: str
    station_id: str
    medium: Medium
    pinned: bool = False
    copy_index: int = 0

    @property
    def key(self) -> ReplicaKey:
        return (self.file_id, self.station_id, self.medium, self.copy_index)


class SourceChoice(NamedTuple):
    station_id: str
    medium: Medium
    rank: int


# station_id -> medium -> file_id -> number of copies held there
ReverseIndex = Dict[str, Dict[Medium, Dict[str, int]]]


class ReplicaCatalog:
    """File registry plus forward (file -> replicas) and reverse (station -> files) indices.

    Mutations are single-writer; readers may query freely between them.
    """

    def __init__(self) -> None:
        self._files: Dict[str, FileRecord] = {}
        self._replicas: Dict[str, Dict[ReplicaKey, Replica]] = {}
        self._reverse: ReverseIndex = defaultdict(lambda: {Medium.DISK: {}, Medium.TAPE: {}})

    def __len__(self) -> int:
        return len(self._files)

    def __contains__(self, file_id: str) -> bool:
        return file_id in self._files

    def register_file(self, file: FileRecord) -> "ReplicaCatalog":
        if file.file_id in self._files:
            raise DuplicateFile(file.file_id)
        self._files[file.file_id] = file
        self._replicas[file.file_id] = {}
        return self

    def file(self, file_id: str) -> FileRecord:
        try:
            return self._files[file_id]
        except KeyError:
            raise UnknownFile(file_id) from None

    def files(self) -> Iterator[FileRecord]:
        return iter(self._files.values())

    def add_replica(self, replica: Replica) -> "ReplicaCatalog":
        if replica.file_id not in self._files:
            raise UnknownFile(replica.file_id)
        if replica.pinned and replica.medium != Medium.DISK:
            raise ValueError(f"only disk replicas can be pinned: {replica}")
        existing = self._replicas[replica.file_id]
        if replica.key not in existing:
            counts = self._reverse[replica.station_id][replica.medium]
            counts[replica.file_id] = counts.get(replica.file_id, 0) + 1
        existing[replica.key] = replica
        return self

    def remove_replica(self, replica: Replica, unpin: bool = False) -> "ReplicaCatalog":
        if replica.file_id not in self._files:
            raise UnknownFile(replica.file_id)
        existing = self._replicas[replica.file_id]
        stored = existing.get(replica.key)
        if stored is None:
            raise UnknownReplica(f"no replica {replica.key}")
        if stored.pinned and not unpin:
            raise PinnedRemovalRefused(f"replica {replica.key} is pinned")
        del existing[replica.key]
        counts = self._reverse[replica.station_id][replica.medium]
        if counts[replica.file_id] <= 1:
            del counts[replica.file_id]
        else:
            counts[replica.file_id] -= 1
        return self

    def locate(self, file_id: str) -> FrozenSet[Replica]:
        if file_id not in self._files:
            raise UnknownFile(file_id)
        return frozenset(self._replicas[file_id].values())

    def replica_at(self, file_id: str, station_id: str, medium: Medium, copy_index: int = 0) -> Optional[Replica]:
        return self._replicas.get(file_id, {}).get((file_id, station_id, medium, copy_index))

    def replicas_at(self, station_id: str, medium: Medium) -> Set[str]:
        station = self._reverse.get(station_id)
        return set(station[medium]) if station else set()

    def count_at(self, station_id: str, medium: Medium) -> int:
        """Number of distinct files with a ``medium`` replica at ``station_id``."""
        station = self._reverse.get(station_id)
        return len(station[medium]) if station else 0

    def reverse_index(self) -> Dict[str, Dict[Medium, Dict[str, int]]]:
        """Maintained reverse index with empty entries dropped."""
        return _compact(self._reverse)

    def rebuild_reverse_index(self) -> Dict[str, Dict[Medium, Dict[str, int]]]:
        """Reverse index recomputed from the forward index."""
        rebuilt: ReverseIndex = defaultdict(lambda: {Medium.DISK: {}, Medium.TAPE: {}})
        for replicas in self._replicas.values():
            for replica in replicas.values():
                counts = rebuilt[replica.station_id][replica.medium]
                counts[replica.file_id] = counts.get(replica.file_id, 0) + 1
        return _compact(rebuilt)

    def resolve_source(self, topology: Topology, file_id: str, requester: str,
                       prefer_inter_rac: bool = False) -> SourceChoice:
        """Best replica for ``requester`` by the locality rank table.

        1 requester disk, 2 in-region ancestor disk (IAC then RAC), 3 CAC disk,
        4 other disk (foreign RACs first), 5 own-region RAC tape, 6 CAC tape,
        7 any tape. Ties go to the smaller station id. ``prefer_inter_rac``
        swaps ranks 3 and 4.
        """
        replicas = self.locate(file_id)
        if not replicas:
            raise NoReplica(file_id)
        disks = sorted({r.station_id for r in replicas if r.medium == Medium.DISK})
        tapes = sorted({r.station_id for r in replicas if r.medium == Medium.TAPE})

        station = topology.station(requester)
        region_id = station.region_id
        cac = topology.cac
        cac_id = cac.station_id if cac else None

        if requester in disks:
            return SourceChoice(requester, Medium.DISK, 1)
        for ancestor in ancestors(topology, requester):
            parent = topology.station(ancestor)
            if parent.kind == StationKind.CAC or parent.region_id != region_id:
                break
            if ancestor in disks:
                return SourceChoice(ancestor, Medium.DISK, 2)

        central = SourceChoice(cac_id, Medium.DISK, 3) if cac_id in disks else None
        others = [s for s in disks if s not in (requester, cac_id)]
        others.sort(key=lambda s: (topology.station(s).kind != StationKind.RAC, s))
        remote = SourceChoice(others[0], Medium.DISK, 4) if others else None
        ordered = (remote, central) if prefer_inter_rac else (central, remote)
        for choice in ordered:
            if choice is not None:
                return choice

        region = topology.region(region_id)
        hub = region.rac_id if region is not None else None
        if hub is not None and hub in tapes and topology.station(hub).kind == StationKind.RAC:
            return SourceChoice(hub, Medium.TAPE, 5)
        if cac_id in tapes:
            return SourceChoice(cac_id, Medium.TAPE, 6)
        if tapes:
            return SourceChoice(tapes[0], Medium.TAPE, 7)
        raise NoReplica(file_id)

    def dump(self) -> str:
        """One replica per line: file_id, station_id, medium, pinned (1/0), copy_index; TAB separated."""
        rows = sorted(
            (r for replicas in self._replicas.values() for r in replicas.values()),
            key=lambda r: (r.file_id, r.station_id, r.medium.value, r.copy_index),
        )
        return "".join(
            f"{r.file_id}\t{r.station_id}\t{r.medium.value}\t{int(r.pinned)}\t{r.copy_index}\n"
            for r in rows
        )

    @classmethod
    def load(cls, text: str, files: Iterable[FileRecord]) -> "ReplicaCatalog":
        """Rebuild a catalog from ``dump`` output; every referenced file must be in ``files``."""
        catalog = cls()
        for record in files:
            catalog.register_file(record)
        for number, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ScenarioParseError(f"expected 5 TAB-separated fields, got {len(fields)}",
                                         line=number, column=1)
            file_id, station_id, medium, pinned, copy_index = fields
            try:
                replica = Replica(file_id, station_id, Medium(medium), pinned == "1", int(copy_index))
            except ValueError as exc:
                raise ScenarioParseError(str(exc), line=number, column=1) from None
            catalog.add_replica(replica)
        logger.debug(f"📥 Loaded catalog with {len(catalog)} files")
        return catalog


def _compact(index: Mapping[str, Mapping[Medium, Mapping[str, int]]]) -> Dict[str, Dict[Medium, Dict[str, int]]]:
    compact: Dict[str, Dict[Medium, Dict[str, int]]] = {}
    for station_id, media in index.items():
        kept = {medium: dict(counts) for medium, counts in media.items() if counts}
        if kept:
            compact[station_id] = kept
    return compact


def files_by_station(catalog: ReplicaCatalog, medium: Medium) -> Dict[str, List[str]]:
    """Sorted file ids per station for one medium."""
    index = catalog.reverse_index()
    return {station: sorted(media.get(medium, {})) for station, media in sorted(index.items())}
