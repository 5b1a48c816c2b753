from collections import Counter
from itertools import takewhile

import numpy as np
import pytest

from rac_grid.catalog.replicas import Replica, ReplicaCatalog, files_by_station
from rac_grid.shared.errors import (
    DuplicateFile,
    NoReplica,
    PinnedRemovalRefused,
    ScenarioParseError,
    UnknownFile,
    UnknownReplica,
)
from rac_grid.shared.models import DataTier, Medium, StationKind
from rac_grid.shared.topology import ancestors

from helpers import files_of, link, star_topology, station

DISK, TAPE = Medium.DISK, Medium.TAPE


@pytest.fixture
def topology():
    return star_topology(2, extra=[
        station("iac-1", StationKind.IAC, "r1", "rac-1"),
        station("das-1", StationKind.DAS, "r1", "iac-1"),
        station("aaa", StationKind.IAC, "r2", "rac-2"),
    ], extra_links=[link("rac-1", "iac-1"), link("iac-1", "das-1"), link("rac-2", "aaa")])


def catalog_with(*replicas):
    catalog = ReplicaCatalog()
    catalog.register_file(files_of(DataTier.DST, 1)[0])
    for station_id, medium in replicas:
        catalog.add_replica(Replica("ds/dst/000000", station_id, medium))
    return catalog


FILE = "ds/dst/000000"


@pytest.mark.parametrize("replicas,requester,expected", [
    ([("das-1", DISK), ("cac", DISK)], "das-1", ("das-1", DISK, 1)),
    ([("iac-1", DISK), ("rac-1", DISK)], "das-1", ("iac-1", DISK, 2)),
    ([("rac-1", DISK), ("cac", DISK)], "das-1", ("rac-1", DISK, 2)),
    ([("cac", DISK), ("rac-2", DISK)], "rac-1", ("cac", DISK, 3)),
    ([("rac-2", DISK), ("aaa", DISK), ("cac", TAPE)], "rac-1", ("rac-2", DISK, 4)),
    ([("aaa", DISK)], "rac-1", ("aaa", DISK, 4)),
    ([("rac-1", TAPE), ("cac", TAPE)], "das-1", ("rac-1", TAPE, 5)),
    ([("cac", TAPE), ("rac-2", TAPE)], "das-1", ("cac", TAPE, 6)),
    ([("rac-2", TAPE)], "das-1", ("rac-2", TAPE, 7)),
])
def test_resolve_source_rank_table(topology, replicas, requester, expected):
    choice = catalog_with(*replicas).resolve_source(topology, FILE, requester)
    assert tuple(choice) == expected


def test_prefer_inter_rac_swaps_central_and_remote(topology):
    catalog = catalog_with(("cac", DISK), ("rac-2", DISK))
    assert catalog.resolve_source(topology, FILE, "rac-1", prefer_inter_rac=True).station_id == "rac-2"


def test_no_replica(topology):
    with pytest.raises(NoReplica):
        catalog_with().resolve_source(topology, FILE, "rac-1")


def test_register_and_locate():
    catalog = ReplicaCatalog()
    record = files_of(DataTier.TMB, 1)[0]
    catalog.register_file(record)
    with pytest.raises(DuplicateFile):
        catalog.register_file(record)
    with pytest.raises(UnknownFile):
        catalog.locate("missing")
    with pytest.raises(UnknownFile):
        catalog.add_replica(Replica("missing", "cac", TAPE))
    assert catalog.locate(record.file_id) == frozenset()


def test_pinned_replicas_need_explicit_unpin():
    catalog = catalog_with()
    pinned = Replica(FILE, "rac-1", DISK, pinned=True)
    catalog.add_replica(pinned)
    with pytest.raises(PinnedRemovalRefused):
        catalog.remove_replica(pinned)
    catalog.remove_replica(pinned, unpin=True)
    assert catalog.locate(FILE) == frozenset()
    with pytest.raises(UnknownReplica):
        catalog.remove_replica(pinned, unpin=True)
    with pytest.raises(ValueError):
        catalog.add_replica(Replica(FILE, "cac", TAPE, pinned=True))


def test_reverse_index_tracks_mutations():
    catalog = ReplicaCatalog()
    for record in files_of(DataTier.TMB, 5):
        catalog.register_file(record)
        catalog.add_replica(Replica(record.file_id, "cac", TAPE, copy_index=0))
        catalog.add_replica(Replica(record.file_id, "cac", TAPE, copy_index=1))
        catalog.add_replica(Replica(record.file_id, "rac-1", DISK, pinned=True))
    catalog.remove_replica(Replica("ds/tmb/000002", "cac", TAPE, copy_index=1))
    catalog.remove_replica(Replica("ds/tmb/000003", "rac-1", DISK, pinned=True), unpin=True)

    assert catalog.reverse_index() == catalog.rebuild_reverse_index()
    assert catalog.reverse_index()["cac"][TAPE]["ds/tmb/000002"] == 1
    assert catalog.replicas_at("rac-1", DISK) == {f"ds/tmb/00000{i}" for i in (0, 1, 2, 4)}
    assert files_by_station(catalog, DISK) == {
        "cac": [],
        "rac-1": ["ds/tmb/000000", "ds/tmb/000001", "ds/tmb/000002", "ds/tmb/000004"],
    }


def test_dump_is_sorted_and_loads_back():
    catalog = ReplicaCatalog()
    records = files_of(DataTier.TMB, 2)
    for record in reversed(records):
        catalog.register_file(record)
        catalog.add_replica(Replica(record.file_id, "rac-1", DISK, pinned=True))
        catalog.add_replica(Replica(record.file_id, "cac", TAPE))
    text = catalog.dump()
    assert text.splitlines() == [
        "ds/tmb/000000\tcac\ttape\t0\t0",
        "ds/tmb/000000\trac-1\tdisk\t1\t0",
        "ds/tmb/000001\tcac\ttape\t0\t0",
        "ds/tmb/000001\trac-1\tdisk\t1\t0",
    ]
    assert ReplicaCatalog.load(text, records).dump() == text


def test_load_reports_line_numbers():
    records = files_of(DataTier.TMB, 1)
    with pytest.raises(ScenarioParseError) as caught:
        ReplicaCatalog.load("ds/tmb/000000\tcac\ttape\t0\t0\nbroken line\n", records)
    assert caught.value.line == 2
    with pytest.raises(ScenarioParseError):
        ReplicaCatalog.load("ds/tmb/000000\tcac\tfloppy\t0\t0\n", records)


def test_indices_agree_under_random_mutations():
    rng = np.random.default_rng(31)
    records = files_of(DataTier.TMB, 20)
    stations = ["cac", "rac-1", "rac-2", "iac-1"]
    catalog = ReplicaCatalog()
    for record in records:
        catalog.register_file(record)
    held = {}

    for step in range(10_000):
        if held and rng.random() < 0.4:
            key = sorted(held)[int(rng.integers(len(held)))]
            catalog.remove_replica(held.pop(key), unpin=True)
        else:
            medium = TAPE if rng.random() < 0.5 else DISK
            replica = Replica(
                records[int(rng.integers(len(records)))].file_id,
                stations[int(rng.integers(len(stations)))],
                medium,
                pinned=medium == DISK and bool(rng.random() < 0.3),
                copy_index=int(rng.integers(3)) if medium == TAPE else 0,
            )
            catalog.add_replica(replica)
            held[replica.key] = replica

        if step % 500 == 0:
            assert catalog.reverse_index() == catalog.rebuild_reverse_index()

    expected = {}
    for file_id, station_id, medium, _ in held:
        counts = expected.setdefault(station_id, {}).setdefault(medium, Counter())
        counts[file_id] += 1
    assert catalog.reverse_index() == {s: {m: dict(c) for m, c in media.items()} for s, media in expected.items()}
    for record in records:
        assert catalog.locate(record.file_id) == frozenset(r for r in held.values() if r.file_id == record.file_id)
    for station_id in stations:
        assert catalog.count_at(station_id, DISK) == len(catalog.replicas_at(station_id, DISK))


def brute_force_source(topology, replicas, requester, prefer_inter_rac):
    """Smallest (order, tie) over every replica, straight from the rank table."""
    me = topology.station(requester)
    hub = topology.region(me.region_id).rac_id
    local = list(takewhile(
        lambda s: topology.station(s).kind != StationKind.CAC and topology.station(s).region_id == me.region_id,
        ancestors(topology, requester),
    ))
    central, remote = (4, 3) if prefer_inter_rac else (3, 4)
    ranked = []
    for station_id, medium in replicas:
        there = topology.station(station_id)
        if medium == DISK:
            if station_id == requester:
                ranked.append(((1, 0, ""), (station_id, medium, 1)))
            elif station_id in local:
                ranked.append(((2, local.index(station_id), ""), (station_id, medium, 2)))
            elif there.kind == StationKind.CAC:
                ranked.append(((central, 0, ""), (station_id, medium, 3)))
            else:
                ranked.append(((remote, int(there.kind != StationKind.RAC), station_id), (station_id, medium, 4)))
        elif station_id == hub and there.kind == StationKind.RAC:
            ranked.append(((5, 0, ""), (station_id, medium, 5)))
        elif there.kind == StationKind.CAC:
            ranked.append(((6, 0, ""), (station_id, medium, 6)))
        else:
            ranked.append(((7, 0, station_id), (station_id, medium, 7)))
    return min(ranked)[1] if ranked else None


@pytest.mark.parametrize("prefer_inter_rac", [False, True])
def test_resolve_source_matches_rank_table_over_every_subset(topology, prefer_inter_rac):
    candidates = [(s, DISK) for s in ("cac", "rac-1", "rac-2", "iac-1", "das-1", "aaa")]
    candidates += [(s, TAPE) for s in ("cac", "rac-1", "rac-2", "iac-1")]
    requesters = sorted(s.station_id for s in topology.stations)

    for mask in range(1 << len(candidates)):
        subset = [c for bit, c in enumerate(candidates) if mask >> bit & 1]
        catalog = catalog_with(*subset)
        for requester in requesters:
            expected = brute_force_source(topology, subset, requester, prefer_inter_rac)
            if expected is None:
                with pytest.raises(NoReplica):
                    catalog.resolve_source(topology, FILE, requester, prefer_inter_rac)
            else:
                assert tuple(catalog.resolve_source(topology, FILE, requester, prefer_inter_rac)) == expected
