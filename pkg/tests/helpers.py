"""Builders shared by the test modules."""

from typing import Dict, Iterable, List, Optional, Sequence

from rac_grid.policy.placement import PolicyTable, default_policy
from rac_grid.shared.models import (
    DataTier,
    Dataset,
    FileRecord,
    NetworkLink,
    Region,
    Station,
    StationKind,
    Topology,
)
from rac_grid.shared.units import GB, MB, TB
from rac_grid.sim.scenario import RegionWorkload, Scenario, SimulationConfig, WorkloadSpec


def station(station_id: str, kind: StationKind, region_id: str, parent_id: Optional[str] = None,
            disk: int = 0, tape: int = 0, cpu: float = 0.0) -> Station:
    return Station(station_id=station_id, kind=kind, region_id=region_id, parent_id=parent_id,
                   disk_capacity=disk, tape_capacity=tape, cpu_power=cpu)


def link(a: str, b: str, bandwidth: int = 100 * MB, latency: float = 0.0) -> NetworkLink:
    return NetworkLink(endpoint_a=a, endpoint_b=b, bandwidth=bandwidth, latency=latency)


def star_topology(n_racs: int = 2, rac_disk: int = 10 * TB, rac_tape: int = 10 * TB, rac_cpu: float = 4,
                  cac_disk: int = 50 * TB, cac_tape: int = 500 * TB, cac_cpu: float = 0,
                  bandwidth: int = 100 * MB, latency: float = 0.0,
                  extra: Sequence[Station] = (), extra_links: Sequence[NetworkLink] = ()) -> Topology:
    """A CAC ("cac", region "central") with RACs rac-1..rac-n, one region each."""
    stations: List[Station] = [station("cac", StationKind.CAC, "central", disk=cac_disk, tape=cac_tape,
                                       cpu=cac_cpu)]
    regions = [Region(region_id="central", rac_id="cac")]
    links: List[NetworkLink] = []
    for index in range(1, n_racs + 1):
        rac_id = f"rac-{index}"
        stations.append(station(rac_id, StationKind.RAC, f"r{index}", "cac", disk=rac_disk, tape=rac_tape,
                                cpu=rac_cpu))
        regions.append(Region(region_id=f"r{index}", rac_id=rac_id))
        links.append(link("cac", rac_id, bandwidth, latency))
    stations.extend(extra)
    links.extend(extra_links)
    return Topology(stations=tuple(stations), regions=tuple(regions), links=tuple(links))


def files_of(tier: DataTier, count: int, size: int = GB, dataset_id: str = "ds") -> List[FileRecord]:
    return [
        FileRecord(file_id=f"{dataset_id}/{tier.value.lower()}/{index:06d}", tier=tier, dataset_id=dataset_id,
                   size=size, event_count=1)
        for index in range(count)
    ]


def dataset(dataset_id: str, counts: Dict[DataTier, int]) -> Dataset:
    return Dataset(dataset_id=dataset_id, event_counts=counts)


def scenario(topology: Topology, datasets: Iterable[Dataset] = (), rates: Optional[Dict[str, float]] = None,
             duration: float = 1000.0, seed: int = 1, file_size: int = GB, policy: Optional[PolicyTable] = None,
             check_invariants: bool = True, **workload) -> Scenario:
    regions = [RegionWorkload(region_id=r, arrival_rate=rate) for r, rate in sorted((rates or {}).items())]
    return Scenario(
        name="test",
        topology=topology,
        policy=policy or default_policy(),
        datasets=tuple(datasets),
        workload=WorkloadSpec(regions=regions, **workload),
        simulation=SimulationConfig(duration=duration, seed=seed, file_size=file_size,
                                    check_invariants=check_invariants),
    )
