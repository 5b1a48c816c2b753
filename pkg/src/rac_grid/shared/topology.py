"""Topology validation, parent-chain queries and network paths."""

from collections import Counter
from typing import Dict, List, Optional, Tuple

import networkx as nx

from rac_grid.shared.errors import NoPath, UnknownStation
from rac_grid.shared.models import (
    LinkClass,
    NetworkLink,
    Station,
    StationKind,
    Topology,
    Violation,
)
from rac_grid.shared.units import GB

# Parent kinds each station kind may attach to.
ALLOWED_PARENTS: Dict[StationKind, Tuple[StationKind, ...]] = {
    StationKind.CAC: (),
    StationKind.RAC: (StationKind.CAC,),
    StationKind.IAC: (StationKind.RAC,),
    StationKind.DAS: (StationKind.IAC, StationKind.RAC),
}


def validate_topology(topology: Topology) -> List[Violation]:
    """Return every violated station, region and link invariant; empty means valid."""
    violations: List[Violation] = []
    violations += _station_violations(topology)
    violations += _region_violations(topology)
    violations += _link_violations(topology)
    violations += _reachability_violations(topology)
    return violations


def _station_violations(topology: Topology) -> List[Violation]:
    found: List[Violation] = []
    ids = Counter(s.station_id for s in topology.stations)
    for station_id, count in sorted(ids.items()):
        if count > 1:
            found.append(Violation(code="duplicate station", subject=station_id))

    cacs = [s.station_id for s in topology.stations if s.kind == StationKind.CAC]
    if not cacs:
        found.append(Violation(code="missing CAC", subject="topology"))
    elif len(cacs) > 1:
        found.append(Violation(code="multiple CAC", subject=",".join(sorted(cacs))))

    for station in topology.stations:
        sid = station.station_id
        if station.disk_capacity < 0:
            found.append(Violation(code="negative disk_capacity", subject=sid))
        if station.tape_capacity < 0:
            found.append(Violation(code="negative tape_capacity", subject=sid))
        if station.cpu_power < 0:
            found.append(Violation(code="negative cpu_power", subject=sid))
        if station.kind == StationKind.DAS and station.tape_capacity != 0:
            found.append(Violation(code="DAS has tape", subject=sid))
        found += _parent_violations(topology, station)

    found += _cycle_violations(topology)
    return found


def _parent_violations(topology: Topology, station: Station) -> List[Violation]:
    sid = station.station_id
    if station.kind == StationKind.CAC:
        if station.parent_id is not None:
            return [Violation(code="CAC has parent", subject=sid, detail=station.parent_id)]
        return []
    if station.parent_id is None:
        return [Violation(code="missing parent", subject=sid)]
    if not topology.has_station(station.parent_id):
        return [Violation(code="unknown parent", subject=sid, detail=station.parent_id)]

    parent = topology.station(station.parent_id)
    if not parent.kind > station.kind:
        return [Violation(code="parent kind not greater", subject=sid,
                          detail=f"{station.kind.value} under {parent.kind.value}")]
    found = []
    if parent.kind not in ALLOWED_PARENTS[station.kind]:
        found.append(Violation(code="parent kind skips level", subject=sid,
                               detail=f"{station.kind.value} under {parent.kind.value}"))
    if station.kind != StationKind.RAC and parent.region_id != station.region_id:
        found.append(Violation(code="parent outside region", subject=sid, detail=parent.station_id))
    return found


def _cycle_violations(topology: Topology) -> List[Violation]:
    graph = nx.DiGraph()
    for station in topology.stations:
        if station.parent_id is not None and topology.has_station(station.parent_id):
            graph.add_edge(station.station_id, station.parent_id)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return []
    members = sorted({edge[0] for edge in cycle})
    return [Violation(code="parent cycle", subject=",".join(members))]


def _region_violations(topology: Topology) -> List[Violation]:
    found: List[Violation] = []
    cac = topology.cac
    region_ids = Counter(r.region_id for r in topology.regions)
    for region_id, count in sorted(region_ids.items()):
        if count > 1:
            found.append(Violation(code="duplicate region", subject=region_id))

    for station in topology.stations:
        if topology.region(station.region_id) is None:
            found.append(Violation(code="unknown region", subject=station.station_id,
                                   detail=station.region_id))

    for region in topology.regions:
        members = topology.region_members(region.region_id)
        racs = [s.station_id for s in members if s.kind == StationKind.RAC]
        central = cac is not None and cac.region_id == region.region_id
        if len(racs) > 1:
            found.append(Violation(code="multiple RAC in region", subject=region.region_id,
                                   detail=",".join(racs)))
        elif not racs and not central:
            found.append(Violation(code="region without RAC", subject=region.region_id))

        hub_ok = (
            topology.has_station(region.rac_id)
            and topology.station(region.rac_id).region_id == region.region_id
            and (topology.station(region.rac_id).kind == StationKind.RAC
                 or (central and region.rac_id == cac.station_id))  # type: ignore[union-attr]
        )
        if not hub_ok:
            found.append(Violation(code="region hub invalid", subject=region.region_id,
                                   detail=region.rac_id))
        if region.members and set(region.members) != {s.station_id for s in members}:
            found.append(Violation(code="region members mismatch", subject=region.region_id))
    return found


def _link_violations(topology: Topology) -> List[Violation]:
    found: List[Violation] = []
    seen = Counter(link.key for link in topology.links)
    for key, count in sorted(seen.items()):
        if count > 1:
            found.append(Violation(code="duplicate link", subject="-".join(key)))

    for link in topology.links:
        subject = f"{link.endpoint_a}-{link.endpoint_b}"
        if link.bandwidth <= 0:
            found.append(Violation(code="non-positive bandwidth", subject=subject))
        if link.latency < 0:
            found.append(Violation(code="negative latency", subject=subject))
        if link.endpoint_a == link.endpoint_b:
            found.append(Violation(code="self link", subject=subject))
            continue
        missing = [e for e in (link.endpoint_a, link.endpoint_b) if not topology.has_station(e)]
        if missing:
            found.append(Violation(code="link unknown endpoint", subject=subject, detail=",".join(missing)))
            continue
        if topology.link_class(link.endpoint_a, link.endpoint_b) is None:
            found.append(Violation(code="link class inconsistent", subject=subject))
    return found


def _reachability_violations(topology: Topology) -> List[Violation]:
    cac = topology.cac
    if cac is None:
        return []
    graph = nx.Graph()
    graph.add_nodes_from(s.station_id for s in topology.stations)
    for link in topology.links:
        if topology.has_station(link.endpoint_a) and topology.has_station(link.endpoint_b):
            graph.add_edge(link.endpoint_a, link.endpoint_b)
    reachable = nx.node_connected_component(graph, cac.station_id)
    return [
        Violation(code="unreachable from CAC", subject=s.station_id)
        for s in sorted(topology.stations, key=lambda s: s.station_id)
        if s.station_id not in reachable
    ]


def ancestors(topology: Topology, station_id: str) -> List[str]:
    """Parent chain of ``station_id`` ending at the CAC; empty for the CAC itself."""
    station = topology.station(station_id)
    chain: List[str] = []
    seen = {station_id}
    while station.parent_id is not None:
        if station.parent_id in seen or not topology.has_station(station.parent_id):
            break
        chain.append(station.parent_id)
        seen.add(station.parent_id)
        station = topology.station(station.parent_id)
    return chain


def regional_hub(topology: Topology, station_id: str) -> Optional[str]:
    """The RAC serving ``station_id``'s region (the CAC for the central region)."""
    region = topology.region(topology.station(station_id).region_id)
    return region.rac_id if region is not None else None


class NetworkGraph:
    """Link graph of a topology with cached deterministic shortest paths.

    Edges are weighted by the time to move 1 GB over the link (latency plus
    streaming time), so faster routes win; ties resolve by insertion order,
    which is sorted by station id.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self.graph = nx.Graph()
        self.graph.add_nodes_from(sorted(s.station_id for s in topology.stations))
        for link in sorted(topology.links, key=lambda l: l.key):
            link_class = topology.link_class(link.endpoint_a, link.endpoint_b)
            self.graph.add_edge(
                link.endpoint_a,
                link.endpoint_b,
                link=link,
                link_class=link_class,
                cost=link.latency + GB / int(link.bandwidth),
            )
        self._paths: Dict[Tuple[str, str], List[NetworkLink]] = {}

    def path(self, source: str, dest: str) -> List[NetworkLink]:
        """Links traversed from ``source`` to ``dest``; empty when they coincide."""
        key = (source, dest)
        if key in self._paths:
            return self._paths[key]
        for station_id in (source, dest):
            if station_id not in self.graph:
                raise UnknownStation(station_id)
        if source == dest:
            links: List[NetworkLink] = []
        else:
            try:
                nodes = nx.shortest_path(self.graph, source, dest, weight="cost")
            except nx.NetworkXNoPath:
                raise NoPath(source, dest) from None
            links = [self.graph.edges[a, b]["link"] for a, b in zip(nodes, nodes[1:])]
        self._paths[key] = links
        return links

    def link_class(self, link: NetworkLink) -> LinkClass:
        return self.graph.edges[link.endpoint_a, link.endpoint_b]["link_class"]
