"""Simulation metrics and their CSV renderings."""

import csv
import io
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from rac_grid.shared.models import DataTier, LinkClass

PERCENTILES = (("p50", 50.0), ("p90", 90.0), ("p99", 99.0), ("max", 100.0))


class StationMetrics(BaseModel):
    station_id: str
    kind: str
    region_id: str
    disk_hits: int = 0
    misses: int = 0
    tape_stages: int = 0
    evictions: int = 0
    admissions: int = 0
    bypassed: int = 0
    tier_hits: Dict[DataTier, int] = Field(default_factory=dict)
    tier_misses: Dict[DataTier, int] = Field(default_factory=dict)
    disk_capacity: int = 0
    pinned_bytes: int = 0
    on_demand_bytes: int = 0
    tape_occupancy: int = 0

    @property
    def requests(self) -> int:
        return self.disk_hits + self.misses

    @property
    def hit_rate(self) -> Optional[float]:
        return self.disk_hits / self.requests if self.requests else None

    def tier_requests(self, tier: DataTier) -> int:
        return self.tier_hits.get(tier, 0) + self.tier_misses.get(tier, 0)

    def tier_hit_rate(self, tier: DataTier) -> Optional[float]:
        total = self.tier_requests(tier)
        return self.tier_hits.get(tier, 0) / total if total else None


class LinkClassMetrics(BaseModel):
    link_class: LinkClass
    bytes: int = 0
    transfers: int = 0


class JobTimes(BaseModel):
    job_id: str
    kind: str
    region_id: str
    station_id: str
    dataset_id: str
    tier: DataTier
    submitted_at: float
    files: int = 0
    misses: int = 0
    wait: float = 0.0
    transfer: float = 0.0
    db: float = 0.0
    compute: float = 0.0
    total: float = 0.0


class DanMetrics(BaseModel):
    region_id: str
    hits: int = 0
    misses: int = 0


class Metrics(BaseModel):
    """Report of one simulation run; equal inputs give equal reports."""

    scenario: str = ""
    seed: int = 0
    files: int = 0
    workload_start: float = 0.0
    end_time: float = 0.0
    events_processed: int = 0
    stations: List[StationMetrics] = Field(default_factory=list)
    link_classes: List[LinkClassMetrics] = Field(default_factory=list)
    link_bytes: Dict[str, int] = Field(default_factory=dict)
    transferred_bytes: int = 0
    hop_bytes: int = 0
    transfers_completed: int = 0
    production_pinned_bytes: Dict[str, int] = Field(default_factory=dict)
    jobs: List[JobTimes] = Field(default_factory=list)
    jobs_submitted: int = 0
    jobs_completed: int = 0
    jobs_skipped: int = 0
    dan: List[DanMetrics] = Field(default_factory=list)

    @property
    def dan_hits(self) -> int:
        return sum(d.hits for d in self.dan)

    @property
    def dan_misses(self) -> int:
        return sum(d.misses for d in self.dan)

    def station(self, station_id: str) -> StationMetrics:
        for row in self.stations:
            if row.station_id == station_id:
                return row
        raise KeyError(station_id)

    def class_bytes(self, link_class: LinkClass) -> int:
        for row in self.link_classes:
            if row.link_class == link_class:
                return row.bytes
        return 0

    def job_percentiles(self) -> Dict[str, Dict[str, float]]:
        """Percentile table of job wait/transfer/db/compute/total times."""
        columns = ("wait", "transfer", "db", "compute", "total")
        table: Dict[str, Dict[str, float]] = {}
        for label, q in PERCENTILES:
            row = {}
            for column in columns:
                values = np.array([getattr(job, column) for job in self.jobs], dtype=float)
                row[column] = float(np.percentile(values, q)) if values.size else 0.0
            table[label] = row
        return table


def _rate(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def _render(header: List[str], rows: List[List[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def stations_csv(metrics: Metrics) -> str:
    header = ["station_id", "kind", "region_id", "requests", "disk_hits", "misses", "hit_rate",
              "tmb_requests", "tmb_hits", "tmb_hit_rate", "tape_stages", "evictions", "admissions",
              "bypassed", "disk_capacity", "pinned_bytes", "on_demand_bytes", "tape_occupancy"]
    rows = [
        [s.station_id, s.kind, s.region_id, s.requests, s.disk_hits, s.misses, _rate(s.hit_rate),
         s.tier_requests(DataTier.TMB), s.tier_hits.get(DataTier.TMB, 0), _rate(s.tier_hit_rate(DataTier.TMB)),
         s.tape_stages, s.evictions, s.admissions, s.bypassed, s.disk_capacity, s.pinned_bytes,
         s.on_demand_bytes, s.tape_occupancy]
        for s in metrics.stations
    ]
    return _render(header, rows)


def links_csv(metrics: Metrics) -> str:
    rows: List[List[object]] = [[row.link_class.value, row.bytes, row.transfers] for row in metrics.link_classes]
    # a transfer crossing two classes counts once in TOTAL
    rows.append(["TOTAL", sum(r.bytes for r in metrics.link_classes), metrics.transfers_completed])
    return _render(["link_class", "bytes", "transfers"], rows)


def jobs_csv(metrics: Metrics) -> str:
    table = metrics.job_percentiles()
    columns = ["wait", "transfer", "db", "compute", "total"]
    rows = [[label, len(metrics.jobs)] + [f"{table[label][c]:.6f}" for c in columns] for label, _ in PERCENTILES]
    return _render(["percentile", "jobs"] + columns, rows)
