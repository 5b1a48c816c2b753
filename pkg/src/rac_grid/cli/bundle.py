"""Report bundle: CSVs, summary text, catalog dump and the structured report."""

from enum import Enum
from pathlib import Path
from typing import Dict, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from rac_grid.catalog.replicas import ReplicaCatalog
from rac_grid.planner.capacity import CapacityPlan, render_plan
from rac_grid.planner.storage import storage_csv
from rac_grid.shared.models import DataTier, StationKind
from rac_grid.shared.units import format_bytes
from rac_grid.sim.metrics import Metrics, jobs_csv, links_csv, stations_csv

STATIONS_CSV = "metrics_stations.csv"
LINKS_CSV = "metrics_links.csv"
JOBS_CSV = "metrics_jobs.csv"
STORAGE_CSV = "storage_report.csv"
SUMMARY = "summary.txt"
CATALOG_DUMP = "catalog.dump"
REPORT_JSON = "report.json"


class ReportKind(str, Enum):
    PLAN = "plan"
    SIMULATION = "simulation"


class Report(BaseModel):
    """Machine-readable content of a bundle; summary.txt is rendered from it."""
    model_config = ConfigDict(frozen=True)

    kind: ReportKind
    scenario: str
    plan: Optional[CapacityPlan] = None
    metrics: Optional[Metrics] = None
    planned_pinned_bytes: Dict[str, int] = {}


def _rate(hits: int, total: int) -> str:
    return f"{hits / total:.4f}" if total else "n/a"


def render_simulation(metrics: Metrics, planned_pinned: Dict[str, int]) -> str:
    lines = [
        f"Simulation of {metrics.scenario} (seed {metrics.seed})",
        f"  files produced:   {metrics.files}",
        f"  workload window:  {metrics.workload_start:.3f}s to {metrics.end_time:.3f}s",
        f"  events processed: {metrics.events_processed}",
        f"  jobs:             {metrics.jobs_submitted} submitted, {metrics.jobs_completed} completed, "
        f"{metrics.jobs_skipped} skipped",
        "",
        "Stations",
    ]
    for row in metrics.stations:
        tmb = row.tier_requests(DataTier.TMB)
        lines.append(
            f"  {row.station_id:<12} {row.kind:<4} requests {row.requests:>8}  hit rate "
            f"{_rate(row.disk_hits, row.requests):>7}  TMB hit rate {_rate(row.tier_hits.get(DataTier.TMB, 0), tmb):>7}"
            f"  tape stages {row.tape_stages:>6}  evictions {row.evictions:>6}"
        )
    lines += ["", "Pinned at end of production (simulated / planned)"]
    for row in metrics.stations:
        if row.kind in (StationKind.CAC.value, StationKind.RAC.value):
            produced = metrics.production_pinned_bytes.get(row.station_id, 0)
            planned = planned_pinned.get(row.station_id)
            expected = "n/a" if planned is None else format_bytes(planned)
            lines.append(f"  {row.station_id:<12} {format_bytes(produced):>12} / {expected:>12}")
    lines += ["", "Links"]
    for row in metrics.link_classes:
        lines.append(f"  {row.link_class.value:<13} {format_bytes(row.bytes):>12} in {row.transfers} transfers")
    lines.append(f"  {metrics.transfers_completed} transfers carried {format_bytes(metrics.transferred_bytes)}")
    lines += ["", "Job times (s)"]
    table = metrics.job_percentiles()
    lines.append(f"  {'':<5}{'wait':>12}{'transfer':>12}{'db':>12}{'compute':>12}{'total':>12}")
    for label, row in table.items():
        lines.append(f"  {label:<5}" + "".join(f"{row[c]:>12.3f}" for c in ("wait", "transfer", "db", "compute", "total")))
    lines += ["", f"DAN proxies: {metrics.dan_hits} hits, {metrics.dan_misses} misses"]
    return "\n".join(lines) + "\n"


def render_summary(report: Report) -> str:
    if report.kind == ReportKind.PLAN and report.plan is not None:
        return render_plan(report.plan)
    if report.metrics is not None:
        return render_simulation(report.metrics, report.planned_pinned_bytes)
    return f"Empty {report.kind.value} report for {report.scenario}\n"


def _write(directory: Path, name: str, text: str) -> None:
    (directory / name).write_text(text, encoding="utf-8", newline="\n")


def write_bundle(directory: Path, report: Report, catalog: Optional[ReplicaCatalog] = None) -> Path:
    """Write every file the report supports into ``directory``; same input, same bytes."""
    directory.mkdir(parents=True, exist_ok=True)
    if report.metrics is not None:
        _write(directory, STATIONS_CSV, stations_csv(report.metrics))
        _write(directory, LINKS_CSV, links_csv(report.metrics))
        _write(directory, JOBS_CSV, jobs_csv(report.metrics))
    if report.plan is not None:
        _write(directory, STORAGE_CSV, storage_csv(report.plan.reports))
    if catalog is not None:
        _write(directory, CATALOG_DUMP, catalog.dump())
    _write(directory, SUMMARY, render_summary(report))
    _write(directory, REPORT_JSON, report.model_dump_json(indent=2) + "\n")
    logger.info(f"✅ Wrote {report.kind.value} bundle to {directory}")
    return directory


def read_report(directory: Path) -> Report:
    return Report.model_validate_json((directory / REPORT_JSON).read_text(encoding="utf-8"))
