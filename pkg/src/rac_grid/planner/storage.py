"""Storage requirements implied by the placement matrix, and their growth."""

import csv
import io
import math
from collections import defaultdict
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from rac_grid.policy.placement import PlacementColumn, PolicyTable, pinned_set, plan_placements
from rac_grid.shared.models import (
    TIERS,
    DataTier,
    Dataset,
    FileRecord,
    Medium,
    StationKind,
    Topology,
    Violation,
    event_bytes,
)
from rac_grid.shared.settings import settings
from rac_grid.shared.units import PB, TB, format_bytes, min_disk_for_pinned, pin_limit

# Published totals for the reference period, quoted beside the computed ones.
PUBLISHED_STORAGE: Dict[Tuple[str, Medium], int] = {
    ("CAC", Medium.TAPE): int(1.5 * PB),
    ("CAC", Medium.DISK): 60 * TB,
    ("RAC", Medium.TAPE): 50 * TB,
    ("RAC", Medium.DISK): 50 * TB,
}


class SiteClass(str, Enum):
    CAC = "CAC"
    RAC = "RAC"
    RAC_TOTAL = "RAC_TOTAL"


_COLUMNS: Dict[Tuple[SiteClass, Medium], PlacementColumn] = {
    (SiteClass.CAC, Medium.TAPE): PlacementColumn.CAC_TAPE,
    (SiteClass.CAC, Medium.DISK): PlacementColumn.CAC_DISK,
    (SiteClass.RAC, Medium.TAPE): PlacementColumn.RAC_TAPE,
    (SiteClass.RAC, Medium.DISK): PlacementColumn.RAC_DISK,
}


class StorageReport(BaseModel):
    """Bytes per (site class, medium), broken down per tier.

    The RAC class is a single RAC's requirement; RAC_TOTAL sums all RACs.
    """
    model_config = ConfigDict(frozen=True)

    n_racs: int = Field(ge=1)
    breakdown: Dict[SiteClass, Dict[Medium, Dict[DataTier, int]]]
    year: int = 0

    def bytes(self, site: SiteClass, medium: Medium, tier: Optional[DataTier] = None) -> int:
        cells = self.breakdown.get(site, {}).get(medium, {})
        if tier is not None:
            return cells.get(tier, 0)
        return sum(cells.values())

    def total(self, site: SiteClass, medium: Medium) -> int:
        return self.bytes(site, medium)

    @property
    def cac_tape(self) -> int:
        return self.total(SiteClass.CAC, Medium.TAPE)

    @property
    def rac_disk(self) -> int:
        return self.total(SiteClass.RAC, Medium.DISK)


def _exact(value: float) -> Fraction:
    return Fraction(repr(value))


def _round_half_up(value: Fraction) -> int:
    return (value.numerator * 2 + value.denominator) // (value.denominator * 2)


def _copies(fraction: float) -> Fraction:
    exact = _exact(fraction)
    return Fraction(math.ceil(exact)) if exact >= 1 else exact


def rac_share(fraction: float, n_racs: int) -> Fraction:
    """Copies of a tier one RAC holds, matching how fractional tiers are partitioned."""
    exact = _copies(fraction)
    if exact >= 1 or exact <= 0:
        return exact
    if exact * n_racs >= 1:
        return Fraction(1, n_racs)
    return exact


def storage_totals(event_counts: Mapping[DataTier, int], policy: PolicyTable, n_racs: int) -> StorageReport:
    """Bytes each site class needs for ``event_counts`` under ``policy``."""
    if n_racs < 1:
        raise ValueError("n_racs must be >= 1")
    breakdown: Dict[SiteClass, Dict[Medium, Dict[DataTier, int]]] = {
        site: {medium: {} for medium in Medium} for site in SiteClass
    }
    for tier in TIERS:
        events = event_counts.get(tier, 0)
        if events < 0:
            raise ValueError(f"event count for {tier.value} must be >= 0")
        logical = events * event_bytes(tier)
        for (site, medium), column in _COLUMNS.items():
            fraction = policy.fraction(tier, column)
            if site == SiteClass.CAC:
                breakdown[site][medium][tier] = _round_half_up(logical * _copies(fraction))
            else:
                share = rac_share(fraction, n_racs)
                breakdown[SiteClass.RAC][medium][tier] = _round_half_up(logical * share)
                breakdown[SiteClass.RAC_TOTAL][medium][tier] = _round_half_up(logical * share * n_racs)
    return StorageReport(n_racs=n_racs, breakdown=breakdown)


def _scale_cells(cells: Mapping[DataTier, int], factor: Fraction, target: Optional[int] = None) -> Dict[DataTier, int]:
    scaled = {tier: _round_half_up(value * factor) for tier, value in cells.items()}
    if target is not None and scaled:
        # residue goes to the largest tier so the breakdown sums to the target exactly
        largest = max(scaled, key=lambda t: (scaled[t], -t.order))
        scaled[largest] += target - sum(scaled.values())
    return scaled


def growth_projection(base: StorageReport, years: int, rate: Optional[int] = None) -> List[StorageReport]:
    """Reports for year 0 (``base``) through ``years``; CAC tape grows by ``rate`` bytes a year.

    Every other cell keeps its ratio to CAC tape.
    """
    if years < 0:
        raise ValueError("years must be >= 0")
    growth = int(settings.growth_rate) if rate is None else int(rate)
    base_tape = base.cac_tape
    reports = [base]
    for year in range(1, years + 1):
        if base_tape == 0:
            reports.append(base.model_copy(update={"year": year}))
            continue
        target = base_tape + growth * year
        factor = Fraction(target, base_tape)
        breakdown = {
            site: {
                medium: _scale_cells(cells, factor,
                                     target if (site, medium) == (SiteClass.CAC, Medium.TAPE) else None)
                for medium, cells in media.items()
            }
            for site, media in base.breakdown.items()
        }
        reports.append(StorageReport(n_racs=base.n_racs, breakdown=breakdown, year=year))
    return reports


def fit_check(report: StorageReport, topology: Topology, policy: PolicyTable) -> List[Violation]:
    """Stations whose disk cannot hold the pinned requirement or whose tape is too small."""
    found: List[Violation] = []
    cac_pinned = sum(
        report.bytes(SiteClass.CAC, Medium.DISK, tier)
        for tier in TIERS
        if policy.fraction(tier, PlacementColumn.CAC_DISK) >= 1.0
    )
    needs: List[Tuple[str, int, int]] = []
    cac = topology.cac
    if cac is not None:
        needs.append((cac.station_id, cac_pinned, report.total(SiteClass.CAC, Medium.TAPE)))
    for station in topology.stations_of_kind(StationKind.RAC):
        needs.append((station.station_id, report.total(SiteClass.RAC, Medium.DISK),
                      report.total(SiteClass.RAC, Medium.TAPE)))

    for station_id, pinned, tape in needs:
        station = topology.station(station_id)
        disk = int(station.disk_capacity)
        if pinned > pin_limit(disk, policy.on_demand_min_fraction):
            required = min_disk_for_pinned(pinned, policy.on_demand_min_fraction)
            found.append(Violation(
                code="pinned overflow", subject=station_id,
                detail=f"pinned {format_bytes(pinned)} needs {format_bytes(required)} disk, has {format_bytes(disk)}",
            ))
        if tape > int(station.tape_capacity):
            found.append(Violation(
                code="tape overflow", subject=station_id,
                detail=f"needs {format_bytes(tape)} tape, has {format_bytes(int(station.tape_capacity))}",
            ))
    return found


def pinned_bytes_by_station(files: Iterable[FileRecord], policy: PolicyTable, topology: Topology) -> Dict[str, int]:
    """Exact pinned bytes per station for a concrete file population."""
    population = list(files)
    plan = plan_placements(population, policy, topology)
    result: Dict[str, int] = {}
    for station in sorted(topology.stations, key=lambda s: s.station_id):
        ids = pinned_set(station, population, policy, plan)
        result[station.station_id] = sum(f.size for f in population if f.file_id in ids)
    return result


def event_totals(datasets: Iterable[Dataset]) -> Dict[DataTier, int]:
    """Events per tier summed over datasets."""
    totals: Dict[DataTier, int] = defaultdict(int)
    for dataset in datasets:
        for tier, count in dataset.event_counts.items():
            totals[tier] += count
    return {tier: totals[tier] for tier in TIERS if tier in totals}


def storage_csv(reports: Iterable[StorageReport]) -> str:
    """Rows of (year, site_class, medium, tier, bytes) plus a TOTAL row per site class and medium."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["year", "site_class", "medium", "tier", "bytes"])
    for report in reports:
        for site in SiteClass:
            for medium in (Medium.TAPE, Medium.DISK):
                for tier in TIERS:
                    writer.writerow([report.year, site.value, medium.value, tier.value,
                                     report.bytes(site, medium, tier)])
                writer.writerow([report.year, site.value, medium.value, "TOTAL", report.total(site, medium)])
    return buffer.getvalue()


def render_storage_table(report: StorageReport) -> str:
    """Text table with one row per tier and CAC/RAC tape and disk columns, plus published totals."""
    cells = [(SiteClass.CAC, Medium.TAPE), (SiteClass.CAC, Medium.DISK),
             (SiteClass.RAC, Medium.TAPE), (SiteClass.RAC, Medium.DISK)]
    header = f"{'Tier':<14}" + "".join(f"{site.value + ' ' + medium.value:>14}" for site, medium in cells)
    rule = "-" * len(header)
    lines = [header, rule]
    for tier in TIERS:
        values = "".join(f"{format_bytes(report.bytes(site, medium, tier)):>14}" for site, medium in cells)
        lines.append(f"{tier.value:<14}{values}")
    lines.append(rule)
    lines.append(f"{'Total':<14}" + "".join(f"{format_bytes(report.total(s, m)):>14}" for s, m in cells))
    lines.append(f"{'Published':<14}"
                 + "".join(f"{format_bytes(PUBLISHED_STORAGE[(s.value, m)]):>14}" for s, m in cells))
    lines.append(f"RAC columns are per RAC; all {report.n_racs} RACs together need "
                 f"{format_bytes(report.total(SiteClass.RAC_TOTAL, Medium.DISK))} disk and "
                 f"{format_bytes(report.total(SiteClass.RAC_TOTAL, Medium.TAPE))} tape.")
    return "\n".join(lines) + "\n"
