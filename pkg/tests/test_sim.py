import csv
import io

import numpy as np
import pytest

from rac_grid.catalog.replicas import Replica
from rac_grid.cli.scenario_file import load_scenario
from rac_grid.planner.storage import pinned_bytes_by_station
from rac_grid.policy.placement import PlacementColumn, PolicyOverrides, apply_overrides, default_policy
from rac_grid.shared.errors import InvariantViolation, NoCpuInRegion, PinnedOverflow, ValidationFailed
from rac_grid.shared.models import DataTier, LinkClass, Medium, StationKind, generate_files
from rac_grid.shared.units import GB, MB
from rac_grid.sim.grid import GridSimulation, TransferPurpose, simulate
from rac_grid.sim.metrics import links_csv
from rac_grid.sim.scenario import Job, JobKind

from helpers import dataset, files_of, link, scenario, star_topology, station

TMB_FILE_EVENTS = 100_000  # one 1 GB file at 10 kB per event
DST_30_FILES = 6_666 * 30  # thirty full DST files at 1 GB nominal size


def regional_topology(iac_disk=5 * GB, iac_cpu=8, **kwargs):
    return star_topology(2, extra=[station("iac-1", StationKind.IAC, "r1", "rac-1", disk=iac_disk, cpu=iac_cpu)],
                         extra_links=[link("rac-1", "iac-1")], **kwargs)


def test_transfers_queue_fifo_on_a_link():
    sim = GridSimulation(scenario(star_topology(1, bandwidth=100 * MB)))
    first, second = files_of(DataTier.TMB, 2)
    assert sim.start_transfer(first, "cac", "rac-1", TransferPurpose.FETCH) == pytest.approx(10.0)
    assert sim.start_transfer(second, "cac", "rac-1", TransferPurpose.FETCH) == pytest.approx(20.0)
    assert sim.start_transfer(first, "rac-1", "rac-1", TransferPurpose.FETCH) == 0.0


def test_link_latency_is_paid_per_transfer():
    sim = GridSimulation(scenario(star_topology(1, bandwidth=100 * MB, latency=0.5)))
    first, second = files_of(DataTier.TMB, 2)
    assert sim.start_transfer(first, "cac", "rac-1", TransferPurpose.FETCH) == pytest.approx(10.5)
    assert sim.start_transfer(second, "cac", "rac-1", TransferPurpose.FETCH) == pytest.approx(20.5)


def test_produced_tmb_file_reaches_every_site():
    topology = star_topology(3)
    result = simulate(scenario(topology, [dataset("ds", {DataTier.TMB: TMB_FILE_EVENTS})]))
    replicas = result.catalog.locate("ds/tmb/000000")

    cac_tape = sorted(r.copy_index for r in replicas if r.station_id == "cac" and r.medium == Medium.TAPE)
    assert cac_tape == [0, 1, 2, 3]
    pinned_disks = sorted(r.station_id for r in replicas if r.medium == Medium.DISK and r.pinned)
    assert pinned_disks == ["cac", "rac-1", "rac-2", "rac-3"]
    assert sorted(r.station_id for r in replicas if r.medium == Medium.TAPE and r.station_id != "cac") == [
        "rac-1", "rac-2", "rac-3"]

    metrics = result.metrics
    assert metrics.class_bytes(LinkClass.CAC_TO_RAC) == 3 * GB
    assert metrics.transfers_completed == 3
    assert metrics.station("cac").tape_occupancy == 4 * GB
    assert metrics.jobs_submitted == 0


def test_empty_scenario_reports_zeros():
    metrics = simulate(scenario(star_topology(2))).metrics
    assert metrics.files == 0
    assert metrics.events_processed == 0
    assert metrics.transferred_bytes == metrics.hop_bytes == 0
    assert metrics.jobs == []
    assert all(row.requests == 0 and row.hit_rate is None for row in metrics.stations)
    assert metrics.job_percentiles()["p50"]["total"] == 0.0


def test_empty_workload_still_counts_production_traffic():
    metrics = simulate(scenario(star_topology(2), [dataset("ds", {DataTier.TMB: 2 * TMB_FILE_EVENTS})],
                                rates={"r1": 0.0})).metrics
    assert metrics.jobs_submitted == 0
    assert metrics.class_bytes(LinkClass.CAC_TO_RAC) == 4 * GB
    assert metrics.workload_start == pytest.approx(20.0)


def test_single_tmb_job_finds_everything_pinned():
    sc = scenario(star_topology(1), [dataset("ds", {DataTier.TMB: 10 * TMB_FILE_EVENTS})], rates={"r1": 1.0},
                  max_jobs=1, cpu_seconds_per_event={JobKind.ANALYSIS: 1e-6})
    metrics = simulate(sc).metrics
    assert metrics.jobs_submitted == metrics.jobs_completed == 1
    job = metrics.jobs[0]
    assert (job.station_id, job.files, job.misses) == ("rac-1", 10, 0)
    assert job.transfer == 0.0
    assert job.compute == pytest.approx(1.0)
    assert metrics.station("rac-1").tier_hit_rate(DataTier.TMB) == 1.0


def test_files_missing_from_disk_are_staged_from_tape():
    policy = apply_overrides(default_policy(), PolicyOverrides(tiers={DataTier.DST: {PlacementColumn.CAC_DISK: 0.0}}))
    sc = scenario(star_topology(1), [dataset("ds", {DataTier.DST: DST_30_FILES})], rates={"r1": 1.0},
                  duration=5000, policy=policy, max_jobs=1,
                  tier_mix={JobKind.ANALYSIS: {DataTier.DST: 1.0}},
                  cpu_seconds_per_event={JobKind.ANALYSIS: 1e-6})
    metrics = simulate(sc).metrics
    assert metrics.station("rac-1").misses == 27
    assert metrics.station("cac").tape_stages == 27
    assert metrics.jobs_completed == 1
    assert metrics.jobs[0].transfer > 60.0


def test_mc_job_uploads_its_output_to_central_tape():
    sc = scenario(star_topology(1), rates={"r1": 1.0}, max_jobs=1, mc_events_per_job=1000,
                  kind_mix={JobKind.MC_PRODUCTION: 1.0})
    result = simulate(sc)
    metrics = result.metrics
    assert metrics.jobs_completed == 1
    job = metrics.jobs[0]
    assert job.kind == JobKind.MC_PRODUCTION.value
    assert job.compute == pytest.approx(100.0)
    assert job.transfer == pytest.approx(4.0)
    replicas = result.catalog.locate("mc/job-0000001/mc_dst")
    assert {(r.station_id, r.medium) for r in replicas} == {("cac", Medium.TAPE)}
    assert metrics.station("cac").tape_occupancy == 400 * MB


def mc_scenario(topology, **kwargs):
    return scenario(topology, rates={"r1": 1.0}, max_jobs=1, mc_events_per_job=1000,
                    kind_mix={JobKind.MC_PRODUCTION: 1.0}, **kwargs)


MC_OUTPUT = "mc/job-0000001/mc_dst"


def test_mc_output_is_cached_at_source_when_central_tape_is_full():
    result = simulate(mc_scenario(star_topology(1, cac_tape=100 * MB)))
    assert result.catalog.locate(MC_OUTPUT) == frozenset({Replica(MC_OUTPUT, "rac-1", Medium.DISK, False)})
    rac = result.metrics.station("rac-1")
    assert rac.on_demand_bytes == 400 * MB
    assert rac.admissions == 1
    assert result.metrics.station("cac").tape_occupancy == 0
    assert result.metrics.jobs_completed == 1


def test_mc_output_is_lost_when_source_disk_cannot_hold_it():
    result = simulate(mc_scenario(star_topology(1, cac_tape=100 * MB, rac_disk=100 * MB)))
    assert result.catalog.locate(MC_OUTPUT) == frozenset()
    assert result.metrics.station("rac-1").bypassed == 1
    assert result.metrics.station("rac-1").on_demand_bytes == 0
    assert result.metrics.jobs_completed == 1


def test_mc_tier_without_central_tape_share_stays_at_source():
    policy = apply_overrides(default_policy(),
                             PolicyOverrides(tiers={DataTier.MC_DST: {PlacementColumn.CAC_TAPE: 0.0}}))
    result = simulate(mc_scenario(star_topology(1), policy=policy))
    replicas = result.catalog.locate(MC_OUTPUT)
    assert {(r.station_id, r.medium) for r in replicas} == {("rac-1", Medium.DISK)}
    metrics = result.metrics
    assert metrics.station("cac").tape_occupancy == 0
    assert metrics.transfers_completed == 0
    assert metrics.jobs[0].transfer == 0.0


def test_invariant_check_compares_catalog_with_disk():
    sim = GridSimulation(scenario(star_topology(1)))
    record = files_of(DataTier.TMB, 1)[0]
    sim.catalog.register_file(record)
    sim.catalog.add_replica(Replica(record.file_id, "rac-1", Medium.DISK))
    with pytest.raises(InvariantViolation, match="catalog lists 1 disk files at rac-1"):
        sim._check_touched()


def link_rows(metrics):
    return {row["link_class"]: row for row in csv.DictReader(io.StringIO(links_csv(metrics)))}


def test_two_hop_transfer_counts_once_in_total():
    sim = GridSimulation(scenario(regional_topology()))
    record = files_of(DataTier.TMB, 1)[0]
    sim.catalog.register_file(record)
    sim.start_transfer(record, "cac", "iac-1", TransferPurpose.FETCH)
    sim._process(until=None)

    rows = link_rows(sim._collect(sim.now))
    assert rows["CAC_TO_RAC"] == {"link_class": "CAC_TO_RAC", "bytes": str(GB), "transfers": "1"}
    assert rows["INTRA_REGION"] == {"link_class": "INTRA_REGION", "bytes": str(GB), "transfers": "1"}
    assert rows["TOTAL"] == {"link_class": "TOTAL", "bytes": str(2 * GB), "transfers": "1"}
    assert sim.catalog.replica_at(record.file_id, "iac-1", Medium.DISK) is not None


class RecordingSimulation(GridSimulation):
    """Keeps the size and hops of every transfer that lands."""

    def __init__(self, sc):
        super().__init__(sc)
        self.landed = []

    def _on_transfer_complete(self, event):
        transfer = event.payload
        self.landed.append((transfer.file.size, [(hop.endpoint_a, hop.endpoint_b) for hop in transfer.path]))
        super()._on_transfer_complete(event)


def mixed_scenario(seed, rate=0.05, duration=2000.0, **kwargs):
    return scenario(regional_topology(), [dataset("ds", {DataTier.DST: DST_30_FILES,
                                                         DataTier.TMB: 3 * TMB_FILE_EVENTS})],
                    rates={"r1": rate, "r2": rate}, duration=duration, seed=seed,
                    tier_mix={JobKind.ANALYSIS: {DataTier.DST: 0.3, DataTier.TMB: 0.7}}, **kwargs)


def test_same_seed_same_results():
    first = simulate(mixed_scenario(11))
    second = simulate(mixed_scenario(11))
    assert first.metrics == second.metrics
    assert first.catalog.dump() == second.catalog.dump()
    assert first.metrics.jobs_submitted > 0


def test_random_scenarios_conserve_bytes():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        seed = int(rng.integers(1 << 30))
        rate = float(rng.uniform(0.01, 0.1))
        sc = mixed_scenario(seed, rate=rate)
        sim = RecordingSimulation(sc)
        result = sim.run()
        metrics = result.metrics

        class_bytes = {c.value: 0 for c in LinkClass}
        class_transfers = {c.value: 0 for c in LinkClass}
        for size, hops in sim.landed:
            crossed = set()
            for a, b in hops:
                link_class = sc.topology.link_class(a, b).value
                class_bytes[link_class] += size
                crossed.add(link_class)
            for link_class in crossed:
                class_transfers[link_class] += 1

        rows = link_rows(metrics)
        for link_class in class_bytes:
            assert int(rows[link_class]["bytes"]) == class_bytes[link_class]
            assert int(rows[link_class]["transfers"]) == class_transfers[link_class]
        assert int(rows["TOTAL"]["bytes"]) == sum(size * len(hops) for size, hops in sim.landed)
        assert int(rows["TOTAL"]["transfers"]) == sum(1 for _, hops in sim.landed if hops)
        assert metrics.transferred_bytes == sum(size for size, hops in sim.landed if hops)
        for row in metrics.stations:
            assert row.pinned_bytes + row.on_demand_bytes <= row.disk_capacity
            assert row.requests == sum(row.tier_requests(t) for t in DataTier)
        assert result.catalog.reverse_index() == result.catalog.rebuild_reverse_index()
        assert metrics.jobs_completed <= metrics.jobs_submitted


def test_small_regional_disk_evicts():
    metrics = simulate(scenario(regional_topology(), [dataset("ds", {DataTier.DST: DST_30_FILES})],
                                rates={"r1": 0.05}, duration=3000, seed=5,
                                tier_mix={JobKind.ANALYSIS: {DataTier.DST: 1.0}})).metrics
    iac = metrics.station("iac-1")
    assert iac.misses > 0
    assert iac.evictions > 0
    assert iac.on_demand_bytes <= 5 * GB


def test_production_pins_what_the_planner_expects():
    topology = star_topology(3)
    datasets = [dataset("ds", {DataTier.DST: DST_30_FILES, DataTier.TMB: 5 * TMB_FILE_EVENTS,
                               DataTier.RAW: 10_000})]
    sc = scenario(topology, datasets)
    metrics = simulate(sc).metrics
    files = [f for d in datasets for f in generate_files(d, GB)]
    assert metrics.production_pinned_bytes == pinned_bytes_by_station(files, sc.policy, topology)


def test_pinned_overflow_shortfall_is_enough():
    datasets = [dataset("ds", {DataTier.TMB: 100 * TMB_FILE_EVENTS})]
    with pytest.raises(PinnedOverflow) as caught:
        simulate(scenario(star_topology(1, rac_disk=50 * GB), datasets))
    assert caught.value.station_id == "rac-1"
    bigger = star_topology(1, rac_disk=50 * GB + caught.value.shortfall)
    assert simulate(scenario(bigger, datasets)).metrics.production_pinned_bytes["rac-1"] == 100 * GB


def job(region_id="r1", dataset_id="ds"):
    return Job(job_id="job", region_id=region_id, dataset_id=dataset_id, tier=DataTier.TMB,
               cpu_seconds_per_event=0.001)


def test_schedule_job_prefers_locality_then_free_slots_then_id():
    sim = GridSimulation(scenario(regional_topology(iac_cpu=4), [dataset("ds", {DataTier.TMB: TMB_FILE_EVENTS})]))
    assert sim.locality("iac-1", "ds", DataTier.TMB) == 0.0
    assert sim.schedule_job(job()) == "iac-1"
    sim.free_slots["iac-1"] = 1
    assert sim.schedule_job(job()) == "rac-1"

    sim.caches["rac-2"].pin(files_of(DataTier.TMB, 1)[0])
    assert sim.locality("rac-2", "ds", DataTier.TMB) == 1.0
    assert sim.schedule_job(job("r2")) == "rac-2"

    sim.caches["rac-1"].pin(files_of(DataTier.TMB, 1)[0])
    assert sim.locality("iac-1", "ds", DataTier.TMB) == 1.0


def test_busy_region_waits_unless_overflow_allowed():
    topology = star_topology(2)
    sim = GridSimulation(scenario(topology))
    sim.free_slots["rac-1"] = 0
    assert sim.schedule_job(job()) is None

    sim = GridSimulation(scenario(topology, opportunistic_overflow=True))
    sim.free_slots["rac-1"] = 0
    assert sim.schedule_job(job()) == "rac-2"


def test_region_without_cpu():
    sim = GridSimulation(scenario(star_topology(2, rac_cpu=0)))
    with pytest.raises(NoCpuInRegion):
        sim.schedule_job(job())
    with pytest.raises(NoCpuInRegion):
        simulate(scenario(star_topology(2, rac_cpu=0), rates={"r1": 0.1}))
    metrics = simulate(scenario(star_topology(2, rac_cpu=0, cac_cpu=10), rates={"r1": 0.1},
                                opportunistic_overflow=True, duration=100)).metrics
    assert all(j.station_id == "cac" for j in metrics.jobs)


def test_unknown_workload_region_fails_validation():
    with pytest.raises(ValidationFailed) as caught:
        simulate(scenario(star_topology(1), rates={"nowhere": 0.1}))
    assert [v.code for v in caught.value.violations] == ["unknown workload region"]


@pytest.mark.slow
def test_gridka_tmb_analysis_always_hits():
    metrics = simulate(load_scenario("gridka").to_scenario()).metrics
    gridka = metrics.station("gridka")
    assert gridka.tier_requests(DataTier.TMB) >= 1000
    assert gridka.tier_hit_rate(DataTier.TMB) == 1.0
    assert gridka.pinned_bytes <= gridka.disk_capacity


@pytest.mark.slow
def test_toy2region_is_deterministic():
    sc = load_scenario("toy2region").to_scenario()
    assert simulate(sc).metrics == simulate(sc).metrics
