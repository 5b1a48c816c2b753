"""Simulation state and event handlers for one grid scenario."""

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, Dict, List, NamedTuple, Optional, Set, Tuple

import numpy as np
from loguru import logger

from rac_grid.catalog.dan import DanProxy
from rac_grid.catalog.replicas import Replica, ReplicaCatalog
from rac_grid.policy.placement import (
    PlacementColumn,
    PlacementTarget,
    archival_targets,
    on_demand_budget,
    pinned_set,
    plan_placements,
)
from rac_grid.shared.errors import (
    FileLargerThanCache,
    InvariantViolation,
    NoCpuInRegion,
    NoReplica,
    TapeOverflow,
    ValidationFailed,
)
from rac_grid.shared.models import (
    DataTier,
    FileRecord,
    LinkClass,
    Medium,
    NetworkLink,
    StationKind,
    Violation,
    event_bytes,
    generate_files,
)
from rac_grid.shared.topology import NetworkGraph, regional_hub, validate_topology
from rac_grid.shared.tracing import traced
from rac_grid.sim.events import EventKind, EventQueue, SimEvent
from rac_grid.sim.metrics import DanMetrics, JobTimes, LinkClassMetrics, Metrics, StationMetrics
from rac_grid.sim.scenario import Job, JobKind, Scenario
from rac_grid.station.storage import CacheOutcome, DiskCache, TapeStore


class TransferPurpose(str, Enum):
    PLACEMENT = "placement"
    FETCH = "fetch"
    UPLOAD = "upload"


@dataclass
class Transfer:
    file: FileRecord
    source: str
    dest: str
    purpose: TransferPurpose
    path: List[NetworkLink]
    started_at: float
    targets: List[PlacementTarget] = field(default_factory=list)
    job: Optional["JobRun"] = None


@dataclass
class JobRun:
    """A job from dispatch to completion."""
    job: Job
    station_id: str
    dispatched_at: float
    db_keys: List[str] = field(default_factory=list)
    db_time: float = 0.0
    data_started: float = 0.0
    pending: int = 0
    files: int = 0
    misses: int = 0
    events: int = 0
    transfer_time: float = 0.0
    compute_time: float = 0.0
    uploaded: bool = False


class SimulationResult(NamedTuple):
    metrics: Metrics
    catalog: ReplicaCatalog


def scenario_violations(scenario: Scenario) -> List[Violation]:
    """Topology violations plus workload references to unknown regions or datasets."""
    violations: List[Violation] = list(validate_topology(scenario.topology))
    region_ids = {r.region_id for r in scenario.topology.regions}
    for region in scenario.workload.regions:
        if region.region_id not in region_ids:
            violations.append(Violation(code="unknown workload region", subject=region.region_id))
    seen: Set[str] = set()
    for dataset in scenario.datasets:
        if dataset.dataset_id in seen:
            violations.append(Violation(code="duplicate dataset", subject=dataset.dataset_id))
        seen.add(dataset.dataset_id)
    for dataset_id in sorted(scenario.workload.popularity):
        if dataset_id not in seen:
            violations.append(Violation(code="unknown popularity dataset", subject=dataset_id))
    return violations


class GridSimulation:
    """Single-threaded discrete-event model of production, placement and analysis."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.topology = scenario.topology
        self.policy = scenario.policy
        self.config = scenario.simulation
        self.workload = scenario.workload
        self.network = NetworkGraph(self.topology)
        self.rng = np.random.default_rng(self.config.seed)
        self.queue = EventQueue()
        self.catalog = ReplicaCatalog()

        self.files: List[FileRecord] = []
        for dataset in scenario.datasets:
            self.files.extend(generate_files(dataset, int(self.config.file_size)))
        self.plan = plan_placements(self.files, self.policy, self.topology)
        self._targets: Dict[str, List[PlacementTarget]] = {}
        self._dataset_files: Dict[Tuple[str, DataTier], List[FileRecord]] = defaultdict(list)
        for record in self.files:
            self._dataset_files[(record.dataset_id, record.tier)].append(record)

        cac = self.topology.cac
        self.cac_id = cac.station_id if cac is not None else None
        self.caches: Dict[str, DiskCache] = {}
        self.tapes: Dict[str, TapeStore] = {}
        self.free_slots: Dict[str, int] = {}
        for station in sorted(self.topology.stations, key=lambda s: s.station_id):
            self.caches[station.station_id] = DiskCache(
                station.station_id, int(station.disk_capacity),
                self.policy.on_demand_min_fraction, self.config.eviction,
            )
            self.tapes[station.station_id] = TapeStore(station.station_id, int(station.tape_capacity),
                                                       self.config.tape)
            self.free_slots[station.station_id] = station.cpu_slots

        dan = self.config.dan
        self.proxies: Dict[str, DanProxy] = {
            region.region_id: DanProxy(region.region_id, dan.cache_capacity, dan.proxy_latency)
            for region in sorted(self.topology.regions, key=lambda r: r.region_id)
        }
        self.waiting: Dict[str, Deque[Job]] = {region_id: deque() for region_id in self.proxies}

        self.busy_until: Dict[Tuple[str, str], float] = {}
        self.link_bytes: Dict[Tuple[str, str], int] = defaultdict(int)
        self.class_bytes: Dict[LinkClass, int] = defaultdict(int)
        self.class_transfers: Dict[LinkClass, int] = defaultdict(int)
        self.transferred_bytes = 0
        self.hop_bytes = 0
        self.transfers_completed = 0
        self.inflight: Dict[Tuple[str, str], List[JobRun]] = {}
        self.tier_hits: Dict[str, Dict[DataTier, int]] = defaultdict(lambda: defaultdict(int))
        self.tier_misses: Dict[str, Dict[DataTier, int]] = defaultdict(lambda: defaultdict(int))
        self.bypassed: Dict[str, int] = defaultdict(int)
        self.job_times: List[JobTimes] = []
        self.jobs_submitted = 0
        self.jobs_skipped = 0
        self.production_pinned: Dict[str, int] = {}
        self.workload_start = 0.0
        self._touched: Set[str] = set()
        self._touched_files: Set[Tuple[str, str]] = set()

        self._handlers: Dict[EventKind, Callable[[SimEvent], None]] = {
            EventKind.FILE_PRODUCED: self._on_file_produced,
            EventKind.JOB_SUBMITTED: self._on_job_submitted,
            EventKind.TRANSFER_COMPLETE: self._on_transfer_complete,
            EventKind.STAGE_COMPLETE: self._on_stage_complete,
            EventKind.DB_QUERY: self._on_db_query,
            EventKind.JOB_COMPLETED: self._on_job_completed,
        }

    @property
    def now(self) -> float:
        return self.queue.now

    # ------------------------------------------------------------------
    # pre-run checks

    def validate(self) -> None:
        """Refuse scenarios that cannot run: bad topology, unknown workload names, pinned or tape overflow."""
        violations = scenario_violations(self.scenario)
        if violations:
            raise ValidationFailed(violations)

        for station in sorted(self.topology.stations, key=lambda s: s.station_id):
            ids = pinned_set(station, self.files, self.policy, self.plan)
            pinned_bytes = sum(record.size for record in self.files if record.file_id in ids)
            on_demand_budget(station, pinned_bytes, self.policy)

        tape_need: Dict[str, int] = defaultdict(int)
        for record in self.files:
            targets = archival_targets(record, self.policy, self.topology, self.plan)
            self._targets[record.file_id] = targets
            for target in targets:
                if target.medium == Medium.TAPE:
                    tape_need[target.station_id] += record.size * target.copy_count
        for station_id in sorted(tape_need):
            capacity = self.tapes[station_id].capacity
            if tape_need[station_id] > capacity:
                raise TapeOverflow(station_id, tape_need[station_id], capacity)

        for region in self.workload.regions:
            if region.arrival_rate > 0 and not self._cpu_stations(region.region_id):
                if not self.workload.opportunistic_overflow or not self._cpu_stations(None):
                    raise NoCpuInRegion(region.region_id)

    # ------------------------------------------------------------------
    # run

    def run(self) -> SimulationResult:
        self.validate()
        logger.info(f"🚀 Simulating {self.scenario.name}: {len(self.files)} files, seed {self.config.seed}")

        with traced("sim.production", {"scenario": self.scenario.name, "seed": self.config.seed,
                                       "files": len(self.files)}):
            ordered = sorted(range(len(self.files)),
                             key=lambda i: (self.files[i].created_at, self.files[i].tier.order, i))
            for index in ordered:
                record = self.files[index]
                self.queue.schedule_at(record.created_at, EventKind.FILE_PRODUCED, record)
            self._process(until=None)
            self.workload_start = self.now
            self.production_pinned = {sid: cache.pinned_bytes for sid, cache in self.caches.items()}
        logger.info(f"✅ Production phase quiescent at t={self.workload_start:.3f}s")

        end_time = self.workload_start + self.config.duration
        with traced("sim.workload", {"scenario": self.scenario.name, "seed": self.config.seed}) as span:
            if not self.workload.is_empty:
                for region in sorted(self.workload.regions, key=lambda r: r.region_id):
                    self._schedule_arrival(region.region_id, region.arrival_rate, end_time)
            self._process(until=end_time)
            span.set_attribute("jobs", self.jobs_submitted)
        logger.info(f"✅ Workload phase done: {self.jobs_submitted} jobs submitted, "
                    f"{len(self.job_times)} completed")
        return SimulationResult(metrics=self._collect(end_time), catalog=self.catalog)

    def _process(self, until: Optional[float]) -> None:
        check = self.config.check_invariants
        while True:
            event = self.queue.pop(until)
            if event is None:
                return
            if event.time < event.scheduled_at:
                raise InvariantViolation(f"{event.kind.value} at {event.time} before its cause")
            self._handlers[event.kind](event)
            if check:
                self._check_touched()

    # ------------------------------------------------------------------
    # production and placement

    def produce_file(self, file: FileRecord) -> None:
        """Register ``file``, store the CAC copies now and ship one placement transfer per RAC."""
        self.catalog.register_file(file)
        targets = self._targets.get(file.file_id)
        if targets is None:
            targets = archival_targets(file, self.policy, self.topology, self.plan)
        remote: Dict[str, List[PlacementTarget]] = defaultdict(list)
        for target in targets:
            if target.station_id == self.cac_id:
                self._place(file, target)
            else:
                remote[target.station_id].append(target)
        for station_id in sorted(remote):
            self.start_transfer(file, self.cac_id, station_id, TransferPurpose.PLACEMENT,
                                targets=remote[station_id])

    def _place(self, file: FileRecord, target: PlacementTarget) -> None:
        station_id = target.station_id
        if target.medium == Medium.TAPE:
            self.tapes[station_id].store(file.size, target.copy_count)
            for copy_index in range(target.copy_count):
                self.catalog.add_replica(Replica(file.file_id, station_id, Medium.TAPE, False, copy_index))
        elif target.pinned:
            evicted = self.caches[station_id].pin(file)
            self._drop_evicted(station_id, evicted)
            self.catalog.add_replica(Replica(file.file_id, station_id, Medium.DISK, True))
            self._mark(station_id, file.file_id)
        else:
            self._admit(station_id, file)
        self._touched.add(station_id)

    def _admit(self, station_id: str, file: FileRecord) -> bool:
        """Cache ``file`` at ``station_id``; False when it bypassed the on-demand area."""
        cache = self.caches[station_id]
        present = file.file_id in cache
        try:
            evicted = cache.admit(file, self.now)
        except FileLargerThanCache:
            self.bypassed[station_id] += 1
            return False
        self._drop_evicted(station_id, evicted)
        if not present:
            self.catalog.add_replica(Replica(file.file_id, station_id, Medium.DISK, False))
            self._mark(station_id, file.file_id)
        self._touched.add(station_id)
        return True

    def _mark(self, station_id: str, file_id: str) -> None:
        if self.config.check_invariants:
            self._touched_files.add((station_id, file_id))

    def _drop_evicted(self, station_id: str, evicted: List[str]) -> None:
        for file_id in evicted:
            self._mark(station_id, file_id)
            replica = self.catalog.replica_at(file_id, station_id, Medium.DISK)
            if replica is None:
                continue
            if replica.pinned:
                raise InvariantViolation(f"pinned {file_id} evicted at {station_id}")
            self.catalog.remove_replica(replica)

    def _on_file_produced(self, event: SimEvent) -> None:
        self.produce_file(event.payload)

    # ------------------------------------------------------------------
    # transfers

    def start_transfer(self, file: FileRecord, source: str, dest: str, purpose: TransferPurpose,
                       targets: Optional[List[PlacementTarget]] = None,
                       job: Optional[JobRun] = None) -> float:
        """Queue ``file`` on every link of the source-to-dest path and return its arrival time.

        Each link serves transfers FIFO: a transfer waits for the link to
        drain, then pays latency plus size/bandwidth, and holds the link for
        the streaming time.
        """
        path = self.network.path(source, dest)
        now = self.now
        eta = now
        for link in path:
            key = link.key
            busy = self.busy_until.get(key, 0.0)
            stream = file.size / int(link.bandwidth)
            eta += max(0.0, busy - now) + link.latency + stream
            self.busy_until[key] = max(busy, now) + stream
        transfer = Transfer(file, source, dest, purpose, path, now, list(targets or ()), job)
        self.queue.schedule_at(eta, EventKind.TRANSFER_COMPLETE, transfer)
        return eta

    def _on_transfer_complete(self, event: SimEvent) -> None:
        transfer: Transfer = event.payload
        size = transfer.file.size
        if transfer.path:
            self.transferred_bytes += size
            self.transfers_completed += 1
            classes = set()
            for link in transfer.path:
                link_class = self.network.link_class(link)
                self.link_bytes[link.key] += size
                self.class_bytes[link_class] += size
                self.hop_bytes += size
                classes.add(link_class)
            for link_class in classes:
                self.class_transfers[link_class] += 1

        if transfer.purpose == TransferPurpose.PLACEMENT:
            # disk before tape so a pinned replica exists as soon as the transfer lands
            for target in sorted(transfer.targets, key=lambda t: t.medium != Medium.DISK):
                self._place(transfer.file, target)
        elif transfer.purpose == TransferPurpose.FETCH:
            self._admit(transfer.dest, transfer.file)
            for run in self.inflight.pop((transfer.dest, transfer.file.file_id), []):
                self._file_ready(run)
        else:
            self._store_upload(transfer)

    def _on_stage_complete(self, event: SimEvent) -> None:
        file, source, dest = event.payload
        self.start_transfer(file, source, dest, TransferPurpose.FETCH)

    def _fetch(self, run: JobRun, file: FileRecord) -> bool:
        """Start or join a fetch of ``file`` to the job's station; False when no replica exists."""
        key = (run.station_id, file.file_id)
        if key in self.inflight:
            self.inflight[key].append(run)
            return True
        try:
            source = self.catalog.resolve_source(self.topology, file.file_id, run.station_id,
                                                 self.config.prefer_inter_rac)
        except NoReplica:
            logger.debug(f"No replica of {file.file_id} for {run.job.job_id}")
            return False
        self.inflight[key] = [run]
        if source.medium == Medium.TAPE:
            duration = self.tapes[source.station_id].stage(file.size)
            self.queue.schedule_in(duration, EventKind.STAGE_COMPLETE, (file, source.station_id, run.station_id))
        else:
            self.start_transfer(file, source.station_id, run.station_id, TransferPurpose.FETCH)
        return True

    # ------------------------------------------------------------------
    # jobs

    def _schedule_arrival(self, region_id: str, rate: float, end_time: float) -> None:
        if rate <= 0:
            return
        if self.workload.max_jobs is not None and self.jobs_submitted >= self.workload.max_jobs:
            return
        arrival = self.now + float(self.rng.exponential(1.0 / rate))
        if arrival <= end_time:
            self.queue.schedule_at(arrival, EventKind.JOB_SUBMITTED, (region_id, rate, end_time))

    def _on_job_submitted(self, event: SimEvent) -> None:
        region_id, rate, end_time = event.payload
        if self.workload.max_jobs is not None and self.jobs_submitted >= self.workload.max_jobs:
            return
        self.jobs_submitted += 1
        job = self._draw_job(region_id)
        self._schedule_arrival(region_id, rate, end_time)
        if job is None:
            self.jobs_skipped += 1
            return
        station_id = self.schedule_job(job)
        if station_id is None:
            self.waiting[region_id].append(job)
        else:
            self._dispatch(job, station_id)

    def _pick(self, weights: Dict, keys: List) -> Optional[object]:
        values = np.array([float(weights.get(k, 0.0)) for k in keys])
        total = values.sum()
        if not keys or total <= 0:
            return None
        return keys[int(self.rng.choice(len(keys), p=values / total))]

    def _draw_job(self, region_id: str) -> Optional[Job]:
        kinds = sorted(self.workload.kind_mix, key=lambda k: k.value)
        kind: Optional[JobKind] = self._pick(self.workload.kind_mix, kinds)  # type: ignore[assignment]
        if kind is None:
            return None
        mix = self.workload.tier_mix.get(kind, {})
        tier: Optional[DataTier] = self._pick(mix, sorted(mix, key=lambda t: t.order))  # type: ignore[assignment]
        if tier is None:
            return None
        cpu = self.workload.cpu_seconds_per_event.get(kind, 0.001)
        job_id = f"job-{self.jobs_submitted:07d}"

        if kind == JobKind.MC_PRODUCTION:
            return Job(job_id=job_id, region_id=region_id, dataset_id=f"mc-{region_id}", tier=tier,
                       cpu_seconds_per_event=cpu, submitted_at=self.now, kind=kind,
                       output_events=self.workload.mc_events_per_job)

        candidates = sorted(d.dataset_id for d in self.scenario.datasets
                            if self._dataset_files.get((d.dataset_id, tier)))
        if self.workload.popularity:
            dataset_id = self._pick(self.workload.popularity, candidates)
        else:
            dataset_id = self._pick({d: 1.0 for d in candidates}, candidates)
        if dataset_id is None:
            return None
        return Job(job_id=job_id, region_id=region_id, dataset_id=dataset_id, tier=tier,
                   cpu_seconds_per_event=cpu, submitted_at=self.now, kind=kind)

    def _cpu_stations(self, region_id: Optional[str]) -> List[str]:
        return [s.station_id for s in sorted(self.topology.stations, key=lambda s: s.station_id)
                if s.cpu_slots > 0 and (region_id is None or s.region_id == region_id)]

    def locality(self, station_id: str, dataset_id: str, tier: DataTier) -> float:
        """Fraction of a dataset tier's bytes on the station's disk (or its RAC's, for IACs and DASes)."""
        files = self._dataset_files.get((dataset_id, tier), [])
        total = sum(f.size for f in files)
        if total == 0:
            return 0.0
        holders = [station_id]
        if self.topology.station(station_id).kind in (StationKind.IAC, StationKind.DAS):
            hub = regional_hub(self.topology, station_id)
            if hub is not None:
                holders.append(hub)
        best = 0
        for holder in holders:
            cache = self.caches[holder]
            best = max(best, sum(f.size for f in files if f.file_id in cache))
        return best / total

    def schedule_job(self, job: Job) -> Optional[str]:
        """Station with a free CPU slot that holds most of the job's data; None when all are busy."""
        local = self._cpu_stations(job.region_id)
        if not local and not self.workload.opportunistic_overflow:
            raise NoCpuInRegion(job.region_id)
        chosen = self._best_station(job, local)
        if chosen is None and self.workload.opportunistic_overflow:
            foreign = [s for s in self._cpu_stations(None) if s not in local]
            chosen = self._best_station(job, foreign)
        return chosen

    def _best_station(self, job: Job, candidates: List[str]) -> Optional[str]:
        ranked = [
            (-self.locality(s, job.dataset_id, job.tier), -self.free_slots[s], s)
            for s in candidates if self.free_slots[s] > 0
        ]
        return min(ranked)[2] if ranked else None

    def _dispatch(self, job: Job, station_id: str) -> None:
        self.free_slots[station_id] -= 1
        run = JobRun(job=job, station_id=station_id, dispatched_at=self.now)
        queries = self.workload.db_queries_per_job.get(job.kind, 0)
        keys = self.config.dan.calibration_keys
        run.db_keys = [f"calib-{int(self.rng.integers(keys)):06d}" for _ in range(queries)]
        self.queue.schedule_at(self.now, EventKind.DB_QUERY, (run, 0))

    def _on_db_query(self, event: SimEvent) -> None:
        run, index = event.payload
        if index < len(run.db_keys):
            result = self.proxies[run.job.region_id].query(run.db_keys[index], self.config.dan.central_latency)
            run.db_time += result.latency
            self.queue.schedule_in(result.latency, EventKind.DB_QUERY, (run, index + 1))
            return
        self._start_data(run)

    def _start_data(self, run: JobRun) -> None:
        run.data_started = self.now
        job = run.job
        if job.kind == JobKind.MC_PRODUCTION:
            run.events = job.output_events
            self._start_compute(run)
            return
        cache = self.caches[run.station_id]
        files = self._dataset_files.get((job.dataset_id, job.tier), [])
        run.files = len(files)
        run.pending = 1
        for record in files:
            run.events += record.event_count
            outcome = cache.request(record.file_id, self.now)
            if outcome == CacheOutcome.DISK_HIT:
                self.tier_hits[run.station_id][record.tier] += 1
                continue
            self.tier_misses[run.station_id][record.tier] += 1
            run.misses += 1
            if self._fetch(run, record):
                run.pending += 1
        self._file_ready(run)

    def _file_ready(self, run: JobRun) -> None:
        run.pending -= 1
        if run.pending == 0:
            run.transfer_time = self.now - run.data_started
            self._start_compute(run)

    def _start_compute(self, run: JobRun) -> None:
        run.compute_time = run.events * run.job.cpu_seconds_per_event
        self.queue.schedule_in(run.compute_time, EventKind.JOB_COMPLETED, run)

    def _on_job_completed(self, event: SimEvent) -> None:
        run: JobRun = event.payload
        job = run.job
        if job.kind == JobKind.MC_PRODUCTION and not run.uploaded:
            self._upload(run)
            return
        self.free_slots[run.station_id] += 1
        self.job_times.append(JobTimes(
            job_id=job.job_id, kind=job.kind.value, region_id=job.region_id, station_id=run.station_id,
            dataset_id=job.dataset_id, tier=job.tier, submitted_at=job.submitted_at,
            files=run.files, misses=run.misses,
            wait=run.dispatched_at - job.submitted_at + run.db_time,
            transfer=run.transfer_time, db=run.db_time, compute=run.compute_time,
            total=self.now - job.submitted_at,
        ))
        self._drain(self.topology.station(run.station_id).region_id)

    def _upload(self, run: JobRun) -> None:
        job = run.job
        output = FileRecord(
            file_id=f"mc/{job.job_id}/{job.tier.value.lower()}",
            tier=job.tier,
            dataset_id=job.dataset_id,
            size=job.output_events * event_bytes(job.tier),
            event_count=job.output_events,
            created_at=self.now,
        )
        self.catalog.register_file(output)
        run.data_started = self.now
        if self.policy.fraction(output.tier, PlacementColumn.CAC_TAPE) <= 0.0:
            # tier is not archived centrally
            self._keep_at_source(run.station_id, output)
            self._finish_upload(run)
            return
        self.start_transfer(output, run.station_id, self.cac_id, TransferPurpose.UPLOAD, job=run)

    def _store_upload(self, transfer: Transfer) -> None:
        file = transfer.file
        fraction = self.policy.fraction(file.tier, PlacementColumn.CAC_TAPE)
        # MC outputs are not partitioned, so a fractional share still stores one copy
        copies = math.ceil(fraction) if fraction >= 1.0 else 1
        try:
            self._place(file, PlacementTarget(station_id=self.cac_id, medium=Medium.TAPE, copy_count=copies))
        except TapeOverflow as exc:
            logger.warning(f"⚠️ {exc}; keeping {file.file_id} at {transfer.source}")
            self._keep_at_source(transfer.source, file)
        if transfer.job is not None:
            self._finish_upload(transfer.job)

    def _keep_at_source(self, station_id: str, file: FileRecord) -> None:
        if not self._admit(station_id, file):
            logger.warning(f"⚠️ {file.file_id} does not fit on {station_id} disk; output lost")

    def _finish_upload(self, run: JobRun) -> None:
        run.uploaded = True
        run.transfer_time = self.now - run.data_started
        self.queue.schedule_at(self.now, EventKind.JOB_COMPLETED, run)

    def _drain(self, first_region: str) -> None:
        order = [first_region] + [r for r in sorted(self.waiting) if r != first_region]
        for region_id in order:
            queue = self.waiting.get(region_id)
            while queue:
                station_id = self.schedule_job(queue[0])
                if station_id is None:
                    break
                self._dispatch(queue.popleft(), station_id)

    # ------------------------------------------------------------------
    # invariants and reporting

    def _check_touched(self) -> None:
        for station_id in sorted(self._touched):
            cache = self.caches[station_id]
            if cache.occupancy > cache.capacity:
                raise InvariantViolation(f"disk occupancy {cache.occupancy} > {cache.capacity} at {station_id}")
            if cache.pinned_bytes != sum(cache.pinned.values()):
                raise InvariantViolation(f"pinned byte count drifted at {station_id}")
            if any(file_id in cache.area for file_id in cache.pinned):
                raise InvariantViolation(f"file both pinned and cached at {station_id}")
            tape = self.tapes[station_id]
            if tape.occupancy > tape.capacity:
                raise InvariantViolation(f"tape occupancy {tape.occupancy} > {tape.capacity} at {station_id}")
        for station_id, cache in self.caches.items():
            held = len(cache.pinned) + len(cache.area)
            listed = self.catalog.count_at(station_id, Medium.DISK)
            if listed != held:
                raise InvariantViolation(f"catalog lists {listed} disk files at {station_id}, disk holds {held}")
        for station_id, file_id in sorted(self._touched_files):
            replica = self.catalog.replica_at(file_id, station_id, Medium.DISK)
            cache = self.caches[station_id]
            catalog_pinned = None if replica is None else replica.pinned
            disk_pinned = cache.is_pinned(file_id) if file_id in cache else None
            if catalog_pinned != disk_pinned:
                raise InvariantViolation(f"catalog and disk disagree on {file_id} at {station_id}")
        self._touched.clear()
        self._touched_files.clear()

    def _collect(self, end_time: float) -> Metrics:
        stations = []
        for station in sorted(self.topology.stations, key=lambda s: s.station_id):
            sid = station.station_id
            cache = self.caches[sid]
            stations.append(StationMetrics(
                station_id=sid,
                kind=station.kind.value,
                region_id=station.region_id,
                disk_hits=cache.stats.hits,
                misses=cache.stats.misses,
                tape_stages=self.tapes[sid].stages,
                evictions=cache.stats.evictions,
                admissions=cache.stats.admissions,
                bypassed=self.bypassed.get(sid, 0),
                tier_hits=dict(sorted(self.tier_hits[sid].items(), key=lambda kv: kv[0].order)),
                tier_misses=dict(sorted(self.tier_misses[sid].items(), key=lambda kv: kv[0].order)),
                disk_capacity=cache.capacity,
                pinned_bytes=cache.pinned_bytes,
                on_demand_bytes=cache.on_demand_bytes,
                tape_occupancy=self.tapes[sid].occupancy,
            ))
        return Metrics(
            scenario=self.scenario.name,
            seed=self.config.seed,
            files=len(self.files),
            workload_start=self.workload_start,
            end_time=end_time,
            events_processed=self.queue.processed,
            stations=stations,
            link_classes=[
                LinkClassMetrics(link_class=c, bytes=self.class_bytes.get(c, 0),
                                 transfers=self.class_transfers.get(c, 0))
                for c in LinkClass
            ],
            link_bytes={f"{a}-{b}": n for (a, b), n in sorted(self.link_bytes.items())},
            transferred_bytes=self.transferred_bytes,
            hop_bytes=self.hop_bytes,
            transfers_completed=self.transfers_completed,
            production_pinned_bytes=dict(sorted(self.production_pinned.items())),
            jobs=sorted(self.job_times, key=lambda j: j.job_id),
            jobs_submitted=self.jobs_submitted,
            jobs_completed=len(self.job_times),
            jobs_skipped=self.jobs_skipped,
            dan=[DanMetrics(region_id=r, hits=p.hits, misses=p.misses) for r, p in self.proxies.items()],
        )


def simulate(scenario: Scenario) -> SimulationResult:
    """Run ``scenario`` and return its metrics together with the final replica catalog."""
    return GridSimulation(scenario).run()


def run(scenario: Scenario) -> Metrics:
    return simulate(scenario).metrics
