import numpy as np
import pytest

from rac_grid.shared.errors import FileLargerThanCache, PinnedOverflow, TapeOverflow
from rac_grid.shared.models import DataTier
from rac_grid.shared.units import GB, MB, pin_limit
from rac_grid.station.eviction import FifoPolicy, LruPolicy, make_policy
from rac_grid.station.storage import CacheOutcome, DiskCache, TapeConfig, TapeStore, tape_stage_time

from helpers import files_of


def test_pin_respects_on_demand_reservation():
    cache = DiskCache("rac-1", 10 * GB, min_on_demand_fraction=0.1)
    files = files_of(DataTier.TMB, 10)
    for record in files[:9]:
        cache.pin(record)
    assert cache.pinned_bytes == 9 * GB
    with pytest.raises(PinnedOverflow) as caught:
        cache.pin(files[9])
    assert caught.value.shortfall == 1_111_111_112
    assert cache.pinned_bytes == 9 * GB


def test_pinning_a_cached_file_moves_it_out_of_the_on_demand_area():
    cache = DiskCache("rac-1", 10 * GB, min_on_demand_fraction=0.1)
    record = files_of(DataTier.TMB, 1)[0]
    cache.admit(record)
    cache.pin(record)
    assert cache.on_demand_bytes == 0
    assert cache.is_pinned(record.file_id)
    assert cache.occupancy == GB


def test_pinned_files_are_never_evicted():
    cache = DiskCache("rac-1", 4 * GB, min_on_demand_fraction=0.25)
    pinned, *others = files_of(DataTier.TMB, 6)
    cache.pin(pinned)
    evicted = []
    for record in others:
        evicted += cache.admit(record)
    assert pinned.file_id in cache
    assert pinned.file_id not in evicted
    assert evicted == [f.file_id for f in others[:2]]
    assert cache.occupancy <= cache.capacity
    assert cache.request(pinned.file_id) == CacheOutcome.DISK_HIT


@pytest.mark.parametrize("eviction,survivor", [("lru", "ds/tmb/000000"), ("fifo", "ds/tmb/000001")])
def test_lru_refreshes_on_hit_but_fifo_does_not(eviction, survivor):
    cache = DiskCache("iac-1", 2 * GB, min_on_demand_fraction=0.0, eviction=eviction)
    a, b, c = files_of(DataTier.TMB, 3)
    cache.admit(a)
    cache.admit(b)
    assert cache.request(a.file_id) == CacheOutcome.DISK_HIT
    evicted = cache.admit(c)
    assert len(evicted) == 1
    assert survivor in cache
    assert c.file_id in cache


def test_request_counts_hits_and_misses():
    cache = DiskCache("das-1", GB)
    record = files_of(DataTier.TMB, 1)[0]
    assert cache.request(record.file_id) == CacheOutcome.MISS
    cache.admit(record)
    assert cache.request(record.file_id) == CacheOutcome.DISK_HIT
    assert (cache.stats.hits, cache.stats.misses, cache.stats.admissions) == (1, 1, 1)


def test_file_larger_than_on_demand_area():
    cache = DiskCache("das-1", GB, min_on_demand_fraction=0.1)
    record = files_of(DataTier.TMB, 1, size=2 * GB)[0]
    with pytest.raises(FileLargerThanCache):
        cache.admit(record)
    assert cache.occupancy == 0


def test_unknown_eviction_policy():
    assert isinstance(make_policy("LRU"), LruPolicy)
    assert isinstance(make_policy("fifo"), FifoPolicy)
    with pytest.raises(ValueError):
        make_policy("random")


def test_tape_store_and_overflow():
    tape = TapeStore("cac", 10 * GB)
    tape.store(3 * GB, copies=2)
    assert tape.occupancy == 6 * GB
    with pytest.raises(TapeOverflow):
        tape.store(3 * GB, copies=2)
    assert tape.occupancy == 6 * GB


def test_tape_stage_time():
    tape = TapeStore("rac-1", GB, TapeConfig(mount_latency=60.0, stream_rate=30 * MB))
    assert tape.stage(300 * MB) == pytest.approx(70.0)
    assert tape.stages == 1
    assert tape_stage_time(tape, 0) == 60.0
    with pytest.raises(ValueError):
        tape_stage_time(tape, -1)


def _naive_lru(trace, sizes, capacity):
    """Reference cache: evict the entry with the oldest access stamp by scanning them all."""
    stamps = {}
    outcomes = []
    for clock, file_id in enumerate(trace):
        if file_id in stamps:
            stamps[file_id] = clock
            outcomes.append(True)
            continue
        outcomes.append(False)
        while sum(sizes[f] for f in stamps) + sizes[file_id] > capacity:
            del stamps[min(stamps, key=stamps.get)]
        stamps[file_id] = clock
    return outcomes, set(stamps)


@pytest.mark.slow
def test_lru_matches_timestamp_scan_reference():
    rng = np.random.default_rng(7)
    for _ in range(100):
        universe = [f"f{i:03d}" for i in range(50)]
        sizes = {f: int(rng.integers(1, 6)) for f in universe}
        trace = [universe[i] for i in rng.zipf(1.3, size=10_000) % len(universe)]
        capacity = 20

        cache = DiskCache("das-1", capacity, min_on_demand_fraction=0.0)
        outcomes = []
        for file_id in trace:
            hit = cache.request(file_id) == CacheOutcome.DISK_HIT
            outcomes.append(hit)
            if not hit:
                record = files_of(DataTier.TMB, 1, size=sizes[file_id])[0].model_copy(
                    update={"file_id": file_id})
                cache.admit(record)
            assert cache.occupancy <= capacity

        expected, contents = _naive_lru(trace, sizes, capacity)
        assert outcomes == expected
        assert set(cache.area) == contents


@pytest.mark.parametrize("eviction", ["lru", "fifo"])
def test_pinned_files_survive_random_traffic(eviction):
    rng = np.random.default_rng(13)
    records = [record.model_copy(update={"size": int(rng.integers(1, 6))})
               for record in files_of(DataTier.TMB, 60)]
    cache = DiskCache("rac-1", 40, min_on_demand_fraction=0.25, eviction=eviction)
    limit = pin_limit(40, 0.25)
    pinned = set()

    for _ in range(10_000):
        record = records[int(rng.integers(len(records)))]
        roll = rng.random()
        evicted = []
        if roll < 0.05 and pinned:
            victim = sorted(pinned)[int(rng.integers(len(pinned)))]
            cache.unpin(victim)
            pinned.discard(victim)
        elif roll < 0.15 and record.file_id not in pinned:
            if cache.pinned_bytes + record.size > limit:
                with pytest.raises(PinnedOverflow):
                    cache.pin(record)
            else:
                evicted = cache.pin(record)
                pinned.add(record.file_id)
        elif roll < 0.55:
            cache.request(record.file_id)
        else:
            try:
                evicted = cache.admit(record)
            except FileLargerThanCache:
                assert record.size > cache.on_demand_area

        assert not pinned & set(evicted)
        assert set(cache.pinned) == pinned
        assert all(file_id in cache for file_id in pinned)
        assert not pinned & set(cache.area)
        assert cache.pinned_bytes <= limit
        assert cache.occupancy <= cache.capacity
