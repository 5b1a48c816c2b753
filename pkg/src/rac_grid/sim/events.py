"""Deterministic event queue ordered by (time, sequence)."""

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Optional


class EventKind(str, Enum):
    FILE_PRODUCED = "FileProduced"
    JOB_SUBMITTED = "JobSubmitted"
    TRANSFER_COMPLETE = "TransferComplete"
    STAGE_COMPLETE = "StageComplete"
    DB_QUERY = "DbQuery"
    JOB_COMPLETED = "JobCompleted"


@dataclass(order=True)
class SimEvent:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    payload: Any = field(default=None, compare=False)
    scheduled_at: float = field(default=0.0, compare=False)


class EventQueue:
    """Min-heap of events; sequence numbers are unique and break time ties FIFO."""

    def __init__(self, start_time: float = 0.0):
        self._clock = start_time
        self._heap: List[SimEvent] = []
        self._sequence = itertools.count()
        self.processed = 0

    @property
    def now(self) -> float:
        return self._clock

    def __len__(self) -> int:
        return len(self._heap)

    def schedule_at(self, time: float, kind: EventKind, payload: Any = None) -> SimEvent:
        if time < self._clock:
            raise ValueError(f"cannot schedule {kind.value} at {time} before now ({self._clock})")
        event = SimEvent(time, next(self._sequence), kind, payload, scheduled_at=self._clock)
        heapq.heappush(self._heap, event)
        return event

    def schedule_in(self, delay: float, kind: EventKind, payload: Any = None) -> SimEvent:
        if delay < 0:
            raise ValueError("delay must be non-negative")
        return self.schedule_at(self._clock + delay, kind, payload)

    def peek_time(self) -> Optional[float]:
        return self._heap[0].time if self._heap else None

    def pop(self, until: Optional[float] = None) -> Optional[SimEvent]:
        """Next event, advancing the clock; None when empty or past ``until``."""
        if not self._heap or (until is not None and self._heap[0].time > until):
            return None
        event = heapq.heappop(self._heap)
        self._clock = event.time
        self.processed += 1
        return event
