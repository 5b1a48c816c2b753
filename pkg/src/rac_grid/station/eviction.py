"""Eviction strategies for the on-demand disk area."""

from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Dict, Iterator, Tuple, Type


class EvictionPolicy(ABC):
    """Ordered set of (file_id, size) entries with a victim choice."""

    name = "base"

    def __init__(self) -> None:
        self._entries: "OrderedDict[str, int]" = OrderedDict()

    def __contains__(self, file_id: str) -> bool:
        return file_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def items(self) -> Iterator[Tuple[str, int]]:
        return iter(self._entries.items())

    def size_of(self, file_id: str) -> int:
        return self._entries[file_id]

    def insert(self, file_id: str, size: int) -> None:
        self._entries[file_id] = size

    def remove(self, file_id: str) -> int:
        return self._entries.pop(file_id)

    def victim(self) -> str:
        return next(iter(self._entries))

    @abstractmethod
    def touch(self, file_id: str) -> None:
        """Record a hit on ``file_id``."""


class LruPolicy(EvictionPolicy):
    """Least recently used entry goes first."""

    name = "lru"

    def touch(self, file_id: str) -> None:
        self._entries.move_to_end(file_id)


class FifoPolicy(EvictionPolicy):
    """Oldest admission goes first; hits do not refresh."""

    name = "fifo"

    def touch(self, file_id: str) -> None:
        pass


EVICTION_POLICIES: Dict[str, Type[EvictionPolicy]] = {
    LruPolicy.name: LruPolicy,
    FifoPolicy.name: FifoPolicy,
}


def make_policy(name: str) -> EvictionPolicy:
    try:
        return EVICTION_POLICIES[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown eviction policy {name!r}; choose from {sorted(EVICTION_POLICIES)}") from None
