from rac_grid.catalog.dan import DanConfig, DanProxy, DanResult, ServedBy, dan_query
from rac_grid.catalog.replicas import Replica, ReplicaCatalog, SourceChoice

__all__ = [
    "DanConfig",
    "DanProxy",
    "DanResult",
    "Replica",
    "ReplicaCatalog",
    "ServedBy",
    "SourceChoice",
    "dan_query",
]
