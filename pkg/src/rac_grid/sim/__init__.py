from rac_grid.sim.events import EventKind, EventQueue, SimEvent
from rac_grid.sim.grid import GridSimulation, SimulationResult, TransferPurpose, run, scenario_violations, simulate
from rac_grid.sim.metrics import Metrics, jobs_csv, links_csv, stations_csv
from rac_grid.sim.scenario import Job, JobKind, RegionWorkload, Scenario, SimulationConfig, WorkloadSpec

__all__ = [
    "EventKind",
    "EventQueue",
    "GridSimulation",
    "Job",
    "JobKind",
    "Metrics",
    "RegionWorkload",
    "Scenario",
    "SimEvent",
    "SimulationConfig",
    "SimulationResult",
    "TransferPurpose",
    "WorkloadSpec",
    "jobs_csv",
    "links_csv",
    "run",
    "scenario_violations",
    "simulate",
    "stations_csv",
]
