"""TOML scenario files: schema, parsing with positioned errors, and serialisation."""

import re
import tomllib
from importlib import resources
from pathlib import Path
from typing import List, Union

import tomli_w
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from rac_grid.planner.resources import ResourceEntry
from rac_grid.policy.placement import PolicyOverrides, apply_overrides, default_policy
from rac_grid.shared.errors import ScenarioParseError
from rac_grid.shared.models import Dataset, Topology
from rac_grid.sim.scenario import Scenario, SimulationConfig, WorkloadSpec

BUNDLED = ("run2a", "run2a_mc", "gridka", "toy2region")

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


class ScenarioFile(BaseModel):
    """Everything a scenario file may contain, section by section."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "scenario"
    topology: Topology
    policy_overrides: PolicyOverrides = Field(default_factory=PolicyOverrides)
    datasets: List[Dataset] = Field(default_factory=list)
    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    simulation: SimulationConfig
    resources: List[ResourceEntry] = Field(default_factory=list)

    def to_scenario(self) -> Scenario:
        return Scenario(
            name=self.name,
            topology=self.topology,
            policy=apply_overrides(default_policy(), self.policy_overrides),
            datasets=tuple(self.datasets),
            workload=self.workload,
            simulation=self.simulation,
        )


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def parse_scenario(text: str) -> ScenarioFile:
    """Parse TOML text into a ScenarioFile; errors carry a line/column or a field path."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        column = getattr(exc, "colno", None)
        if line is None:
            match = _TOML_POSITION.search(str(exc))
            if match:
                line, column = int(match.group(1)), int(match.group(2))
        raise ScenarioParseError(str(exc), line=line, column=column) from None
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        details = "; ".join(f"{_field_path(e['loc'])}: {e['msg']}" for e in exc.errors())
        raise ScenarioParseError(details, field=_field_path(first["loc"])) from None


def dump_scenario(scenario_file: ScenarioFile) -> str:
    return tomli_w.dumps(scenario_file.model_dump(mode="json", exclude_none=True))


def resolve_path(path: Union[str, Path]) -> Path:
    """A readable file path, or the bundled scenario of that name."""
    candidate = Path(path)
    if candidate.exists() or str(path) not in BUNDLED:
        return candidate
    return Path(str(resources.files("rac_grid.scenarios").joinpath(f"{path}.toml")))


def load_scenario(path: Union[str, Path]) -> ScenarioFile:
    source = resolve_path(path)
    logger.info(f"📥 Loading scenario {source}")
    return parse_scenario(source.read_text(encoding="utf-8"))


def save_scenario(scenario_file: ScenarioFile, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_scenario(scenario_file), encoding="utf-8")
