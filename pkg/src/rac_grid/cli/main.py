"""rac-grid command line: validate, plan, simulate and report."""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from loguru import logger
from pydantic import ByteSize, TypeAdapter, ValidationError

from rac_grid import __version__
from rac_grid.cli.bundle import Report, ReportKind, read_report, render_summary, write_bundle
from rac_grid.cli.scenario_file import ScenarioFile, load_scenario
from rac_grid.planner.capacity import plan_capacity
from rac_grid.planner.storage import event_totals, pinned_bytes_by_station
from rac_grid.shared.errors import RacGridError, ScenarioParseError, ValidationFailed
from rac_grid.shared.log_config import configure_logging
from rac_grid.shared.models import DataTier, generate_files
from rac_grid.shared.settings import settings
from rac_grid.shared.tracing import flush, traced
from rac_grid.sim.grid import scenario_violations, simulate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2

_BYTES = TypeAdapter(ByteSize)


def _output_dir(args: argparse.Namespace) -> Path:
    return Path(args.out or settings.output_dir)


def _parse_overrides(values: Sequence[str]) -> Dict[DataTier, int]:
    overrides: Dict[DataTier, int] = {}
    for value in values:
        tier, _, count = value.partition("=")
        try:
            overrides[DataTier(tier.strip().upper())] = int(count)
        except ValueError:
            raise ScenarioParseError(f"bad --events-override {value!r}; expected TIER=EVENTS",
                                     field="--events-override") from None
    return overrides


def cmd_validate(args: argparse.Namespace) -> int:
    scenario_file = load_scenario(args.scenario)
    violations = scenario_violations(scenario_file.to_scenario())
    for violation in violations:
        print(violation)
    if violations:
        logger.error(f"❌ {len(violations)} violation(s) in {args.scenario}")
        return EXIT_FAILED
    logger.info(f"✅ {args.scenario} is valid")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    scenario_file = load_scenario(args.scenario)
    scenario = scenario_file.to_scenario()
    violations = scenario_violations(scenario)
    if violations:
        raise ValidationFailed(violations)

    counts = event_totals(scenario.datasets)
    counts.update(_parse_overrides(args.events_override))
    try:
        rate = None if args.rate is None else int(_BYTES.validate_python(args.rate))
    except ValidationError:
        raise ScenarioParseError(f"bad --rate {args.rate!r}", field="--rate") from None
    plan = plan_capacity(scenario.name, counts, scenario.policy, scenario.topology, scenario_file.resources,
                         years=args.years, rate=rate, requirement=args.requirement_ghz)

    report = Report(kind=ReportKind.PLAN, scenario=scenario.name, plan=plan)
    write_bundle(_output_dir(args), report)
    print(render_summary(report), end="")
    if plan.violations and args.strict:
        logger.error(f"❌ {len(plan.violations)} fit finding(s) with --strict")
        return EXIT_FAILED
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario_file: ScenarioFile = load_scenario(args.scenario)
    scenario = scenario_file.to_scenario()
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.check_invariants:
        scenario = scenario.model_copy(update={
            "simulation": scenario.simulation.model_copy(update={"check_invariants": True}),
        })

    result = simulate(scenario)
    files = [f for d in scenario.datasets for f in generate_files(d, int(scenario.simulation.file_size))]
    planned = pinned_bytes_by_station(files, scenario.policy, scenario.topology)
    plan = plan_capacity(scenario.name, event_totals(scenario.datasets), scenario.policy, scenario.topology,
                         scenario_file.resources)
    report = Report(kind=ReportKind.SIMULATION, scenario=scenario.name, metrics=result.metrics, plan=plan,
                    planned_pinned_bytes=planned)
    directory = write_bundle(_output_dir(args), report, result.catalog)
    print(f"Bundle written to {directory}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    try:
        report = read_report(directory)
    except FileNotFoundError:
        logger.error(f"❌ No report.json in {directory}")
        return EXIT_FAILED
    except ValidationError as exc:
        raise ScenarioParseError(str(exc), field="report.json") from None
    text = render_summary(report)
    (directory / "summary.txt").write_text(text, encoding="utf-8", newline="\n")
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rac-grid", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="loguru level (default from RAC_GRID_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="check a scenario file")
    validate.add_argument("scenario", help="scenario file or bundled scenario name")
    validate.set_defaults(handler=cmd_validate)

    plan = commands.add_parser("plan", help="storage, CPU and fit report")
    plan.add_argument("scenario")
    plan.add_argument("--years", type=int, default=0, help="growth projection horizon")
    plan.add_argument("--rate", default=None, help="CAC tape growth per year, e.g. 1PB")
    plan.add_argument("--events-override", action="append", default=[], metavar="TIER=EVENTS")
    plan.add_argument("--requirement-ghz", type=float, default=None)
    plan.add_argument("--strict", action="store_true", help="exit 1 when any station does not fit")
    plan.add_argument("--out", default=None, help="bundle directory (default RAC_GRID_OUTPUT_DIR)")
    plan.set_defaults(handler=cmd_plan)

    sim = commands.add_parser("simulate", help="run the discrete-event simulation")
    sim.add_argument("scenario")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument("--check-invariants", action="store_true")
    sim.add_argument("--out", default=None)
    sim.set_defaults(handler=cmd_simulate)

    report = commands.add_parser("report", help="re-render summary.txt from a bundle")
    report.add_argument("directory")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    logger.info(f"🚀 rac-grid {args.command}")
    try:
        with traced(f"cli.{args.command}", {"command": args.command}):
            return args.handler(args)
    except ScenarioParseError as exc:
        logger.error(f"❌ Cannot parse scenario at {exc.location()}: {exc.message}")
        return EXIT_PARSE
    except ValidationError as exc:
        logger.error(f"❌ Invalid scenario: {exc}")
        return EXIT_PARSE
    except OSError as exc:
        logger.error(f"❌ {exc}")
        return EXIT_PARSE
    except ValidationFailed as exc:
        for violation in exc.violations:
            print(violation)
        logger.error(f"❌ {exc}")
        return EXIT_FAILED
    except RacGridError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return EXIT_FAILED
    finally:
        flush()


if __name__ == "__main__":
    sys.exit(main())
