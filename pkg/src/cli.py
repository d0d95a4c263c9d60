"""
Command-line entry point. Every feature package mounts its subcommands here;
reports go to stdout (or --out) and logs to stderr.
"""
from pathlib import Path
import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from src import __version__
from src.characters.controller import router as characters_router
from src.coeffs.controller import router as coeffs_router
from src.config import settings
from src.exceptions.cli import ConfigError
from src.exceptions.handlers import run_with_handlers
from src.expsums.controller import router as expsums_router
from src.jutila.controller import router as jutila_router
from src.lfun.controller import router as lfun_router
from src.logging import LogLevels, configure_logging
from src.schemas.config import ExperimentConfig
from src.schemas.report import Report
from src.shifted.controller import router as shifted_router
from src.utils.pool import get_default_threads, set_default_threads
from src.utils.router import Command, missing_options
from src.voronoi.controller import router as voronoi_router

logger = logging.getLogger(__name__)

ROUTERS = [
    characters_router,
    expsums_router,
    coeffs_router,
    voronoi_router,
    jutila_router,
    shifted_router,
    lfun_router,
]


def register_commands(subparsers: argparse._SubParsersAction) -> dict[str, argparse.ArgumentParser]:
    parsers = {}
    for router in ROUTERS:
        parsers.update(router.mount(subparsers))
    return parsers


def find_command(name: str) -> Command:
    return next(command for router in ROUTERS if (command := router.find(name)) is not None)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="workbench",
        description="Numerical experiments on shifted convolution sums and twisted L-functions.",
    )
    parser.add_argument("--format", choices=["json", "csv"], default=settings.OUTPUT_FORMAT, dest="output_format")
    parser.add_argument("--out", default=None, dest="output_path", help="Write the report here instead of stdout.")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: WORKBENCH_THREADS).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for sampled orderings.")
    parser.add_argument("--config", default=None, dest="config_path", help="JSON file with default values.")
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL.upper(),
        type=str.upper,
        choices=[level.value for level in LogLevels],
        dest="log_level",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    return parser, register_commands(subparsers)


def parse_arguments(argv: list[str]) -> argparse.Namespace:
    """
    Parses twice when --config is given: the file's values become parser
    defaults, so flags on the command line still win.
    """
    parser, parsers = build_parser()
    args = parser.parse_args(argv)
    if args.config_path:
        config = ExperimentConfig.from_file(args.config_path)
        parser.set_defaults(**config.global_defaults())
        parsers[args.command].set_defaults(**config.command_defaults(args.command))
        args = parser.parse_args(argv)
    missing = missing_options(find_command(args.command), args)
    if missing:
        raise ConfigError(
            f"{args.command} needs {', '.join(missing)} on the command line or in --config",
            command=args.command,
            missing=missing,
        )
    return args


def resolved_config(args: argparse.Namespace) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key != "handler"}


def _plain(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def render_json(report: Report) -> str:
    return json.dumps(report.model_dump(), indent=2, sort_keys=True, default=_plain)


def render_csv(report: Report) -> str:
    """The report rows as CSV; nested values are embedded as JSON."""
    rows = json.loads(json.dumps(report.model_dump()["rows"], default=_plain))
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {key: json.dumps(value) if isinstance(value, (dict, list)) else value for key, value in row.items()}
            )
    return buffer.getvalue().rstrip("\n")


class ReportWriter:
    def __init__(self):
        self.path: str | None = None

    def __call__(self, text: str) -> None:
        if self.path is None:
            sys.stdout.write(text + "\n")
            sys.stdout.flush()
            return
        Path(self.path).write_text(text + "\n", encoding="utf-8")


def run(argv: list[str] | None = None) -> int:
    """
    Runs one subcommand and returns the exit status: 0 on success, 1 for
    module errors, 2 for usage and configuration errors, 3 for failed
    tolerance checks.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    writer = ReportWriter()

    def execute() -> int:
        args = parse_arguments(argv)
        writer.path = args.output_path
        configure_logging(args.log_level)
        if args.threads is not None:
            set_default_threads(args.threads)
        logger.info(f"Running {args.command}")
        report = args.handler(args, resolved_config(args))
        writer(render_csv(report) if args.output_format == "csv" else render_json(report))
        return 0

    threads = get_default_threads()
    try:
        return run_with_handlers(execute, writer)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    finally:
        set_default_threads(threads)
