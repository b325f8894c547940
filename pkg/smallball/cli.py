#!/usr/bin/env python3
"""
Command-line runner for smallball
Run with: smallball <command> [options]   (or python -m smallball.cli)

Every sub-command can also be driven by a JSON configuration file
(--config); flags given on the command line override the file. When an
output file is given, a manifest (configuration echo, tool version, seed and
a timestamp on a line of its own) is written next to it.

Exit codes: 0 success (flagged or vacuous reports included), 1 computation
failure, 2 unknown command or invalid configuration.
"""

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from smallball import __version__
from smallball.config import SmallballConfig
from smallball.exceptions import InvalidDistributionError, InvalidParameterError, SmallballError
from smallball.models.experiment import COMMANDS, ExperimentConfig
from smallball.runner import ROW_FIELDS, execute, row_fields, run_sweep
from smallball.utils import dump_json, format_csv_fields, load_json

logger = logging.getLogger("smallball")

console = Console(stderr=True)

# Flags each sub-command accepts besides the common ones; all end up in params
COMMAND_FLAGS: Dict[str, List[str]] = {
    "q": ["tau", "method", "samples", "m"],
    "smooth": ["lambda", "delta", "t", "tol", "draws", "samples"],
    "lemma1": ["tau", "kappa", "delta", "form", "tol", "samples"],
    "thm1": ["tau", "kappa", "delta", "r", "m", "depth", "budget"],
    "fit": ["tol", "n-prime", "rank-cap", "volume-cap", "depth", "budget"],
    "thm2": ["tau", "eps", "theta", "A", "B", "rho", "n-prime", "rank-cap", "volume-cap", "ratio-threshold"],
    "thm3": ["tau", "delta", "taus", "deltas", "rank-cap", "depth"],
    "thm4": ["tau", "delta", "taus", "deltas", "A", "B", "rank-cap", "depth"],
    "beta": ["r", "m", "tau", "depth", "budget"],
    "plant": ["rank", "n", "d", "generators", "limits", "noise", "outlier-fraction"],
    "sweep": ["operation"],
}

INPUT_FLAGS = ["dist", "weights", "measure"]


def parse_value(text: str) -> Any:
    """Read a flag value: JSON when it parses (numbers, lists), the raw string otherwise ("1/3")."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _param_key(flag: str) -> str:
    return flag.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallball",
                                     description="Concentration functions and inverse Littlewood-Offord checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--datadir", help="Directory holding smallball.conf")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"run {command}")
        sub.add_argument("--config", help="JSON run configuration")
        sub.add_argument("--seed", type=int, help="Master seed")
        sub.add_argument("--output", "-o", help="Result file (stdout when omitted)")
        sub.add_argument("--format", choices=["json", "csv"], help="Output format")
        sub.add_argument("--threads", type=int, help="Sweep worker threads")
        sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="Extra parameter (repeatable)")
        for name in INPUT_FLAGS:
            sub.add_argument(f"--{name}", help=f"{name} file or built-in law name")
        for flag in COMMAND_FLAGS[command]:
            sub.add_argument(f"--{flag}", dest=f"param_{_param_key(flag)}", type=parse_value)
    return parser


def merge_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Combine the --config file with command-line flags (flags win)."""
    data: Dict[str, Any] = load_json(args.config) if args.config else {}
    data["command"] = args.command
    inputs = dict(data.get("inputs", {}))
    params = dict(data.get("params", {}))

    for name in INPUT_FLAGS:
        if getattr(args, name) is not None:
            inputs[name] = getattr(args, name)
    for key, value in vars(args).items():
        if key.startswith("param_") and value is not None:
            params[key[len("param_"):]] = value
    for item in args.set:
        if "=" not in item:
            raise InvalidParameterError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = parse_value(value)

    data["inputs"] = inputs
    data["params"] = params
    for key in ("seed", "output", "format"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    return data


def setup_logging(verbose: bool) -> None:
    handler = RichHandler(console=console, show_path=False)
    root = logging.getLogger("smallball")
    root.handlers = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def write_csv(rows: Sequence[Dict[str, Any]], fields: Sequence[str]) -> str:
    """Long-form CSV with a header row and LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow(format_csv_fields(*(row.get(f) for f in fields)))
    return buffer.getvalue()


def write_manifest(output: Path, config: ExperimentConfig) -> Path:
    """Write <output>.manifest.json; only the timestamp line differs between identical runs."""
    manifest = output.with_name(output.name + ".manifest.json")
    manifest.write_text(dump_json({
        "config": config.model_dump(mode="json"),
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "tool": "smallball",
        "version": __version__,
    }), encoding="utf-8")
    return manifest


def display_summary(command: str, rows: Sequence[Dict[str, Any]], limit: int = 20) -> None:
    """Render the first summary rows in a table on stderr."""
    table = Table(title=f"smallball {command}", box=box.ROUNDED)
    table.add_column("Inequality", style="cyan")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    for row in rows[:limit]:
        table.add_row(str(row.get("inequality_id") or "-"), str(row["quantity"]),
                      format_csv_fields(row["value"])[0])
    if len(rows) > limit:
        table.add_row("...", f"{len(rows) - limit} more rows", "")
    console.print(table)


def _execute(config: ExperimentConfig, settings: SmallballConfig, threads: Optional[int]) -> str:
    if config.command == "sweep":
        rows = run_sweep(config, threads, settings)
        display_summary(f"sweep of {config.params['operation']}", rows)
        if config.format == "json":
            return dump_json(rows)
        return write_csv(rows, row_fields(config))

    outcome = execute(config.command, config.inputs, config.params, config.seed, settings)
    display_summary(config.command, outcome.rows)
    if config.format == "csv":
        echo = json.dumps(config.params, sort_keys=True)
        rows = [{"command": config.command, **row, "params": echo} for row in outcome.rows]
        return write_csv(rows, ROW_FIELDS)
    return dump_json(outcome.record)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    setup_logging(args.verbose)
    try:
        config = ExperimentConfig.model_validate(merge_config(args))
    except (ValidationError, InvalidParameterError, OSError, json.JSONDecodeError) as e:
        logger.error(f"Invalid configuration: {e}")
        return 2

    settings = SmallballConfig(args.datadir)
    try:
        text = _execute(config, settings, args.threads)
    except (InvalidParameterError, InvalidDistributionError, ValidationError, OSError) as e:
        logger.error(f"Invalid input: {e}")
        return 2
    except SmallballError as e:
        logger.error(f"Computation failed: {e}")
        return 1

    if config.output:
        output = Path(config.output)
        output.write_text(text, encoding="utf-8")
        manifest = write_manifest(output, config)
        logger.info(f"Wrote {output} and {manifest}")
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
