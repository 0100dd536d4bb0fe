"""Command-line interface for multibell.

Results go to stdout in the requested format; progress and errors go to stderr and,
unless --no-logging is used, to a log file under <out-dir>/multibell_logs/.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

from . import __version__
from . import run_messages
from .bell_config import bell_config
from .catalog import LISTED_REFERENCES, catalog_listing, resolve_inequality
from .command_errors import InputError, MultibellError
from .epr2 import local_content_bound, state_plmax_curve, werner_plmax_curve
from .experiment import (
    COUNTS_HEADER,
    DEFAULT_DURATION,
    DEFAULT_PAIR_RATE,
    Estimate,
    SourceConfig,
    bell_schedule,
    bell_value_from_counts,
    expected_counts,
    records_from_rows,
    records_to_rows,
    schedule_from_json,
    schedule_to_json,
    simulate_counts,
)
from .inequality import SettingsVector, chained_order, evaluate, local_bound_bruteforce
from .optimizer import DEFAULT_RESTARTS, optimize_settings, standard_settings
from .pipeline import SUMMARY_HEADER, PipelineRunner, load_manifest, sigma_distance
from .qstate import load_state, werner_visibility
from .randomness import randomness_curve, report
from .tomography import estimate_state, tomography_schedule
from .utils import (
    csv_text,
    log_info,
    read_csv,
    read_json,
    start_logging,
    stop_logging,
    to_json_text,
    write_csv,
    write_json,
    write_output,
)


FORMATS = ("json", "csv", "table")
# Digits shown in human-readable tables.
TABLE_DIGITS = 4


# --- Output ---


def _flatten(data, prefix=""):
    """Nested dicts as (dotted.key, value) pairs; lists are kept whole."""
    items = []
    for key in sorted(data):
        value = data[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, prefix=f"{name}."))
        else:
            items.append((name, value))
    return items


def _table_cell(value):
    if isinstance(value, float):
        return f"{value:.{TABLE_DIGITS}f}"
    if isinstance(value, (list, tuple)):
        return ", ".join(_table_cell(v) for v in value)
    return "" if value is None else str(value)


def _csv_value(value):
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return "" if value is None else value


def emit(text):
    """Write a result to stdout, and to the log."""
    sys.stdout.write(text)
    log_info(text)


def _render_table(header, rows, title=None):
    table = Table(title=title)
    for column in header:
        table.add_column(str(column))
    for row in rows:
        table.add_row(*(_table_cell(cell) for cell in row))
    console = Console(file=sys.stdout, width=160)
    console.print(table)


def emit_record(data, fmt, title=None):
    """Output one result object."""
    if fmt == "json":
        emit(to_json_text(data))
        return
    rows = _flatten(data)
    if fmt == "csv":
        emit(csv_text(("key", "value"), [(k, _csv_value(v)) for k, v in rows]))
    else:
        _render_table(("key", "value"), rows, title=title)


def emit_rows(header, rows, fmt, title=None):
    """Output a list of rows sharing one header."""
    if fmt == "json":
        emit(to_json_text([dict(zip(header, row)) for row in rows]))
    elif fmt == "csv":
        emit(csv_text(header, [[_csv_value(cell) for cell in row] for row in rows]))
    else:
        _render_table(header, rows, title=title)


# --- Commands ---


def _seed(args):
    """The command's --seed if given, else the global one."""
    return bell_config.seed if args.command_seed is None else args.command_seed


def cmd_catalog(args, fmt):
    """List the built-in inequalities with their brute-force-verified local bounds."""
    if args.inequality:
        table = resolve_inequality(args.inequality)
        data = table.to_dict()
        data["bruteforce_bound"] = local_bound_bruteforce(table)
        emit_record(data, fmt, title=table.name)
        return

    header = ("name", "n", "local_bound", "bruteforce_bound", "verified")
    rows = [[row[h] for h in header] for row in catalog_listing(LISTED_REFERENCES)]
    emit_rows(header, rows, fmt, title="Inequality catalog")


def cmd_simulate(args, fmt):
    state = load_state(args.state)
    if args.schedule == "tomography":
        schedule = tomography_schedule()
    else:
        schedule = schedule_from_json(read_json(args.schedule))
    config = SourceConfig(pair_rate=args.rate, duration=args.duration, seed=_seed(args))

    if args.expected:
        records = expected_counts(state, config, schedule)
    else:
        records = simulate_counts(state, config, schedule)

    path = write_csv(args.out, COUNTS_HEADER, records_to_rows(records))
    write_output(run_messages.wrote_file(path.as_posix()))
    emit_record(
        {"out": path.as_posix(), "pairs": len(records), "source": config.to_dict()},
        fmt,
        title="simulate",
    )


def cmd_tomography(args, fmt):
    records = records_from_rows(read_csv(args.counts, COUNTS_HEADER))
    result = estimate_state(records)

    out = Path(args.out)
    write_json(out, result.state.to_dict())
    sidecar = out.with_name(f"{out.stem}.sigmas.json")
    write_json(
        sidecar,
        {
            "sigmas": result.sigmas_dict(),
            "physical": result.physical,
            "clamped": list(result.clamped),
        },
    )
    write_output(run_messages.wrote_file(out.as_posix()))
    write_output(run_messages.wrote_file(sidecar.as_posix()))
    emit_record(result.to_dict(), fmt, title="tomography")


def cmd_optimize(args, fmt):
    table = resolve_inequality(args.inequality)
    state = load_state(args.state)
    result = optimize_settings(table, state, restarts=args.restarts, seed=_seed(args))
    data = result.to_dict()
    data["inequality"] = table.name
    if args.schedule_out:
        schedule = bell_schedule(table, result.settings)
        path = write_json(args.schedule_out, schedule_to_json(schedule))
        write_output(run_messages.wrote_file(path.as_posix()))
    emit_record(data, fmt, title=f"optimize {table.name}")


def _settings_for(args, table, state):
    if args.settings == "standard":
        return standard_settings(table, seed=_seed(args))
    if args.settings == "optimized":
        return optimize_settings(table, state, restarts=args.restarts, seed=_seed(args)).settings
    return SettingsVector.from_dict(read_json(args.settings))


def cmd_evaluate(args, fmt):
    table = resolve_inequality(args.inequality)
    state = load_state(args.state)
    settings = _settings_for(args, table, state)
    settings.check_against(table)

    data = {
        "inequality": table.name,
        "local_bound": table.local_bound,
        "value": evaluate(table, state, settings),
        "settings": settings.to_dict(),
    }
    if args.counts:
        records = records_from_rows(read_csv(args.counts, COUNTS_HEADER))
        measured = bell_value_from_counts(table, settings, records)
        data["measured"] = measured.to_dict()
        if measured.sigma > 0:
            data["sigma_distance"] = sigma_distance(measured, table.local_bound)
    emit_record(data, fmt, title=f"evaluate {table.name}")


def cmd_epr2(args, fmt):
    table = resolve_inequality(args.inequality)
    n = chained_order(table)
    if n is None:
        raise InputError(f"Local-content bounds need a chained inequality, got {table.name!r}.")
    bound = local_content_bound(n, Estimate(args.observed, args.sigma))
    data = bound.to_dict()
    data["inequality"] = table.name
    emit_record(data, fmt, title="epr2")


def cmd_epr2_curve(args, fmt):
    n_range = range(args.nmin, args.nmax + 1)
    if args.werner_fit:
        if not args.state:
            raise InputError("--werner-fit needs --state.")
        visibility = werner_visibility(load_state(args.state))
        write_output(f"Werner fit: V = {visibility:.4f}")
        curve = werner_plmax_curve(visibility, n_range)
    elif args.state:
        state = load_state(args.state)
        curve = state_plmax_curve(state, n_range, restarts=args.restarts, seed=_seed(args))
    else:
        curve = werner_plmax_curve(args.visibility, n_range)
    emit_rows(("N", "p_L_max"), curve, fmt, title="p_L_max")


def cmd_randomness(args, fmt):
    table = resolve_inequality(args.inequality)
    result = report(table, Estimate(args.observed, args.sigma))
    data = result.to_dict()
    data["uncertainty"] = "finite-difference propagation of the observed sigma"
    emit_record(data, fmt, title=f"randomness {table.name}")


def cmd_randomness_curve(args, fmt):
    table = resolve_inequality(args.inequality)
    curve = randomness_curve(table, args.points)
    emit_rows(("observed_value", "p_star_ns"), curve, fmt, title=f"P*_NS {table.name}")


def cmd_pipeline(args, fmt):
    manifest = load_manifest(args.manifest)
    if args.out_dir is not None:
        manifest = dataclasses.replace(manifest, out_dir=Path(args.out_dir))

    runner = PipelineRunner(manifest, argv=args.argv)
    outcomes = runner.run()

    rows = [[row[h] for h in SUMMARY_HEADER] for row in (o.summary_row() for o in outcomes)]
    emit_rows(SUMMARY_HEADER, rows, fmt, title="Bell analysis")
    write_output(
        run_messages.success_msg(
            Path(manifest.out_dir).as_posix(), len(outcomes), log_output=bell_config.log_output
        )
    )


# --- Parser ---


# Formats used when --format is not given.
DEFAULT_FORMATS = {
    "epr2-curve": "csv",
    "randomness-curve": "csv",
    "pipeline": "table",
    "catalog": "table",
}


def _add_seed_argument(parser):
    parser.add_argument(
        "--seed",
        dest="command_seed",
        type=int,
        default=None,
        help="Seed for this command; defaults to the global --seed.",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="multibell",
        description="Analysis of multi-setting Bell experiments.",
    )
    parser.add_argument("--version", action="version", version=f"multibell {__version__}")
    parser.add_argument("--seed", type=int, default=1, help="Seed for simulation and restarts.")
    parser.add_argument("--out-dir", default=None, help="Directory for logs and pipeline results.")
    parser.add_argument("--format", choices=FORMATS, default=None, help="Output format.")
    parser.add_argument(
        "--no-logging", action="store_true", help="Don't write a log file for this run."
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("catalog", help="List built-in inequalities.")
    p.add_argument("--inequality", help="Show one inequality, e.g. chained:7.")
    p.set_defaults(handler=cmd_catalog)

    p = subparsers.add_parser("simulate", help="Simulate coincidence counts.")
    p.add_argument("--state", required=True, help="State JSON, table-i, singlet, or werner:V.")
    p.add_argument(
        "--schedule", required=True, help="Schedule JSON, or 'tomography' for the 16 pairs."
    )
    p.add_argument("--rate", type=float, default=DEFAULT_PAIR_RATE, help="Pairs per second.")
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION, help="Seconds per pair.")
    p.add_argument("--expected", action="store_true", help="Write rounded means, no sampling.")
    p.add_argument("--out", required=True, help="Counts CSV to write.")
    _add_seed_argument(p)
    p.set_defaults(handler=cmd_simulate)

    p = subparsers.add_parser("tomography", help="Estimate the state from counts.")
    p.add_argument("--counts", required=True, help="Counts CSV.")
    p.add_argument("--out", required=True, help="State JSON to write.")
    p.set_defaults(handler=cmd_tomography)

    p = subparsers.add_parser("optimize", help="Optimize settings for a state.")
    p.add_argument("--inequality", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--schedule-out", help="Write the Bell-run schedule JSON for the settings.")
    _add_seed_argument(p)
    p.set_defaults(handler=cmd_optimize)

    p = subparsers.add_parser("evaluate", help="Evaluate an inequality at given settings.")
    p.add_argument("--inequality", required=True)
    p.add_argument("--state", required=True)
    p.add_argument(
        "--settings",
        default="optimized",
        help="'standard', 'optimized', or a settings JSON file.",
    )
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--counts", help="Counts CSV measured at these settings.")
    _add_seed_argument(p)
    p.set_defaults(handler=cmd_evaluate)

    p = subparsers.add_parser("epr2", help="Local-content bound from a chained value.")
    p.add_argument("--inequality", required=True)
    p.add_argument("--observed", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.set_defaults(handler=cmd_epr2)

    p = subparsers.add_parser("epr2-curve", help="p_L_max against N.")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--visibility", type=float, help="Werner visibility V.")
    source.add_argument("--state", help="Optimize chained values for this state instead.")
    p.add_argument(
        "--werner-fit",
        action="store_true",
        help="With --state, use the Werner curve at the state's fitted visibility.",
    )
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    _add_seed_argument(p)
    p.set_defaults(handler=cmd_epr2_curve)

    p = subparsers.add_parser("randomness", help="Randomness bounds from an observed value.")
    p.add_argument("--inequality", required=True)
    p.add_argument("--observed", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.set_defaults(handler=cmd_randomness)

    p = subparsers.add_parser("randomness-curve", help="P*_NS against the observed value.")
    p.add_argument("--inequality", required=True)
    p.add_argument("--points", type=int, default=21)
    p.set_defaults(handler=cmd_randomness_curve)

    p = subparsers.add_parser("pipeline", help="Run the full analysis from a manifest.")
    p.add_argument("manifest", help="Run manifest, TOML.")
    p.set_defaults(handler=cmd_pipeline)

    return parser


def main(argv=None):
    """Run the CLI. Returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv

    bell_config.seed = args.seed
    bell_config.out_dir = Path(args.out_dir) if args.out_dir is not None else Path(".")
    bell_config.output_format = args.format or DEFAULT_FORMATS.get(args.command, "json")
    bell_config.log_output = not args.no_logging
    start_logging(bell_config.out_dir, argv=["multibell", *argv])

    try:
        args.handler(args, bell_config.output_format)
    except MultibellError as e:
        write_output(e.message)
        return e.exit_code
    finally:
        stop_logging()
    return 0


if __name__ == "__main__":
    sys.exit(main())
