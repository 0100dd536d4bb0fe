"""Output, logging, and file helpers shared by the CLI and the pipeline."""

import csv
import io
import json
import logging
import math
import sys
from datetime import datetime
from pathlib import Path

from .bell_config import bell_config
from .command_errors import InputError


LOG_DIR_NAME = "multibell_logs"
LOG_HANDLER_NAME = "multibell-run-log"


# --- Output and logging ---


def write_output(output, write_to_console=True, skip_logging=False):
    """Write progress output to the appropriate places.

    Progress goes to stderr, so results written to stdout stay machine-readable.
    Each line is also logged when logging is active for this run.
    """
    output_str = str(output)
    if write_to_console:
        print(output_str, file=sys.stderr)
    if not skip_logging:
        log_info(output_str)


def log_info(output):
    """Log each line of output at INFO level, if this run is being logged."""
    if not bell_config.log_output:
        return
    for line in output.splitlines():
        logging.info(line)


def start_logging(out_dir, argv=None):
    """Set up a log file for this run, in out_dir/multibell_logs/.

    Returns:
        Path to the log file, or None if logging is disabled.
    """
    if not bell_config.log_output or bell_config.unit_testing:
        bell_config.log_output = False
        return None

    log_dir = Path(out_dir) / LOG_DIR_NAME
    log_dir.mkdir(parents=True, exist_ok=True)

    timestamp = datetime.now().strftime("%Y-%m-%d-%H%M%S")
    log_path = log_dir / f"multibell_{timestamp}.log"

    # One run log at a time on the root logger.
    stop_logging()
    root = logging.getLogger()
    handler = logging.FileHandler(log_path, encoding="utf-8")
    handler.set_name(LOG_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO)

    bell_config.log_path = log_path
    log_info("Logging run of `multibell`...")
    if argv is not None:
        log_info(f"CLI args: {' '.join(argv)}")
    return log_path


def stop_logging():
    """Close the run's log file handler, if any."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == LOG_HANDLER_NAME:
            root.removeHandler(handler)
            handler.close()


# --- JSON ---


def _format_number(x):
    """Format a float with 17 significant digits, so it reads back bit-for-bit."""
    if not math.isfinite(x):
        raise InputError(f"Cannot serialize non-finite number {x!r} to JSON.")
    text = format(x, ".17g")
    # Keep floats recognizable as floats: -1.0 renders as -1.0, not -1.
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def to_json_text(obj, indent=2):
    """Serialize obj to JSON text: sorted keys, 17-significant-digit floats.

    Supports dicts with string keys, lists and tuples, strings, bools, ints, floats,
    numpy scalars, and None.
    """

    def render(value, level):
        pad = " " * (indent * (level + 1))
        closing = " " * (indent * level)
        if value is None or isinstance(value, (bool, str)):
            return json.dumps(value)
        if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
            value = value.item()
            if isinstance(value, bool):
                return json.dumps(value)
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return _format_number(value)
        if isinstance(value, dict):
            if not value:
                return "{}"
            items = [
                f"{pad}{json.dumps(str(k))}: {render(value[k], level + 1)}"
                for k in sorted(value, key=str)
            ]
            return "{\n" + ",\n".join(items) + "\n" + closing + "}"
        if isinstance(value, (list, tuple)):
            if not value:
                return "[]"
            items = [f"{pad}{render(v, level + 1)}" for v in value]
            return "[\n" + ",\n".join(items) + "\n" + closing + "]"
        raise InputError(f"Cannot serialize {type(value).__name__} to JSON.")

    return render(obj, 0) + "\n"


def write_json(path, obj):
    """Write obj as JSON to path. Returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json_text(obj), encoding="utf-8")
    return path


def read_json(path):
    """Read a JSON file, turning I/O and parse failures into InputError."""
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"File not found: {path.as_posix()}")
    except json.JSONDecodeError as e:
        raise InputError(f"Could not parse {path.as_posix()} as JSON: {e}")


# --- CSV ---


def write_csv(path, header, rows):
    """Write rows under header to a CSV file. Returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def csv_text(header, rows):
    """Render rows under header as CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_csv_cell(cell) for cell in row] for row in rows)
    return buffer.getvalue()


def _csv_cell(cell):
    if isinstance(cell, float):
        return _format_number(cell)
    return str(cell)


def read_csv(path, required_columns):
    """Read a CSV file into a list of dicts, checking the header.

    Raises:
        InputError: If the file is missing or lacks a required column.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            columns = reader.fieldnames or []
            missing = [c for c in required_columns if c not in columns]
            if missing:
                raise InputError(
                    f"{path.as_posix()} is missing column(s): {', '.join(missing)}"
                )
            return list(reader)
    except FileNotFoundError:
        raise InputError(f"File not found: {path.as_posix()}")
