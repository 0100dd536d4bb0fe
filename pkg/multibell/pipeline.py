"""Runs the full analysis of a simulated multi-setting Bell experiment.

The run follows the experiment: partial tomography of the source, settings optimized on
the reconstructed state, one simulated Bell run per inequality at those settings, then
the derived quantities (distance from the local bound in sigmas, noise tolerance, local
content, randomness).

Stages run in order; inequalities within the analysis stage run concurrently and are
assembled in manifest order.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np
import tomli

from . import __version__
from . import run_messages
from .catalog import resolve_inequality
from .command_errors import InputError, PipelineStageError, UnphysicalStateError
from .epr2 import local_content_bound
from .experiment import (
    SourceConfig,
    bell_schedule,
    bell_value_from_counts,
    polarizer_setting_count,
    simulate_counts,
)
from .inequality import chained_order, evaluate, noise_tolerance
from .optimizer import DEFAULT_RESTARTS, optimize_settings
from .polytope import ns_max
from .qstate import COEFFICIENT_NAMES, load_state, nearest_physical_mixture
from .randomness import RANGE_TOL, certified_bits, report
from .tomography import estimate_state, tomography_schedule
from .utils import csv_text, to_json_text, write_output


logger = logging.getLogger(__name__)

STATE_SHORTCUTS = ("table-i", "singlet")
SUMMARY_HEADER = (
    "inequality",
    "N",
    "I_L",
    "I_tom",
    "I_exp",
    "sigma",
    "sigma_distance",
    "p_noise",
    "p_L_max",
    "p_star_ns",
    "hmin_ns",
    "p_star_q",
    "hmin_q",
)


def sigma_distance(i_exp, local_bound):
    """Distance of an estimate above the local bound, in standard deviations.

    Raises:
        InputError: If the estimate has zero sigma.
    """
    if i_exp.sigma <= 0:
        raise InputError("Cannot express a distance in sigmas for an estimate with zero sigma.")
    return (i_exp.value - local_bound) / i_exp.sigma


# --- Manifest ---


@dataclass(frozen=True)
class RunManifest:
    state: str
    inequalities: tuple
    out_dir: Path
    source: SourceConfig = field(default_factory=SourceConfig)
    restarts: int = DEFAULT_RESTARTS
    optimizer_seed: int = 1

    def __post_init__(self):
        if not self.inequalities:
            raise InputError(run_messages.nothing_to_do.strip())
        if self.restarts < 1:
            raise InputError(f"restarts must be at least 1, got {self.restarts}.")

    def to_dict(self):
        return {
            "state": str(self.state),
            "inequalities": list(self.inequalities),
            "out_dir": Path(self.out_dir).as_posix(),
            "source": self.source.to_dict(),
            "optimizer": {"restarts": self.restarts, "seed": self.optimizer_seed},
        }


def _is_state_shortcut(ref):
    return ref in STATE_SHORTCUTS or ref.startswith("werner:")


def load_manifest(path):
    """Read a run manifest from a TOML file.

    Paths in the manifest are relative to the manifest's directory.

    Raises:
        InputError: For a missing or unreadable file, a missing state, or no inequalities.
    """
    path = Path(path)
    try:
        with path.open("rb") as f:
            data = tomli.load(f)
    except FileNotFoundError:
        raise InputError(f"Manifest not found: {path.as_posix()}")
    except tomli.TOMLDecodeError as e:
        raise InputError(f"Could not parse manifest {path.as_posix()}: {e}")

    base = path.parent
    if "state" not in data:
        raise InputError(f"Manifest {path.as_posix()} does not name a state.")
    state = str(data["state"])
    if not _is_state_shortcut(state):
        state_path = base / state
        if not state_path.exists():
            raise InputError(f"State file not found: {state_path.as_posix()}")
        state = state_path.as_posix()

    inequalities = data.get("inequalities", [])
    if not isinstance(inequalities, list) or not all(isinstance(r, str) for r in inequalities):
        raise InputError("Manifest 'inequalities' must be a list of references.")

    source = data.get("source", {})
    optimizer = data.get("optimizer", {})
    unknown = set(source) - {"pair_rate", "duration", "seed"}
    unknown |= {f"optimizer.{k}" for k in set(optimizer) - {"restarts", "seed"}}
    if unknown:
        raise InputError(f"Unknown manifest key(s): {', '.join(sorted(unknown))}")

    return RunManifest(
        state=state,
        inequalities=tuple(inequalities),
        out_dir=base / data.get("out_dir", "results"),
        source=SourceConfig(**source),
        restarts=int(optimizer.get("restarts", DEFAULT_RESTARTS)),
        optimizer_seed=int(optimizer.get("seed", 1)),
    )


# --- Results ---


@dataclass(frozen=True)
class InequalityOutcome:
    """Everything the pipeline derives for one inequality."""

    table: object
    optimization: object
    expected: float
    measured: object
    distance: float
    p_noise: float
    simulated_noise: float
    schedule: tuple = ()
    events: int = 0
    local_content: Optional[object] = None
    randomness: Optional[object] = None

    @property
    def file_name(self):
        return self.table.name.replace(":", "-") + ".json"

    def to_dict(self):
        settings = self.optimization.settings
        data = {
            "inequality": self.table.to_dict(),
            "I_L": self.table.local_bound,
            "I_tom": self.optimization.value,
            "I_exp": self.measured.to_dict(),
            "I_source": self.expected,
            "sigma_distance": self.distance,
            "p_noise": self.p_noise,
            "settings": settings.to_dict(),
            "simulated_noise_admixture": self.simulated_noise,
            "polarizer_pairs": len(self.schedule),
            "p_L_max": None,
            "randomness": None,
            "provenance": self.provenance(),
        }
        if self.local_content is not None:
            data["p_L_max"] = self.local_content.to_dict()
        if self.randomness is not None:
            data["randomness"] = self.randomness.to_dict()
            data["randomness"]["events"] = self.events
            data["randomness"]["certified_bits_ns"] = certified_bits(
                self.randomness.hmin_ns.value, self.events
            )
        return data

    def provenance(self):
        """Producing module and inputs for each reported number."""
        name = self.table.name
        cells = {
            "I_tom": {"module": "optimizer", "inputs": ["tomography state", name]},
            "I_exp": {"module": "experiment", "inputs": ["source state", name, "settings"]},
            "sigma_distance": {"module": "pipeline", "inputs": ["I_exp", "I_L"]},
            "p_noise": {"module": "inequality", "inputs": ["I_L", "I_exp"]},
        }
        if self.local_content is not None:
            cells["p_L_max"] = {"module": "epr2", "inputs": ["N", "I_exp"]}
        if self.randomness is not None:
            cells["p_star_ns"] = {"module": "randomness", "inputs": [name, "I_exp"]}
            cells["hmin_ns"] = {"module": "randomness", "inputs": ["p_star_ns"]}
            cells["certified_bits_ns"] = {"module": "randomness", "inputs": ["hmin_ns", "events"]}
            if self.randomness.p_star_quantum is not None:
                cells["p_star_q"] = {"module": "randomness", "inputs": ["I_exp"]}
                cells["hmin_q"] = {"module": "randomness", "inputs": ["p_star_q"]}
        return cells

    def summary_row(self):
        rand = self.randomness
        local = self.local_content
        return {
            "inequality": self.table.name,
            "N": self.table.n_settings,
            "I_L": self.table.local_bound,
            "I_tom": self.optimization.value,
            "I_exp": self.measured.value,
            "sigma": self.measured.sigma,
            "sigma_distance": self.distance,
            "p_noise": self.p_noise,
            "p_L_max": None if local is None else local.p_l_max.value,
            "p_star_ns": None if rand is None else rand.p_star_ns.value,
            "hmin_ns": None if rand is None else rand.hmin_ns.value,
            "p_star_q": None if rand is None else _value(rand.p_star_quantum),
            "hmin_q": None if rand is None else _value(rand.hmin_quantum),
        }


def _child_seeds(seed, count):
    """Independent integer seeds derived from one seed, stable across runs."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def analyze_inequality(table, source_state, tomography_state, source, restarts, optimizer_seed):
    """Optimize on the reconstructed state, then measure on the source state.

    If the source gives negative probabilities at a scheduled pair, the run is simulated
    on its nearest physical white-noise mixture.
    """
    optimization = optimize_settings(table, tomography_state, restarts=restarts, seed=optimizer_seed)
    settings = optimization.settings
    schedule = bell_schedule(table, settings)

    simulated_noise = 0.0
    try:
        records = simulate_counts(source_state, source, schedule)
        simulated_state = source_state
    except UnphysicalStateError:
        simulated_state, simulated_noise = nearest_physical_mixture(source_state)
        records = simulate_counts(simulated_state, source, schedule)

    measured = bell_value_from_counts(table, settings, records)
    local_bound = table.local_bound

    n = chained_order(table)
    local_content = None
    if n is not None and measured.value <= 2 * n:
        local_content = local_content_bound(n, measured)

    randomness = None
    if local_bound - RANGE_TOL <= measured.value <= ns_max(table) + RANGE_TOL:
        randomness = report(table, measured)

    return InequalityOutcome(
        table=table,
        optimization=optimization,
        expected=evaluate(table, simulated_state, settings),
        measured=measured,
        distance=sigma_distance(measured, local_bound),
        p_noise=noise_tolerance(local_bound, measured.value),
        simulated_noise=simulated_noise,
        schedule=tuple(schedule),
        events=int(sum(record.counts for record in records)),
        local_content=local_content,
        randomness=randomness,
    )


class PipelineRunner:
    """Run every stage of the analysis for one manifest, and write the results.

    Partial outputs are removed if any stage fails.
    """

    def __init__(self, manifest, argv=None, max_workers=None):
        self.manifest = manifest
        self.argv = list(argv) if argv is not None else []
        self.max_workers = max_workers or min(len(manifest.inequalities), os.cpu_count() or 1)
        self.out_dir = Path(manifest.out_dir)
        self.written = []

    # --- Public methods ---

    def run(self):
        """Coordinate the stages of the run. Returns the list of InequalityOutcome."""
        write_output(run_messages.pipeline_started)
        self._run_stage("load", self._load_inputs)
        self._run_stage("tomography", self._reconstruct_state)
        self._run_stage("analysis", self._analyze_inequalities)
        self._run_stage("write", self._write_results)
        return self.outcomes

    # --- Helper methods for run() ---

    def _run_stage(self, stage, method):
        write_output(run_messages.stage_started(stage))
        try:
            method()
        except Exception as e:
            self._remove_partial_outputs()
            error = PipelineStageError(stage, e)
            logger.debug("Pipeline stopped: %s", error.message)
            raise error

    def _load_inputs(self):
        self.source_state = load_state(self.manifest.state)
        self.tables = [resolve_inequality(ref) for ref in self.manifest.inequalities]
        seeds = _child_seeds(self.manifest.source.seed, len(self.tables) + 1)
        self.tomography_seed, self.run_seeds = seeds[0], seeds[1:]

    def _reconstruct_state(self):
        source = self.manifest.source.with_seed(self.tomography_seed)
        records = simulate_counts(self.source_state, source, tomography_schedule())
        self.tomography = estimate_state(records)

        _, p_noise = nearest_physical_mixture(self.source_state)
        if p_noise > 0:
            write_output(run_messages.unphysical_source_state)
            write_output(run_messages.noise_admixture(p_noise))

    def _analyze_inequalities(self):
        def analyze(args):
            table, seed = args
            return analyze_inequality(
                table,
                self.source_state,
                self.tomography.state,
                self.manifest.source.with_seed(seed),
                self.manifest.restarts,
                self.manifest.optimizer_seed,
            )

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            # map() keeps manifest order regardless of completion order.
            self.outcomes = list(executor.map(analyze, zip(self.tables, self.run_seeds)))

        for outcome in self.outcomes:
            write_output(
                f"  {outcome.table.name}: I_exp = {outcome.measured.value:.4f} "
                f"+/- {outcome.measured.sigma:.4f} ({outcome.distance:.1f} sigma)"
            )

    def _write_results(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)

        self._write("tomography.json", to_json_text(self._tomography_dict()))
        for outcome in self.outcomes:
            self._write(outcome.file_name, to_json_text(outcome.to_dict()))

        rows = [outcome.summary_row() for outcome in self.outcomes]
        summary = {
            "rows": rows,
            "polarizer_settings": polarizer_setting_count(
                [tomography_schedule()] + [o.schedule for o in self.outcomes]
            ),
            "provenance": {o.table.name: o.provenance() for o in self.outcomes},
        }
        self._write("summary.json", to_json_text(summary))
        self._write(
            "summary.csv",
            csv_text(SUMMARY_HEADER, [[_cell(row[h]) for h in SUMMARY_HEADER] for row in rows]),
        )
        self._write("run_metadata.json", to_json_text(self._metadata()))

    def _write(self, name, text):
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        write_output(run_messages.wrote_file(path.as_posix()))

    def _tomography_dict(self):
        """Reconstructed state, with each coefficient's distance from the source in sigmas."""
        data = self.tomography.to_dict()
        source = self.source_state.to_dict()
        estimated = self.tomography.state.to_dict()
        pulls = {}
        for name in COEFFICIENT_NAMES:
            sigma = self.tomography.sigmas[name]
            pulls[name] = (estimated[name] - source[name]) / sigma if sigma > 0 else None
        data["source_state"] = source
        data["pulls"] = pulls
        return data

    def _metadata(self):
        return {
            "timestamp": datetime.now().isoformat(timespec="seconds"),
            "version": __version__,
            "argv": self.argv,
            "manifest": self.manifest.to_dict(),
            "seeds": {"tomography": self.tomography_seed, "bell_runs": self.run_seeds},
        }

    def _remove_partial_outputs(self):
        for path in self.written:
            if path.exists():
                path.unlink()
        self.written = []


def _cell(value):
    return "" if value is None else value


def _value(estimate):
    return None if estimate is None else estimate.value
