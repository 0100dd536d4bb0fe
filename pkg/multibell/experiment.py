"""Simulated coincidence counting and the estimators applied to the counts.

Polarizer angles are in degrees from vertical. A polarizer at theta projects onto the
Bloch direction 2 * theta, so 0/90 deg measure sigma_z and 45/135 deg measure sigma_x.
A record counts coincidences where both photons pass their polarizers; the four
orientations (theta or theta + 90) x (theta' or theta' + 90) give the four outcome pairs.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .command_errors import IncompleteDataError, InputError
from .qstate import outcome_probabilities


logger = logging.getLogger(__name__)

DEFAULT_PAIR_RATE = 4200.0
DEFAULT_DURATION = 20.0
COUNTS_HEADER = ("alice_deg", "bob_deg", "duration_s", "counts")
# Polarizer angles are compared after rounding to this many decimals of a degree.
ANGLE_DECIMALS = 6


@dataclass(frozen=True)
class SourceConfig:
    pair_rate: float = DEFAULT_PAIR_RATE
    duration: float = DEFAULT_DURATION
    seed: int = 1

    def __post_init__(self):
        if not self.pair_rate > 0:
            raise InputError(f"pair_rate must be positive, got {self.pair_rate}.")
        if not self.duration > 0:
            raise InputError(f"duration must be positive, got {self.duration}.")

    def with_seed(self, seed):
        return SourceConfig(pair_rate=self.pair_rate, duration=self.duration, seed=seed)

    def to_dict(self):
        return {"pair_rate": self.pair_rate, "duration": self.duration, "seed": self.seed}


@dataclass(frozen=True)
class CountRecord:
    alice_polarizer_deg: float
    bob_polarizer_deg: float
    duration: float
    counts: int

    def __post_init__(self):
        if self.counts < 0:
            raise InputError(f"Counts must be nonnegative, got {self.counts}.")

    def as_row(self):
        return (self.alice_polarizer_deg, self.bob_polarizer_deg, self.duration, self.counts)


@dataclass(frozen=True)
class Estimate:
    """An estimated value with its standard deviation.

    degenerate marks estimates whose first-order propagated sigma came out zero.
    """

    value: float
    sigma: float
    degenerate: bool = False

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InputError(f"sigma must be nonnegative, got {self.sigma}.")

    def to_dict(self):
        data = {"value": self.value, "sigma": self.sigma}
        if self.degenerate:
            data["degenerate"] = True
        return data


# --- Polarizer conventions ---


def polarizer_key(deg):
    """Canonical form of a polarizer angle; polarizers have period 180 deg."""
    return round(float(deg) % 180.0, ANGLE_DECIMALS) % 180.0


def bloch_to_polarizer_deg(theta):
    """Polarizer angle in degrees, in [0, 180), for a Bloch-plane angle in radians."""
    return polarizer_key(math.degrees(theta) / 2)


def polarizer_to_bloch(deg):
    """Bloch-plane angle in radians for a polarizer angle in degrees."""
    return 2 * deg * math.pi / 180


def orientation_pairs(alice_deg, bob_deg):
    """The four polarizer pairs measuring one basis pair, in (++, +-, -+, --) order."""
    return [
        (polarizer_key(alice_deg), polarizer_key(bob_deg)),
        (polarizer_key(alice_deg), polarizer_key(bob_deg + 90)),
        (polarizer_key(alice_deg + 90), polarizer_key(bob_deg)),
        (polarizer_key(alice_deg + 90), polarizer_key(bob_deg + 90)),
    ]


# --- Simulation ---


def expected_counts_per_pair(state, config, schedule):
    """Mean coincidences per polarizer pair: rate * duration * p(+,+ | 2 theta_A, 2 theta_B)."""
    means = []
    for alice_deg, bob_deg in schedule:
        probs = outcome_probabilities(
            state, polarizer_to_bloch(alice_deg), polarizer_to_bloch(bob_deg)
        )
        means.append(config.pair_rate * config.duration * probs[(1, 1)])
    return np.array(means)


def simulate_counts(state, config, schedule):
    """Poisson coincidence counts for each polarizer pair in schedule.

    One generator per call, seeded from config.seed, so a repeated schedule gives
    identical counts.

    Raises:
        UnphysicalStateError: If the state gives an invalid probability at a scheduled pair.
    """
    schedule = list(schedule)
    means = expected_counts_per_pair(state, config, schedule)
    rng = np.random.default_rng(config.seed)
    counts = rng.poisson(means)
    logger.debug("Simulated %d polarizer pairs with seed %s.", len(schedule), config.seed)
    return [
        CountRecord(float(a), float(b), config.duration, int(n))
        for (a, b), n in zip(schedule, counts)
    ]


def expected_counts(state, config, schedule):
    """Noise-free records: each count is its Poisson mean, rounded to an integer."""
    schedule = list(schedule)
    means = expected_counts_per_pair(state, config, schedule)
    return [
        CountRecord(float(a), float(b), config.duration, int(round(mu)))
        for (a, b), mu in zip(schedule, means)
    ]


# --- Count lookup ---


class CountTable:
    """Counts accumulated per polarizer pair. Repeated pairs add up."""

    def __init__(self, records):
        self.counts = {}
        self.durations = {}
        for record in records:
            key = (polarizer_key(record.alice_polarizer_deg), polarizer_key(record.bob_polarizer_deg))
            self.counts[key] = self.counts.get(key, 0) + record.counts
            self.durations[key] = self.durations.get(key, 0.0) + record.duration

    def quadruple(self, alice_deg, bob_deg):
        """(n_pp, n_pm, n_mp, n_mm) for the basis pair at these polarizer angles.

        Raises:
            IncompleteDataError: Naming every missing polarizer pair.
        """
        pairs = orientation_pairs(alice_deg, bob_deg)
        missing = [pair for pair in pairs if pair not in self.counts]
        if missing:
            listed = ", ".join(f"({a:g}, {b:g})" for a, b in missing)
            raise IncompleteDataError(f"Missing counts for polarizer pair(s): {listed}")
        return tuple(self.counts[pair] for pair in pairs)


# --- Estimators ---


def _propagated(counts, signs):
    """Value sum(s_k n_k)/T and first-order Poisson sigma for outcome signs s_k."""
    counts = np.asarray(counts, dtype=float)
    signs = np.asarray(signs, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise IncompleteDataError("No coincidences recorded for this term; cannot estimate it.")
    value = float(signs @ counts / total)
    sigma = float(math.sqrt(np.sum(((signs - value) / total) ** 2 * counts)))
    return Estimate(value=value, sigma=sigma, degenerate=sigma == 0.0)


def correlation_from_counts(n_pp, n_pm, n_mp, n_mm):
    """Correlation (n_pp - n_pm - n_mp + n_mm)/T with Poisson-propagated sigma."""
    return _propagated((n_pp, n_pm, n_mp, n_mm), (1, -1, -1, 1))


def single_marginal_from_counts(n_pp, n_pm, n_mp, n_mm, party="alice"):
    """One party's marginal from the counts of a single basis pair."""
    if party == "alice":
        signs = (1, 1, -1, -1)
    elif party == "bob":
        signs = (1, -1, 1, -1)
    else:
        raise InputError(f"party must be 'alice' or 'bob', got {party!r}.")
    return _propagated((n_pp, n_pm, n_mp, n_mm), signs)


def combine_marginal_estimates(estimates):
    """Combine repeated estimates of one marginal.

    The value is the mean. The sigma is the larger of the propagated sigma of the mean
    and half the spread between the estimates.
    """
    estimates = list(estimates)
    if len(estimates) < 2:
        raise IncompleteDataError(
            f"Combining a marginal needs at least two estimates, got {len(estimates)}."
        )
    values = np.array([e.value for e in estimates])
    sigmas = np.array([e.sigma for e in estimates])
    value = float(values.mean())
    propagated = float(math.sqrt(np.sum(sigmas**2)) / len(estimates))
    spread = float((values.max() - values.min()) / 2)
    sigma = max(propagated, spread)
    return Estimate(value=value, sigma=sigma, degenerate=sigma == 0.0)


def marginal_from_counts(quadruples, party="alice"):
    """Marginal of one party from count quadruples measured in two or more bases of the other."""
    estimates = [single_marginal_from_counts(*q, party=party) for q in quadruples]
    return combine_marginal_estimates(estimates)


# --- Bell runs ---


def term_name(kind, i=None, j=None):
    if kind == "joint":
        return f"E(a{i + 1},b{j + 1})"
    if kind == "alice":
        return f"E(a{i + 1})"
    return f"E(b{j + 1})"


def bell_terms(table, settings):
    """Terms of a table at settings: name -> (kind, i, j, coefficient, alice_deg, bob_deg).

    Marginal terms are read from coincidences with the other party at its first setting.
    """
    settings.check_against(table)
    alice_deg = [bloch_to_polarizer_deg(a) for a in settings.alice_angles]
    bob_deg = [bloch_to_polarizer_deg(b) for b in settings.bob_angles]

    terms = {}
    for i in range(table.n_settings):
        if table.alice_marginals[i]:
            terms[term_name("alice", i=i)] = (
                "alice", i, 0, table.alice_marginals[i], alice_deg[i], bob_deg[0]
            )
    for j in range(table.n_settings):
        if table.bob_marginals[j]:
            terms[term_name("bob", j=j)] = (
                "bob", 0, j, table.bob_marginals[j], alice_deg[0], bob_deg[j]
            )
    for i in range(table.n_settings):
        for j in range(table.n_settings):
            if table.joint_coeffs[i][j]:
                terms[term_name("joint", i, j)] = (
                    "joint", i, j, table.joint_coeffs[i][j], alice_deg[i], bob_deg[j]
                )
    return terms


def bell_schedule(table, settings):
    """Distinct polarizer pairs needed to measure every nonzero term of table at settings."""
    schedule = []
    seen = set()
    for *_, alice_deg, bob_deg in bell_terms(table, settings).values():
        for pair in orientation_pairs(alice_deg, bob_deg):
            if pair not in seen:
                seen.add(pair)
                schedule.append(pair)
    return schedule


def polarizer_setting_count(schedules):
    """Number of distinct polarizer pairs across several schedules."""
    return len({(polarizer_key(a), polarizer_key(b)) for schedule in schedules for a, b in schedule})


def term_estimates(table, settings, records):
    """Estimate of every nonzero term from the records.

    Raises:
        IncompleteDataError: Naming the terms whose counts are missing.
    """
    count_table = CountTable(records)
    estimates, missing = {}, []
    for name, (kind, _, _, _, alice_deg, bob_deg) in bell_terms(table, settings).items():
        try:
            quadruple = count_table.quadruple(alice_deg, bob_deg)
        except IncompleteDataError:
            missing.append(name)
            continue
        if kind == "joint":
            estimates[name] = correlation_from_counts(*quadruple)
        else:
            estimates[name] = single_marginal_from_counts(*quadruple, party=kind)
    if missing:
        raise IncompleteDataError(f"Missing counts for term(s): {', '.join(missing)}")
    return estimates


def bell_value_from_estimates(table, settings, estimates):
    """Contract term estimates with the table; independent errors add in quadrature."""
    value, variance = 0.0, 0.0
    missing = []
    for name, (_, _, _, coeff, _, _) in bell_terms(table, settings).items():
        if name not in estimates:
            missing.append(name)
            continue
        value += coeff * estimates[name].value
        variance += coeff**2 * estimates[name].sigma ** 2
    if missing:
        raise IncompleteDataError(f"Missing estimate(s) for term(s): {', '.join(missing)}")
    sigma = math.sqrt(variance)
    return Estimate(value=value, sigma=sigma, degenerate=sigma == 0.0)


def bell_value_from_counts(table, settings, records):
    """Bell value and sigma measured from coincidence records taken at settings."""
    return bell_value_from_estimates(table, settings, term_estimates(table, settings, records))


# --- Records I/O ---


def records_to_rows(records):
    return [record.as_row() for record in records]


def records_from_rows(rows):
    """Records from CSV dict rows with the COUNTS_HEADER columns."""
    records = []
    for line, row in enumerate(rows, start=2):
        try:
            records.append(
                CountRecord(
                    alice_polarizer_deg=float(row["alice_deg"]),
                    bob_polarizer_deg=float(row["bob_deg"]),
                    duration=float(row["duration_s"]),
                    counts=int(row["counts"]),
                )
            )
        except (TypeError, ValueError):
            raise InputError(f"Could not read counts row at line {line}: {row}")
    return records


def schedule_from_json(data):
    """Schedule from a JSON list of {alice_deg, bob_deg} objects."""
    if not isinstance(data, list):
        raise InputError("Schedule JSON must be a list of {alice_deg, bob_deg} objects.")
    schedule = []
    for k, item in enumerate(data):
        try:
            schedule.append((float(item["alice_deg"]), float(item["bob_deg"])))
        except (KeyError, TypeError, ValueError):
            raise InputError(f"Schedule entry {k} needs numeric alice_deg and bob_deg.")
    return schedule


def schedule_to_json(schedule):
    return [{"alice_deg": float(a), "bob_deg": float(b)} for a, b in schedule]
