"""Certified randomness from the largest marginal compatible with a Bell violation.

Randomness is counted per measurement event: with P* the largest probability any outcome
can have given the observed value, each event carries at least -log2 P* bits.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import run_messages
from .command_errors import InputError
from .experiment import Estimate
from .polytope import ns_guessing_bound, ns_max, quantum_marginal_bound_chsh


logger = logging.getLogger(__name__)

# Slack when comparing an observed value with the ends of its allowed range.
RANGE_TOL = 1e-9
TSIRELSON_BOUND = 2 * math.sqrt(2)


@dataclass(frozen=True)
class RandomnessReport:
    inequality: str
    observed: Estimate
    p_star_ns: Estimate
    hmin_ns: Estimate
    p_star_quantum: Optional[Estimate] = None
    hmin_quantum: Optional[Estimate] = None
    assumption: str = run_messages.fair_sampling

    def to_dict(self):
        data = {
            "inequality": self.inequality,
            "observed": self.observed.to_dict(),
            "p_star_ns": self.p_star_ns.to_dict(),
            "hmin_ns": self.hmin_ns.to_dict(),
            "p_star_quantum": None,
            "hmin_quantum": None,
            "assumption": self.assumption,
        }
        if self.p_star_quantum is not None:
            data["p_star_quantum"] = self.p_star_quantum.to_dict()
            data["hmin_quantum"] = self.hmin_quantum.to_dict()
        return data


def min_entropy(p_star):
    """-log2(p_star), in bits per measurement."""
    if not 0 < p_star <= 1:
        raise InputError(f"A guessing probability must lie in (0, 1], got {p_star}.")
    # Avoid reporting -0.0 for p_star == 1.
    return -math.log2(p_star) if p_star < 1 else 0.0


def _entropy_estimate(p_star):
    """H_min with sigma propagated through d(-log2 p)/dp = -1/(p ln 2)."""
    sigma = p_star.sigma / (p_star.value * math.log(2))
    return Estimate(value=min_entropy(p_star.value), sigma=sigma, degenerate=p_star.degenerate)


def _propagate(curve, observed, lower, upper):
    """Estimate of curve(observed) with a finite-difference sigma.

    The difference is taken over [observed - sigma, observed + sigma], clipped to
    [lower, upper]; the slope times sigma is the propagated sigma.
    """
    value = curve(observed.value)
    if observed.sigma == 0:
        return Estimate(value=value, sigma=0.0, degenerate=True)

    lo = max(observed.value - observed.sigma, lower)
    hi = min(observed.value + observed.sigma, upper)
    if hi <= lo:
        return Estimate(value=value, sigma=0.0, degenerate=True)

    slope = (curve(hi) - curve(lo)) / (hi - lo)
    sigma = abs(slope) * observed.sigma
    return Estimate(value=value, sigma=sigma, degenerate=sigma == 0.0)


def check_observed(table, value, ns_maximum=None):
    """Raise InputError unless I_L <= value <= ns_max, within RANGE_TOL."""
    ns_maximum = ns_max(table) if ns_maximum is None else ns_maximum
    if not table.local_bound - RANGE_TOL <= value <= ns_maximum + RANGE_TOL:
        raise InputError(
            f"Observed value {value} for {table.name!r} must lie between the local bound "
            f"{table.local_bound:g} and the no-signaling maximum {ns_maximum:.6g}."
        )
    return ns_maximum


def report(table, observed):
    """Randomness bounds implied by an observed Bell value.

    P*_NS comes from the no-signaling LP, maximized over party, setting and outcome.
    P*_Q is filled in for CHSH only, from the analytic quantum curve, when the observed
    value is within the Tsirelson bound.
    """
    ns_maximum = check_observed(table, observed.value)
    local_bound = table.local_bound

    def ns_curve(value):
        return ns_guessing_bound(table, min(max(value, local_bound), ns_maximum))

    p_star_ns = _propagate(ns_curve, observed, local_bound, ns_maximum)
    result = {
        "inequality": table.name,
        "observed": observed,
        "p_star_ns": p_star_ns,
        "hmin_ns": _entropy_estimate(p_star_ns),
    }

    if table.name == "chsh" and observed.value <= TSIRELSON_BOUND:
        # Clip into the curve's domain; observed values just below 2 count as 2.
        def q_curve(value):
            return quantum_marginal_bound_chsh(min(max(value, 2.0), TSIRELSON_BOUND))

        p_star_q = _propagate(q_curve, observed, 2.0, TSIRELSON_BOUND)
        result["p_star_quantum"] = p_star_q
        result["hmin_quantum"] = _entropy_estimate(p_star_q)

    logger.debug("Randomness for %s at %.6g: P*_NS=%.6g", table.name, observed.value, p_star_ns.value)
    return RandomnessReport(**result)


def randomness_curve(table, points):
    """(observed, P*_NS) at points equally spaced values from I_L to the NS maximum."""
    if points < 2:
        raise InputError(f"A randomness curve needs at least 2 points, got {points}.")
    ns_maximum = ns_max(table)
    return [
        (float(value), ns_guessing_bound(table, float(value)))
        for value in np.linspace(table.local_bound, ns_maximum, points)
    ]


def certified_bits(hmin, n_events):
    """Lower bound on the extractable bits from n_events measurements."""
    if n_events < 0:
        raise InputError(f"Number of events must be nonnegative, got {n_events}.")
    return hmin * n_events
