"""Local-content bounds from chained-inequality values.

Writing the observed behavior as p_L * local + (1 - p_L) * no-signaling, and bounding
each part by its maximum on the chained inequality (2(N - 1) and 2N), gives

    p_L <= p_L_max = N - I/2.
"""

import logging
import math
from dataclasses import dataclass

from .command_errors import IncompleteDataError, InputError
from .experiment import Estimate
from .inequality import catalog_chained
from .optimizer import DEFAULT_RESTARTS, optimize_settings
from .qstate import WernerParams


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalContentBound:
    n_settings: int
    i_exp: Estimate
    p_l_max: Estimate
    clamped: bool = False

    def to_dict(self):
        return {
            "N": self.n_settings,
            "I_exp": self.i_exp.to_dict(),
            "p_L_max": self.p_l_max.to_dict(),
            "clamped": self.clamped,
        }


def _check_settings(n_settings):
    if isinstance(n_settings, bool) or int(n_settings) != n_settings or n_settings < 2:
        raise InputError(f"Chained inequalities need an integer N >= 2, got {n_settings!r}.")
    return int(n_settings)


def plmax_value(n_settings, value):
    """Unclamped N - I/2."""
    return n_settings - value / 2


def local_content_bound(n_settings, i_exp):
    """Largest local weight compatible with the chained value i_exp.

    The result is clamped to [0, 1], with clamped set when that changes it.

    Raises:
        InputError: If i_exp exceeds the no-signaling maximum 2N.
    """
    n = _check_settings(n_settings)
    if i_exp.value > 2 * n:
        raise InputError(
            f"Chained value {i_exp.value} exceeds the no-signaling maximum {2 * n} for N={n}."
        )

    raw = plmax_value(n, i_exp.value)
    value = min(max(raw, 0.0), 1.0)
    return LocalContentBound(
        n_settings=n,
        i_exp=i_exp,
        p_l_max=Estimate(value=value, sigma=i_exp.sigma / 2, degenerate=i_exp.degenerate),
        clamped=value != raw,
    )


def werner_chained_value(n_settings, visibility):
    """Optimal chained value of a Werner state: 2 N V cos(pi / 2N)."""
    n = _check_settings(n_settings)
    v = WernerParams(visibility).visibility
    return 2 * n * v * math.cos(math.pi / (2 * n))


def werner_plmax_curve(visibility, n_range):
    """(N, N(1 - V cos(pi / 2N))) for each N, unclamped."""
    return [
        (int(n), plmax_value(int(n), werner_chained_value(n, visibility))) for n in n_range
    ]


def state_plmax_curve(state, n_range, restarts=DEFAULT_RESTARTS, seed=1):
    """(N, N - I/2) for each N, with I the optimized chained value of state."""
    curve = []
    for n in n_range:
        n = _check_settings(n)
        result = optimize_settings(catalog_chained(n), state, restarts=restarts, seed=seed)
        logger.debug("Chained N=%d optimum %.6f for the given state.", n, result.value)
        curve.append((n, plmax_value(n, result.value)))
    return curve


def best_local_bound(bounds):
    """Bound with the smallest p_L_max; ties go to the smaller sigma, then the smaller N."""
    bounds = list(bounds)
    if not bounds:
        raise IncompleteDataError("best_local_bound needs at least one bound.")
    return min(bounds, key=lambda b: (b.p_l_max.value, b.p_l_max.sigma, b.n_settings))
