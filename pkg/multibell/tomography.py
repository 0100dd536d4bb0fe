"""Partial tomography of the xz-plane coefficients from coincidence counts.

Each side measures sigma_z (polarizer at 0 deg) and sigma_x (polarizer at 45 deg). The
four basis pairs give the four correlations directly; each marginal is seen in two basis
pairs, one per basis of the other side, and the two estimates are combined.
"""

import logging
from dataclasses import dataclass, field

from .command_errors import IncompleteDataError
from .experiment import (
    CountTable,
    combine_marginal_estimates,
    correlation_from_counts,
    orientation_pairs,
    single_marginal_from_counts,
)
from .qstate import COEFFICIENT_NAMES, XZState, is_physical


logger = logging.getLogger(__name__)

BASIS_POLARIZER_DEG = {"z": 0.0, "x": 45.0}
BASES = ("z", "x")
PHYSICAL_GRID_ANGLES = 72


@dataclass(frozen=True)
class TomographyResult:
    state: XZState
    sigmas: dict
    physical: bool
    clamped: tuple = field(default=())

    def sigmas_dict(self):
        return {name: self.sigmas[name] for name in COEFFICIENT_NAMES}

    def to_dict(self):
        return {
            "state": self.state.to_dict(),
            "sigmas": self.sigmas_dict(),
            "physical": self.physical,
            "clamped": list(self.clamped),
        }


def tomography_schedule():
    """The 16 polarizer pairs: {0, 45}^2 basis pairs, each in its four orientations."""
    schedule = []
    for alice_basis in BASES:
        for bob_basis in BASES:
            schedule.extend(
                orientation_pairs(
                    BASIS_POLARIZER_DEG[alice_basis], BASIS_POLARIZER_DEG[bob_basis]
                )
            )
    return schedule


def _basis_counts(count_table):
    """Count quadruple for every basis pair, or IncompleteDataError naming the gaps."""
    quadruples, missing = {}, []
    for alice_basis in BASES:
        for bob_basis in BASES:
            try:
                quadruples[(alice_basis, bob_basis)] = count_table.quadruple(
                    BASIS_POLARIZER_DEG[alice_basis], BASIS_POLARIZER_DEG[bob_basis]
                )
            except IncompleteDataError as e:
                missing.append(f"c_{alice_basis}{bob_basis}: {e.message}")
    if missing:
        raise IncompleteDataError(
            "Tomography counts are incomplete.\n  " + "\n  ".join(missing)
        )
    return quadruples


def term_estimates(records):
    """Estimate of each of the 8 coefficients, keyed by coefficient name."""
    quadruples = _basis_counts(CountTable(records))

    estimates = {}
    for (alice_basis, bob_basis), quadruple in quadruples.items():
        estimates[f"c_{alice_basis}{bob_basis}"] = correlation_from_counts(*quadruple)

    for basis in BASES:
        estimates[f"a_{basis}"] = combine_marginal_estimates(
            single_marginal_from_counts(*quadruples[(basis, other)], party="alice")
            for other in BASES
        )
        estimates[f"b_{basis}"] = combine_marginal_estimates(
            single_marginal_from_counts(*quadruples[(other, basis)], party="bob")
            for other in BASES
        )
    return estimates


def estimate_state(records):
    """Reconstruct the xz-plane state from tomography counts.

    Raises:
        IncompleteDataError: If any of the 16 polarizer pairs is missing.
    """
    return state_from_estimates(term_estimates(records))


def state_from_estimates(estimates):
    """Build the TomographyResult from one Estimate per coefficient.

    Coefficients are reported raw, only clamped to [-1, 1]. Count ratios never leave that
    range, so clamping only happens for estimates read from elsewhere. The physical flag
    checks outcome probabilities on a 72 x 72 angle grid.
    """
    missing = [name for name in COEFFICIENT_NAMES if name not in estimates]
    if missing:
        raise IncompleteDataError(f"No estimate for: {', '.join(missing)}")

    values, clamped = {}, []
    for name in COEFFICIENT_NAMES:
        value = estimates[name].value
        if not -1.0 <= value <= 1.0:
            clamped.append(name)
            value = min(max(value, -1.0), 1.0)
        values[name] = value

    state = XZState(**values)
    physical = not clamped and is_physical(state, n_angles=PHYSICAL_GRID_ANGLES)
    if not physical:
        logger.debug("Estimated state is not physical; clamped: %s", clamped)

    return TomographyResult(
        state=state,
        sigmas={name: estimates[name].sigma for name in COEFFICIENT_NAMES},
        physical=physical,
        clamped=tuple(clamped),
    )

