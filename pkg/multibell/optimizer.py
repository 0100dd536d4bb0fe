"""Measurement settings that maximize a Bell expression for a given state.

For fixed Bob angles the Bell value is a sum over Alice's settings of r_i . (cos a_i, sin a_i),
so each a_i has the closed-form optimum atan2(r_i,x, r_i,z). The see-saw alternates these
exact updates between the parties; restarts guard against local optima.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .command_errors import InputError
from .inequality import SettingsVector, chained_order, evaluate, evaluate_angles
from .qstate import SINGLET


logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 32
MAX_SWEEPS = 1000
SWEEP_TOL = 1e-10
# Below this norm the update direction is treated as zero, and the angle kept.
ZERO_VECTOR_TOL = 1e-14


@dataclass(frozen=True)
class OptimizationResult:
    settings: SettingsVector
    value: float
    restarts_used: int
    converged: bool
    history: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self):
        data = {
            "value": self.value,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
        }
        data.update(self.settings.to_dict())
        return data


def _directions(angles):
    angles = np.asarray(angles, dtype=float)
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _best_angles(vectors, current):
    """atan2 of each row of vectors; rows with zero norm keep their current angle."""
    norms = np.hypot(vectors[:, 0], vectors[:, 1])
    updated = np.arctan2(vectors[:, 1], vectors[:, 0])
    return np.where(norms > ZERO_VECTOR_TOL, updated, np.asarray(current, dtype=float))


def _check_dims(table, angles, party):
    if len(angles) != table.n_settings:
        raise InputError(
            f"{party} has {len(angles)} angles; {table.name!r} needs {table.n_settings}."
        )


def seesaw_update_alice(table, state, bob_angles, alice_angles=None):
    """Optimal Alice angles for fixed Bob angles.

    alice_angles supplies the values kept where Alice's update direction vanishes
    (defaults to zeros).
    """
    _check_dims(table, bob_angles, "Bob")
    current = np.zeros(table.n_settings) if alice_angles is None else alice_angles
    _check_dims(table, current, "Alice")

    # Row j of c_b is C (cos b_j, sin b_j).
    c_b = _directions(bob_angles) @ state.correlation_matrix.T
    r = table.n[:, None] * state.alice_vector[None, :] + table.l @ c_b
    return _best_angles(r, current)


def seesaw_update_bob(table, state, alice_angles, bob_angles=None):
    """Optimal Bob angles for fixed Alice angles. Mirror of seesaw_update_alice."""
    _check_dims(table, alice_angles, "Alice")
    current = np.zeros(table.n_settings) if bob_angles is None else bob_angles
    _check_dims(table, current, "Bob")

    # Row i of c_a is C^T (cos a_i, sin a_i).
    c_a = _directions(alice_angles) @ state.correlation_matrix
    s = table.m[:, None] * state.bob_vector[None, :] + table.l.T @ c_a
    return _best_angles(s, current)


def seesaw(table, state, alice_angles, bob_angles, max_sweeps=MAX_SWEEPS, tol=SWEEP_TOL):
    """Run see-saw sweeps from a starting point until the value stops improving.

    Returns:
        Tuple (alice_angles, bob_angles, value, converged, history); history lists the
        value before the first half-step and after every half-step.
    """
    alice = np.asarray(alice_angles, dtype=float)
    bob = np.asarray(bob_angles, dtype=float)
    value = evaluate_angles(table, state, alice, bob)
    history = [value]

    converged = False
    for sweep in range(max_sweeps):
        alice = seesaw_update_alice(table, state, bob, alice)
        history.append(evaluate_angles(table, state, alice, bob))
        bob = seesaw_update_bob(table, state, alice, bob)
        new_value = evaluate_angles(table, state, alice, bob)
        history.append(new_value)

        improvement = new_value - value
        value = new_value
        if improvement < tol:
            converged = True
            break

    logger.debug("See-saw stopped after %d sweeps at %.12g.", sweep + 1, value)
    return alice, bob, value, converged, history


def canonical_start(n_settings):
    """Chained-style angles a_k = (k-1) pi/N, b_k = a_k + pi/(2N) + pi.

    These reach 2N cos(pi/2N) on the chained inequality for the ideal singlet.
    """
    alice = np.arange(n_settings) * math.pi / n_settings
    bob = alice + math.pi / (2 * n_settings) + math.pi
    return alice, bob


def optimize_settings(table, state, restarts=DEFAULT_RESTARTS, seed=1):
    """Best see-saw fixed point over a canonical start and restarts-1 random starts.

    Deterministic for a given seed. Ties keep the earliest start.
    """
    if restarts < 1:
        raise InputError(f"restarts must be at least 1, got {restarts}.")

    n = table.n_settings
    rng = np.random.default_rng(seed)
    starts = [canonical_start(n)]
    for _ in range(restarts - 1):
        starts.append(
            (rng.uniform(0, 2 * math.pi, size=n), rng.uniform(0, 2 * math.pi, size=n))
        )

    best = None
    for alice_start, bob_start in starts:
        run = seesaw(table, state, alice_start, bob_start)
        if best is None or run[2] > best[2]:
            best = run

    alice, bob, _, converged, history = best
    settings = SettingsVector(alice_angles=alice, bob_angles=bob)
    value = evaluate(table, state, settings)
    logger.debug("Best of %d restarts for %s: %.12g", restarts, table.name, value)
    return OptimizationResult(
        settings=settings,
        value=value,
        restarts_used=restarts,
        converged=converged,
        history=tuple(history),
    )


# Polarizer-style CHSH settings, in the term order of catalog_chsh.
CHSH_STANDARD = ((0.0, math.pi / 2), (3 * math.pi / 4, 5 * math.pi / 4))


def standard_settings(table, restarts=DEFAULT_RESTARTS, seed=1):
    """Settings that are optimal for the ideal singlet.

    Chained inequalities use the canonical chained angles and CHSH its usual 0/90 and
    135/225 deg Bloch angles. Any other table takes the see-saw optimum on the singlet.
    """
    n = chained_order(table)
    if table.name == "chsh":
        alice, bob = CHSH_STANDARD
    elif n is not None:
        alice, bob = canonical_start(n)
    else:
        return optimize_settings(table, SINGLET, restarts=restarts, seed=seed).settings
    return SettingsVector(alice_angles=alice, bob_angles=bob)
