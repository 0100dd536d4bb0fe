"""Helpers shared across test modules: random physical states and brute-force references."""

import itertools
from pathlib import Path

import numpy as np

from multibell.experiment import CountRecord, bell_terms, orientation_pairs
from multibell.qstate import XZState


PAULI_Z = np.diag([1.0, -1.0])
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
IDENTITY = np.eye(2)


def random_density_matrix(rng):
    """Random two-qubit density matrix, G G^dagger / tr for a complex Ginibre matrix G."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def xz_state_from_density_matrix(rho):
    def expectation(a, b):
        return float(np.trace(rho @ np.kron(a, b)).real)

    return XZState(
        a_z=expectation(PAULI_Z, IDENTITY),
        a_x=expectation(PAULI_X, IDENTITY),
        b_z=expectation(IDENTITY, PAULI_Z),
        b_x=expectation(IDENTITY, PAULI_X),
        c_zz=expectation(PAULI_Z, PAULI_Z),
        c_zx=expectation(PAULI_Z, PAULI_X),
        c_xz=expectation(PAULI_X, PAULI_Z),
        c_xx=expectation(PAULI_X, PAULI_X),
    )


def random_physical_state(seed):
    return xz_state_from_density_matrix(random_density_matrix(np.random.default_rng(seed)))


def grid_maximum(table, state, step_deg):
    """Best Bell value over an Alice angle grid, with Bob's exact best response.

    For fixed Alice angles the value is sum_j |s_j| plus Alice's marginal terms, where s_j
    is Bob's update vector, so only Alice's angles need a grid. The grid is walked one
    value of the first angle at a time to bound memory.
    """
    grid = np.radians(np.arange(0.0, 360.0, step_deg))
    rest = np.array(list(itertools.product(grid, repeat=table.n_settings - 1)))

    best = -np.inf
    for first in grid:
        alice = np.column_stack([np.full(len(rest), first), rest])
        dirs = np.stack([np.cos(alice), np.sin(alice)], axis=-1)

        e_a = dirs @ state.alice_vector
        c_a = dirs @ state.correlation_matrix
        s = table.m[None, :, None] * state.bob_vector[None, None, :] + np.einsum(
            "ij,kic->kjc", table.l, c_a
        )
        values = e_a @ table.n + np.linalg.norm(s, axis=2).sum(axis=1)
        best = max(best, float(values.max()))
    return best


def extreme_records(table, settings, counts=1000):
    """Records making every correlation of a correlation-only table +1 or -1.

    Each sign follows its coefficient, so the measured value is sum |l_ij|.
    """
    records = []
    for _, _, _, coeff, alice_deg, bob_deg in bell_terms(table, settings).values():
        quadruple = (counts, 0, 0, counts) if coeff > 0 else (0, counts, counts, 0)
        for (a, b), n in zip(orientation_pairs(alice_deg, bob_deg), quadruple):
            records.append(CountRecord(a, b, 20.0, n))
    return records


REFERENCE_DIR = Path(__file__).parent / "integration_tests" / "reference_files"


def check_reference_file(path, reference_name):
    """Check that a generated file matches its copy in reference_files/.

    If the generated output changes on purpose, inspect the new file in the test's temp
    dir, and copy it over the reference once it's correct.
    """
    generated = Path(path).read_text(encoding="utf-8")
    reference = (REFERENCE_DIR / reference_name).read_text(encoding="utf-8")
    assert generated == reference
