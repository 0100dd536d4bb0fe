"""Tests for xz-plane states and their outcome probabilities."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multibell.command_errors import InputError, UnphysicalStateError
from multibell import qstate
from multibell.qstate import (
    MAXIMALLY_MIXED,
    SINGLET,
    TABLE_I_STATE,
    WernerParams,
    XZState,
)

from tests.helpers import random_physical_state


angles = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


# --- Construction and serialization ---


def test_defaults_are_zero():
    state = XZState()
    assert state.to_dict() == {name: 0.0 for name in qstate.COEFFICIENT_NAMES}


@pytest.mark.parametrize("value", [1.5, -1.01, float("nan"), "abc"])
def test_out_of_range_coefficient_rejected(value):
    with pytest.raises(InputError):
        XZState(c_zz=value)


def test_from_dict_ignores_extra_keys():
    data = TABLE_I_STATE.to_dict()
    data["comment"] = "partial tomography"
    assert XZState.from_dict(data) == TABLE_I_STATE


def test_from_dict_names_missing_keys():
    data = TABLE_I_STATE.to_dict()
    del data["c_xz"]
    with pytest.raises(InputError, match="c_xz"):
        XZState.from_dict(data)


def test_array_views():
    assert np.allclose(TABLE_I_STATE.alice_vector, [0.065, 0.036])
    assert np.allclose(TABLE_I_STATE.bob_vector, [-0.078, -0.015])
    assert np.allclose(
        TABLE_I_STATE.correlation_matrix, [[-0.9649, 0.1053], [-0.0201, -0.9344]]
    )


def test_normalize_angle():
    assert qstate.normalize_angle(-0.1) == pytest.approx(2 * math.pi - 0.1)
    assert qstate.normalize_angle(2 * math.pi) == 0.0
    assert qstate.normalize_angle(7.0) == pytest.approx(7.0 - 2 * math.pi)


# --- Expectation values ---


def test_marginals_of_table_i():
    assert qstate.marginal_alice(TABLE_I_STATE, 0.0) == pytest.approx(0.065)
    assert qstate.marginal_alice(TABLE_I_STATE, math.pi / 2) == pytest.approx(0.036)
    assert qstate.marginal_bob(TABLE_I_STATE, 0.0) == pytest.approx(-0.078)
    assert qstate.marginal_bob(TABLE_I_STATE, math.pi / 2) == pytest.approx(-0.015)


def test_joint_reads_coefficients_at_axes():
    assert qstate.joint(TABLE_I_STATE, 0.0, 0.0) == pytest.approx(-0.9649)
    assert qstate.joint(TABLE_I_STATE, 0.0, math.pi / 2) == pytest.approx(0.1053)
    assert qstate.joint(TABLE_I_STATE, math.pi / 2, 0.0) == pytest.approx(-0.0201)
    assert qstate.joint(TABLE_I_STATE, math.pi / 2, math.pi / 2) == pytest.approx(-0.9344)


@given(alpha=angles, beta=angles)
def test_singlet_correlation(alpha, beta):
    assert qstate.joint(SINGLET, alpha, beta) == pytest.approx(
        -math.cos(alpha - beta), abs=1e-12
    )


def test_singlet_probabilities_at_equal_angles():
    probs = qstate.outcome_probabilities(SINGLET, 0.0, 0.0)
    assert probs[(1, 1)] == 0.0
    assert probs[(-1, -1)] == 0.0
    assert probs[(1, -1)] == pytest.approx(0.5)
    assert probs[(-1, 1)] == pytest.approx(0.5)


def test_maximally_mixed_probabilities():
    probs = qstate.outcome_probabilities(MAXIMALLY_MIXED, 0.3, 1.7)
    assert all(p == pytest.approx(0.25) for p in probs.values())


def test_unphysical_probability_raises():
    state = XZState(a_z=1.0, b_z=-1.0, c_zz=1.0)
    with pytest.raises(UnphysicalStateError, match="p\\(-1,\\+1\\)"):
        qstate.outcome_probabilities(state, 0.0, 0.0)


@given(seed=seeds, alpha=angles, beta=angles)
def test_probabilities_of_physical_states(seed, alpha, beta):
    probs = qstate.outcome_probabilities(random_physical_state(seed), alpha, beta)
    assert sum(probs.values()) == pytest.approx(1.0)
    assert all(0.0 <= p <= 1.0 for p in probs.values())


def test_probability_grid_matches_pointwise():
    alphas = [0.1, 2.0]
    betas = [0.5, 4.0, 5.5]
    grid = qstate.probability_grid(TABLE_I_STATE, alphas, betas)
    assert grid.shape == (2, 3, 2, 2)
    probs = qstate.outcome_probabilities(TABLE_I_STATE, alphas[1], betas[2])
    assert grid[1, 2, 0, 0] == pytest.approx(probs[(1, 1)])
    assert grid[1, 2, 0, 1] == pytest.approx(probs[(1, -1)])
    assert grid[1, 2, 1, 0] == pytest.approx(probs[(-1, 1)])
    assert grid[1, 2, 1, 1] == pytest.approx(probs[(-1, -1)])


# --- Physicality ---


def test_random_states_are_physical(random_states):
    assert all(qstate.is_physical(state) for state in random_states)


def test_table_i_is_slightly_unphysical():
    assert not qstate.is_physical(TABLE_I_STATE, n_angles=720)


def test_nearest_physical_mixture_of_table_i():
    mixed, p_noise = qstate.nearest_physical_mixture(TABLE_I_STATE)
    assert 0.005 < p_noise < 0.03
    assert qstate.is_physical(mixed, n_angles=720)
    assert mixed.c_zz == pytest.approx((1 - p_noise) * TABLE_I_STATE.c_zz)


def test_nearest_physical_mixture_leaves_physical_state():
    werner = qstate.werner_state(0.9)
    state, p_noise = qstate.nearest_physical_mixture(werner)
    assert state == werner
    assert p_noise == 0.0


def test_nearest_physical_mixture_keeps_margin_at_boundary():
    # The singlet has zero probabilities, so it only gets the margin's worth of noise.
    _, p_noise = qstate.nearest_physical_mixture(SINGLET)
    assert p_noise == pytest.approx(1e-3)


# --- Constructors ---


def test_werner_state():
    state = qstate.werner_state(WernerParams(0.94))
    assert state == XZState(c_zz=-0.94, c_xx=-0.94)
    assert qstate.werner_state(1.0) == SINGLET


@pytest.mark.parametrize("visibility", [-0.1, 1.2])
def test_werner_visibility_out_of_range(visibility):
    with pytest.raises(InputError):
        WernerParams(visibility)


def test_mix_with_noise():
    assert qstate.mix_with_noise(SINGLET, 0.25) == XZState(c_zz=-0.75, c_xx=-0.75)
    assert qstate.mix_with_noise(SINGLET, 1.0) == MAXIMALLY_MIXED
    with pytest.raises(InputError):
        qstate.mix_with_noise(SINGLET, 1.5)


def test_werner_visibility_fit():
    assert qstate.werner_visibility(TABLE_I_STATE) == pytest.approx(0.94965)
    assert qstate.werner_visibility(qstate.werner_state(0.3)) == pytest.approx(0.3)


# --- State references ---


def test_load_state_shortcuts():
    assert qstate.load_state("table-i") == TABLE_I_STATE
    assert qstate.load_state("singlet") == SINGLET
    assert qstate.load_state("werner:0.5") == XZState(c_zz=-0.5, c_xx=-0.5)


def test_load_state_from_file(tmp_path):
    path = tmp_path / "state.json"
    path.write_text(json.dumps(TABLE_I_STATE.to_dict()))
    assert qstate.load_state(path) == TABLE_I_STATE


@pytest.mark.parametrize("ref", ["werner:abc", "werner:2", "missing_state.json"])
def test_load_state_bad_reference(ref):
    with pytest.raises(InputError):
        qstate.load_state(ref)
