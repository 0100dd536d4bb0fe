"""Tests for the no-signaling linear programs."""

import itertools
import math

import numpy as np
import pytest

from multibell import inequality as ineq
from multibell import polytope
from multibell.command_errors import InfeasibleError, InputError, NumericalError
from multibell.polytope import BehaviorLP


def deterministic_behavior(lp, alice_outcomes, bob_outcomes):
    p = np.zeros(lp.size)
    for x, y in itertools.product(range(lp.n), repeat=2):
        p[lp.index(alice_outcomes[x], bob_outcomes[y], x, y)] = 1.0
    return p


def correlation_behavior(lp, correlations):
    """Uniform marginals with the given correlators, a no-signaling behavior."""
    p = np.zeros(lp.size)
    for x, y in itertools.product(range(lp.n), repeat=2):
        for a, b in itertools.product((1, -1), repeat=2):
            p[lp.index(a, b, x, y)] = (1 + a * b * correlations[x][y]) / 4
    return p


def chained_table(n):
    return ineq.catalog_chsh() if n == 2 else ineq.catalog_chained(n)


# --- LP wrapper ---


def test_lp_solve_maximizes():
    solution = polytope.lp_solve([1, 1], A_ub=[[1, 1]], b_ub=[1], bounds=(0, None))
    assert solution.value == pytest.approx(1.0)
    assert solution.status == 0


def test_lp_solve_minimizes():
    solution = polytope.lp_solve([1, 2], A_eq=[[1, 1]], b_eq=[1], bounds=(0, 1), maximize=False)
    assert solution.value == pytest.approx(1.0)
    assert solution.x == pytest.approx([1.0, 0.0])


def test_lp_solve_infeasible():
    with pytest.raises(InfeasibleError):
        polytope.lp_solve([1], A_eq=[[1]], b_eq=[2], bounds=(0, 1))


def test_lp_solve_unbounded():
    with pytest.raises(NumericalError):
        polytope.lp_solve([1], A_ub=[[-1]], b_ub=[0], bounds=(0, None))


def test_lp_solve_single_variable():
    solution = polytope.lp_solve([1], A_ub=[[1]], b_ub=[3], bounds=(0, None))
    assert solution.value == pytest.approx(3.0)


def test_lp_solve_dual_certificate():
    solution = polytope.lp_solve([1, 1], A_ub=[[1, 1]], b_ub=[1], bounds=(0, None))
    assert solution.ub_duals == pytest.approx([1.0])
    assert solution.eq_duals.size == 0


@pytest.mark.parametrize("n", [2, 4, 6])
def test_ns_max_certificate(n):
    """Strong duality: the dual objective matches the chained NS maximum."""
    table = chained_table(n)
    lp = BehaviorLP(n)
    A_eq, b_eq = lp.equality_constraints()
    solution = polytope.lp_solve(lp.bell_row(table), A_eq=A_eq, b_eq=b_eq, bounds=(0, 1))
    assert solution.value == pytest.approx(2 * n, abs=1e-7)
    dual_value = b_eq @ solution.eq_duals + np.sum(solution.upper_duals)
    assert dual_value == pytest.approx(solution.value, abs=1e-7)
    assert lp.check_feasible(solution.x)


def test_normalization_only_lp():
    lp = BehaviorLP(2)
    A_eq, b_eq = lp.equality_constraints()
    objective = np.zeros(lp.size)
    objective[lp.index(1, -1, 1, 0)] = 1
    assert polytope.lp_solve(objective, A_eq=A_eq, b_eq=b_eq, bounds=(0, 1)).value == (
        pytest.approx(1.0)
    )


# --- Behaviors ---


def test_index_covers_vector():
    lp = BehaviorLP(3)
    indices = {
        lp.index(a, b, x, y)
        for a, b in itertools.product((1, -1), repeat=2)
        for x, y in itertools.product(range(3), repeat=2)
    }
    assert indices == set(range(lp.size))
    assert lp.index(1, 1, 0, 0) == 0
    assert lp.index(-1, -1, 2, 2) == lp.size - 1


def test_needs_a_setting():
    with pytest.raises(InputError):
        BehaviorLP(0)


def test_pr_box_is_feasible():
    table = ineq.catalog_chsh()
    lp = BehaviorLP(2)
    p = correlation_behavior(lp, table.l)
    assert lp.check_feasible(p)
    assert lp.bell_row(table) @ p == pytest.approx(4.0)


def test_signaling_behavior_is_rejected():
    lp = BehaviorLP(2)
    p = np.zeros(lp.size)
    # Alice's outcome follows Bob's setting.
    for x, y in itertools.product(range(2), repeat=2):
        a = 1 if y == 0 else -1
        for b in (1, -1):
            p[lp.index(a, b, x, y)] = 0.5
    assert not lp.check_feasible(p)


def test_wrong_length_is_rejected():
    assert not BehaviorLP(2).check_feasible(np.zeros(5))


@pytest.mark.parametrize("name", ["chsh", "i3322", "as1"])
def test_bell_row_matches_deterministic_value(name):
    table = {
        "chsh": ineq.catalog_chsh,
        "i3322": ineq.catalog_i3322,
        "as1": ineq.catalog_as1,
    }[name]()
    lp = BehaviorLP(table.n_settings)
    row = lp.bell_row(table)
    for alice in itertools.product((1, -1), repeat=table.n_settings):
        for bob in itertools.product((1, -1), repeat=table.n_settings):
            p = deterministic_behavior(lp, alice, bob)
            assert lp.check_feasible(p)
            assert row @ p == pytest.approx(ineq.evaluate_deterministic(table, alice, bob))


def test_bell_row_checks_size():
    with pytest.raises(InputError):
        BehaviorLP(3).bell_row(ineq.catalog_chsh())


# --- No-signaling bounds ---


@pytest.mark.parametrize(
    "table, expected",
    [
        (ineq.catalog_chsh(), 4.0),
        (ineq.catalog_as1(), 14.0),
        (ineq.catalog_as2(), 24.0),
        (ineq.catalog_chained(3), 6.0),
        (ineq.catalog_chained(4), 8.0),
        (ineq.catalog_chained(5), 10.0),
        (ineq.catalog_chained(6), 12.0),
        (ineq.InequalityTable("zero", [0, 0], [0, 0], [[0, 0], [0, 0]], 0.0), 0.0),
    ],
    ids=["chsh", "as1", "as2", "chained:3", "chained:4", "chained:5", "chained:6", "zero"],
)
def test_ns_max_of_correlation_tables(table, expected):
    # Correlators can each reach +-1 with uniform marginals.
    assert polytope.ns_max(table) == pytest.approx(expected)


def test_ns_max_exceeds_local_bound_for_i3322():
    table = ineq.catalog_i3322()
    assert polytope.ns_max(table) > table.local_bound + 1


@pytest.mark.parametrize("observed", [2.0, 1.5])
def test_marginal_bound_at_or_below_local_bound(observed):
    assert polytope.ns_marginal_bound(ineq.catalog_chsh(), observed) == 1.0


@pytest.mark.parametrize(
    "n, observed",
    [(2, 2.731), (3, 4.907), (4, 7.018), (5, 8.969), (6, 10.91)],
)
def test_chained_marginal_bound_follows_line(n, observed):
    table = chained_table(n)
    bound = polytope.ns_marginal_bound(table, observed)
    assert bound == pytest.approx(polytope.chained_ns_marginal_line(n, observed), abs=1e-7)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_marginal_bound_grid_follows_line(n):
    table = chained_table(n)
    grid = np.linspace(table.local_bound, 2 * n, 10)
    bounds = [polytope.ns_marginal_bound(table, value) for value in grid]
    for value, bound in zip(grid, bounds):
        assert bound == pytest.approx(polytope.chained_ns_marginal_line(n, value), abs=1e-6)
    # Non-increasing in the observed value.
    assert all(later <= earlier + 1e-9 for earlier, later in zip(bounds, bounds[1:]))
    assert bounds[-1] == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize("name", ["as1", "as2"])
def test_marginal_bound_is_monotone(name):
    table = ineq.catalog_as1() if name == "as1" else ineq.catalog_as2()
    grid = np.linspace(table.local_bound, polytope.ns_max(table), 10)
    bounds = [polytope.ns_marginal_bound(table, value) for value in grid]
    assert all(later <= earlier + 1e-7 for earlier, later in zip(bounds, bounds[1:]))


@pytest.mark.parametrize("n, observed", [(3, 4.907), (4, 7.018)])
def test_marginal_bound_is_symmetric_for_chained(n, observed):
    table = ineq.catalog_chained(n)
    values = [
        polytope.ns_marginal_bound(table, observed, party, setting, outcome)
        for party in ("alice", "bob")
        for setting in range(n)
        for outcome in (1, -1)
    ]
    assert max(values) - min(values) < 1e-7


@pytest.mark.parametrize("name", ["chsh", "i3322", "as1", "as2", "chained:3"])
def test_ns_max_at_least_local_bound(name):
    table = {
        "chsh": ineq.catalog_chsh,
        "i3322": ineq.catalog_i3322,
        "as1": ineq.catalog_as1,
        "as2": ineq.catalog_as2,
        "chained:3": lambda: ineq.catalog_chained(3),
    }[name]()
    assert polytope.ns_max(table) >= ineq.local_bound_bruteforce(table) - 1e-9


def test_chained_4_marginal_bound_value():
    assert polytope.ns_marginal_bound(ineq.catalog_chained(4), 7.018) == pytest.approx(
        0.7455, abs=1e-7
    )


def test_marginal_bound_for_bob_and_minus_outcome():
    table = ineq.catalog_chsh()
    alice = polytope.ns_marginal_bound(table, 2.731)
    assert polytope.ns_marginal_bound(table, 2.731, party="bob", setting=1) == pytest.approx(alice)
    assert polytope.ns_marginal_bound(table, 2.731, outcome=-1) == pytest.approx(alice)


def test_marginal_bound_with_lower_bound_constraint():
    table = ineq.catalog_chained(3)
    pinned = polytope.ns_marginal_bound(table, 5.0)
    at_least = polytope.ns_marginal_bound(table, 5.0, at_least=True)
    assert at_least == pytest.approx(pinned)


def test_guessing_bound_is_max_over_marginals():
    table = ineq.catalog_chsh()
    assert polytope.ns_guessing_bound(table, 2.731) == pytest.approx(0.5 + (4 - 2.731) / 4)


def test_marginal_bound_above_ns_max():
    with pytest.raises(InfeasibleError, match="no-signaling maximum"):
        polytope.ns_marginal_bound(ineq.catalog_chsh(), 4.5)


def test_marginal_bound_unknown_party():
    with pytest.raises(InputError):
        polytope.ns_marginal_bound(ineq.catalog_chsh(), 2.5, party="eve")


# --- Quantum bound ---


def test_quantum_marginal_bound_chsh():
    assert polytope.quantum_marginal_bound_chsh(2.731) == pytest.approx(0.68399, abs=1e-5)
    assert polytope.quantum_marginal_bound_chsh(2.0) == pytest.approx(1.0)
    assert polytope.quantum_marginal_bound_chsh(2 * math.sqrt(2)) == pytest.approx(0.5)


@pytest.mark.parametrize("s_value", [1.9, 2.9])
def test_quantum_marginal_bound_range(s_value):
    with pytest.raises(InputError):
        polytope.quantum_marginal_bound_chsh(s_value)
