"""Linear programs over the no-signaling polytope of two-outcome behaviors.

A behavior is the vector of p(a,b|x,y) for a, b in {+1, -1} and settings x, y. Its
index is ((x * N + y) * 2 + ia) * 2 + ib, with ia, ib = 0 for outcome +1 and 1 for -1.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .command_errors import InfeasibleError, InputError, NumericalError, UnboundedError


logger = logging.getLogger(__name__)

NS_TOL = 1e-8
OUTCOME_SIGNS = (1, -1)
LP_METHOD = "highs"


@dataclass(frozen=True)
class LPSolution:
    """Optimum of a linear program, the point that attains it, and the dual certificate.

    Duals are for the problem in the requested sense: at the optimum,
    value == b_eq . eq_duals + b_ub . ub_duals + upper . upper_duals (lower bounds of 0).
    """

    value: float
    x: np.ndarray
    status: int
    message: str
    eq_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ub_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    upper_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _marginals(result, name, sign):
    """HiGHS sensitivities for one constraint set, or an empty array."""
    part = result.get(name)
    if part is None:
        return np.zeros(0)
    return sign * np.asarray(part.marginals, dtype=float)


def lp_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(0, None), maximize=True):
    """Solve a small dense LP with HiGHS.

    Returns:
        LPSolution with the optimum (in the requested sense), the optimizing point, and duals.
    Raises:
        InfeasibleError, UnboundedError: For those outcomes.
        NumericalError: For any other solver failure.
    """
    c = np.asarray(c, dtype=float)
    objective = -c if maximize else c
    result = linprog(
        objective,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method=LP_METHOD,
    )
    logger.debug("linprog status %d: %s", result.status, result.message)

    if result.status == 2:
        raise InfeasibleError(f"Linear program is infeasible: {result.message}")
    if result.status == 3:
        raise UnboundedError(f"Linear program is unbounded: {result.message}")
    if result.status != 0:
        raise NumericalError(f"Linear program failed (status {result.status}): {result.message}")

    sign = -1.0 if maximize else 1.0
    return LPSolution(
        value=float(sign * result.fun),
        x=result.x,
        status=result.status,
        message=result.message,
        eq_duals=_marginals(result, "eqlin", sign),
        ub_duals=_marginals(result, "ineqlin", sign),
        upper_duals=_marginals(result, "upper", sign),
    )


class BehaviorLP:
    """Constraint matrices for no-signaling behaviors with n settings per side."""

    def __init__(self, n_settings):
        if n_settings < 1:
            raise InputError(f"A behavior needs at least one setting, got {n_settings}.")
        self.n = n_settings
        self.size = 4 * n_settings**2

    def index(self, a, b, x, y):
        ia = OUTCOME_SIGNS.index(a)
        ib = OUTCOME_SIGNS.index(b)
        return ((x * self.n + y) * 2 + ia) * 2 + ib

    # --- Linear functionals ---

    def alice_marginal_row(self, x, a, y=0):
        """Row giving P(a|x), read off at Bob's setting y."""
        row = np.zeros(self.size)
        for b in OUTCOME_SIGNS:
            row[self.index(a, b, x, y)] = 1
        return row

    def bob_marginal_row(self, y, b, x=0):
        """Row giving P(b|y), read off at Alice's setting x."""
        row = np.zeros(self.size)
        for a in OUTCOME_SIGNS:
            row[self.index(a, b, x, y)] = 1
        return row

    def bell_row(self, table):
        """Row giving the Bell expression of table as a linear functional of p."""
        if table.n_settings != self.n:
            raise InputError(
                f"Inequality {table.name!r} has {table.n_settings} settings; "
                f"behavior has {self.n}."
            )
        row = np.zeros(self.size)
        for x in range(self.n):
            for y in range(self.n):
                for a in OUTCOME_SIGNS:
                    for b in OUTCOME_SIGNS:
                        k = self.index(a, b, x, y)
                        row[k] += table.l[x, y] * a * b
                        # Marginals read at setting 0 of the other party.
                        if y == 0:
                            row[k] += table.n[x] * a
                        if x == 0:
                            row[k] += table.m[y] * b
        return row

    # --- Constraint sets ---

    def equality_constraints(self):
        """Normalization and no-signaling as A_eq p = b_eq."""
        rows, rhs = [], []

        for x in range(self.n):
            for y in range(self.n):
                row = np.zeros(self.size)
                for a in OUTCOME_SIGNS:
                    for b in OUTCOME_SIGNS:
                        row[self.index(a, b, x, y)] = 1
                rows.append(row)
                rhs.append(1.0)

        # Alice's marginal does not depend on y; Bob's does not depend on x. The -1
        # outcome follows from normalization.
        for x in range(self.n):
            for y in range(1, self.n):
                rows.append(self.alice_marginal_row(x, 1, y) - self.alice_marginal_row(x, 1, 0))
                rhs.append(0.0)
        for y in range(self.n):
            for x in range(1, self.n):
                rows.append(self.bob_marginal_row(y, 1, x) - self.bob_marginal_row(y, 1, 0))
                rhs.append(0.0)

        return np.array(rows), np.array(rhs)

    def check_feasible(self, p, tol=NS_TOL):
        """True if p is a normalized, nonnegative, no-signaling behavior within tol."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.size,):
            return False
        if p.min() < -tol or p.max() > 1 + tol:
            return False
        A_eq, b_eq = self.equality_constraints()
        return bool(np.max(np.abs(A_eq @ p - b_eq)) < tol)

    def maximize(self, objective, pinned=None, at_least=False):
        """Maximize a linear functional over the polytope.

        pinned: optional (row, value) adding row . p == value (or >= value with at_least).
        """
        A_eq, b_eq = self.equality_constraints()
        A_ub = b_ub = None
        if pinned is not None:
            row, value = pinned
            if at_least:
                A_ub, b_ub = -row[None, :], np.array([-value])
            else:
                A_eq = np.vstack([A_eq, row])
                b_eq = np.append(b_eq, value)
        return lp_solve(objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, 1))


def ns_max(table):
    """Maximum of the Bell expression over no-signaling behaviors."""
    lp = BehaviorLP(table.n_settings)
    return lp.maximize(lp.bell_row(table)).value


def ns_marginal_bound(table, observed, party="alice", setting=0, outcome=1, at_least=False):
    """Largest P(outcome|setting) for one party among NS behaviors reaching the observed value.

    Values at or below the local bound return 1, since a deterministic local point is
    compatible with them.

    Raises:
        InfeasibleError: If observed exceeds the no-signaling maximum.
    """
    if observed <= table.local_bound:
        return 1.0

    lp = BehaviorLP(table.n_settings)
    if party == "alice":
        objective = lp.alice_marginal_row(setting, outcome)
    elif party == "bob":
        objective = lp.bob_marginal_row(setting, outcome)
    else:
        raise InputError(f"party must be 'alice' or 'bob', got {party!r}.")

    try:
        solution = lp.maximize(objective, pinned=(lp.bell_row(table), observed), at_least=at_least)
    except InfeasibleError:
        raise InfeasibleError(
            f"Observed value {observed} is above the no-signaling maximum "
            f"{ns_max(table):.6g} of {table.name!r}."
        )
    return min(max(solution.value, 0.0), 1.0)


def ns_guessing_bound(table, observed, at_least=False):
    """Largest marginal probability over every party, setting and outcome."""
    best = 0.0
    for party in ("alice", "bob"):
        for setting in range(table.n_settings):
            for outcome in OUTCOME_SIGNS:
                best = max(
                    best,
                    ns_marginal_bound(table, observed, party, setting, outcome, at_least),
                )
    return best


def quantum_marginal_bound_chsh(s_value):
    """Largest quantum marginal compatible with CHSH value S: 1/2 + sqrt(2 - S^2/4)/2."""
    if not 2.0 <= s_value <= 2 * math.sqrt(2) + 1e-12:
        raise InputError(f"CHSH value must lie in [2, 2*sqrt(2)], got {s_value}.")
    return 0.5 + 0.5 * math.sqrt(max(2 - s_value**2 / 4, 0.0))


def chained_ns_marginal_line(n_settings, observed):
    """Closed form of the chained-inequality NS bound: 1/2 + (2N - I)/4."""
    return 0.5 + (2 * n_settings - observed) / 4
