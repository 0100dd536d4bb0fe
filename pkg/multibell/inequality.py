"""Bell inequalities as coefficient tables over expectation values.

A table with N settings per side holds marginal coefficients n_i (Alice) and m_j (Bob),
joint coefficients l_ij, and the local bound I_L:

    I = sum_i n_i E(alpha_i) + sum_j m_j E(beta_j) + sum_ij l_ij E(alpha_i, beta_j) <= I_L
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .command_errors import InputError, NumericalError
from .qstate import normalize_angle


MAX_BRUTEFORCE_SETTINGS = 16


@dataclass(frozen=True)
class InequalityTable:
    """Coefficients and local bound of an N x N-setting, two-outcome Bell inequality."""

    name: str
    alice_marginals: tuple
    bob_marginals: tuple
    joint_coeffs: tuple
    local_bound: float

    def __post_init__(self):
        alice = tuple(float(x) for x in self.alice_marginals)
        bob = tuple(float(x) for x in self.bob_marginals)
        joint = tuple(tuple(float(x) for x in row) for row in self.joint_coeffs)

        n = len(alice)
        if n < 1:
            raise InputError(f"Inequality {self.name!r} needs at least one setting.")
        if len(bob) != n:
            raise InputError(
                f"Inequality {self.name!r}: {n} Alice marginals but {len(bob)} Bob marginals."
            )
        if len(joint) != n or any(len(row) != n for row in joint):
            raise InputError(f"Inequality {self.name!r}: joint coefficients must be {n}x{n}.")

        object.__setattr__(self, "alice_marginals", alice)
        object.__setattr__(self, "bob_marginals", bob)
        object.__setattr__(self, "joint_coeffs", joint)
        object.__setattr__(self, "local_bound", float(self.local_bound))

    @property
    def n_settings(self):
        return len(self.alice_marginals)

    @property
    def n(self):
        """Alice's marginal coefficients as an array."""
        return np.array(self.alice_marginals)

    @property
    def m(self):
        """Bob's marginal coefficients as an array."""
        return np.array(self.bob_marginals)

    @property
    def l(self):
        """Joint coefficients as an N x N array, rows indexed by Alice's setting."""
        return np.array(self.joint_coeffs)

    @property
    def has_marginals(self):
        return any(self.alice_marginals) or any(self.bob_marginals)

    def to_dict(self):
        return {
            "name": self.name,
            "n": self.n_settings,
            "alice_marginals": list(self.alice_marginals),
            "bob_marginals": list(self.bob_marginals),
            "joint": [list(row) for row in self.joint_coeffs],
            "local_bound": self.local_bound,
        }

    @classmethod
    def from_dict(cls, data):
        required = ("name", "n", "alice_marginals", "bob_marginals", "joint", "local_bound")
        missing = [key for key in required if key not in data]
        if missing:
            raise InputError(f"Inequality JSON is missing key(s): {', '.join(missing)}")
        table = cls(
            name=data["name"],
            alice_marginals=data["alice_marginals"],
            bob_marginals=data["bob_marginals"],
            joint_coeffs=data["joint"],
            local_bound=data["local_bound"],
        )
        if table.n_settings != int(data["n"]):
            raise InputError(
                f"Inequality {table.name!r} declares n={data['n']} "
                f"but has {table.n_settings} settings."
            )
        return table


@dataclass(frozen=True)
class SettingsVector:
    """Measurement angles (radians, Bloch plane) for Alice and Bob."""

    alice_angles: tuple
    bob_angles: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "alice_angles", tuple(normalize_angle(a) for a in self.alice_angles)
        )
        object.__setattr__(
            self, "bob_angles", tuple(normalize_angle(b) for b in self.bob_angles)
        )

    def check_against(self, table):
        """Raise InputError unless both angle lists match the table's settings count."""
        n = table.n_settings
        if len(self.alice_angles) != n or len(self.bob_angles) != n:
            raise InputError(
                f"Settings have {len(self.alice_angles)}/{len(self.bob_angles)} angles; "
                f"inequality {table.name!r} needs {n} per side."
            )

    def to_dict(self):
        return {
            "alice_angles_rad": list(self.alice_angles),
            "bob_angles_rad": list(self.bob_angles),
            "alice_angles_deg": [math.degrees(a) for a in self.alice_angles],
            "bob_angles_deg": [math.degrees(b) for b in self.bob_angles],
        }

    @classmethod
    def from_degrees(cls, alice_deg, bob_deg):
        return cls(
            alice_angles=[math.radians(a) for a in alice_deg],
            bob_angles=[math.radians(b) for b in bob_deg],
        )

    @classmethod
    def from_dict(cls, data):
        """Settings from JSON with radian or degree angle lists; radians win if both are given."""
        if not isinstance(data, dict):
            raise InputError("Settings JSON must be an object.")
        if "alice_angles_rad" in data and "bob_angles_rad" in data:
            return cls(alice_angles=data["alice_angles_rad"], bob_angles=data["bob_angles_rad"])
        if "alice_angles_deg" in data and "bob_angles_deg" in data:
            return cls.from_degrees(data["alice_angles_deg"], data["bob_angles_deg"])
        raise InputError(
            "Settings JSON needs alice_angles_rad and bob_angles_rad, "
            "or alice_angles_deg and bob_angles_deg."
        )


# --- Catalog ---


def catalog_chsh():
    """CHSH: E11 + E12 - E21 + E22 <= 2."""
    return InequalityTable(
        name="chsh",
        alice_marginals=(0, 0),
        bob_marginals=(0, 0),
        joint_coeffs=((1, 1), (-1, 1)),
        local_bound=2,
    )


def catalog_i3322():
    """I3322 in expectation-value form, local bound 4."""
    return InequalityTable(
        name="i3322",
        alice_marginals=(1, 1, 0),
        bob_marginals=(1, 1, 0),
        joint_coeffs=((-1, -1, -1), (-1, -1, 1), (-1, 1, 0)),
        local_bound=4,
    )


def catalog_as1():
    """First correlation-only I4422 inequality, local bound 6."""
    return InequalityTable(
        name="as1",
        alice_marginals=(0, 0, 0, 0),
        bob_marginals=(0, 0, 0, 0),
        joint_coeffs=((1, 1, 1, 1), (1, 1, 1, -1), (1, 1, -2, 0), (1, -1, 0, 0)),
        local_bound=6,
    )


def catalog_as2():
    """Second correlation-only I4422 inequality, local bound 10."""
    return InequalityTable(
        name="as2",
        alice_marginals=(0, 0, 0, 0),
        bob_marginals=(0, 0, 0, 0),
        joint_coeffs=((2, 1, 1, 2), (1, 1, 2, -2), (1, 2, -2, -1), (2, -2, -1, -1)),
        local_bound=10,
    )


def catalog_chained(n):
    """Chained inequality with n settings per side.

    E(a1,b1) + E(b1,a2) + E(a2,b2) + ... + E(aN,bN) - E(bN,a1) <= 2(N - 1).
    """
    if isinstance(n, bool) or int(n) != n:
        raise InputError(f"Chained inequality needs an integer number of settings, got {n!r}.")
    n = int(n)
    if n < 2:
        raise InputError(f"Chained inequality needs N >= 2, got {n}.")

    joint = np.zeros((n, n))
    for i in range(n):
        joint[i, i] = 1
        if i + 1 < n:
            joint[i + 1, i] = 1
    joint[0, n - 1] = -1

    return InequalityTable(
        name=f"chained:{n}",
        alice_marginals=(0,) * n,
        bob_marginals=(0,) * n,
        joint_coeffs=tuple(tuple(row) for row in joint),
        local_bound=2 * (n - 1),
    )


def chained_order(table):
    """N if table is a chained inequality (CHSH counts as N=2), else None."""
    if table.name == "chsh":
        return 2
    name, _, param = table.name.partition(":")
    if name == "chained" and param.isdigit():
        return int(param)
    return None


# --- Evaluation ---


def _directions(angles):
    angles = np.asarray(angles, dtype=float)
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def evaluate_angles(table, state, alice_angles, bob_angles):
    """Bell value for raw angle arrays. No normalization or validation."""
    dir_a = _directions(alice_angles)
    dir_b = _directions(bob_angles)
    e_a = dir_a @ state.alice_vector
    e_b = dir_b @ state.bob_vector
    e_ab = dir_a @ state.correlation_matrix @ dir_b.T
    return float(table.n @ e_a + table.m @ e_b + np.sum(table.l * e_ab))


def evaluate(table, state, settings):
    """Value of the Bell expression for state measured at settings."""
    settings.check_against(table)
    return evaluate_angles(table, state, settings.alice_angles, settings.bob_angles)


def evaluate_deterministic(table, alice_outcomes, bob_outcomes):
    """Bell value of a deterministic local strategy, outcomes in {+1, -1}."""
    a = np.asarray(alice_outcomes, dtype=float)
    b = np.asarray(bob_outcomes, dtype=float)
    if a.shape != (table.n_settings,) or b.shape != (table.n_settings,):
        raise InputError(f"Deterministic strategy must assign {table.n_settings} outcomes per side.")
    return float(table.n @ a + table.m @ b + a @ table.l @ b)


def local_bound_bruteforce(table):
    """Maximum of the Bell expression over deterministic local strategies.

    Enumerates Alice's 2^N assignments. For each, Bob's best response is exact:
    b_j = sign(m_j + sum_i l_ij a_i), giving sum_j |m_j + sum_i l_ij a_i|.

    Raises:
        NumericalError: If N exceeds MAX_BRUTEFORCE_SETTINGS.
    """
    n = table.n_settings
    if n > MAX_BRUTEFORCE_SETTINGS:
        raise NumericalError(
            f"Brute-force local bound supports at most {MAX_BRUTEFORCE_SETTINGS} settings "
            f"per side; {table.name!r} has {n}."
        )

    alice = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    values = alice @ table.n + np.abs(table.m[None, :] + alice @ table.l).sum(axis=1)
    return float(values.max())


def noise_tolerance(local_bound, observed):
    """Critical white-noise fraction: max(0, 1 - I_L / I_exp).

    Assumes white noise contributes 0 to the Bell value. The maximally mixed state has all
    in-plane expectations zero, so mixing scales the value by (1 - p_noise).
    """
    if observed <= 0:
        raise InputError(f"Observed Bell value must be positive, got {observed}.")
    return max(0.0, 1 - local_bound / observed)
