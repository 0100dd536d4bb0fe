"""Two-qubit states described by their expectation coefficients in the xz Bloch plane.

All angles here are Bloch-plane angles in radians. A measurement along theta is the
observable cos(theta) sigma_z + sin(theta) sigma_x. The polarizer convention lives in
experiment.py.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .command_errors import InputError, UnphysicalStateError
from .utils import read_json


logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-9
COEFFICIENT_NAMES = ("a_z", "a_x", "b_z", "b_x", "c_zz", "c_zx", "c_xz", "c_xx")
OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Angle values are plain floats in radians; normalize_angle() maps them to [0, 2pi).
Angle = float


def normalize_angle(theta):
    """Map an angle in radians to [0, 2pi)."""
    value = math.fmod(float(theta), 2 * math.pi)
    if value < 0:
        value += 2 * math.pi
    # fmod can land exactly on 2pi after the shift, from rounding.
    if value >= 2 * math.pi:
        value = 0.0
    return value


@dataclass(frozen=True)
class XZState:
    """The 8 in-plane coefficients of a two-qubit state.

    a_i = <sigma_i x 1>, b_j = <1 x sigma_j>, c_ij = <sigma_i x sigma_j>, i, j in {z, x}.
    Global positivity of the full density matrix is not checked; see is_physical().
    """

    a_z: float = 0.0
    a_x: float = 0.0
    b_z: float = 0.0
    b_x: float = 0.0
    c_zz: float = 0.0
    c_zx: float = 0.0
    c_xz: float = 0.0
    c_xx: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InputError(f"Coefficient {f.name} must be a number, got {value!r}.")
            if not math.isfinite(value) or not -1.0 <= value <= 1.0:
                raise InputError(f"Coefficient {f.name}={value} is outside [-1, 1].")
            object.__setattr__(self, f.name, value)

    # --- Array views ---

    @property
    def alice_vector(self):
        return np.array([self.a_z, self.a_x])

    @property
    def bob_vector(self):
        return np.array([self.b_z, self.b_x])

    @property
    def correlation_matrix(self):
        """Rows are Alice's (z, x), columns Bob's (z, x)."""
        return np.array([[self.c_zz, self.c_zx], [self.c_xz, self.c_xx]])

    # --- Serialization ---

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Build a state from a mapping with all 8 coefficient keys; extra keys are ignored."""
        if not isinstance(data, dict):
            raise InputError("State JSON must be an object of coefficients.")
        missing = [name for name in COEFFICIENT_NAMES if name not in data]
        if missing:
            raise InputError(f"State is missing coefficient(s): {', '.join(missing)}")
        return cls(**{name: data[name] for name in COEFFICIENT_NAMES})


@dataclass(frozen=True)
class WernerParams:
    """Visibility V of rho_W = V |psi-><psi-| + (1 - V) 1/4."""

    visibility: float

    def __post_init__(self):
        v = float(self.visibility)
        if not 0.0 <= v <= 1.0:
            raise InputError(f"Visibility must lie in [0, 1], got {v}.")
        object.__setattr__(self, "visibility", v)


# Partial tomography of the source, in expectation-value form, with its reported errors.
TABLE_I_STATE = XZState(
    a_z=0.065,
    a_x=0.036,
    b_z=-0.078,
    b_x=-0.015,
    c_zz=-0.9649,
    c_zx=0.1053,
    c_xz=-0.0201,
    c_xx=-0.9344,
)
TABLE_I_SIGMAS = {
    "a_z": 0.034,
    "a_x": 0.014,
    "b_z": 0.020,
    "b_x": 0.019,
    "c_zz": 0.0012,
    "c_zx": 0.0045,
    "c_xz": 0.0048,
    "c_xx": 0.0017,
}

SINGLET = XZState(c_zz=-1.0, c_xx=-1.0)
MAXIMALLY_MIXED = XZState()


# --- Expectation values ---


def marginal_alice(state, alpha):
    """E(alpha) = cos(alpha) a_z + sin(alpha) a_x."""
    return math.cos(alpha) * state.a_z + math.sin(alpha) * state.a_x


def marginal_bob(state, beta):
    """E(beta) = cos(beta) b_z + sin(beta) b_x."""
    return math.cos(beta) * state.b_z + math.sin(beta) * state.b_x


def joint(state, alpha, beta):
    """E(alpha, beta), the correlation of Alice's and Bob's +/-1 outcomes."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    return (
        ca * cb * state.c_zz
        + ca * sb * state.c_zx
        + sa * cb * state.c_xz
        + sa * sb * state.c_xx
    )


def outcome_probabilities(state, alpha, beta, tol=PROBABILITY_TOL):
    """Joint outcome probabilities p(a, b) for a, b in {+1, -1}.

    p(a, b) = (1 + a E(alpha) + b E(beta) + ab E(alpha, beta)) / 4. Values within tol
    outside [0, 1] are clamped.

    Returns:
        dict mapping (a, b) to p(a, b).
    Raises:
        UnphysicalStateError: If any probability is further than tol outside [0, 1].
    """
    e_a = marginal_alice(state, alpha)
    e_b = marginal_bob(state, beta)
    e_ab = joint(state, alpha, beta)

    probabilities = {}
    for a, b in OUTCOMES:
        p = (1 + a * e_a + b * e_b + a * b * e_ab) / 4
        if p < -tol or p > 1 + tol:
            raise UnphysicalStateError(
                f"Unphysical state: p({a:+d},{b:+d}) = {p:.6g} at "
                f"alpha={alpha:.6g}, beta={beta:.6g} rad."
            )
        probabilities[(a, b)] = min(max(p, 0.0), 1.0)
    return probabilities


def probability_grid(state, alphas, betas):
    """Unclamped outcome probabilities over a grid of angles.

    Returns:
        Array of shape (len(alphas), len(betas), 2, 2); the last two axes index
        a and b, with index 0 for +1 and 1 for -1.
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    dir_a = np.stack([np.cos(alphas), np.sin(alphas)], axis=-1)
    dir_b = np.stack([np.cos(betas), np.sin(betas)], axis=-1)

    e_a = dir_a @ state.alice_vector
    e_b = dir_b @ state.bob_vector
    e_ab = dir_a @ state.correlation_matrix @ dir_b.T

    signs = np.array([1.0, -1.0])
    return (
        1
        + signs[None, None, :, None] * e_a[:, None, None, None]
        + signs[None, None, None, :] * e_b[None, :, None, None]
        + (signs[:, None] * signs[None, :])[None, None] * e_ab[:, :, None, None]
    ) / 4


def is_physical(state, n_angles=72, tol=PROBABILITY_TOL):
    """Check in-plane probability positivity on an n_angles x n_angles grid."""
    grid = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    probs = probability_grid(state, grid, grid)
    return bool(probs.min() >= -tol and probs.max() <= 1 + tol)


# --- Constructors ---


def werner_state(params):
    """Werner state with visibility V: c_zz = c_xx = -V, everything else 0."""
    if not isinstance(params, WernerParams):
        params = WernerParams(params)
    v = params.visibility
    return XZState(c_zz=-v, c_xx=-v)


def mix_states(state_1, state_2, weight):
    """Coefficientwise mixture weight * state_1 + (1 - weight) * state_2."""
    if not 0.0 <= weight <= 1.0:
        raise InputError(f"Mixing weight must lie in [0, 1], got {weight}.")
    d1, d2 = state_1.to_dict(), state_2.to_dict()
    return XZState(**{k: weight * d1[k] + (1 - weight) * d2[k] for k in COEFFICIENT_NAMES})


def mix_with_noise(state, p_noise):
    """rho -> p_noise 1/4 + (1 - p_noise) rho. White noise has all coefficients zero."""
    if not 0.0 <= p_noise <= 1.0:
        raise InputError(f"Noise fraction must lie in [0, 1], got {p_noise}.")
    return mix_states(MAXIMALLY_MIXED, state, p_noise)


def werner_visibility(state):
    """Visibility of the Werner state matching the diagonal correlations, -(c_zz + c_xx)/2."""
    v = -(state.c_zz + state.c_xx) / 2
    return min(max(v, 0.0), 1.0)


def nearest_physical_mixture(state, n_angles=720, margin=1e-3):
    """Smallest white-noise admixture that makes state physical in the xz plane.

    Probabilities of the mixture are (1 + (1 - p) f) / 4, where f is the signed
    combination of expectations. With m the minimum of f over a dense grid, the mixture
    is nonnegative once (1 - p) |m| <= 1 - margin.

    Returns:
        Tuple (mixed_state, p_noise). p_noise is 0 and the state is returned as-is when
        it is already physical on the grid.
    """
    grid = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    f = 4 * probability_grid(state, grid, grid) - 1
    f_min = float(f.min())
    if f_min >= -1 + margin:
        return state, 0.0

    p_noise = 1 - (1 - margin) / abs(f_min)
    logger.debug("Mixing %.6g white noise to reach a physical state.", p_noise)
    return mix_with_noise(state, p_noise), p_noise


def load_state(ref):
    """Resolve a state reference: a JSON path, 'table-i', 'singlet', or 'werner:V'."""
    ref = str(ref)
    if ref == "table-i":
        return TABLE_I_STATE
    if ref == "singlet":
        return SINGLET
    if ref.startswith("werner:"):
        try:
            v = float(ref.split(":", 1)[1])
        except ValueError:
            raise InputError(f"Could not read a visibility from {ref!r}.")
        return werner_state(WernerParams(v))
    return XZState.from_dict(read_json(ref))
