"""Rigid-body 6-DoF vehicle simulation.

Fossen-style marine craft model M nu_dot + C(nu)nu + D(nu)nu + g(eta) = tau
with kinematics eta_dot = J(eta) nu, discretized first order (pose from the
old velocity, then the velocity update).  Sea disturbances enter as a
kinematic current advection plus a generalized force sampled per time step.

Conventions: NED inertial frame (z down), eta = (x, y, z, roll, pitch, yaw),
nu = (u, v, w, p, q, r) body-fixed.  Angles wrapped to (-pi, pi].
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .kernels import backend as K

IDEAL, ES, VES = "ideal", "es", "ves"
SEA_CONDITIONS = (IDEAL, ES, VES)

# per-axis gust periods (s); phases are drawn per sea state
GUST_PERIODS = np.array([8.0, 9.5, 7.0, 5.5, 6.5, 6.0])
GUST_FORCE_WEIGHTS = np.array([1.0, 1.0, 0.5])
GUST_MOMENT_WEIGHTS = np.array([0.4, 1.0, 1.0])


class PitchSingularityError(ValueError):
    pass


def wrap_angle(a):
    return K.wrap_angle(a)


@dataclass
class Pose:
    """Inertial position and attitude; angles in (-pi, pi], |pitch| < pi/2."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def as_array(self):
        return np.array([self.x, self.y, self.z, self.roll, self.pitch, self.yaw])

    @classmethod
    def from_array(cls, eta):
        return cls(*np.asarray(eta, dtype=float))


@dataclass
class BodyVelocity:
    """Body-fixed linear and angular rates."""

    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0

    def as_array(self):
        return np.array([self.u, self.v, self.w, self.p, self.q, self.r])

    @classmethod
    def from_array(cls, nu):
        return cls(*np.asarray(nu, dtype=float))


@dataclass
class RigidBodyParams:
    """Mass, damping, restoring and limit parameters of one vehicle."""

    mass_matrix: np.ndarray
    d_lin: np.ndarray
    d_quad: np.ndarray
    weight: float
    buoyancy: float
    r_g: np.ndarray
    r_b: np.ndarray
    length: float = 1.6
    dry_mass: float = 31.9
    water_density: float = 1026.0
    v_max: float = 2.3
    r_max: float = 0.26
    minv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        M = np.asarray(self.mass_matrix, dtype=np.float64)
        if M.shape != (6, 6):
            raise ValueError("mass matrix must be 6x6")
        if not np.allclose(M, M.T, atol=1e-9):
            raise ValueError("mass matrix must be symmetric")
        eig = np.linalg.eigvalsh(M)
        if eig.min() <= 0:
            raise ValueError("mass matrix must be positive definite")
        if abs(self.weight - self.buoyancy) > 0.01 * self.weight:
            raise ValueError("weight and buoyancy differ by more than 1% (trim)")
        self.mass_matrix = M
        self.d_lin = np.asarray(self.d_lin, dtype=np.float64)
        self.d_quad = np.asarray(self.d_quad, dtype=np.float64)
        self.r_g = np.asarray(self.r_g, dtype=np.float64)
        self.r_b = np.asarray(self.r_b, dtype=np.float64)
        self.minv = np.linalg.inv(M)

    @classmethod
    def from_file(cls, path=None):
        """Load coefficients from a JSON data file (default: bundled set)."""
        if path is None:
            text = resources.files("dplac.data").joinpath("remus100.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        raw = json.loads(text)
        rest = raw["restoring"]
        lim = raw.get("limits", {})
        return cls(
            mass_matrix=raw["mass_matrix"],
            d_lin=raw["d_lin"],
            d_quad=raw["d_quad"],
            weight=rest["weight_n"],
            buoyancy=rest["buoyancy_n"],
            r_g=rest["r_g_m"],
            r_b=rest["r_b_m"],
            length=raw.get("length_m", 1.6),
            dry_mass=raw.get("dry_mass_kg", 31.9),
            water_density=raw.get("water_density_kg_m3", 1026.0),
            v_max=lim.get("v_max_m_s", 2.3),
            r_max=lim.get("r_max_rad_s", 0.26),
        )


@dataclass
class SeaState:
    """Disturbance model for one condition.

    The steady current advects the vehicle kinematically.  The force channel
    carries, per linear axis, a sign-fixed envelope  b + g * (0.5 + 0.5 sin)
    whose mean equals the drag-equivalent of the steady current, plus
    zero-mean sinusoidal gust moments.  Matched phases across conditions
    make the very-extreme force dominate the extreme one at every instant.
    """

    condition: str = IDEAL
    current: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gust_force_amp: float = 0.0
    gust_moment_amp: float = 0.0
    phases: np.ndarray = field(default_factory=lambda: np.zeros(6))
    periods: np.ndarray = field(default_factory=lambda: GUST_PERIODS.copy())
    drag_eq: np.ndarray = field(default_factory=lambda: np.zeros(3))
    jitter: float = 0.0

    def __post_init__(self):
        self.condition = self.condition.lower()
        if self.condition not in SEA_CONDITIONS:
            raise ValueError(f"unknown sea condition {self.condition!r}")
        self.current = np.asarray(self.current, dtype=np.float64)
        self.phases = np.asarray(self.phases, dtype=np.float64)
        self.periods = np.asarray(self.periods, dtype=np.float64)
        self.drag_eq = np.asarray(self.drag_eq, dtype=np.float64)
        if self.condition == IDEAL:
            if (
                np.any(self.current != 0.0)
                or self.gust_force_amp != 0.0
                or self.gust_moment_amp != 0.0
            ):
                raise ValueError("ideal sea requires zero disturbance magnitudes")


# default disturbance magnitudes per condition: (current m/s, gust force N)
SEA_DEFAULTS = {IDEAL: (0.0, 0.0), ES: (0.3, 5.0), VES: (0.6, 12.0)}


def make_sea_state(condition, params, rng, current_speed=None, gust_force=None, heading=None):
    """Build a SeaState with seeded phases and current heading.

    Matched seeds yield matched phases and heading across conditions, so the
    componentwise amplitude ordering between ES and VES holds pointwise.
    """
    condition = condition.lower()
    c_def, g_def = SEA_DEFAULTS[condition]
    speed = c_def if current_speed is None else current_speed
    gust = g_def if gust_force is None else gust_force
    chi = rng.uniform(0.0, 2.0 * np.pi) if heading is None else heading
    phases = rng.uniform(0.0, 2.0 * np.pi, size=6)
    if condition == IDEAL:
        return SeaState(condition=condition)
    current = np.array([speed * np.cos(chi), speed * np.sin(chi), 0.05 * speed])
    drag_eq = params.d_lin[:3] * current + params.d_quad[:3] * np.abs(current) * current
    return SeaState(
        condition=condition,
        current=current,
        gust_force_amp=gust,
        gust_moment_amp=0.05 * gust,
        phases=phases,
        drag_eq=drag_eq,
    )


def sample_disturbance(sea, t, rng=None):
    """Generalized disturbance force (body frame) at time ``t``.

    Deterministic given the sea state and time; the optional ``rng`` only
    feeds the white jitter term, which defaults to zero amplitude.
    """
    out = np.zeros(6)
    if sea.condition == IDEAL:
        return out
    env = 0.5 + 0.5 * np.sin(2.0 * np.pi * t / sea.periods + sea.phases)
    for i in range(3):
        mag = abs(sea.drag_eq[i])
        g = min(sea.gust_force_amp * GUST_FORCE_WEIGHTS[i], mag)
        b = mag - 0.5 * g
        out[i] = np.sign(sea.drag_eq[i]) * (b + g * env[i])
    amp = sea.gust_moment_amp * GUST_MOMENT_WEIGHTS
    out[3:] = amp * np.sin(2.0 * np.pi * t / sea.periods[3:] + sea.phases[3:])
    if sea.jitter > 0.0 and rng is not None:
        out += sea.jitter * rng.standard_normal(6)
    return out


def kinematic_transform(eta):
    """6x6 body-to-inertial velocity transform J(eta)."""
    eta = np.asarray(eta, dtype=np.float64)
    if abs(np.cos(eta[4])) < 1e-6:
        raise PitchSingularityError("pitch at +-pi/2: transform singular")
    return K.kinematic_transform(eta)


def coriolis_force(params, nu):
    return K.coriolis_force(params.mass_matrix, np.asarray(nu, dtype=np.float64))


def damping_force(params, nu):
    return K.damping_force(params.d_lin, params.d_quad, np.asarray(nu, dtype=np.float64))


def restoring_force(params, eta):
    return K.restoring_force(
        params.weight, params.buoyancy, params.r_g, params.r_b,
        np.asarray(eta, dtype=np.float64),
    )


def residual_force(params, eta, nu, tau):
    """F = tau - C(nu)nu - D(nu)nu - g(eta)."""
    return K.residual_force(
        params.mass_matrix, params.d_lin, params.d_quad,
        params.weight, params.buoyancy, params.r_g, params.r_b,
        np.asarray(eta, dtype=np.float64),
        np.asarray(nu, dtype=np.float64),
        np.asarray(tau, dtype=np.float64),
    )


def rhs(params, eta, nu, tau, current=None):
    """Continuous-time state derivative (used by integration oracles)."""
    eta = np.asarray(eta, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    J = kinematic_transform(eta)
    eta_dot = J @ nu
    if current is not None:
        eta_dot = eta_dot.copy()
        eta_dot[:3] += current
    nu_dot = params.minv @ residual_force(params, eta, nu, tau)
    return eta_dot, nu_dot


def step(params, eta, nu, tau, dt, sea=None, t=0.0, rng=None):
    """One discrete step; returns (eta_next, nu_next).

    Disturbance forces are added to ``tau`` before the residual force; the
    steady current advects the position.  Pure given (state, tau, sea, t).
    """
    eta = np.asarray(eta, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if abs(np.cos(eta[4])) < 1e-6:
        raise PitchSingularityError("pitch at +-pi/2: transform singular")
    if sea is not None and sea.condition != IDEAL:
        tau = tau + sample_disturbance(sea, t, rng)
        current = sea.current
    else:
        current = np.zeros(3)
    return K.dynamics_step(
        eta, nu, tau, dt,
        params.mass_matrix, params.minv, params.d_lin, params.d_quad,
        params.weight, params.buoyancy, params.r_g, params.r_b,
        current, params.v_max, params.r_max,
    )
