"""Low-level tracking controllers and the actuator map.

Three interchangeable laws drive the yaw and depth channels: the sigmoid
S-Surface law, PID with conditional-integration anti-windup, and a
boundary-layer sliding-mode law.  A proportional speed loop holds the surge
setpoint.  All controllers emit normalized channel outputs in [-1, 1]; the
actuator map converts them to generalized forces with rpm saturation.
"""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import wrap_angle

N_MAX_RPM = 1525.0


@dataclass
class TrackingError:
    """Channel error and its backward-difference derivative."""

    e: float
    e_dot: float


@dataclass
class SSurfaceGains:
    zeta1: float = 2.0
    zeta2: float = 1.0

    def __post_init__(self):
        if self.zeta1 <= 0 or self.zeta2 <= 0:
            raise ValueError("S-Surface gains must be positive")


@dataclass
class PidGains:
    kp: float = 1.0
    ki: float = 0.0
    kd: float = 0.0

    def __post_init__(self):
        if self.kp <= 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("PID gains must be nonnegative with kp > 0")


@dataclass
class SmcGains:
    slope: float = 1.0
    gain: float = 0.8
    width: float = 0.5

    def __post_init__(self):
        if self.slope <= 0 or self.gain <= 0 or self.width <= 0:
            raise ValueError("SMC gains must be positive")


@dataclass
class ActuatorCommand:
    """Normalized channel outputs plus the implied propeller revolution."""

    u_surge: float = 0.0
    u_yaw: float = 0.0
    u_depth: float = 0.0

    @property
    def rpm(self):
        return float(np.clip(self.u_surge, -1.0, 1.0) * N_MAX_RPM)


@dataclass
class ActuatorLimits:
    thrust_max: float = 36.0   # N at 1525 rpm
    yaw_moment_max: float = 2.5   # N*m
    heave_force_max: float = 20.0   # N
    pitch_moment_max: float = 6.0   # N*m
    depth_blend: float = 0.7   # heave share; (1 - blend) drives pitch


def s_surface(err, gains, delta_u=0.0):
    """u = 2 / (1 + exp(-z1*e - z2*e_dot)) - 1 + delta_u.

    Equals tanh((z1*e + z2*e_dot)/2) + delta_u; strictly increasing in both
    arguments and bounded in (-1 + delta_u, 1 + delta_u).
    """
    x = gains.zeta1 * err.e + gains.zeta2 * err.e_dot
    return 2.0 / (1.0 + np.exp(-x)) - 1.0 + delta_u


def smc(err, gains):
    """Sliding mode with boundary layer: u = -gain * sat(s / width)."""
    s = err.e_dot + gains.slope * err.e
    return -gains.gain * float(np.clip(s / gains.width, -1.0, 1.0))


class PidState:
    """PID with conditional integration: the accumulator freezes while the
    output is saturated and the error would push it further."""

    def __init__(self, gains):
        self.gains = gains
        self.integral = 0.0

    def update(self, err, dt):
        g = self.gains
        raw = g.kp * err.e + g.ki * self.integral + g.kd * err.e_dot
        u = float(np.clip(raw, -1.0, 1.0))
        saturated = raw != u
        if not (saturated and raw * err.e > 0.0):
            self.integral += err.e * dt
        return u

    def reset(self):
        self.integral = 0.0


def pid(err, state, dt):
    return state.update(err, dt)


@dataclass
class ControllerGains:
    """Per-channel gain sets for all three law families."""

    ss_yaw: SSurfaceGains = field(default_factory=lambda: SSurfaceGains(2.0, 1.0))
    ss_depth: SSurfaceGains = field(default_factory=lambda: SSurfaceGains(1.0, 1.0))
    # PID/SMC defaults tuned once on the calm-water step benchmark to ~5%
    # overshoot (see tracking.step_response_benchmark); kept in config.
    pid_yaw: PidGains = field(default_factory=lambda: PidGains(0.9, 0.05, 1.1))
    pid_depth: PidGains = field(default_factory=lambda: PidGains(0.35, 0.02, 0.9))
    smc_yaw: SmcGains = field(default_factory=lambda: SmcGains(0.9, 0.85, 0.6))
    smc_depth: SmcGains = field(default_factory=lambda: SmcGains(0.5, 0.9, 0.8))
    speed_kp: float = 1.5


S_SURFACE, PID_LAW, SMC_LAW = "ssurface", "pid", "smc"
CONTROLLER_KINDS = (S_SURFACE, PID_LAW, SMC_LAW)


class VehicleController:
    """Yaw + depth + speed tracking for one vehicle.

    Keeps backward-difference error memory and PID integral state; one
    instance per vehicle, reset at episode boundaries.
    """

    def __init__(self, kind, gains=None, dt=0.05, delta_u=0.0):
        if kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {kind!r}")
        self.kind = kind
        self.gains = gains if gains is not None else ControllerGains()
        self.dt = dt
        self.delta_u = delta_u
        self._pid_yaw = PidState(self.gains.pid_yaw)
        self._pid_depth = PidState(self.gains.pid_depth)
        self._prev_e_yaw = None
        self._prev_e_depth = None

    def reset(self):
        self._pid_yaw.reset()
        self._pid_depth.reset()
        self._prev_e_yaw = None
        self._prev_e_depth = None

    def _errors(self, eta, nu, yaw_ref, depth_ref):
        e_yaw = float(wrap_angle(yaw_ref - eta[5]))
        e_depth = float(depth_ref - eta[2])
        de_yaw = 0.0 if self._prev_e_yaw is None else (e_yaw - self._prev_e_yaw) / self.dt
        de_depth = 0.0 if self._prev_e_depth is None else (e_depth - self._prev_e_depth) / self.dt
        self._prev_e_yaw = e_yaw
        self._prev_e_depth = e_depth
        return TrackingError(e_yaw, de_yaw), TrackingError(e_depth, de_depth)

    def update(self, eta, nu, yaw_ref, depth_ref, speed_ref):
        """One control tick; returns (ActuatorCommand, yaw_err, depth_err)."""
        err_yaw, err_depth = self._errors(eta, nu, yaw_ref, depth_ref)
        if self.kind == S_SURFACE:
            u_yaw = s_surface(err_yaw, self.gains.ss_yaw, self.delta_u)
            u_depth = s_surface(err_depth, self.gains.ss_depth, self.delta_u)
        elif self.kind == PID_LAW:
            u_yaw = pid(err_yaw, self._pid_yaw, self.dt)
            u_depth = pid(err_depth, self._pid_depth, self.dt)
        else:
            u_yaw = smc(err_yaw, self.gains.smc_yaw)
            u_depth = smc(err_depth, self.gains.smc_depth)
        u_speed = float(np.clip(self.gains.speed_kp * (speed_ref - nu[0]), -1.0, 1.0))
        cmd = ActuatorCommand(
            u_surge=u_speed,
            u_yaw=float(np.clip(u_yaw, -1.0, 1.0)),
            u_depth=float(np.clip(u_depth, -1.0, 1.0)),
        )
        return cmd, err_yaw, err_depth


def actuator_map(cmd, limits=None):
    """Map normalized channel outputs to a generalized force.

    Surge thrust follows the propeller law c_T * n * |n|; yaw moment and the
    heave/pitch depth blend scale linearly to their configured maxima.
    """
    if limits is None:
        limits = ActuatorLimits()
    n = cmd.rpm
    c_t = limits.thrust_max / (N_MAX_RPM * N_MAX_RPM)
    u_yaw = float(np.clip(cmd.u_yaw, -1.0, 1.0))
    u_depth = float(np.clip(cmd.u_depth, -1.0, 1.0))
    tau = np.zeros(6)
    tau[0] = c_t * n * abs(n)
    tau[2] = limits.depth_blend * u_depth * limits.heave_force_max
    tau[4] = -(1.0 - limits.depth_blend) * u_depth * limits.pitch_moment_max
    tau[5] = u_yaw * limits.yaw_moment_max
    return tau
