"""Underwater data-collection mission MDP.

Multiple vehicles service spatially distributed sensor nodes over acoustic
links relayed through a fixed surface anchor.  Each decision step runs
``n_inner`` control + dynamics sub-steps, integrates data transfer and
electrical energy, and scores reward from delivery, service completions,
energy, collisions and tracking error.  Episode metrics: sum data rate
(MBit/s), mean electrical power (W), serviced-node count, collisions.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import dynamics as dyn
from ..config import controller_gains
from ..control import ActuatorLimits, VehicleController, actuator_map
from ..dynamics import RigidBodyParams, make_sea_state


class EpisodeAbort(RuntimeError):
    """Raised when the vehicle state turns non-finite mid-episode."""


@dataclass
class SensorNode:
    position: np.ndarray
    buffer_size: float
    delivered: float = 0.0

    @property
    def serviced(self):
        return self.delivered >= self.buffer_size

    @property
    def remaining_fraction(self):
        return 1.0 - self.delivered / self.buffer_size


@dataclass
class AsvAnchor:
    position: np.ndarray          # z fixed at the surface
    relay_range: float


@dataclass
class MissionMetrics:
    delivered_mbit: float = 0.0
    energy_j: float = 0.0
    duration_s: float = 0.0
    serviced_nodes: int = 0
    collision_count: int = 0
    yaw_abs_err_sum: float = 0.0
    depth_abs_err_sum: float = 0.0
    err_samples: int = 0

    @property
    def sdr(self):
        return self.delivered_mbit / self.duration_s if self.duration_s > 0 else 0.0

    @property
    def ec(self):
        return self.energy_j / self.duration_s if self.duration_s > 0 else 0.0

    @property
    def ssn(self):
        return self.serviced_nodes

    @property
    def yaw_err_mean(self):
        return self.yaw_abs_err_sum / self.err_samples if self.err_samples else 0.0

    @property
    def depth_err_mean(self):
        return self.depth_abs_err_sum / self.err_samples if self.err_samples else 0.0


def acoustic_rate(auv_pos, node_pos, relay_ok, acoustics):
    """Link rate in MBit/s: r0 / (1 + (d/d0)^2) up to d_max, relay-penalized."""
    d = float(np.linalg.norm(np.asarray(auv_pos) - np.asarray(node_pos)))
    if d > acoustics.d_max_m:
        return 0.0
    rate = acoustics.r0_mbit_s / (1.0 + (d / acoustics.d0_m) ** 2)
    if not relay_ok:
        rate *= acoustics.relay_penalty
    return rate


def power_model(cmd, power_cfg):
    """Electrical power draw (W): cubic propeller law plus hotel load."""
    frac = abs(cmd.rpm) / 1525.0
    return power_cfg.prop_max_w * frac ** 3 + power_cfg.hotel_w


@dataclass
class StepResult:
    observations: list
    rewards: np.ndarray
    done: bool
    info: dict = field(default_factory=dict)


class MissionEnv:
    """One mission instance; deterministic given (config, seed, actions)."""

    def __init__(self, cfg, controller_kind=None, sea_condition=None, coeff_path=None):
        self.cfg = cfg
        s = cfg.scenario
        self.n_auvs = s.n_auvs
        self.volume = np.asarray(s.volume, dtype=float)
        self.params = RigidBodyParams.from_file(coeff_path or (cfg.dynamics.coeff_path or None))
        self.controller_kind = controller_kind or cfg.control.controller
        self.sea_condition = (sea_condition or cfg.dynamics.sea).lower()
        self.gains = controller_gains(cfg)
        self.limits = ActuatorLimits()
        self.dt = cfg.control.dt
        self.n_inner = cfg.control.n_inner
        self.dt_decision = self.dt * self.n_inner
        self.history_len = cfg.diffusion.history_len

        self.controllers = [
            VehicleController(self.controller_kind, self.gains, self.dt, cfg.control.delta_u)
            for _ in range(self.n_auvs)
        ]
        self.asv = AsvAnchor(
            position=np.array([0.0, 0.0, 0.0]),
            relay_range=cfg.acoustics.relay_range_m,
        )
        self.nodes = []
        self.etas = None
        self.nus = None
        self.sea = None
        self.time = 0.0
        self.step_count = 0
        self.metrics = MissionMetrics()
        self._sea_onehot = np.zeros(3)
        self._hist_state = None
        self._hist_action = None

    # ------------------------------------------------------------------ setup

    def reset(self, seed):
        """Seeded episode start: node layout, spawn poses, zeroed metrics."""
        s = self.cfg.scenario
        if s.n_nodes < 1:
            raise ValueError("scenario.n_nodes must be >= 1")
        rng = np.random.default_rng(seed)
        hx, hy, z = self.volume[0] / 2, self.volume[1] / 2, self.volume[2]
        m = s.node_margin
        self.nodes = []
        for _ in range(s.n_nodes):
            pos = np.array([
                rng.uniform(-hx + m, hx - m),
                rng.uniform(-hy + m, hy - m),
                rng.uniform(m, z - m),
            ])
            self.nodes.append(SensorNode(position=pos, buffer_size=s.buffer_mbit))
        self.sea = make_sea_state(self.sea_condition, self.params, rng)
        idx = {"ideal": 0, "es": 1, "ves": 2}[self.sea_condition]
        self._sea_onehot = np.zeros(3)
        self._sea_onehot[idx] = 1.0

        self.etas = []
        self.nus = []
        x0 = -s.spawn_fraction * self.volume[0]
        for i in range(self.n_auvs):
            off = (i - (self.n_auvs - 1) / 2.0) * 0.2 * self.volume[1]
            eta = np.array([x0, off, s.spawn_depth, 0.0, 0.0, 0.0])
            if abs(eta[0]) > hx or abs(eta[1]) > hy or not (0 < eta[2] < z):
                raise ValueError("spawn pose outside the mission volume")
            self.etas.append(eta)
            self.nus.append(np.zeros(6))
        for c in self.controllers:
            c.reset()
        self.time = 0.0
        self.step_count = 0
        self.metrics = MissionMetrics()
        L = self.history_len
        self._hist_state = [np.zeros((L, 6)) for _ in range(self.n_auvs)]
        self._hist_action = [np.zeros((L, 3)) for _ in range(self.n_auvs)]
        return [self.observation(i) for i in range(self.n_auvs)]

    # ------------------------------------------------------------- observation

    def _norm_pos(self, pos):
        hx, hy, z = self.volume[0] / 2, self.volume[1] / 2, self.volume[2]
        return np.clip(
            [pos[0] / hx, pos[1] / hy, 2.0 * pos[2] / z - 1.0], -1.0, 1.0
        )

    def _norm_delta(self, delta):
        diag = float(np.linalg.norm(self.volume))
        return np.clip(np.asarray(delta) / diag, -1.0, 1.0)

    def _state_summary(self, i):
        eta, nu = self.etas[i], self.nus[i]
        npos = self._norm_pos(eta[:3])
        return np.array([
            npos[0], npos[1], npos[2],
            np.sin(eta[5]), np.cos(eta[5]),
            np.clip(nu[0] / self.params.v_max, -1.0, 1.0),
        ])

    def observation(self, i):
        """Bounded observation vector for vehicle ``i``."""
        s = self.cfg.scenario
        eta, nu = self.etas[i], self.nus[i]
        own = np.concatenate([
            self._norm_pos(eta[:3]),
            [eta[3] / np.pi, eta[4] / (np.pi / 2), np.sin(eta[5]), np.cos(eta[5])],
            np.clip([
                nu[0] / self.params.v_max,
                nu[1] / self.params.v_max,
                nu[2] / self.params.v_max,
                nu[3] / 2.0,
                nu[4] / 2.0,
                nu[5] / self.params.r_max,
            ], -1.0, 1.0),
        ])
        pos = eta[:3]
        unserviced = [n for n in self.nodes if not n.serviced]
        unserviced.sort(key=lambda n: float(np.linalg.norm(n.position - pos)))
        node_block = np.zeros(4 * s.k_nearest)
        for j, node in enumerate(unserviced[: s.k_nearest]):
            node_block[4 * j : 4 * j + 3] = self._norm_delta(node.position - pos)
            node_block[4 * j + 3] = node.remaining_fraction
        asv_block = self._norm_delta(self.asv.position - pos)
        others = np.zeros(3 * (self.n_auvs - 1))
        k = 0
        for j in range(self.n_auvs):
            if j == i:
                continue
            others[3 * k : 3 * k + 3] = self._norm_delta(self.etas[j][:3] - pos)
            k += 1
        return np.concatenate([own, node_block, asv_block, self._sea_onehot, others])

    @property
    def obs_dim(self):
        s = self.cfg.scenario
        return 13 + 4 * s.k_nearest + 3 + 3 + 3 * (self.n_auvs - 1)

    @property
    def encoding_dim(self):
        return self.obs_dim + self.history_len * (6 + 3)

    def state_encoding(self, i):
        """Observation plus flattened state/action history (zero-padded)."""
        return np.concatenate([
            self.observation(i),
            self._hist_state[i].ravel(),
            self._hist_action[i].ravel(),
        ])

    # ------------------------------------------------------------------- step

    def setpoints(self, action):
        """Map a normalized action triple to (yaw, depth, speed) references."""
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        z = self.volume[2]
        yaw_ref = a[0] * np.pi
        depth_ref = 2.0 + (a[1] + 1.0) / 2.0 * (z - 4.0)
        speed_ref = (a[2] + 1.0) / 2.0 * self.params.v_max
        return yaw_ref, depth_ref, speed_ref

    def step(self, actions):
        """Advance one decision step with one action triple per vehicle."""
        actions = np.asarray(actions, dtype=float)
        if actions.shape != (self.n_auvs, 3):
            raise ValueError(f"expected actions of shape ({self.n_auvs}, 3)")
        s = self.cfg.scenario
        rw = self.cfg.reward
        data_gain = np.zeros(self.n_auvs)
        completions = np.zeros(self.n_auvs)
        energy = np.zeros(self.n_auvs)
        tracking = np.zeros(self.n_auvs)
        collided = np.zeros(self.n_auvs, dtype=bool)
        collision_pairs = set()

        refs = [self.setpoints(actions[i]) for i in range(self.n_auvs)]
        for _ in range(self.n_inner):
            for i in range(self.n_auvs):
                yaw_ref, depth_ref, speed_ref = refs[i]
                cmd, err_yaw, err_depth = self.controllers[i].update(
                    self.etas[i], self.nus[i], yaw_ref, depth_ref, speed_ref
                )
                tau = actuator_map(cmd, self.limits)
                eta2, nu2 = dyn.step(
                    self.params, self.etas[i], self.nus[i], tau, self.dt,
                    sea=self.sea, t=self.time,
                )
                self._confine(eta2, nu2)
                if not (np.all(np.isfinite(eta2)) and np.all(np.isfinite(nu2))):
                    raise EpisodeAbort(
                        f"non-finite state for vehicle {i} at t={self.time:.2f}s"
                    )
                self.etas[i] = eta2
                self.nus[i] = nu2
                energy[i] += power_model(cmd, self.cfg.power) * self.dt
                tracking[i] += (
                    abs(err_yaw.e) / np.pi + abs(err_depth.e) / s.depth_scale
                ) / self.n_inner
                self.metrics.yaw_abs_err_sum += abs(err_yaw.e)
                self.metrics.depth_abs_err_sum += abs(err_depth.e)
                self.metrics.err_samples += 1
                data_gain[i] += self._transfer(i, completions)
            for i in range(self.n_auvs):
                for j in range(i + 1, self.n_auvs):
                    d = np.linalg.norm(self.etas[i][:3] - self.etas[j][:3])
                    if d < s.collision_radius:
                        collided[i] = collided[j] = True
                        collision_pairs.add((i, j))
            self.time += self.dt

        self.metrics.collision_count += len(collision_pairs)
        self.metrics.delivered_mbit += float(data_gain.sum())
        self.metrics.energy_j += float(energy.sum())
        self.metrics.duration_s += self.dt_decision
        self.step_count += 1

        rewards = (
            rw.w_data * data_gain
            + rw.w_service * completions
            - rw.w_energy * energy
            - rw.w_collision * collided.astype(float)
            - rw.w_tracking * tracking
        )
        for i in range(self.n_auvs):
            self._hist_state[i] = np.roll(self._hist_state[i], -1, axis=0)
            self._hist_state[i][-1] = self._state_summary(i)
            self._hist_action[i] = np.roll(self._hist_action[i], -1, axis=0)
            self._hist_action[i][-1] = np.clip(actions[i], -1.0, 1.0)

        all_serviced = all(n.serviced for n in self.nodes)
        done = all_serviced or self.step_count >= s.episode_steps
        obs = [self.observation(i) for i in range(self.n_auvs)]
        info = {
            "terminal": "serviced" if all_serviced else ("timeout" if done else ""),
            "data_gain": data_gain,
            "energy_j": energy,
            "tracking": tracking,
            "completions": completions,
            "collisions": len(collision_pairs),
        }
        return StepResult(obs, rewards, done, info)

    def _confine(self, eta, nu):
        """Box walls: clamp position and zero the outward velocity component."""
        hx, hy, z = self.volume[0] / 2, self.volume[1] / 2, self.volume[2]
        lo = np.array([-hx, -hy, 0.5])
        hi = np.array([hx, hy, z])
        for k in range(3):
            if eta[k] < lo[k]:
                eta[k] = lo[k]
            elif eta[k] > hi[k]:
                eta[k] = hi[k]

    def _transfer(self, i, completions):
        """Integrate one sub-step of data transfer for vehicle ``i``."""
        pos = self.etas[i][:3]
        relay_ok = (
            float(np.linalg.norm(pos - self.asv.position)) <= self.asv.relay_range
        )
        best, best_d = None, np.inf
        for node in self.nodes:
            if node.serviced:
                continue
            d = float(np.linalg.norm(node.position - pos))
            if d < best_d:
                best, best_d = node, d
        if best is None or best_d > self.cfg.acoustics.d_max_m:
            return 0.0
        rate = acoustic_rate(pos, best.position, relay_ok, self.cfg.acoustics)
        amount = min(rate * self.dt, best.buffer_size - best.delivered)
        best.delivered += amount
        if best.serviced:
            self.metrics.serviced_nodes += 1
            completions[i] += 1.0
        return amount
