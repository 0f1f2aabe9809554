"""Offline demonstrations from a scripted waypoint-seeking expert.

The expert steers each vehicle toward its assigned nearest unserviced node
(greedy, with de-confliction between vehicles), slowing on approach.  Demo
windows pair the state encoding at step t with the next ``horizon`` expert
actions; windows start once the history buffer is full.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from ..env import MissionEnv
from ..nn.serialize import load_arrays, save_arrays


class ExpertStall(RuntimeError):
    pass


def assign_targets(env):
    """Greedy node assignment: each vehicle its nearest free node, later
    vehicles skipping nodes already claimed while alternatives remain."""
    unserviced = [n for n in env.nodes if not n.serviced]
    targets = {}
    claimed = set()
    for i in range(env.n_auvs):
        pos = env.etas[i][:3]
        ordered = sorted(unserviced, key=lambda n: float(np.linalg.norm(n.position - pos)))
        pick = None
        for node in ordered:
            if id(node) not in claimed:
                pick = node
                break
        if pick is None and ordered:
            pick = ordered[0]
        if pick is not None:
            claimed.add(id(pick))
            targets[i] = pick
    return targets


def expert_actions(env):
    """One action triple per vehicle: head to target, match depth, slow near."""
    acts = np.zeros((env.n_auvs, 3))
    targets = assign_targets(env)
    z = env.volume[2]
    for i in range(env.n_auvs):
        node = targets.get(i)
        if node is None:
            continue
        pos = env.etas[i][:3]
        delta = node.position - pos
        dist = float(np.linalg.norm(delta))
        yaw = np.arctan2(delta[1], delta[0])
        depth_set = (node.position[2] - 2.0) / (z - 4.0) * 2.0 - 1.0
        speed_frac = 0.9 if dist > 25.0 else max(0.1, min(0.9, dist / 30.0))
        acts[i] = np.clip([yaw / np.pi, depth_set, 2.0 * speed_frac - 1.0], -1.0, 1.0)
    return acts


@dataclass
class DemoDataset:
    """Condition/action-sequence pairs plus frozen normalization statistics."""

    conds: np.ndarray       # (N, cond_dim)
    actions: np.ndarray     # (N, horizon * action_dim), entries in [-1, 1]
    norm_mu: np.ndarray
    norm_std: np.ndarray
    horizon: int
    action_dim: int
    episodes_kept: int = 0
    episodes_dropped: int = 0

    def __len__(self):
        return self.conds.shape[0]

    def save(self, path):
        save_arrays(path, {
            "meta": np.array([
                float(self.horizon), float(self.action_dim),
                float(self.episodes_kept), float(self.episodes_dropped),
            ]),
            "conds": self.conds,
            "actions": self.actions,
            "norm_mu": self.norm_mu,
            "norm_std": self.norm_std,
        })

    @classmethod
    def load(cls, path):
        arrays = load_arrays(path)
        meta = arrays["meta"]
        return cls(
            conds=arrays["conds"],
            actions=arrays["actions"],
            norm_mu=arrays["norm_mu"],
            norm_std=arrays["norm_std"],
            horizon=int(meta[0]),
            action_dim=int(meta[1]),
            episodes_kept=int(meta[2]),
            episodes_dropped=int(meta[3]),
        )

    def file_hash(self, path):
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()


def generate_demos(cfg, n_episodes=None, seed=0, controller_kind=None, sea_condition=None):
    """Roll the scripted expert and harvest sliding windows.

    Episodes where the expert delivers nothing are dropped (stall); the
    caller can abort on a high stall rate.  Returns (dataset, summary dict).
    """
    n_episodes = n_episodes or cfg.diffusion.demo_episodes
    L = cfg.diffusion.history_len
    H = cfg.diffusion.horizon
    env = MissionEnv(cfg, controller_kind=controller_kind, sea_condition=sea_condition)
    conds, targets = [], []
    kept = dropped = 0
    ss = np.random.SeedSequence(seed)
    episode_seeds = ss.generate_state(n_episodes)
    for ep in range(n_episodes):
        env.reset(int(episode_seeds[ep]))
        enc = [[] for _ in range(env.n_auvs)]
        act = [[] for _ in range(env.n_auvs)]
        delivered = 0.0
        done = False
        while not done:
            a = expert_actions(env)
            for i in range(env.n_auvs):
                enc[i].append(env.state_encoding(i))
                act[i].append(a[i])
            res = env.step(a)
            delivered += float(res.info["data_gain"].sum())
            done = res.done
        if delivered <= 0.0:
            dropped += 1
            continue
        kept += 1
        steps = len(enc[0])
        for i in range(env.n_auvs):
            for t in range(L, steps - H + 1):
                conds.append(enc[i][t])
                targets.append(np.concatenate(act[i][t : t + H]))
    if kept == 0:
        raise ExpertStall("all demonstration episodes stalled")
    conds = np.asarray(conds)
    targets = np.asarray(targets)
    mu = conds.mean(axis=0)
    std = conds.std(axis=0)
    dataset = DemoDataset(
        conds=conds,
        actions=targets,
        norm_mu=mu,
        norm_std=std,
        horizon=H,
        action_dim=3,
        episodes_kept=kept,
        episodes_dropped=dropped,
    )
    summary = {
        "episodes_kept": kept,
        "episodes_dropped": dropped,
        "windows": int(conds.shape[0]),
        "cond_dim": int(conds.shape[1]),
    }
    return dataset, summary
