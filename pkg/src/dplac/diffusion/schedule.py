"""Noise schedules for the action-sequence denoising process.

The forward process corrupts a clean sequence a0 over T steps with variances
beta_t; cumulative products alpha_bar_t let any a_t be sampled directly as
sqrt(alpha_bar)*a0 + sqrt(1-alpha_bar)*eps.  Inference may run the reverse
chain on an evenly strided subset of the timesteps; the strided plan uses
the subsequence-consistent betas so the coarse chain matches the cumulative
schedule at the visited indices.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NoiseSchedule:
    steps: int
    betas: np.ndarray            # betas[t-1] is beta_t, t in 1..T
    alphas: np.ndarray
    alpha_bars: np.ndarray       # alpha_bars[t-1] is the cumulative product
    stride_indices: np.ndarray   # visited t values, descending, includes T
    kind: str = "linear"
    plan: list = field(default_factory=list)   # (t, alpha_bar_t, beta_tilde)

    def beta(self, t):
        return self.betas[t - 1]

    def alpha_bar(self, t):
        if t == 0:
            return 1.0
        return self.alpha_bars[t - 1]


def build_schedule(steps=1000, beta_min=1e-4, beta_max=0.02, stride_count=50, kind="linear"):
    """Construct the schedule plus the strided inference plan.

    The visited subset is an evenly spaced, descending selection of 1..T that
    always includes T; with stride_count == steps the plan reduces to the
    full chain with beta_tilde == beta exactly.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not (0.0 < beta_min < beta_max < 1.0):
        raise ValueError("need 0 < beta_min < beta_max < 1")
    if not (1 <= stride_count <= steps):
        raise ValueError("stride_count must lie in [1, steps]")
    if kind == "linear":
        betas = np.linspace(beta_min, beta_max, steps)
    elif kind == "cosine":
        s = 0.008
        ts = np.arange(steps + 1) / steps
        f = np.cos((ts + s) / (1 + s) * np.pi / 2.0) ** 2
        alpha_bars_full = f / f[0]
        betas = 1.0 - alpha_bars_full[1:] / alpha_bars_full[:-1]
        betas = np.clip(betas, 1e-8, 0.999)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)

    visited = np.unique(np.round(np.linspace(1, steps, stride_count)).astype(int))[::-1]
    if visited[0] != steps:
        visited = np.concatenate([[steps], visited])
    sched = NoiseSchedule(
        steps=steps,
        betas=betas,
        alphas=alphas,
        alpha_bars=alpha_bars,
        stride_indices=visited,
        kind=kind,
    )
    plan = []
    for i, t in enumerate(visited):
        t_next = visited[i + 1] if i + 1 < len(visited) else 0
        ab_t = sched.alpha_bar(int(t))
        ab_next = sched.alpha_bar(int(t_next))
        beta_tilde = 1.0 - ab_t / ab_next
        plan.append((int(t), float(ab_t), float(beta_tilde)))
    sched.plan = plan
    return sched


def forward_noise(a0, t, eps, schedule):
    """Directly sample a_t = sqrt(ab)*a0 + sqrt(1-ab)*eps for step t."""
    a0 = np.asarray(a0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if eps.shape != a0.shape:
        raise ValueError("noise must match the action shape")
    if np.isscalar(t) or np.ndim(t) == 0:
        if not (1 <= int(t) <= schedule.steps):
            raise ValueError(f"timestep {t} outside 1..{schedule.steps}")
        ab = schedule.alpha_bar(int(t))
        return np.sqrt(ab) * a0 + np.sqrt(1.0 - ab) * eps
    t = np.asarray(t, dtype=int)
    if np.any(t < 1) or np.any(t > schedule.steps):
        raise ValueError("timestep outside 1..T")
    ab = schedule.alpha_bars[t - 1][:, None]
    return np.sqrt(ab) * a0 + np.sqrt(1.0 - ab) * eps


def time_features(t, dim, t_scale=1000.0):
    """Raw interleaved sin/cos features of the diffusion step.

    Geometric frequency ladder spanning 1..1e4 over ``dim``/2 channels; a
    learned affine layer downstream turns these into the embedding proper.
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    exponents = np.arange(half) / max(half - 1, 1)
    denom = np.power(10000.0, exponents) * (t_scale / 1000.0)
    angles = t[:, None] / denom[None, :]
    out = np.empty((t.shape[0], 2 * half), dtype=np.float64)
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out
