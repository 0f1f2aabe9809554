"""Conditional noise-prediction network and reverse sampling.

The denoiser predicts the Gaussian noise injected into a flattened action
sequence, conditioned on an encoded mission state and a sinusoidal step
embedding.  The trunk is a 1-D down/up stack with an additive skip
connection; the output layer starts at zero so an untrained model predicts
zero noise.
"""

import numpy as np

from ..nn import Mlp, ParamSet, autodiff as ad
from .schedule import forward_noise, time_features


class Denoiser:
    """eps_hat = trunk(concat[cond_feat, time_feat, a_t])."""

    def __init__(self, action_dim, cond_dim, hidden, rng):
        self.action_dim = action_dim
        self.cond_dim = cond_dim
        self.hidden = hidden
        self.params = ParamSet()
        self.cond_mlp = Mlp(
            [cond_dim, hidden, hidden], ["relu", "relu"], rng,
            params=self.params, prefix="cond",
        )
        self.time_mlp = Mlp(
            [hidden, hidden], ["identity"], rng,
            params=self.params, prefix="time",
        )
        width = hidden * 2 + action_dim
        self.down1 = Mlp([width, hidden], ["relu"], rng, params=self.params, prefix="down1")
        self.down2 = Mlp([hidden, hidden // 2], ["relu"], rng, params=self.params, prefix="down2")
        self.up1 = Mlp([hidden // 2, hidden], ["relu"], rng, params=self.params, prefix="up1")
        self.out = Mlp(
            [hidden, action_dim], ["identity"], rng,
            params=self.params, prefix="out", zero_last=True,
        )
        # conditioning normalization; identity until fitted to a dataset
        self.norm_mu = np.zeros(cond_dim)
        self.norm_std = np.ones(cond_dim)

    def set_normalization(self, mu, std):
        self.norm_mu = np.asarray(mu, dtype=np.float64)
        self.norm_std = np.maximum(np.asarray(std, dtype=np.float64), 1e-6)

    def _normalize(self, cond):
        return (np.asarray(cond, dtype=np.float64) - self.norm_mu) / self.norm_std

    # ------------------------------------------------------------- inference

    def encode_condition(self, cond):
        """Condition features for a (B, cond_dim) or (cond_dim,) input."""
        cond = np.atleast_2d(self._normalize(cond))
        return self.cond_mlp.infer(cond)

    def time_embedding(self, t):
        return self.time_mlp.infer(time_features(t, self.hidden))

    def predict(self, a_t, t, cond_feat, time_feat=None):
        """Tape-free noise prediction; cond/time features may be precomputed."""
        a_t = np.atleast_2d(np.asarray(a_t, dtype=np.float64))
        if a_t.shape[1] != self.action_dim:
            raise ad.ShapeError(
                f"action width {a_t.shape[1]} does not match model dim {self.action_dim}"
            )
        if time_feat is None:
            time_feat = self.time_embedding(t)
        cond_feat = np.broadcast_to(cond_feat, (a_t.shape[0], self.hidden))
        time_feat = np.broadcast_to(time_feat, (a_t.shape[0], self.hidden))
        h0 = np.concatenate([cond_feat, time_feat, a_t], axis=1)
        d1 = self.down1.infer(h0)
        d2 = self.down2.infer(d1)
        u1 = self.up1.infer(d2) + d1
        return self.out.infer(u1)

    # -------------------------------------------------------------- training

    def predict_var(self, a_t, t, cond):
        """Tape-building prediction used by the training loss."""
        a_t = np.atleast_2d(np.asarray(a_t, dtype=np.float64))
        cond_feat = self.cond_mlp(self._normalize(np.atleast_2d(cond)))
        time_feat = self.time_mlp(time_features(t, self.hidden))
        h0 = ad.concat([cond_feat, time_feat, ad.constant(a_t)], axis=1)
        d1 = self.down1(h0)
        d2 = self.down2(d1)
        u1 = ad.add(self.up1(d2), d1)
        return self.out(u1)


def diffusion_loss(model, schedule, cond_batch, a0_batch, rng):
    """Noise-matching loss: per-sample squared error summed over dims,
    averaged over the batch.  Returns the loss Var (backward-ready)."""
    a0 = np.atleast_2d(np.asarray(a0_batch, dtype=np.float64))
    cond = np.atleast_2d(np.asarray(cond_batch, dtype=np.float64))
    if a0.shape[0] == 0:
        raise ValueError("empty batch")
    B = a0.shape[0]
    t = rng.integers(1, schedule.steps + 1, size=B)
    eps = rng.standard_normal(a0.shape)
    a_t = forward_noise(a0, t, eps, schedule)
    eps_hat = model.predict_var(a_t, t, cond)
    diff = ad.sub(eps_hat, ad.constant(eps))
    per_sample = ad.vsum(ad.square(diff), axis=1)
    return ad.vmean(per_sample)


def sample_reverse(model, schedule, cond, rng, n_samples=1, clamp_output=True):
    """Reverse-sample ``n_samples`` action sequences for one condition.

    Follows the strided plan: a <- (a - bt/sqrt(1-ab) * eps_hat)/sqrt(1-bt)
    plus sqrt(bt)*z, with z = 0 on the final step.  The candidate-set path is
    this function with n_samples = K; row 0 of a K-batch equals the single
    sample drawn with the same stream.
    """
    d = model.action_dim
    cond_feat = model.encode_condition(cond)
    a = rng.standard_normal((n_samples, d))
    last = len(schedule.plan) - 1
    for i, (t, ab, bt) in enumerate(schedule.plan):
        eps_hat = model.predict(a, t, cond_feat)
        a = (a - bt / np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(1.0 - bt)
        if i != last:
            a = a + np.sqrt(bt) * rng.standard_normal((n_samples, d))
    if clamp_output:
        a = np.clip(a, -1.0, 1.0)
    return a


def generate_candidates(model, schedule, cond, k, rng, clamp_output=True):
    """K diverse action-sequence proposals for one state."""
    if k < 1:
        raise ValueError("need at least one candidate")
    return sample_reverse(model, schedule, cond, rng, n_samples=k, clamp_output=clamp_output)
