"""Actor and critic networks for the Lyapunov actor-critic."""

import numpy as np

from ..adaptation import form_apply, form_apply_var
from ..nn import Mlp, ParamSet, autodiff as ad

LOG2PI = float(np.log(2.0 * np.pi))
LOGSTD_MIN, LOGSTD_MAX = -20.0, 2.0
SQUASH_EPS = 1e-6


class GaussianPolicy:
    """Squashed diagonal Gaussian: a = tanh(mu + std * eps).

    The log-density carries the tanh change-of-variables correction; log-std
    outputs are clamped to [-20, 2].
    """

    def __init__(self, state_dim, action_dim, hidden, rng):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.net = Mlp(
            [state_dim, hidden, hidden, 2 * action_dim],
            ["relu", "relu", "identity"], rng, prefix="actor",
        )

    @property
    def params(self):
        return self.net.params

    def _split(self, out):
        d = self.action_dim
        return out[:, :d], np.clip(out[:, d:], LOGSTD_MIN, LOGSTD_MAX)

    def sample_np(self, states, rng):
        """Tape-free reparameterized sample; returns (actions, log_probs)."""
        states = np.atleast_2d(states)
        mu, log_std = self._split(self.net.infer(states))
        std = np.exp(log_std)
        eps = rng.standard_normal(mu.shape)
        pre = mu + std * eps
        a = np.tanh(pre)
        logp = (
            (-0.5 * eps * eps - log_std).sum(axis=1)
            - 0.5 * self.action_dim * LOG2PI
            - np.log(1.0 - a * a + SQUASH_EPS).sum(axis=1)
        )
        return a, logp

    def mean_action(self, states):
        """Deterministic evaluation action tanh(mu)."""
        states = np.atleast_2d(states)
        mu, _ = self._split(self.net.infer(states))
        return np.tanh(mu)

    def sample_var(self, states, rng):
        """Graph-building reparameterized sample for the actor objective."""
        states = np.atleast_2d(states)
        out = self.net(states)
        d = self.action_dim
        mu = ad.slice_cols(out, 0, d)
        log_std = ad.clamp(ad.slice_cols(out, d, 2 * d), LOGSTD_MIN, LOGSTD_MAX)
        eps = rng.standard_normal((states.shape[0], d))
        pre = ad.add(mu, ad.mul(ad.exp(log_std), eps))
        a = ad.tanh(pre)
        gauss = ad.vsum(
            ad.sub(ad.mul(ad.constant(-0.5 * eps * eps), 1.0), log_std), axis=1
        )
        correction = ad.vsum(
            ad.log(ad.add(ad.sub(1.0, ad.square(a)), SQUASH_EPS)), axis=1
        )
        logp = ad.sub(ad.add(gauss, -0.5 * d * LOG2PI), correction)
        return a, logp


class QCritic:
    """Scalar action-value network over (state, action)."""

    def __init__(self, state_dim, action_dim, hidden, rng, prefix="q"):
        self.net = Mlp(
            [state_dim + action_dim, hidden, hidden, 1],
            ["relu", "relu", "identity"], rng, prefix=prefix,
        )

    @property
    def params(self):
        return self.net.params

    def value_np(self, states, actions):
        x = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
        return self.net.infer(x).ravel()

    def value_var(self, states, actions):
        """states as constant array; actions may be a Var (grads to actor)."""
        s = ad.constant(np.atleast_2d(states))
        a = actions if isinstance(actions, ad.Var) else ad.constant(np.atleast_2d(actions))
        return self.net(ad.concat([s, a], axis=1))


class LyapunovCritic:
    """Positive critic L(s, a) = head(trunk(s, a)) with a swappable head.

    The trunk's output bias starts at ``head_bias`` so the initial cost
    estimate is conservative (high) rather than near zero.
    """

    def __init__(self, state_dim, action_dim, hidden, rng, form="softplus",
                 head_bias=0.0, prefix="lyap"):
        self.form = form
        self.trunk = Mlp(
            [state_dim + action_dim, hidden, hidden, 1],
            ["relu", "relu", "identity"], rng, prefix=prefix,
        )
        last = self.trunk.layer_names[-1]
        self.trunk.params[f"{last}.b"].value[...] = head_bias

    @property
    def trunk_params(self):
        return self.trunk.params

    def raw_np(self, states, actions):
        x = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
        return self.trunk.infer(x).ravel()

    def value_np(self, states, actions):
        return form_apply(self.form, self.raw_np(states, actions))

    def value_var(self, states, actions):
        s = ad.constant(np.atleast_2d(states))
        a = actions if isinstance(actions, ad.Var) else ad.constant(np.atleast_2d(actions))
        z = self.trunk(ad.concat([s, a], axis=1))
        return form_apply_var(self.form, z)


def soft_update(target_params, online_params, tau):
    """target <- (1 - tau) * target + tau * online, elementwise."""
    if not (0.0 < tau <= 1.0):
        raise ValueError("tau must lie in (0, 1]")
    for name, p in target_params.items():
        src = online_params[name].value
        if src.shape != p.value.shape:
            raise ad.ShapeError(f"soft update: shape mismatch for '{name}'")
        p.value *= 1.0 - tau
        p.value += tau * src
