"""Lyapunov actor-critic learner.

One training iteration runs, in order: a Q-critic step toward the
bootstrapped return target, a Lyapunov-critic step toward the cost-flavored
target -r + gamma (1 - d) L'(s', pi(s')), a constrained actor step on the
Lagrangian lam * dL + beta * (log pi + 1), a dual ascent step, and soft
target updates.  Candidate filtering picks the argmax-Q first action of the
proposal set.
"""

from dataclasses import dataclass

import numpy as np

from ..nn import Adam, autodiff as ad
from .buffer import ReplayBuffer
from .nets import GaussianPolicy, LyapunovCritic, QCritic, soft_update

LOG_BOUND_MIN = np.log(1e-8)


@dataclass
class DualVars:
    """Lagrange multipliers (log space) and the stability weight."""

    log_lam: float
    log_beta: float
    alpha: float
    lr: float = 3e-4
    lam_max: float = 100.0
    beta_max: float = 10.0

    @property
    def lam(self):
        return float(np.exp(self.log_lam))

    @property
    def beta_ent(self):
        return float(np.exp(self.log_beta))


def update_duals(duals, dl_mean, entropy_mean, entropy_target):
    """Gradient ascent on the dual objectives (in log space).

    d(log lam) = lr * lam * mean(dL); d(log beta) = lr * beta *
    (H_target - H).  Positive mean dL therefore raises lam strictly; entropy
    above target lowers beta.
    """
    duals.log_lam += duals.lr * duals.lam * dl_mean
    duals.log_lam = float(np.clip(duals.log_lam, LOG_BOUND_MIN, np.log(duals.lam_max)))
    duals.log_beta += duals.lr * duals.beta_ent * (entropy_target - entropy_mean)
    duals.log_beta = float(np.clip(duals.log_beta, LOG_BOUND_MIN, np.log(duals.beta_max)))
    return duals


def q_target(batch, q_targets, policy, gamma, rng):
    """y = r + gamma (1 - d) min_i Q_i'(s', a' ~ pi(s'))."""
    a2, _ = policy.sample_np(batch["s2"], rng)
    qs = np.stack([qt.value_np(batch["s2"], a2) for qt in q_targets])
    return batch["r"] + gamma * (1.0 - batch["d"]) * qs.min(axis=0)


def lyap_target(batch, lyap_tgt, policy, gamma, rng):
    """L_hat = -r + gamma (1 - d) L'(s', pi(s'))."""
    a2, _ = policy.sample_np(batch["s2"], rng)
    return -batch["r"] + gamma * (1.0 - batch["d"]) * lyap_tgt.value_np(batch["s2"], a2)


def delta_l(lyap, policy, batch, alpha, rng):
    """Stability statistic dL = L(s, pi(s)) - L(s, a) - alpha * r as a Var.

    Gradients flow only through the resampled action into the policy; the
    old-action Lyapunov value and the reward enter as constants.  Returns
    (dl of shape (B,), log-prob Var of shape (B,)).
    """
    a_new, logp = policy.sample_var(batch["s"], rng)
    l_new = lyap.value_var(batch["s"], a_new)
    if l_new.value.ndim == 2:
        l_new = ad.vsum(l_new, axis=1)
    l_old = lyap.value_np(batch["s"], batch["a"])
    const = ad.constant(l_old + alpha * batch["r"])
    return ad.sub(l_new, const), logp


def select_action(state, candidates, q_critics, action_dim, lyap=None, lam=0.0, mode="q"):
    """Pick the candidate whose first action scores best.

    Candidates are flattened sequences; only the leading ``action_dim``
    entries (the first action) are scored and returned.  mode "q": argmax
    Q(s, a); mode "q_minus_lambda_l": argmax Q - lam * L.  Ties resolve to
    the lowest index.  Returns (first_action, index, scores).
    """
    cands = np.atleast_2d(candidates)
    firsts = cands[:, :action_dim]
    k = cands.shape[0]
    states = np.tile(np.asarray(state), (k, 1))
    qs = np.stack([q.value_np(states, firsts) for q in q_critics])
    scores = qs.min(axis=0)
    if mode == "q_minus_lambda_l":
        scores = scores - lam * lyap.value_np(states, firsts)
    elif mode != "q":
        raise ValueError(f"unknown selection mode {mode!r}")
    idx = int(np.argmax(scores))
    return firsts[idx], idx, scores


class LacAgent:
    """Owns the actor, critics, duals, buffer and their optimizers."""

    def __init__(self, state_dim, action_dim, cfg, rng):
        self.cfg = cfg
        self.state_dim = state_dim
        self.action_dim = action_dim
        h = cfg.hidden
        self.policy = GaussianPolicy(state_dim, action_dim, h, rng)
        n_q = 2 if cfg.twin_q else 1
        self.q = [QCritic(state_dim, action_dim, h, rng, prefix=f"q{i}") for i in range(n_q)]
        self.q_targets = [QCritic(state_dim, action_dim, h, rng, prefix=f"q{i}") for i in range(n_q)]
        for qt, q in zip(self.q_targets, self.q):
            qt.params.copy_values_from(q.params)
        form = "softplus"
        self.lyap = LyapunovCritic(state_dim, action_dim, h, rng, form=form,
                                   head_bias=cfg.lyap_head_bias, prefix="lyap")
        self.lyap_target = LyapunovCritic(state_dim, action_dim, h, rng, form=form,
                                          head_bias=cfg.lyap_head_bias, prefix="lyap")
        self.lyap_target.trunk_params.copy_values_from(self.lyap.trunk_params)
        self.duals = DualVars(
            log_lam=float(np.log(cfg.lambda_init)),
            log_beta=float(np.log(cfg.beta_ent_init)),
            alpha=cfg.alpha,
            lr=cfg.dual_lr,
            lam_max=cfg.lambda_max,
            beta_max=cfg.beta_ent_max,
        )
        self.entropy_target = (
            cfg.entropy_target if cfg.entropy_target != 0.0 else -float(action_dim)
        )
        self.buffer = ReplayBuffer(cfg.buffer_capacity, state_dim, action_dim)
        self.opt_actor = Adam(self.policy.params, cfg.lr)
        self.opt_q = [Adam(q.params, cfg.lr) for q in self.q]
        self.opt_lyap = Adam(self.lyap.trunk_params, cfg.lr)
        self.iterations = 0

    # ------------------------------------------------------------~ behavior

    def act(self, state, rng, deterministic=False):
        if deterministic:
            return self.policy.mean_action(state)[0]
        a, _ = self.policy.sample_np(state, rng)
        return a[0]

    def select_action(self, state, candidates):
        return select_action(
            state, candidates, self.q, self.action_dim,
            lyap=self.lyap, lam=self.duals.lam, mode=self.cfg.selection,
        )

    # ------------------------------------------------------------- training

    def _zero_all(self):
        self.policy.params.zero_grads()
        for q in self.q:
            q.params.zero_grads()
        self.lyap.trunk_params.zero_grads()

    def train_iteration(self, rng):
        """One full update; returns a diagnostics dict."""
        cfg = self.cfg
        need = max(cfg.batch, cfg.warmup_transitions)
        if self.buffer.size < need:
            return {"status": "warming_up", "buffer": self.buffer.size}
        batch = self.buffer.sample(cfg.batch, rng)

        # Q critic(s)
        y = q_target(batch, self.q_targets, self.policy, cfg.gamma, rng)
        q_losses = []
        for q, opt in zip(self.q, self.opt_q):
            qv = q.value_var(batch["s"], batch["a"])
            diff = ad.sub(qv, ad.constant(y[:, None]))
            q_loss = ad.vmean(ad.square(diff))
            q_loss.backward()
            opt.step_from_tape()
            self._zero_all()
            q_losses.append(q_loss.item())

        # Lyapunov critic
        l_hat = lyap_target(batch, self.lyap_target, self.policy, cfg.gamma, rng)
        lv = self.lyap.value_var(batch["s"], batch["a"])
        l_loss = ad.vmean(ad.square(ad.sub(lv, ad.constant(l_hat[:, None]))))
        l_loss.backward()
        self.opt_lyap.step_from_tape()
        self._zero_all()

        # actor
        dl, logp = delta_l(self.lyap, self.policy, batch, self.duals.alpha, rng)
        obj = ad.vmean(
            ad.add(
                ad.mul(dl, self.duals.lam),
                ad.mul(ad.add(logp, 1.0), self.duals.beta_ent),
            )
        )
        obj.backward()
        self.opt_actor.step_from_tape()
        self._zero_all()

        dl_mean = float(np.mean(dl.value))
        entropy = float(np.mean(-logp.value))
        update_duals(self.duals, dl_mean, entropy, self.entropy_target)

        for qt, q in zip(self.q_targets, self.q):
            soft_update(qt.params, q.params, cfg.tau_soft)
        soft_update(self.lyap_target.trunk_params, self.lyap.trunk_params, cfg.tau_soft)

        self.iterations += 1
        diag = {
            "status": "ok",
            "q_loss": float(np.mean(q_losses)),
            "l_loss": l_loss.item(),
            "actor_obj": obj.item(),
            "dl_mean": dl_mean,
            "entropy": entropy,
            "lam": self.duals.lam,
            "beta_ent": self.duals.beta_ent,
            "alpha": self.duals.alpha,
            "l_mean": float(np.mean(lv.value)),
        }
        for k, v in diag.items():
            if k != "status" and not np.isfinite(v):
                raise FloatingPointError(f"non-finite diagnostic {k}")
        return diag

    # ---------------------------------------------------------- persistence

    def all_param_sets(self):
        sets = {"actor": self.policy.params, "lyap": self.lyap.trunk_params,
                "lyapt": self.lyap_target.trunk_params}
        for i, q in enumerate(self.q):
            sets[f"q{i}"] = q.params
        for i, qt in enumerate(self.q_targets):
            sets[f"qt{i}"] = qt.params
        return sets

    def state_arrays(self):
        """Flat array map for checkpointing (params + duals + optimizers)."""
        out = {}
        for tag, ps in self.all_param_sets().items():
            for name, p in ps.items():
                out[f"{tag}.{name}"] = p.value
        for tag, opt in [("actor", self.opt_actor), ("lyap", self.opt_lyap)] + [
            (f"q{i}", o) for i, o in enumerate(self.opt_q)
        ]:
            for name, arr in opt.state_arrays().items():
                out[f"opt.{tag}.{name}"] = arr
            out[f"opt.{tag}.steps"] = np.array([float(opt.step_count)])
        out["duals"] = np.array([
            self.duals.log_lam, self.duals.log_beta, self.duals.alpha,
            float(self.iterations),
        ])
        out["lyap_form"] = np.array([float(["softplus", "squared", "log"].index(self.lyap.form))])
        out.update(self.buffer.state_arrays())
        return out

    def load_state_arrays(self, arrays):
        for tag, ps in self.all_param_sets().items():
            for name, p in ps.items():
                p.value[...] = arrays[f"{tag}.{name}"]
        for tag, opt in [("actor", self.opt_actor), ("lyap", self.opt_lyap)] + [
            (f"q{i}", o) for i, o in enumerate(self.opt_q)
        ]:
            sub = {
                name: arrays[f"opt.{tag}.{name}"]
                for name in opt.state_arrays()
            }
            opt.load_state_arrays(sub, arrays[f"opt.{tag}.steps"][0])
        d = arrays["duals"]
        self.duals.log_lam = float(d[0])
        self.duals.log_beta = float(d[1])
        self.duals.alpha = float(d[2])
        self.iterations = int(d[3])
        form = ["softplus", "squared", "log"][int(arrays["lyap_form"][0])]
        self.lyap.form = form
        self.lyap_target.form = form
        self.buffer.load_state_arrays(arrays)
