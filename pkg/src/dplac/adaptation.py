"""Outer-loop stability adaptation.

A small library of positive head maps for the Lyapunov critic, a stability
monitor over recent training episodes, a deterministic rule-based selector,
and an optional remote-LLM selector that must fall back to the rule result
on any endpoint, parse, or validation failure.
"""

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .kernels import backend as K
from .nn import autodiff as ad

SOFTPLUS_FORM = "softplus"
SQUARED_FORM = "squared"
LOG_FORM = "log"
FORM_LIBRARY = (SOFTPLUS_FORM, SQUARED_FORM, LOG_FORM)

_EPS0 = 1e-6


def form_apply(form, z):
    """Positive head map over the critic trunk's raw scalar (numpy)."""
    if form == SOFTPLUS_FORM:
        return K.softplus(z)
    if form == SQUARED_FORM:
        return z * z + _EPS0
    if form == LOG_FORM:
        return np.log1p(K.softplus(z)) + _EPS0
    raise ValueError(f"unknown lyapunov form {form!r}")


def form_apply_var(form, z):
    """Graph version of ``form_apply`` for training passes."""
    if form == SOFTPLUS_FORM:
        return ad.softplus(z)
    if form == SQUARED_FORM:
        return ad.add(ad.square(z), _EPS0)
    if form == LOG_FORM:
        return ad.add(ad.log(ad.add(ad.softplus(z), 1.0)), _EPS0)
    raise ValueError(f"unknown lyapunov form {form!r}")


@dataclass
class EpisodeStats:
    """Per-episode digest consumed by the stability monitor."""

    episode_return: float
    dl_means: list = field(default_factory=list)   # per-update batch-mean dL
    lyap_start: float = 0.0
    lyap_end: float = 0.0
    lyap_mean: float = 0.0
    steps: int = 1


@dataclass
class StabilityReport:
    window: int
    violation_rate: float
    oscillation_index: float
    lyap_decay_rate: float
    mean_return: float

    def to_dict(self):
        return asdict(self)


def evaluate_stability(episodes):
    """Aggregate a training window (>= 5 episodes) into a StabilityReport."""
    if len(episodes) < 5:
        raise ValueError("stability window needs at least 5 episodes")
    dls = [d for ep in episodes for d in ep.dl_means]
    violation_rate = float(np.mean([d > 0.0 for d in dls])) if dls else 0.0
    returns = np.array([ep.episode_return for ep in episodes])
    diffs = np.abs(np.diff(returns))
    std = float(returns.std())
    oscillation = float(diffs.mean() / std) if std > 0 and diffs.size else 0.0
    decay = float(np.mean([
        (ep.lyap_start - ep.lyap_end) / max(ep.steps, 1) for ep in episodes
    ]))
    return StabilityReport(
        window=len(episodes),
        violation_rate=violation_rate,
        oscillation_index=oscillation,
        lyap_decay_rate=decay,
        mean_return=float(returns.mean()),
    )


@dataclass
class SelectorDecision:
    form: str
    alpha: float
    rationale: str = ""
    source: str = "rule"

    def __post_init__(self):
        if self.form not in FORM_LIBRARY:
            raise ValueError(f"form {self.form!r} not in library")


@dataclass
class TaskDescription:
    text: str
    priority: str = "coverage"     # tracking | energy | coverage
    sea_condition: str = "ideal"

    def __post_init__(self):
        if not self.text:
            raise ValueError("task description text must be nonempty")


class RuleSelector:
    """Deterministic policy over stability reports.

    Escalates to the squared form (doubling the stability weight) after two
    consecutive high-violation windows; relaxes to the log form (halving the
    weight) when returns oscillate without violations; otherwise keeps the
    current choice.  Stateful only through the previous report.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.prev_report = None

    def decide(self, report, task, current):
        cfg = self.cfg
        prev = self.prev_report
        self.prev_report = report
        if (
            report.violation_rate > cfg.violation_threshold
            and prev is not None
            and prev.violation_rate > cfg.violation_threshold
        ):
            alpha = min(2.0 * current.alpha, cfg.alpha_max)
            return SelectorDecision(
                form=SQUARED_FORM,
                alpha=alpha,
                rationale=(
                    f"violation rate {report.violation_rate:.2f} above "
                    f"{cfg.violation_threshold} for two windows: escalate"
                ),
                source="rule",
            )
        if (
            report.oscillation_index > cfg.oscillation_threshold
            and report.violation_rate <= cfg.violation_relax_max
        ):
            alpha = max(current.alpha / 2.0, cfg.alpha_min)
            return SelectorDecision(
                form=LOG_FORM,
                alpha=alpha,
                rationale=(
                    f"oscillation {report.oscillation_index:.2f} with low "
                    f"violations: relax"
                ),
                source="rule",
            )
        return SelectorDecision(
            form=current.form, alpha=current.alpha,
            rationale="window calm: keep current form", source="rule",
        )


def build_prompt(report, task, current, cfg):
    return (
        "You pick a Lyapunov head form and stability weight for a "
        "constrained actor-critic controller.\n"
        f"Task: {task.text}\nPriority: {task.priority}; sea: {task.sea_condition}\n"
        f"Window report: violation_rate={report.violation_rate:.3f}, "
        f"oscillation_index={report.oscillation_index:.3f}, "
        f"lyap_decay_rate={report.lyap_decay_rate:.4f}, "
        f"mean_return={report.mean_return:.2f}\n"
        f"Current: form={current.form}, alpha={current.alpha}\n"
        f"Library: {list(FORM_LIBRARY)}; alpha bounds "
        f"[{cfg.alpha_min}, {cfg.alpha_max}]\n"
        'Reply with one JSON line: {"form": "...", "alpha": <float>, '
        '"rationale": "..."}'
    )


def parse_llm_reply(text, cfg):
    """Strict reply parse; raises on anything out of contract."""
    data = json.loads(text.strip().splitlines()[-1])
    form = str(data["form"]).lower()
    alpha = float(data["alpha"])
    if form not in FORM_LIBRARY:
        raise ValueError(f"form {form!r} not in library")
    if not (cfg.alpha_min <= alpha <= cfg.alpha_max):
        raise ValueError(f"alpha {alpha} outside [{cfg.alpha_min}, {cfg.alpha_max}]")
    return SelectorDecision(
        form=form, alpha=alpha,
        rationale=str(data.get("rationale", "")), source="llm",
    )


def http_transport(cfg):
    """Default transport: one POST to the configured endpoint, time-boxed."""
    import requests

    def send(payload):
        headers = {"Content-Type": "application/json"}
        key = os.environ.get("DPLAC_LLM_API_KEY", "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        resp = requests.post(
            cfg.llm_endpoint, json=payload, headers=headers,
            timeout=cfg.llm_timeout_s,
        )
        resp.raise_for_status()
        return resp.text

    return send


class StabilitySelector:
    """Rule-based selection with an optional remote override.

    With no endpoint configured the output is the rule decision itself; any
    transport/parse/validation failure also returns the rule decision, with
    the failure recorded, never an exception.
    """

    def __init__(self, cfg, transport=None):
        self.cfg = cfg
        self.rule = RuleSelector(cfg)
        self.transport = transport
        self.events = []

    def decide(self, report, task, current):
        rule_decision = self.rule.decide(report, task, current)
        if not self.cfg.llm_endpoint and self.transport is None:
            return rule_decision
        prompt = build_prompt(report, task, current, self.cfg)
        payload = {
            "model": self.cfg.llm_model,
            "temperature": self.cfg.llm_temperature,
            "top_p": self.cfg.llm_top_p,
            "prompt": prompt,
        }
        transport = self.transport or http_transport(self.cfg)
        try:
            raw = transport(payload)
            decision = parse_llm_reply(raw, self.cfg)
            self.events.append({"prompt": prompt, "reply": raw, "outcome": "llm"})
            return decision
        except Exception as exc:  # noqa: BLE001 - any remote failure falls back
            self.events.append({
                "prompt": prompt,
                "error": f"{type(exc).__name__}: {exc}",
                "outcome": "fallback",
            })
            return SelectorDecision(
                form=rule_decision.form, alpha=rule_decision.alpha,
                rationale=rule_decision.rationale + " (remote failed)",
                source="fallback",
            )


def apply_decision(decision, agent):
    """Swap the critic head and stability weight without touching the trunk.

    The target critic is hard-copied from the online trunk after the swap.
    Returns an event dict for the decision log.
    """
    if decision.form not in FORM_LIBRARY:
        raise ValueError(f"unknown form {decision.form!r}")
    changed_form = agent.lyap.form != decision.form
    changed_alpha = agent.duals.alpha != decision.alpha
    agent.lyap.form = decision.form
    agent.lyap_target.form = decision.form
    if changed_form:
        agent.lyap_target.trunk_params.copy_values_from(agent.lyap.trunk_params)
    agent.duals.alpha = decision.alpha
    return {
        "form": decision.form,
        "alpha": decision.alpha,
        "changed_form": changed_form,
        "changed_alpha": changed_alpha,
        "noop": not (changed_form or changed_alpha),
        "source": decision.source,
        "rationale": decision.rationale,
    }


class DecisionLog:
    """Append-only JSONL log of stability decisions."""

    def __init__(self, path):
        self.path = path

    def append(self, episode, report, decision, event=None):
        entry = {
            "episode": int(episode),
            "report": report.to_dict(),
            "decision": {
                "form": decision.form,
                "alpha": decision.alpha,
                "rationale": decision.rationale,
                "source": decision.source,
            },
        }
        if event:
            entry["event"] = event
        with open(self.path, "a") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def read(self):
        if not os.path.exists(self.path):
            return []
        with open(self.path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
