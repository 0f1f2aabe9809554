"""Experiment configuration: schema, strict loading, resolved-config dumps.

Configs are nested dataclasses mirroring YAML sections.  Loading rejects
unknown keys; every run writes the fully resolved config (plus the tool
version) beside its outputs so results stay reproducible.
"""

import dataclasses
from dataclasses import dataclass, field

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    n_auvs: int = 2
    n_nodes: int = 20
    volume: list = field(default_factory=lambda: [200.0, 200.0, 50.0])
    node_margin: float = 5.0
    buffer_mbit: float = 4.0
    episode_steps: int = 600
    k_nearest: int = 3
    collision_radius: float = 3.0
    spawn_fraction: float = 0.35   # spawn x at -fraction * volume_x, split in y
    spawn_depth: float = 5.0
    depth_scale: float = 10.0      # normalizes the depth tracking error


@dataclass
class AcousticsConfig:
    r0_mbit_s: float = 2.0
    d0_m: float = 15.0
    d_max_m: float = 50.0
    relay_range_m: float = 150.0
    relay_penalty: float = 0.5


@dataclass
class RewardConfig:
    w_data: float = 1.0
    w_service: float = 10.0
    w_energy: float = 0.001
    w_collision: float = 50.0
    w_tracking: float = 0.1


@dataclass
class PowerConfig:
    prop_max_w: float = 400.0
    hotel_w: float = 10.0


@dataclass
class ControlConfig:
    dt: float = 0.05              # 20 Hz inner loop
    n_inner: int = 10             # control ticks per decision step
    controller: str = "ssurface"  # ssurface | pid | smc
    ss_yaw: list = field(default_factory=lambda: [2.0, 1.0])
    ss_depth: list = field(default_factory=lambda: [1.0, 1.0])
    pid_yaw: list = field(default_factory=lambda: [0.9, 0.05, 1.1])
    pid_depth: list = field(default_factory=lambda: [0.35, 0.02, 0.9])
    smc_yaw: list = field(default_factory=lambda: [0.9, 0.85, 0.6])
    smc_depth: list = field(default_factory=lambda: [0.5, 0.9, 0.8])
    speed_kp: float = 1.5
    delta_u: float = 0.0


@dataclass
class DynamicsConfig:
    coeff_path: str = ""          # empty -> bundled coefficient file
    sea: str = "ideal"            # ideal | es | ves


@dataclass
class DiffusionConfig:
    steps: int = 1000
    beta_min: float = 1e-4
    beta_max: float = 0.02
    schedule: str = "linear"      # linear | cosine
    stride_steps: int = 50
    history_len: int = 10
    horizon: int = 4
    candidates: int = 5
    hidden: int = 256
    batch: int = 32
    lr: float = 1e-4
    train_steps: int = 20000
    demo_episodes: int = 30


@dataclass
class LacConfig:
    hidden: int = 128
    batch: int = 64
    lr: float = 1e-3
    gamma: float = 0.97
    tau_soft: float = 0.005
    dual_lr: float = 3e-4
    alpha: float = 0.1
    lambda_init: float = 1.0
    lambda_max: float = 100.0
    beta_ent_init: float = 0.1
    beta_ent_max: float = 10.0
    warmup_transitions: int = 1000
    buffer_capacity: int = 100000
    entropy_target: float = 0.0   # 0 -> default -(action dim)
    selection: str = "q"          # q | q_minus_lambda_l
    twin_q: bool = False
    lyap_head_bias: float = 2.0   # conservative initial cost estimate


@dataclass
class AdaptationConfig:
    enabled: bool = True
    cadence_episodes: int = 10
    window_episodes: int = 10
    violation_threshold: float = 0.3
    violation_relax_max: float = 0.1
    oscillation_threshold: float = 1.0
    alpha_min: float = 0.01
    alpha_max: float = 1.0
    initial_form: str = "softplus"
    llm_endpoint: str = ""
    llm_model: str = "gpt-4o"
    llm_temperature: float = 0.5
    llm_top_p: float = 1.0
    llm_timeout_s: float = 10.0
    task_text: str = "Collect sensor-node data efficiently while holding stable tracking."
    task_priority: str = "coverage"   # tracking | energy | coverage


@dataclass
class RunConfig:
    episodes: int = 300
    seed: int = 0
    eval_seeds: list = field(default_factory=lambda: [101, 102, 103, 104, 105])
    eval_episodes_per_seed: int = 1
    out_dir: str = "runs/out"
    checkpoint_every: int = 50
    use_diffusion: bool = True
    diagnostics_every: int = 1
    workers: int = 1


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    acoustics: AcousticsConfig = field(default_factory=AcousticsConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    diffusion: DiffusionConfig = field(default_factory=DiffusionConfig)
    lac: LacConfig = field(default_factory=LacConfig)
    adaptation: AdaptationConfig = field(default_factory=AdaptationConfig)
    run: RunConfig = field(default_factory=RunConfig)


_SECTIONS = {f.name: f.default_factory for f in dataclasses.fields(ExperimentConfig)}


def _section_from_dict(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{path}' must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in section '{path}'")
    return cls(**data)


def config_from_dict(data):
    """Build an ExperimentConfig from a nested dict, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a mapping")
    unknown = sorted(set(data) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown top-level section(s) {unknown}")
    kwargs = {}
    for name, factory in _SECTIONS.items():
        cls = type(factory())
        kwargs[name] = _section_from_dict(cls, data.get(name), name)
    cfg = ExperimentConfig(**kwargs)
    validate_config(cfg)
    return cfg


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def config_to_dict(cfg):
    return dataclasses.asdict(cfg)


def save_resolved_config(cfg, path, extra=None):
    """Write the resolved config (+ tool version) as deterministic YAML."""
    from . import __version__

    payload = {"dplac_version": __version__, "config": config_to_dict(cfg)}
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        yaml.safe_dump(payload, fh, sort_keys=True)


def validate_config(cfg):
    s = cfg.scenario
    if s.n_auvs < 1:
        raise ConfigError("scenario.n_auvs must be >= 1")
    if s.n_nodes < 1:
        raise ConfigError("scenario.n_nodes must be >= 1")
    if len(s.volume) != 3 or min(s.volume) <= 0:
        raise ConfigError("scenario.volume must be three positive extents")
    if s.episode_steps < 1:
        raise ConfigError("scenario.episode_steps must be >= 1")
    if s.spawn_depth <= 0 or s.spawn_depth >= s.volume[2]:
        raise ConfigError("scenario.spawn_depth outside the mission volume")
    if cfg.control.controller not in ("ssurface", "pid", "smc"):
        raise ConfigError(f"unknown controller {cfg.control.controller!r}")
    if cfg.dynamics.sea not in ("ideal", "es", "ves"):
        raise ConfigError(f"unknown sea condition {cfg.dynamics.sea!r}")
    d = cfg.diffusion
    if not (0.0 < d.beta_min < d.beta_max < 1.0):
        raise ConfigError("diffusion betas must satisfy 0 < beta_min < beta_max < 1")
    if d.stride_steps < 1 or d.stride_steps > d.steps:
        raise ConfigError("diffusion.stride_steps must lie in [1, steps]")
    if d.schedule not in ("linear", "cosine"):
        raise ConfigError(f"unknown diffusion schedule {d.schedule!r}")
    if d.horizon < 1 or d.history_len < 0 or d.candidates < 1:
        raise ConfigError("diffusion horizon/history/candidates out of range")
    l = cfg.lac
    if not (0.0 < l.gamma < 1.0):
        raise ConfigError("lac.gamma must lie in (0, 1)")
    if not (0.0 < l.tau_soft <= 1.0):
        raise ConfigError("lac.tau_soft must lie in (0, 1]")
    if l.alpha <= 0:
        raise ConfigError("lac.alpha must be positive")
    a = cfg.adaptation
    if not (0.0 < a.alpha_min <= a.alpha_max):
        raise ConfigError("adaptation alpha bounds invalid")
    if a.initial_form not in ("softplus", "squared", "log"):
        raise ConfigError(f"unknown lyapunov form {a.initial_form!r}")
    return cfg


def controller_gains(cfg):
    """Instantiate ControllerGains from config lists."""
    from .control import ControllerGains, PidGains, SmcGains, SSurfaceGains

    c = cfg.control
    return ControllerGains(
        ss_yaw=SSurfaceGains(*c.ss_yaw),
        ss_depth=SSurfaceGains(*c.ss_depth),
        pid_yaw=PidGains(*c.pid_yaw),
        pid_depth=PidGains(*c.pid_depth),
        smc_yaw=SmcGains(*c.smc_yaw),
        smc_depth=SmcGains(*c.smc_depth),
        speed_kp=c.speed_kp,
    )
