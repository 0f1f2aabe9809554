from .demos import DemoDataset, ExpertStall, expert_actions, generate_demos
from .model import Denoiser, diffusion_loss, generate_candidates, sample_reverse
from .schedule import NoiseSchedule, build_schedule, forward_noise, time_features

__all__ = [
    "NoiseSchedule",
    "build_schedule",
    "forward_noise",
    "time_features",
    "Denoiser",
    "diffusion_loss",
    "sample_reverse",
    "generate_candidates",
    "DemoDataset",
    "generate_demos",
    "expert_actions",
    "ExpertStall",
]
