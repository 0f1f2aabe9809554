from .mission import (
    AsvAnchor,
    EpisodeAbort,
    MissionEnv,
    MissionMetrics,
    SensorNode,
    StepResult,
    acoustic_rate,
    power_model,
)

__all__ = [
    "MissionEnv",
    "MissionMetrics",
    "SensorNode",
    "AsvAnchor",
    "StepResult",
    "EpisodeAbort",
    "acoustic_rate",
    "power_model",
]
