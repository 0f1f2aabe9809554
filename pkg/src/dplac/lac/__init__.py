from .agent import DualVars, LacAgent, delta_l, lyap_target, q_target, select_action, update_duals
from .buffer import ReplayBuffer
from .nets import GaussianPolicy, LyapunovCritic, QCritic, soft_update

__all__ = [
    "LacAgent",
    "DualVars",
    "update_duals",
    "q_target",
    "lyap_target",
    "delta_l",
    "select_action",
    "ReplayBuffer",
    "GaussianPolicy",
    "QCritic",
    "LyapunovCritic",
    "soft_update",
]
