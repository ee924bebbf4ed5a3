"""Shared-autonomy copilot: decoded motor-imagery commands arbitrated
with a TD3 agent and gated by a learned risk blocker in a grid world."""

from .copilot import (
    ActingAgent,
    Branch,
    DecisionRecord,
    DisparityModel,
    Scheme,
    authority,
    copilot_accuracy,
    decide,
    monte_carlo_authority,
    run_scheme,
)
from .eeg import Trial, crossval_classify, fuse_posteriors, gen_synthetic_eeg
from .evalkit import RunMetrics, aggregated_score, adjusted_scores, pearson_r, wilcoxon_signed_rank
from .gridworld import Action, EnvConfig, EnvState, Event, observe_rl, reset, step
from .human_agent import HumanDecodedAction, SurrogateSpec, TrialPool, intended_action
from .rl_td3 import Blocker, Hyperparams, Td3Agent, train_td3

__version__ = "0.1.0"

__all__ = [
    "ActingAgent",
    "Action",
    "Blocker",
    "Branch",
    "DecisionRecord",
    "DisparityModel",
    "EnvConfig",
    "EnvState",
    "Event",
    "HumanDecodedAction",
    "Hyperparams",
    "RunMetrics",
    "Scheme",
    "SurrogateSpec",
    "Td3Agent",
    "Trial",
    "TrialPool",
    "__version__",
    "adjusted_scores",
    "aggregated_score",
    "authority",
    "copilot_accuracy",
    "crossval_classify",
    "decide",
    "fuse_posteriors",
    "gen_synthetic_eeg",
    "intended_action",
    "monte_carlo_authority",
    "observe_rl",
    "pearson_r",
    "reset",
    "run_scheme",
    "step",
    "train_td3",
    "wilcoxon_signed_rank",
]
