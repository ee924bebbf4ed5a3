"""Arbitration between the decoded human and the RL agent, plus the
disparity analytics that predict authority and accuracy.

Decision tree for the Co-* schemes, top to bottom:

1. the two decoded labels agree  -> candidate = that label      (Agree)
2. the RL action matches either  -> candidate = the RL action   (MatchTD3)
3. otherwise                     -> candidate = fused-posterior (FusedPP)
4. blocking: Co-NB never checks; Co-PPB checks FusedPP candidates only;
   Co-FB checks every candidate. A vetoed candidate is replaced by the
   RL action in the same step.

Single-agent schemes: TD3 executes the RL action; EEG-NB the fused
action; EEG-FB the fused action unless vetoed, in which case the step
halts (no movement). The switched variants Co-FB-SP and EEG-NB-SC hand
full control to the RL agent while no invisible target is active and
revert to Co-FB / EEG-NB behavior while one is.

The disparity model turns a single disagreement rate ``d`` plus measured
classifier statistics into closed-form authority weights and a copilot
accuracy; :func:`monte_carlo_authority` samples the same generative
process and must agree with the closed forms.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .eeg import summarize_classification
from .gridworld import Action, EnvConfig, EnvState, Event, reset, respawn_after_fail, step
from .human_agent import HumanDecodedAction, SurrogateSpec, TrialPool, decode_from_surrogate


class Scheme(Enum):
    TD3 = "td3"
    EEG_NB = "eeg-nb"
    EEG_FB = "eeg-fb"
    CO_NB = "co-nb"
    CO_PPB = "co-ppb"
    CO_FB = "co-fb"
    CO_FB_SP = "co-fb-sp"
    EEG_NB_SC = "eeg-nb-sc"


#: schemes whose decision may consult the blocker
BLOCKING_SCHEMES = frozenset({Scheme.EEG_FB, Scheme.CO_PPB, Scheme.CO_FB, Scheme.CO_FB_SP})
#: schemes where every candidate passes the blocker
FULL_BLOCKER_SCHEMES = frozenset({Scheme.EEG_FB, Scheme.CO_FB, Scheme.CO_FB_SP})


class Branch(Enum):
    AGREE = "agree"
    MATCH_TD3 = "match-td3"
    FUSED_PP = "fused-pp"
    BLOCKED = "blocked"
    PURE = "pure"


class ActingAgent(Enum):
    HUMAN = "human"
    RL = "rl"
    SHARED = "shared"


@dataclass(frozen=True)
class DecisionRecord:
    scheme: Scheme
    human: HumanDecodedAction | None
    a_r: Action
    branch: Branch
    a_final: Action | None  # None = halt (no movement this step)
    acting_agent: ActingAgent | None  # None on halted steps
    blocked: bool


def decide(
    scheme: Scheme,
    human: HumanDecodedAction | None,
    a_r: Action,
    blocker_fn,
    env_state: EnvState,
) -> DecisionRecord:
    """One arbitration step; pure function of its inputs."""
    if scheme in BLOCKING_SCHEMES and blocker_fn is None:
        raise ValueError(f"{scheme.value} needs a blocker")
    if scheme is Scheme.TD3:
        return DecisionRecord(scheme, None, a_r, Branch.PURE, a_r, ActingAgent.RL, False)
    if human is None:
        raise ValueError(f"{scheme.value} needs a decoded human action")

    invisible_active = env_state.invisible_target is not None
    if scheme in (Scheme.CO_FB_SP, Scheme.EEG_NB_SC) and not invisible_active:
        return DecisionRecord(scheme, human, a_r, Branch.PURE, a_r, ActingAgent.RL, False)
    if scheme is Scheme.EEG_NB_SC:
        return DecisionRecord(
            scheme, human, a_r, Branch.PURE, human.a_pp, ActingAgent.HUMAN, False
        )
    if scheme is Scheme.EEG_NB:
        return DecisionRecord(
            scheme, human, a_r, Branch.PURE, human.a_pp, ActingAgent.HUMAN, False
        )
    if scheme is Scheme.EEG_FB:
        if blocker_fn(env_state, human.a_pp):
            return DecisionRecord(scheme, human, a_r, Branch.BLOCKED, None, None, True)
        return DecisionRecord(
            scheme, human, a_r, Branch.PURE, human.a_pp, ActingAgent.HUMAN, False
        )

    # layered copilot tree (Co-NB / Co-PPB / Co-FB; Co-FB-SP reaches here
    # only while an invisible target is active and behaves as Co-FB)
    effective = Scheme.CO_FB if scheme is Scheme.CO_FB_SP else scheme
    if human.a_fc == human.a_bp:
        branch, candidate, agent = Branch.AGREE, human.a_fc, ActingAgent.HUMAN
    elif a_r in (human.a_fc, human.a_bp):
        branch, candidate, agent = Branch.MATCH_TD3, a_r, ActingAgent.SHARED
    else:
        branch, candidate, agent = Branch.FUSED_PP, human.a_pp, ActingAgent.HUMAN

    check = effective is Scheme.CO_FB or (
        effective is Scheme.CO_PPB and branch is Branch.FUSED_PP
    )
    if check and blocker_fn(env_state, candidate):
        return DecisionRecord(scheme, human, a_r, Branch.BLOCKED, a_r, ActingAgent.RL, True)
    return DecisionRecord(scheme, human, a_r, branch, candidate, agent, False)


def perfect_blocker(config: EnvConfig):
    """Geometric oracle: flags exactly the boundary-crossing actions."""
    g = config.grid_size

    def fn(state: EnvState, action: Action | int) -> int:
        x, y = state.player
        a = Action(action)
        return int(
            (a is Action.LEFT and x == 0)
            or (a is Action.RIGHT and x == g - 1)
            or (a is Action.DOWN and y == 0)
            or (a is Action.UP and y == g - 1)
        )

    return fn


def run_scheme(
    scheme: Scheme,
    steps: int,
    env_config: EnvConfig,
    rng: np.random.Generator,
    rl_policy,
    human_decoder=None,
    blocker_fn=None,
) -> tuple[list[DecisionRecord], list[frozenset[Event]]]:
    """Evaluate one scheme for a fixed step budget.

    Halted steps consume budget without an environment transition. A
    boundary fail respawns the player so the run always uses exactly
    ``steps`` steps; the fail stays visible in that step's event set.
    """
    if scheme is not Scheme.TD3 and human_decoder is None:
        raise ValueError(f"{scheme.value} needs a human decoder")
    state = reset(env_config, rng)
    decisions: list[DecisionRecord] = []
    events: list[frozenset[Event]] = []
    for _ in range(steps):
        a_r = rl_policy(state)
        human = None if scheme is Scheme.TD3 else human_decoder(state, rng)
        rec = decide(scheme, human, a_r, blocker_fn, state)
        decisions.append(rec)
        if rec.a_final is None:
            events.append(frozenset())
            continue
        state, out = step(state, rec.a_final, env_config, rng)
        events.append(out.events)
        if out.terminal:
            state = respawn_after_fail(state, env_config, rng)
    return decisions, events


def write_decision_log(path, decisions: list[DecisionRecord]) -> None:
    """Line-delimited record stream for post-hoc analysis."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            [
                "step",
                "scheme",
                "branch",
                "a_fc",
                "a_bp",
                "a_pp",
                "a_r",
                "a_final",
                "blocked",
                "acting_agent",
            ]
        )
        for i, rec in enumerate(decisions):
            h = rec.human
            w.writerow(
                [
                    i,
                    rec.scheme.value,
                    rec.branch.value,
                    h.a_fc.name if h else "",
                    h.a_bp.name if h else "",
                    h.a_pp.name if h else "",
                    rec.a_r.name,
                    rec.a_final.name if rec.a_final is not None else "halt",
                    int(rec.blocked),
                    rec.acting_agent.value if rec.acting_agent else "",
                ]
            )


@dataclass(frozen=True)
class DisparityModel:
    """Inputs of the authority/accuracy closed forms.

    ``d`` is the assumed disagreement rate between the RL and human
    action distributions; ``w1e`` the probability the two decoded labels
    agree; ``acc_e1`` the probability either label is correct; ``acc_e2``
    the fused-posterior accuracy (also exposed as ``acc_pp``).
    """

    d: float
    w1e: float
    p_block: float
    acc_e1: float
    acc_e2: float

    def __post_init__(self) -> None:
        for name in ("d", "w1e", "p_block", "acc_e1", "acc_e2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def acc_pp(self) -> float:
        return self.acc_e2

    @property
    def w1r(self) -> float:
        return self.w1e * (1.0 - self.d)

    @property
    def w2(self) -> float:
        return (1.0 - self.d) * (1.0 - self.w1e)

    @property
    def w3e(self) -> float:
        return self.d * (1.0 - self.w1e)

    @property
    def w3r(self) -> float:
        return self.w3e * (1.0 - self.d)

    @property
    def w4r(self) -> float:
        return self.p_block * (self.w1e + self.w3e)

    @property
    def w5e(self) -> float:
        return (1.0 - self.p_block) * (self.w1e + self.w3e)

    def weights(self) -> dict[str, float]:
        return {
            "w1e": self.w1e,
            "w1r": self.w1r,
            "w2": self.w2,
            "w3e": self.w3e,
            "w3r": self.w3r,
            "w4r": self.w4r,
            "w5e": self.w5e,
        }


def authority(model: DisparityModel) -> tuple[float, float]:
    """Closed-form control authorities (human, RL)."""
    ath_e = 1.0 - model.w4r
    ath_r = model.w1r + model.w2 + model.w3r + model.w4r
    return ath_e, ath_r


def copilot_accuracy(model: DisparityModel) -> float:
    """Human classification accuracy under the full-blocker copilot."""
    return ((model.w1e + model.w2) * model.acc_e1 + model.w3e * model.acc_e2) * (
        1.0 - model.p_block
    )


def monte_carlo_authority(
    model: DisparityModel, n_samples: int, rng: np.random.Generator
) -> tuple[float, float, float]:
    """Sampled counterpart of :func:`authority` / :func:`copilot_accuracy`.

    Draws the generative process the closed forms describe: an agreement
    event with probability w1e; RL-match events with probability (1 - d)
    where the weights apply them; a block event with probability p_block
    charged to human-originated mass; correctness per branch. Tallies use
    the same attribution rules, so estimates converge to the formulas.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    n = int(n_samples)
    agree = rng.random(n) < model.w1e
    match_l2 = rng.random(n) < (1.0 - model.d)  # RL matches a human label
    match_pp = rng.random(n) < (1.0 - model.d)  # RL matches the fused action
    blocked = rng.random(n) < model.p_block
    correct1 = rng.random(n) < model.acc_e1
    correct2 = rng.random(n) < model.acc_e2

    fused = ~agree & ~match_l2
    shared = ~agree & match_l2

    w1r_ind = agree & (rng.random(n) < (1.0 - model.d))
    w3r_ind = fused & match_pp
    w4r_ind = blocked & (agree | fused)

    ath_e = 1.0 - float(np.mean(w4r_ind))
    ath_r = float(
        np.mean(w1r_ind) + np.mean(shared) + np.mean(w3r_ind) + np.mean(w4r_ind)
    )
    correct = np.where(fused, correct2, correct1)
    acc_c = float(np.mean(correct & ~blocked))
    return ath_e, ath_r, acc_c


def estimate_model_from_pool(
    pool: TrialPool | list, d: float, p_block: float = 0.0
) -> DisparityModel:
    """Exact tallies over a classified-trial pool."""
    records = pool.records if isinstance(pool, TrialPool) else list(pool)
    stats = summarize_classification(records)
    return DisparityModel(
        d=d,
        w1e=stats["agreement"],
        p_block=p_block,
        acc_e1=stats["acc_union"],
        acc_e2=stats["acc_fused"],
    )


def estimate_model_from_surrogate(
    spec: SurrogateSpec,
    d: float,
    rng: np.random.Generator,
    n_draws: int = 10_000,
    p_block: float = 0.0,
) -> DisparityModel:
    """Empirical tallies over surrogate draws with uniform intents."""
    if n_draws < 1:
        raise ValueError("need at least one draw")
    agree = union = fused_ok = 0
    for _ in range(n_draws):
        intended = int(rng.integers(4))
        dec = decode_from_surrogate(spec, intended, rng)
        agree += dec.a_fc == dec.a_bp
        union += dec.a_fc == dec.intended or dec.a_bp == dec.intended
        fused_ok += dec.a_pp == dec.intended
    return DisparityModel(
        d=d,
        w1e=agree / n_draws,
        p_block=p_block,
        acc_e1=union / n_draws,
        acc_e2=fused_ok / n_draws,
    )


def estimate_model_from_data(
    source,
    d: float,
    rng: np.random.Generator | None = None,
    n_draws: int = 10_000,
    p_block: float = 0.0,
) -> DisparityModel:
    """Dispatch on the human-agent source type."""
    if isinstance(source, SurrogateSpec):
        if rng is None:
            raise ValueError("surrogate estimation needs an rng")
        return estimate_model_from_surrogate(source, d, rng, n_draws, p_block)
    return estimate_model_from_pool(source, d, p_block)
