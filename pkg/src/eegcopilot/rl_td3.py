"""TD3 with twin critics, delayed policy updates, and a risk blocker.

The action space is the four grid commands, so the continuous-control
recipe is adapted: the actor emits 4 logits, the environment executes
their argmax, and critics consume one-hot actions. For the policy
gradient the actor maximizes the softmax-weighted average of critic1's
four one-hot action values (the differentiable relaxation of the argmax;
feeding the softmax vector itself into the critic stalls, because the
critic is only ever fitted at the one-hot corners and its interior
surface carries no usable gradient). Target policy smoothing is omitted;
it has no sensible form over 4 discrete actions.

The blocker regresses the fail indicator of each stored transition onto
a sigmoid risk score of (state, one-hot action); an action is vetoed
when that score crosses the decision threshold. Fail transitions are
rare and the ring buffer eventually evicts the early, most diverse ones,
so every fail ever seen is also kept in a small bank and blocker
minibatches draw half of their samples from it.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import tinynet
from .gridworld import Action, EnvConfig, Event, observe_rl, one_hot, reset, step
from .tinynet import AdamState, Mlp, adam_step, backward, forward, init_adam, init_mlp, soft_update

OBS_DIM = 4
N_ACTIONS = 4


class TrainingDiverged(RuntimeError):
    """A loss became non-finite during training."""


@dataclass
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    terminal: bool
    r_g: float


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling over filled slots."""

    def __init__(self, capacity: int = 50_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, OBS_DIM))
        self.a = np.zeros(capacity, dtype=int)
        self.r = np.zeros(capacity)
        self.s_next = np.zeros((capacity, OBS_DIM))
        self.terminal = np.zeros(capacity)
        self.r_g = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(
        self,
        s: np.ndarray,
        a: int,
        r: float,
        s_next: np.ndarray,
        terminal: bool,
        r_g: float,
    ) -> None:
        i = self._next
        self.s[i] = s
        self.a[i] = int(a)
        self.r[i] = r
        self.s_next[i] = s_next
        self.terminal[i] = float(terminal)
        self.r_g[i] = r_g
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _gather(self, idx: np.ndarray) -> dict[str, np.ndarray]:
        return {
            "s": self.s[idx],
            "a": self.a[idx],
            "r": self.r[idx],
            "s_next": self.s_next[idx],
            "terminal": self.terminal[idx],
            "r_g": self.r_g[idx],
        }

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        if batch_size > self._size:
            raise ValueError("minibatch larger than buffer fill")
        idx = rng.integers(self._size, size=batch_size)
        return self._gather(idx)


class FailBank:
    """Grow-only store of every fail (state, action) pair seen in training."""

    def __init__(self):
        self._s: list[np.ndarray] = []
        self._a: list[int] = []

    def __len__(self) -> int:
        return len(self._s)

    def push(self, s: np.ndarray, a: int) -> None:
        self._s.append(np.array(s, copy=True))
        self._a.append(int(a))

    def sample(self, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        idx = rng.integers(len(self._s), size=k)
        return np.vstack([self._s[i] for i in idx]), np.array([self._a[i] for i in idx])


@dataclass
class Td3Agent:
    actor: Mlp
    critic1: Mlp
    critic2: Mlp
    target_actor: Mlp
    target_critic1: Mlp
    target_critic2: Mlp
    gamma: float = 0.99
    tau: float = 0.005
    policy_delay: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.policy_delay < 1:
            raise ValueError("policy_delay must be >= 1")


@dataclass
class Blocker:
    net: Mlp
    theta: float = 0.5


@dataclass(frozen=True)
class Hyperparams:
    total_steps: int = 60_000
    batch_size: int = 64
    buffer_capacity: int = 50_000
    warmup_steps: int = 1_000
    learning_rate: float = 3e-4
    gamma: float = 0.9
    tau: float = 0.005
    policy_delay: int = 2
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal_frac: float = 0.5
    episode_cap: int = 40
    actor_logit_reg: float = 0.01
    # training episodes start at a uniform random cell so the replay data
    # covers boundary regions; evaluation episodes always start centered
    exploring_starts: bool = True
    blocker_fail_fraction: float = 0.5
    blocker_threshold: float = 0.5
    log_interval: int = 1_000


def make_agent(rng: np.random.Generator, hp: Hyperparams = Hyperparams()) -> Td3Agent:
    actor = init_mlp(OBS_DIM, N_ACTIONS, rng)
    critic1 = init_mlp(OBS_DIM + N_ACTIONS, 1, rng)
    critic2 = init_mlp(OBS_DIM + N_ACTIONS, 1, rng)
    return Td3Agent(
        actor=actor,
        critic1=critic1,
        critic2=critic2,
        target_actor=tinynet.clone_mlp(actor),
        target_critic1=tinynet.clone_mlp(critic1),
        target_critic2=tinynet.clone_mlp(critic2),
        gamma=hp.gamma,
        tau=hp.tau,
        policy_delay=hp.policy_delay,
    )


def make_blocker(rng: np.random.Generator, hp: Hyperparams = Hyperparams()) -> Blocker:
    net = init_mlp(OBS_DIM + N_ACTIONS, 1, rng, output_activation="sigmoid")
    return Blocker(net=net, theta=hp.blocker_threshold)


def epsilon_at(hp: Hyperparams, step_no: int) -> float:
    anneal = max(1, int(hp.eps_anneal_frac * hp.total_steps))
    frac = min(1.0, step_no / anneal)
    return hp.eps_start + frac * (hp.eps_end - hp.eps_start)


def select_action(
    agent: Td3Agent,
    obs: np.ndarray,
    explore: bool = False,
    rng: np.random.Generator | None = None,
    eps: float = 0.0,
) -> Action:
    """Greedy argmax of the actor logits, or uniform with probability eps."""
    if explore and rng is not None and rng.random() < eps:
        return Action(int(rng.integers(N_ACTIONS)))
    logits = forward(agent.actor, obs)
    return Action(int(np.argmax(logits)))


def _one_hot_batch(actions: np.ndarray) -> np.ndarray:
    out = np.zeros((actions.shape[0], N_ACTIONS))
    out[np.arange(actions.shape[0]), actions.astype(int)] = 1.0
    return out


def critic_target(agent: Td3Agent, batch: dict[str, np.ndarray]) -> np.ndarray:
    """Clipped double-Q targets: bootstrap on the min of the twin targets."""
    s_next = batch["s_next"]
    logits = forward(agent.target_actor, s_next)
    a_next = np.argmax(logits, axis=1)
    x = np.hstack([s_next, _one_hot_batch(a_next)])
    q1 = forward(agent.target_critic1, x)[:, 0]
    q2 = forward(agent.target_critic2, x)[:, 0]
    return batch["r"] + agent.gamma * (1.0 - batch["terminal"]) * np.minimum(q1, q2)


def update_critics(
    agent: Td3Agent,
    batch: dict[str, np.ndarray],
    adam1: AdamState,
    adam2: AdamState,
) -> float:
    """Regress both critics toward the shared target; returns pre-update loss."""
    y = critic_target(agent, batch)
    x = np.hstack([batch["s"], _one_hot_batch(batch["a"])])
    m = y.shape[0]
    losses = []
    for critic, adam in ((agent.critic1, adam1), (agent.critic2, adam2)):
        q = forward(critic, x)[:, 0]
        resid = q - y
        losses.append(float(np.mean(resid**2)))
        grads, _ = backward(critic, x, (2.0 / m) * resid[:, None])
        adam_step(critic, adam, grads)
    return 0.5 * (losses[0] + losses[1])


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _corner_values(critic: Mlp, s: np.ndarray) -> np.ndarray:
    """critic values of every one-hot action at each state, shape (m, 4)."""
    m = s.shape[0]
    return np.stack(
        [
            forward(critic, np.hstack([s, np.tile(one_hot(a), (m, 1))]))[:, 0]
            for a in range(N_ACTIONS)
        ],
        axis=1,
    )


def actor_loss(agent: Td3Agent, batch: dict[str, np.ndarray]) -> float:
    """-mean softmax-weighted critic1 value of the actor's action."""
    s = batch["s"]
    p = _softmax(forward(agent.actor, s))
    return float(-np.mean((p * _corner_values(agent.critic1, s)).sum(axis=1)))


def update_actor_and_targets(
    agent: Td3Agent,
    batch: dict[str, np.ndarray],
    adam_actor: AdamState,
    step_counter: int,
    logit_reg: float = 0.0,
) -> float | None:
    """Delayed policy step: ascend critic1 through the softmax relaxation,
    then soft-update all three target networks. No-op off-schedule.

    ``logit_reg`` adds an L2 pull on the logits to the update (not to the
    reported loss); without it the softmax saturates and the policy
    gradient dies long before the critic settles.
    """
    if step_counter % agent.policy_delay != 0:
        return None
    s = batch["s"]
    m = s.shape[0]
    logits = forward(agent.actor, s)
    p = _softmax(logits)
    qs = _corner_values(agent.critic1, s)
    loss = float(-np.mean((p * qs).sum(axis=1)))

    gp = -qs / m
    # softmax Jacobian: dL/dlogits = p * (gp - <gp, p>)
    glogits = p * (gp - (gp * p).sum(axis=1, keepdims=True))
    if logit_reg > 0.0:
        glogits = glogits + (2.0 * logit_reg / m) * logits
    grads, _ = backward(agent.actor, s, glogits)
    adam_step(agent.actor, adam_actor, grads)

    soft_update(agent.target_actor, agent.actor, agent.tau)
    soft_update(agent.target_critic1, agent.critic1, agent.tau)
    soft_update(agent.target_critic2, agent.critic2, agent.tau)
    return loss


def train_blocker(
    blocker: Blocker, batch: dict[str, np.ndarray], adam: AdamState
) -> float:
    """Regress risk scores toward the fail labels; returns pre-update loss."""
    x = np.hstack([batch["s"], _one_hot_batch(batch["a"])])
    labels = batch["r_g"]
    m = labels.shape[0]
    b = forward(blocker.net, x)[:, 0]
    loss = float(np.mean((b - labels) ** 2))
    grads, _ = backward(blocker.net, x, (2.0 / m) * (b - labels)[:, None])
    adam_step(blocker.net, adam, grads)
    return loss


def blocker_risk(blocker: Blocker, obs: np.ndarray, action: Action | int) -> float:
    x = np.concatenate([obs, one_hot(action)])
    return float(forward(blocker.net, x)[0])


def assess_risk(blocker: Blocker, obs: np.ndarray, action: Action | int) -> int:
    """1 when the risk score reaches the decision threshold, else 0."""
    return int(blocker_risk(blocker, obs, action) >= blocker.theta)


def make_blocker_fn(blocker: Blocker, grid_size: int = 16):
    """Adapter with the (env_state, action) -> {0,1} shape the copilot expects."""

    def fn(state, action) -> int:
        return assess_risk(blocker, observe_rl(state, grid_size), action)

    return fn


def greedy_policy(agent: Td3Agent, grid_size: int = 16):
    def policy(state) -> Action:
        return select_action(agent, observe_rl(state, grid_size))

    return policy


def risk_table(blocker: Blocker, grid_size: int = 16) -> np.ndarray:
    """Risk score for every (player x, player y, action).

    The observation needs a target; each cell is paired with its mirror
    cell (g-1-x, g-1-y), which is never the player's own cell.
    """
    g = grid_size
    rows = []
    for x in range(g):
        for y in range(g):
            obs = np.array(
                [x / (g - 1), y / (g - 1), (g - 1 - x) / (g - 1), (g - 1 - y) / (g - 1)]
            )
            for a in range(N_ACTIONS):
                rows.append(np.concatenate([obs, one_hot(a)]))
    scores = forward(blocker.net, np.vstack(rows))[:, 0]
    return scores.reshape(g, g, N_ACTIONS)


@dataclass
class TrainingLog:
    steps: list[int] = field(default_factory=list)
    critic_loss: list[float] = field(default_factory=list)
    actor_loss: list[float] = field(default_factory=list)
    blocker_loss: list[float] = field(default_factory=list)
    episode_fails: list[int] = field(default_factory=list)
    mean_reward: list[float] = field(default_factory=list)


def train_td3(
    env_config: EnvConfig,
    hp: Hyperparams,
    rng: np.random.Generator,
) -> tuple[Td3Agent, Blocker, TrainingLog]:
    """Full training run: explore, store, update critics/actor/blocker.

    One update cycle per environment step once the warmup fill is
    reached. Episodes end on a boundary fail (terminal) or at the
    episode cap (truncation: the stored transition keeps terminal=False
    so bootstrapping continues).
    """
    agent = make_agent(rng, hp)
    blocker = make_blocker(rng, hp)
    adam_actor = init_adam(agent.actor, hp.learning_rate)
    adam_c1 = init_adam(agent.critic1, hp.learning_rate)
    adam_c2 = init_adam(agent.critic2, hp.learning_rate)
    adam_b = init_adam(blocker.net, hp.learning_rate)
    buf = ReplayBuffer(hp.buffer_capacity)
    bank = FailBank()
    log = TrainingLog()

    g = env_config.grid_size
    state = reset(env_config, rng)
    ep_len = 0
    window_rewards: list[float] = []
    window_fails = 0
    last_dc = last_da = last_db = float("nan")

    for t in range(1, hp.total_steps + 1):
        eps = epsilon_at(hp, t)
        obs = observe_rl(state, g)
        a = select_action(agent, obs, explore=True, rng=rng, eps=eps)
        next_state, out = step(state, a, env_config, rng)
        failed = Event.FAILED in out.events
        buf.push(
            obs,
            int(a),
            out.reward,
            observe_rl(next_state, g),
            out.terminal,
            1.0 if failed else 0.0,
        )
        if failed:
            bank.push(obs, int(a))
        window_rewards.append(out.reward)
        window_fails += int(failed)
        ep_len += 1
        if out.terminal or ep_len >= hp.episode_cap:
            state = reset(env_config, rng)
            ep_len = 0
        else:
            state = next_state

        if len(buf) >= max(hp.warmup_steps, hp.batch_size):
            batch = buf.sample(hp.batch_size, rng)
            last_dc = update_critics(agent, batch, adam_c1, adam_c2)
            da = update_actor_and_targets(
                agent, batch, adam_actor, t, hp.actor_logit_reg
            )
            if da is not None:
                last_da = da
            n_fail = min(int(round(hp.batch_size * hp.blocker_fail_fraction)), len(bank))
            bb = buf.sample(hp.batch_size - n_fail, rng)
            if n_fail:
                fs, fa = bank.sample(n_fail, rng)
                bb = {
                    "s": np.vstack([fs, bb["s"]]),
                    "a": np.concatenate([fa, bb["a"]]),
                    "r_g": np.concatenate([np.ones(n_fail), bb["r_g"]]),
                }
            last_db = train_blocker(blocker, bb, adam_b)
            if not (np.isfinite(last_dc) and np.isfinite(last_db)):
                raise TrainingDiverged(f"non-finite loss at step {t}")
            if da is not None and not np.isfinite(da):
                raise TrainingDiverged(f"non-finite actor loss at step {t}")

        if t % hp.log_interval == 0:
            log.steps.append(t)
            log.critic_loss.append(last_dc)
            log.actor_loss.append(last_da)
            log.blocker_loss.append(last_db)
            log.episode_fails.append(window_fails)
            log.mean_reward.append(float(np.mean(window_rewards)))
            window_rewards = []
            window_fails = 0

    return agent, blocker, log


_CHECKPOINT_MAGIC = b"EEGCOPILOT-CKPT1\n"
_NET_ORDER = (
    "actor",
    "critic1",
    "critic2",
    "target_actor",
    "target_critic1",
    "target_critic2",
    "blocker",
)


def save_checkpoint(path, agent: Td3Agent, blocker: Blocker, extra: dict | None = None) -> None:
    """Magic line, JSON header (length-prefixed), then the nets in order."""
    header = {
        "gamma": agent.gamma,
        "tau": agent.tau,
        "policy_delay": agent.policy_delay,
        "theta": blocker.theta,
        "nets": list(_NET_ORDER),
    }
    if extra:
        header["extra"] = extra
    header_bytes = json.dumps(header, sort_keys=True).encode()
    nets = {
        "actor": agent.actor,
        "critic1": agent.critic1,
        "critic2": agent.critic2,
        "target_actor": agent.target_actor,
        "target_critic1": agent.target_critic1,
        "target_critic2": agent.target_critic2,
        "blocker": blocker.net,
    }
    with open(path, "wb") as f:
        f.write(_CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for name in _NET_ORDER:
            f.write(tinynet.mlp_to_bytes(nets[name]))


def load_checkpoint(path) -> tuple[Td3Agent, Blocker, dict]:
    with open(path, "rb") as f:
        buf = f.read()
    if not buf.startswith(_CHECKPOINT_MAGIC):
        raise ValueError(f"{path}: not a checkpoint file")
    offset = len(_CHECKPOINT_MAGIC)
    (hlen,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    header = json.loads(buf[offset : offset + hlen].decode())
    offset += hlen
    nets = {}
    for name in header["nets"]:
        nets[name], offset = tinynet.mlp_from_bytes(buf, offset)
    agent = Td3Agent(
        actor=nets["actor"],
        critic1=nets["critic1"],
        critic2=nets["critic2"],
        target_actor=nets["target_actor"],
        target_critic1=nets["target_critic1"],
        target_critic2=nets["target_critic2"],
        gamma=header["gamma"],
        tau=header["tau"],
        policy_delay=header["policy_delay"],
    )
    blocker = Blocker(net=nets["blocker"], theta=header["theta"])
    return agent, blocker, header
