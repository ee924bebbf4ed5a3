"""Target-approach grid world with visible and invisible targets.

The board is ``grid_size`` x ``grid_size`` (default 16x16). The player
spawns at the center, a visible target at a random other cell, and every
command moves the player one cell. Crossing the boundary fails the run:
the player stays put, the step is terminal, and the reward is the fail
penalty. Ordinary moves are shaped +0.5 / -0.5 depending on whether the
Manhattan distance to the visible target shrank or grew; the step that
lands on the visible target earns ``visible_reach_reward`` instead.

While no invisible target is active, one may spawn at any step with a
small probability. Invisible targets never appear in the RL observation
(:func:`observe_rl`); they only matter to the human agent and to the
scoreboard.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum, IntEnum, auto

import numpy as np


class Action(IntEnum):
    """The four movement commands; the index order is fixed."""

    LEFT = 0
    RIGHT = 1
    UP = 2
    DOWN = 3


_MOVES = {
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
}


class Event(Enum):
    REACHED_VISIBLE = auto()
    REACHED_INVISIBLE = auto()
    FAILED = auto()


@dataclass(frozen=True)
class EnvConfig:
    grid_size: int = 16
    invisible_spawn_prob: float = 0.01
    shaping_reward: float = 0.5
    fail_penalty: float = 10.0
    # training reward for the step that lands on the visible target; the
    # scoreboard value of a visible target stays 1 regardless (evalkit).
    # Plain +0.5 shaping leaves target consumption unanchored in the
    # replay data and the learned policy orbits targets without touching
    # them; a reach reward well above the shaping step breaks that.
    visible_reach_reward: float = 6.0

    def __post_init__(self) -> None:
        if self.grid_size < 2:
            raise ValueError(f"grid_size must be >= 2, got {self.grid_size}")
        if not 0.0 <= self.invisible_spawn_prob <= 1.0:
            raise ValueError("invisible_spawn_prob must lie in [0, 1]")


@dataclass(frozen=True)
class EnvState:
    player: tuple[int, int]
    target: tuple[int, int]
    invisible_target: tuple[int, int] | None
    step_count: int


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    events: frozenset[Event]
    terminal: bool


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def one_hot(action: Action | int) -> np.ndarray:
    v = np.zeros(4)
    v[int(action)] = 1.0
    return v


def _center(grid_size: int) -> tuple[int, int]:
    c = (grid_size - 1) // 2
    return (c, c)


def _spawn_cell(
    grid_size: int, exclude: set[tuple[int, int]], rng: np.random.Generator
) -> tuple[int, int]:
    cells = [
        (x, y)
        for x in range(grid_size)
        for y in range(grid_size)
        if (x, y) not in exclude
    ]
    return cells[int(rng.integers(len(cells)))]


def reset(config: EnvConfig, rng: np.random.Generator) -> EnvState:
    """Fresh state: player centered, one visible target elsewhere."""
    player = _center(config.grid_size)
    target = _spawn_cell(config.grid_size, {player}, rng)
    return EnvState(player=player, target=target, invisible_target=None, step_count=0)


def respawn_after_fail(
    state: EnvState, config: EnvConfig, rng: np.random.Generator
) -> EnvState:
    """Continue a fixed-length run after a boundary fail.

    The player is recentered and targets respawn as in :func:`reset`;
    the step counter is preserved so the run's step budget is unaffected.
    """
    player = _center(config.grid_size)
    target = _spawn_cell(config.grid_size, {player}, rng)
    return EnvState(
        player=player,
        target=target,
        invisible_target=None,
        step_count=state.step_count,
    )


def step(
    state: EnvState,
    action: Action | int,
    config: EnvConfig,
    rng: np.random.Generator,
) -> tuple[EnvState, StepOutcome]:
    """Advance one command; boundary crossing is a modeled fail, not an error."""
    g = config.grid_size
    dx, dy = _MOVES[Action(action)]
    nx, ny = state.player[0] + dx, state.player[1] + dy
    if not (0 <= nx < g and 0 <= ny < g):
        next_state = replace(state, step_count=state.step_count + 1)
        outcome = StepOutcome(
            reward=-config.fail_penalty,
            events=frozenset({Event.FAILED}),
            terminal=True,
        )
        return next_state, outcome

    old_dist = manhattan(state.player, state.target)
    new_dist = manhattan((nx, ny), state.target)
    reward = config.shaping_reward if new_dist < old_dist else -config.shaping_reward

    events: set[Event] = set()
    target = state.target
    invisible = state.invisible_target
    if (nx, ny) == target:
        events.add(Event.REACHED_VISIBLE)
        reward = config.visible_reach_reward
        exclude = {(nx, ny)}
        if invisible is not None:
            exclude.add(invisible)
        target = _spawn_cell(g, exclude, rng)
    elif invisible is not None and (nx, ny) == invisible:
        events.add(Event.REACHED_INVISIBLE)
        invisible = None

    if invisible is None and config.invisible_spawn_prob > 0.0:
        if rng.random() < config.invisible_spawn_prob:
            invisible = _spawn_cell(g, {(nx, ny), target}, rng)

    next_state = EnvState(
        player=(nx, ny),
        target=target,
        invisible_target=invisible,
        step_count=state.step_count + 1,
    )
    return next_state, StepOutcome(reward, frozenset(events), False)


def observe_rl(state: EnvState, grid_size: int = 16) -> np.ndarray:
    """4-dim observation: player and visible-target coordinates in [0, 1].

    The invisible target is deliberately absent.
    """
    scale = grid_size - 1
    return np.array(
        [
            state.player[0] / scale,
            state.player[1] / scale,
            state.target[0] / scale,
            state.target[1] / scale,
        ]
    )
