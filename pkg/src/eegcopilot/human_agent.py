"""Per-step human commands: intent, decoded labels, and fused posteriors.

Two interchangeable sources produce the decoded command triple:

* a :class:`TrialPool` replays cross-validated classifications by
  drawing, with replacement, a held-out trial of the intended class;
* a :class:`SurrogateSpec` samples labels from per-class confusion
  matrices with a tunable error coupling between the two feature
  channels, for controlled-accuracy studies without any trial data.

The intent model picks the action a human would want: head for the
invisible target when one is active (only the human can see it),
otherwise for the visible target, shrinking the larger coordinate gap
first and breaking ties horizontally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eeg import ClassifiedTrial, N_CLASSES, fuse_posteriors
from .gridworld import Action, EnvState


@dataclass
class HumanDecodedAction:
    intended: Action
    a_fc: Action
    a_bp: Action
    posterior_fc: np.ndarray
    posterior_bp: np.ndarray
    posterior_pp: np.ndarray
    a_pp: Action


def intended_action(state: EnvState) -> Action:
    goal = state.invisible_target if state.invisible_target is not None else state.target
    dx = goal[0] - state.player[0]
    dy = goal[1] - state.player[1]
    if dx == 0 and dy == 0:
        raise ValueError("player is already on the selected target")
    if abs(dx) >= abs(dy) and dx != 0:
        return Action.RIGHT if dx > 0 else Action.LEFT
    return Action.UP if dy > 0 else Action.DOWN


@dataclass
class TrialPool:
    """Classified trials grouped by true class, drawn with replacement."""

    by_class: tuple[list[ClassifiedTrial], ...]

    def __post_init__(self) -> None:
        if len(self.by_class) != N_CLASSES:
            raise ValueError(f"pool needs {N_CLASSES} class buckets")
        for c, bucket in enumerate(self.by_class):
            if not bucket:
                raise ValueError(f"class {c} has no trials in the pool")

    @classmethod
    def from_records(cls, records: list[ClassifiedTrial]) -> "TrialPool":
        buckets: tuple[list[ClassifiedTrial], ...] = tuple([] for _ in range(N_CLASSES))
        for r in records:
            buckets[r.label_true].append(r)
        return cls(buckets)

    @property
    def records(self) -> list[ClassifiedTrial]:
        return [r for bucket in self.by_class for r in bucket]

    def draw(self, intended: int, rng: np.random.Generator) -> ClassifiedTrial:
        bucket = self.by_class[int(intended)]
        return bucket[int(rng.integers(len(bucket)))]


def decode_from_pool(
    pool: TrialPool, intended: Action | int, rng: np.random.Generator
) -> HumanDecodedAction:
    rec = pool.draw(int(intended), rng)
    a_pp, fused = fuse_posteriors(rec.posterior_fc, rec.posterior_bp)
    return HumanDecodedAction(
        intended=Action(intended),
        a_fc=Action(rec.label_fc),
        a_bp=Action(rec.label_bp),
        posterior_fc=rec.posterior_fc,
        posterior_bp=rec.posterior_bp,
        posterior_pp=fused,
        a_pp=Action(a_pp),
    )


@dataclass(frozen=True)
class SurrogateSpec:
    """Confusion-matrix stand-in for a decoded human.

    ``rho`` is the probability that the BP channel copies the FC draw
    (coupled error); ``kappa`` sets how peaked the mocked posteriors are
    (peak mass kappa / (kappa + 3), remainder uniform).
    """

    confusion_fc: np.ndarray
    confusion_bp: np.ndarray
    rho: float = 0.0
    kappa: float = 6.0

    def __post_init__(self) -> None:
        for name, c in (("confusion_fc", self.confusion_fc), ("confusion_bp", self.confusion_bp)):
            c = np.asarray(c, dtype=float)
            if c.shape != (N_CLASSES, N_CLASSES):
                raise ValueError(f"{name} must be {N_CLASSES}x{N_CLASSES}")
            if (c < 0).any() or not np.allclose(c.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError(f"{name} rows must be probability distributions")
            object.__setattr__(self, name, c)
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")


def uniform_error_confusion(accuracy: float) -> np.ndarray:
    """Diagonal ``accuracy`` with the error mass spread evenly."""
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError("accuracy must lie in [0, 1]")
    off = (1.0 - accuracy) / (N_CLASSES - 1)
    c = np.full((N_CLASSES, N_CLASSES), off)
    np.fill_diagonal(c, accuracy)
    return c


def make_surrogate(accuracy: float, rho: float = 0.3, kappa: float = 6.0) -> SurrogateSpec:
    """Symmetric surrogate whose fused accuracy equals ``accuracy``.

    With uniform error spreading on both channels, the average-posterior
    fusion (lowest-index tie-break over uniformly distributed intents)
    lands back on the per-channel accuracy for any coupling ``rho``.
    """
    c = uniform_error_confusion(accuracy)
    return SurrogateSpec(confusion_fc=c, confusion_bp=c.copy(), rho=rho, kappa=kappa)


def _peaked_posterior(label: int, kappa: float) -> np.ndarray:
    p = np.full(N_CLASSES, 1.0 / (kappa + 3.0))
    p[label] = kappa / (kappa + 3.0)
    return p


def decode_from_surrogate(
    spec: SurrogateSpec, intended: Action | int, rng: np.random.Generator
) -> HumanDecodedAction:
    intended = int(intended)
    a_fc = int(rng.choice(N_CLASSES, p=spec.confusion_fc[intended]))
    if rng.random() < spec.rho:
        a_bp = a_fc
    else:
        a_bp = int(rng.choice(N_CLASSES, p=spec.confusion_bp[intended]))
    post_fc = _peaked_posterior(a_fc, spec.kappa)
    post_bp = _peaked_posterior(a_bp, spec.kappa)
    a_pp, fused = fuse_posteriors(post_fc, post_bp)
    return HumanDecodedAction(
        intended=Action(intended),
        a_fc=Action(a_fc),
        a_bp=Action(a_bp),
        posterior_fc=post_fc,
        posterior_bp=post_bp,
        posterior_pp=fused,
        a_pp=Action(a_pp),
    )


def pool_decoder(pool: TrialPool):
    """Step decoder: intent from the environment, labels from the pool."""

    def decode(state: EnvState, rng: np.random.Generator) -> HumanDecodedAction:
        return decode_from_pool(pool, intended_action(state), rng)

    return decode


def surrogate_decoder(spec: SurrogateSpec):
    def decode(state: EnvState, rng: np.random.Generator) -> HumanDecodedAction:
        return decode_from_surrogate(spec, intended_action(state), rng)

    return decode


def save_pool(path, records: list[ClassifiedTrial]) -> None:
    """One line per trial: true/fc/bp labels then the 8 posterior values."""
    with open(path, "w") as f:
        f.write(f"trials={len(records)}\n")
        for r in records:
            vals = [*r.posterior_fc, *r.posterior_bp]
            f.write(
                f"{r.label_true} {r.label_fc} {r.label_bp} "
                + " ".join(f"{v:.17g}" for v in vals)
                + "\n"
            )


def load_pool(path) -> TrialPool:
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith("trials="):
        raise ValueError("pool file must start with 'trials=<count>'")
    n = int(lines[0].split("=", 1)[1])
    if len(lines) != n + 1:
        raise ValueError(f"pool file announces {n} trials but has {len(lines) - 1}")
    records = []
    for i, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) != 3 + 2 * N_CLASSES:
            raise ValueError(f"line {i}: expected {3 + 2 * N_CLASSES} fields")
        true, fc, bp = (int(v) for v in fields[:3])
        post = np.array([float(v) for v in fields[3:]])
        records.append(
            ClassifiedTrial(
                label_true=true,
                label_fc=fc,
                label_bp=bp,
                posterior_fc=post[:N_CLASSES],
                posterior_bp=post[N_CLASSES:],
            )
        )
    return TrialPool.from_records(records)
