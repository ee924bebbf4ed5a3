"""Run metrics, weighted scores, and the paired statistics.

A 1000-step run is summarized by six metrics: visible and invisible
targets reached, fails, blocks, the fraction of steps acted by the human
side (agreed, fused, or RL-matched decisions), and the human workload
N_v / (N_v + N_iv). The four counts are weighted into an aggregated
score; two multiplicative adjustments then reward human involvement and
penalize workload, and their merge is the final score.

``wilcoxon_signed_rank`` computes the exact two-sided p-value from the
distribution of the positive-rank sum W+ (zero differences dropped, tied
ranks averaged) for up to 20 pairs, and a tie-corrected normal
approximation beyond that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .copilot import ActingAgent, DecisionRecord
from .gridworld import Event

DEFAULT_WEIGHTS = (1.0, 10.0, -10.0, -5.0)


@dataclass(frozen=True)
class RunMetrics:
    visible_score: int
    invisible_score: int
    total_fail: int
    total_block: int
    pct_human_action: float
    human_workload: float


def collect_metrics(
    decisions: list[DecisionRecord], events: list[frozenset[Event]]
) -> RunMetrics:
    """Count one run's events; halted steps count toward neither agent."""
    if len(decisions) != len(events):
        raise ValueError(
            f"log length mismatch: {len(decisions)} decisions, {len(events)} event sets"
        )
    visible = sum(Event.REACHED_VISIBLE in ev for ev in events)
    invisible = sum(Event.REACHED_INVISIBLE in ev for ev in events)
    fails = sum(Event.FAILED in ev for ev in events)
    blocks = sum(rec.blocked for rec in decisions)
    n_human = sum(
        rec.acting_agent in (ActingAgent.HUMAN, ActingAgent.SHARED) for rec in decisions
    )
    n_rl = sum(rec.acting_agent is ActingAgent.RL for rec in decisions)
    pct_human = n_human / (n_human + n_rl) if (n_human + n_rl) > 0 else 0.0
    workload = visible / (visible + invisible) if (visible + invisible) > 0 else 0.0
    return RunMetrics(
        visible_score=visible,
        invisible_score=invisible,
        total_fail=fails,
        total_block=blocks,
        pct_human_action=pct_human,
        human_workload=workload,
    )


def aggregated_score(
    metrics: RunMetrics, weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS
) -> float:
    w1, w2, w3, w4 = weights
    return (
        w1 * metrics.visible_score
        + w2 * metrics.invisible_score
        + w3 * metrics.total_fail
        + w4 * metrics.total_block
    )


def adjusted_scores(
    aggregated: float, metrics: RunMetrics, merge: str = "sum"
) -> tuple[float, float, float]:
    """(score_human_action, score_human_workload, final).

    Both multipliers stay in [1, 2] by construction: the fractions enter
    as values in [0, 1], never as 0-100 percentages.
    """
    score_ha = aggregated * (1.0 + metrics.pct_human_action)
    score_hw = aggregated * (2.0 - metrics.human_workload)
    if merge == "sum":
        final = score_ha + score_hw
    elif merge == "mean":
        final = 0.5 * (score_ha + score_hw)
    else:
        raise ValueError(f"unknown merge rule {merge!r}")
    return score_ha, score_hw, final


@dataclass(frozen=True)
class ScoreReport:
    aggregated: float
    score_human_action: float
    score_human_workload: float
    final: float
    weights: tuple[float, float, float, float]
    merge: str


def score_report(
    metrics: RunMetrics,
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS,
    merge: str = "sum",
) -> ScoreReport:
    agg = aggregated_score(metrics, weights)
    ha, hw, final = adjusted_scores(agg, metrics, merge)
    return ScoreReport(agg, ha, hw, final, weights, merge)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


EXACT_LIMIT = 20


def _exact_two_sided_p(double_ranks: np.ndarray, w_plus_doubled: int) -> float:
    """Distribution of 2*W+ by subset-sum convolution over doubled ranks."""
    total = int(double_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for dr in double_ranks:
        dr = int(dr)
        shifted = np.zeros_like(counts)
        shifted[dr:] = counts[: total + 1 - dr]
        counts = counts + shifted
    counts /= counts.sum()
    lo = min(w_plus_doubled, total - w_plus_doubled)
    hi = total - lo
    p = counts[: lo + 1].sum() + counts[hi:].sum()
    return float(min(1.0, p))


def wilcoxon_signed_rank(
    paired_a: np.ndarray, paired_b: np.ndarray
) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Returns (W+, p). Zero differences are dropped; if all differences
    are zero the test is vacuous and p = 1 by convention. Exact p for up
    to 20 informative pairs, tie-corrected normal approximation beyond.
    """
    a = np.asarray(paired_a, dtype=float)
    b = np.asarray(paired_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be equal-length 1-D arrays")
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    n = diffs.size
    if n == 0:
        return 0.0, 1.0
    ranks = _average_ranks(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    if n <= EXACT_LIMIT:
        double_ranks = np.rint(2.0 * ranks).astype(int)
        return w_plus, _exact_two_sided_p(double_ranks, int(round(2.0 * w_plus)))
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    var -= (tie_counts**3 - tie_counts).sum() / 48.0
    if var <= 0.0:
        return w_plus, 1.0
    z = (w_plus - mu) / math.sqrt(var)
    return w_plus, math.erfc(abs(z) / math.sqrt(2.0))


def pearson_r(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample correlation with a two-sided p from the t-distribution.

    ``t = r sqrt((n-2) / (1-r^2))`` with n-2 degrees of freedom.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D arrays")
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 points")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("zero variance input")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return r, p
