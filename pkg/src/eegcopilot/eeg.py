"""EEG feature extraction, shrinkage LDA decoding, and synthetic trials.

Two feature views of each trial feed two separate classifiers:

* functional connectivity (FC): pairwise Pearson correlation between
  channel signals. The full ``N_c x N_c`` matrix is symmetric with unit
  diagonal; the feature vector is its strict upper triangle, row-major,
  giving ``N_c (N_c - 1) / 2`` values.
* band power (BP): raw periodogram power summed inside the delta
  [1, 4), theta [4, 7), alpha [8, 13), beta [14, 30) and gamma
  [30, 100) Hz bands, per channel, giving ``5 N_c`` values. Band edges
  are inclusive below and exclusive above; the 7-8 Hz and 13-14 Hz gaps
  belong to no band.

Both views are classified with a multiclass LDA whose pooled covariance
is shrunk toward a scaled identity, evaluated by stratified 10-fold
cross-validation, and the two class posteriors are fused by averaging.

A synthetic four-class generator substitutes recorded data: each class
plants a band-limited oscillation on a class-specific channel pair (the
shared waveform yields an FC signature, its frequency a BP signature)
over a pink-noise background whose level tunes the difficulty.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

N_CLASSES = 4

BAND_NAMES = ("delta", "theta", "alpha", "beta", "gamma")
BANDS = ((1.0, 4.0), (4.0, 7.0), (8.0, 13.0), (14.0, 30.0), (30.0, 100.0))


class TrialFileError(ValueError):
    """Malformed trial file; the message carries the offending line."""


@dataclass
class Trial:
    """One recording segment: ``data`` is channels x samples."""

    data: np.ndarray
    fs: float
    label: int

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[0] < 2:
            raise ValueError("trial data must be (channels >= 2) x samples")
        if not np.isfinite(self.data).all():
            raise ValueError("trial data contains non-finite samples")
        if self.fs <= 0:
            raise ValueError("sampling rate must be positive")
        if not 0 <= self.label < N_CLASSES:
            raise ValueError(f"label must be 0..{N_CLASSES - 1}, got {self.label}")

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def pearson_fc(trial: Trial) -> np.ndarray:
    """Channel-pair Pearson correlation matrix (symmetric, unit diagonal)."""
    var = trial.data.var(axis=1)
    dead = np.flatnonzero(var == 0.0)
    if dead.size:
        raise ValueError(f"channel {dead[0]} has zero variance")
    r = np.corrcoef(trial.data)
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return r


def fc_vector(trial: Trial) -> np.ndarray:
    """Strict upper triangle of the connectivity matrix, row-major."""
    r = pearson_fc(trial)
    iu = np.triu_indices(trial.n_channels, k=1)
    return r[iu]


def band_power(trial: Trial) -> np.ndarray:
    """Periodogram band power, shape (5 bands, N_c channels).

    The spectrum is the plain squared magnitude of the DFT of the raw
    samples (no window, no 1/N scaling), one-sided with every bin except
    DC and Nyquist doubled. Bins above Nyquist never contribute.
    """
    n_t = trial.n_samples
    if n_t < 4:
        raise ValueError(f"need at least 4 samples for band power, got {n_t}")
    spec = np.abs(np.fft.rfft(trial.data, axis=1)) ** 2
    freqs = np.fft.rfftfreq(n_t, d=1.0 / trial.fs)
    scale = np.full(freqs.shape, 2.0)
    scale[0] = 1.0
    if n_t % 2 == 0:
        scale[-1] = 1.0
    spec = spec * scale
    out = np.empty((len(BANDS), trial.n_channels))
    for i, (lo, hi) in enumerate(BANDS):
        mask = (freqs >= lo) & (freqs < hi)
        out[i] = spec[:, mask].sum(axis=1)
    return out


def bp_vector(trial: Trial) -> np.ndarray:
    """Band-power matrix flattened band-major: (band 0, all channels), ..."""
    return band_power(trial).ravel()


@dataclass
class LdaModel:
    means: np.ndarray  # (n_classes, n_features)
    classes: np.ndarray
    log_priors: np.ndarray
    shrinkage: float
    cov_chol: np.ndarray  # lower Cholesky factor of the shrunk covariance


def lda_fit(features: np.ndarray, labels: np.ndarray, shrinkage: float = 0.1) -> LdaModel:
    """Fit a shared-covariance Gaussian classifier with shrinkage.

    The pooled within-class covariance ``S`` (divisor ``n - k``) is
    shrunk toward a scaled identity::

        S_lam = (1 - lam) * S + lam * (trace(S) / p) * I
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D (samples, dims) array")
    if not 0.0 <= shrinkage <= 1.0:
        raise ValueError("shrinkage must lie in [0, 1]")
    classes, counts = np.unique(y, return_counts=True)
    if (counts < 2).any():
        short = classes[counts < 2]
        raise ValueError(f"need at least 2 samples per class; class {short[0]} is short")
    n, p = X.shape
    k = classes.size
    means = np.vstack([X[y == c].mean(axis=0) for c in classes])
    scatter = np.zeros((p, p))
    for i, c in enumerate(classes):
        centered = X[y == c] - means[i]
        scatter += centered.T @ centered
    pooled = scatter / (n - k)
    target = np.trace(pooled) / p
    cov = (1.0 - shrinkage) * pooled + shrinkage * target * np.eye(p)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        if shrinkage == 0.0:
            raise ValueError(
                "pooled covariance is singular; refit with shrinkage > 0"
            ) from None
        raise ValueError("degenerate features: covariance has zero trace") from None
    log_priors = np.log(counts / n)
    return LdaModel(means, classes, log_priors, shrinkage, chol)


def _discriminants(model: LdaModel, X: np.ndarray) -> np.ndarray:
    """log prior_k - 0.5 (x - mu_k)' S_lam^-1 (x - mu_k), rows = samples."""
    disc = np.empty((X.shape[0], model.classes.size))
    for i in range(model.classes.size):
        diff = X - model.means[i]
        u = solve_triangular(model.cov_chol, diff.T, lower=True)
        disc[:, i] = model.log_priors[i] - 0.5 * (u * u).sum(axis=0)
    return disc


def lda_posterior(model: LdaModel, feature: np.ndarray) -> np.ndarray:
    """Class posterior for one feature vector (softmax of discriminants)."""
    x = np.asarray(feature, dtype=float)
    single = x.ndim == 1
    disc = _discriminants(model, x[None, :] if single else x)
    disc -= disc.max(axis=1, keepdims=True)
    post = np.exp(disc)
    post /= post.sum(axis=1, keepdims=True)
    return post[0] if single else post


@dataclass
class ClassifiedTrial:
    """Held-out classification of one trial by both feature views."""

    label_true: int
    label_fc: int
    label_bp: int
    posterior_fc: np.ndarray
    posterior_bp: np.ndarray


def fuse_posteriors(
    posterior_fc: np.ndarray, posterior_bp: np.ndarray
) -> tuple[int, np.ndarray]:
    """Average the two posteriors; ties resolve to the lowest class index."""
    fused = 0.5 * (np.asarray(posterior_fc, float) + np.asarray(posterior_bp, float))
    return int(np.argmax(fused)), fused


def crossval_classify(
    trials: list[Trial],
    shrinkage: float = 0.1,
    folds: int = 10,
    seed: int = 0,
) -> list[ClassifiedTrial]:
    """Stratified k-fold cross-validation of the FC-LDA and BP-LDA.

    Trials are put into a canonical order keyed by (label, content
    digest) before fold assignment, so the result does not depend on the
    order the caller ingested them in. Every trial is classified exactly
    once, by models fitted without it.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    labels = np.array([t.label for t in trials])
    for c in range(N_CLASSES):
        n_c = int((labels == c).sum())
        if 0 < n_c < folds:
            raise ValueError(
                f"class {c} has {n_c} trials; need at least {folds} per class"
            )

    def digest(t: Trial) -> bytes:
        return hashlib.sha1(np.ascontiguousarray(t.data).tobytes()).digest()

    order = sorted(range(len(trials)), key=lambda i: (trials[i].label, digest(trials[i]), i))
    ordered = [trials[i] for i in order]
    ordered_labels = labels[order]

    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(ordered), dtype=int)
    for c in sorted(set(int(v) for v in ordered_labels)):
        members = np.flatnonzero(ordered_labels == c)
        perm = rng.permutation(members.size)
        for slot, m in enumerate(perm):
            fold_of[members[m]] = slot % folds

    fc = np.vstack([fc_vector(t) for t in ordered])
    bp = np.vstack([bp_vector(t) for t in ordered])

    results: list[ClassifiedTrial | None] = [None] * len(ordered)
    for f in range(folds):
        test = fold_of == f
        if not test.any():
            continue
        train = ~test
        model_fc = lda_fit(fc[train], ordered_labels[train], shrinkage)
        model_bp = lda_fit(bp[train], ordered_labels[train], shrinkage)
        post_fc = lda_posterior(model_fc, fc[test])
        post_bp = lda_posterior(model_bp, bp[test])
        for row, idx in enumerate(np.flatnonzero(test)):
            results[idx] = ClassifiedTrial(
                label_true=int(ordered_labels[idx]),
                label_fc=int(model_fc.classes[np.argmax(post_fc[row])]),
                label_bp=int(model_bp.classes[np.argmax(post_bp[row])]),
                posterior_fc=post_fc[row],
                posterior_bp=post_bp[row],
            )
    return [r for r in results if r is not None]


def summarize_classification(records: list[ClassifiedTrial]) -> dict[str, float]:
    """Accuracy and agreement statistics of a classified set."""
    if not records:
        raise ValueError("no classified trials")
    n = len(records)
    acc_fc = sum(r.label_fc == r.label_true for r in records) / n
    acc_bp = sum(r.label_bp == r.label_true for r in records) / n
    acc_union = (
        sum(r.label_fc == r.label_true or r.label_bp == r.label_true for r in records)
        / n
    )
    acc_fused = (
        sum(fuse_posteriors(r.posterior_fc, r.posterior_bp)[0] == r.label_true for r in records)
        / n
    )
    agreement = sum(r.label_fc == r.label_bp for r in records) / n
    return {
        "acc_fc": acc_fc,
        "acc_bp": acc_bp,
        "acc_union": acc_union,
        "acc_fused": acc_fused,
        "agreement": agreement,
    }


@dataclass(frozen=True)
class SyntheticEegConfig:
    n_channels: int = 8
    fs: float = 200.0
    n_samples: int = 200
    trials_per_class: int = 40
    noise_level: float = 1.0
    signal_amp: float = 1.0
    baseline_amp: float = 0.1
    # one carrier per class, each inside a distinct band
    class_freqs: tuple[float, ...] = (10.0, 21.0, 5.0, 38.0)

    def __post_init__(self) -> None:
        if self.n_channels < 2:
            raise ValueError("need at least 2 channels")
        if len(self.class_freqs) != N_CLASSES:
            raise ValueError("one carrier frequency per class required")
        if any(f >= self.fs / 2 for f in self.class_freqs):
            raise ValueError("carrier frequencies must stay below Nyquist")


def _pink_noise(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """1/f-shaped noise, unit standard deviation per channel."""
    white = rng.standard_normal(shape)
    spec = np.fft.rfft(white, axis=-1)
    f = np.fft.rfftfreq(shape[-1])
    spec /= np.sqrt(np.maximum(f, f[1]))
    out = np.fft.irfft(spec, n=shape[-1], axis=-1)
    sd = out.std(axis=-1, keepdims=True)
    sd[sd == 0.0] = 1.0
    return out / sd


def class_channel_pair(label: int, n_channels: int) -> tuple[int, int]:
    """The channel pair carrying class ``label``'s shared oscillation."""
    return (2 * label) % n_channels, (2 * label + 1) % n_channels


def gen_synthetic_eeg(
    config: SyntheticEegConfig, rng: np.random.Generator
) -> list[Trial]:
    """Four-class trials whose FC and BP views both separate the classes."""
    t = np.arange(config.n_samples) / config.fs
    trials: list[Trial] = []
    for label in range(N_CLASSES):
        ch_a, ch_b = class_channel_pair(label, config.n_channels)
        freq = config.class_freqs[label]
        for _ in range(config.trials_per_class):
            data = config.baseline_amp * rng.standard_normal(
                (config.n_channels, config.n_samples)
            )
            if config.noise_level > 0.0:
                data += config.noise_level * _pink_noise(
                    (config.n_channels, config.n_samples), rng
                )
            amp = config.signal_amp * np.exp(0.2 * rng.standard_normal())
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wave = amp * np.sin(2.0 * np.pi * freq * t + phase)
            data[ch_a] += wave
            data[ch_b] += wave
            trials.append(Trial(data=data, fs=config.fs, label=label))
    return trials


def write_trials(path, trials: list[Trial]) -> None:
    """Write the documented text trial format (see :func:`read_trials`)."""
    if not trials:
        raise ValueError("no trials to write")
    n_c = trials[0].n_channels
    fs = trials[0].fs
    for t in trials:
        if t.n_channels != n_c or t.fs != fs:
            raise ValueError("all trials in one file must share channels and fs")
    with open(path, "w") as f:
        f.write(f"channels={n_c} fs={fs:.17g} trials={len(trials)}\n")
        for t in trials:
            f.write(f"label={t.label} samples={t.n_samples}\n")
            for row in t.data:
                f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def _header_fields(line: str, expected: tuple[str, ...], lineno: int) -> list[str]:
    parts = line.split()
    if len(parts) != len(expected) or any(
        not p.startswith(k + "=") for p, k in zip(parts, expected)
    ):
        raise TrialFileError(
            f"line {lineno}: expected '{' '.join(k + '=<value>' for k in expected)}'"
        )
    return [p.split("=", 1)[1] for p in parts]


def read_trials(path) -> list[Trial]:
    """Parse a trial file.

    Grammar: a header line ``channels=<int> fs=<float> trials=<int>``;
    then, per trial, a line ``label=<int> samples=<int>`` followed by one
    line per channel of space-separated decimal samples.
    """
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise TrialFileError("line 1: empty file")
    try:
        c_s, fs_s, n_s = _header_fields(lines[0], ("channels", "fs", "trials"), 1)
        n_channels, fs, n_trials = int(c_s), float(fs_s), int(n_s)
    except ValueError as exc:
        raise TrialFileError(f"line 1: bad header value ({exc})") from None

    trials: list[Trial] = []
    lineno = 1
    for k in range(n_trials):
        if lineno >= len(lines):
            raise TrialFileError(f"line {lineno + 1}: expected trial {k + 1} header")
        lineno += 1
        try:
            lab_s, samp_s = _header_fields(lines[lineno - 1], ("label", "samples"), lineno)
            label, n_samples = int(lab_s), int(samp_s)
        except ValueError as exc:
            raise TrialFileError(f"line {lineno}: bad trial header ({exc})") from None
        rows = []
        for _ in range(n_channels):
            if lineno >= len(lines):
                raise TrialFileError(f"line {lineno + 1}: missing channel row")
            lineno += 1
            fields = lines[lineno - 1].split()
            if len(fields) != n_samples:
                raise TrialFileError(
                    f"line {lineno}: expected {n_samples} samples, got {len(fields)}"
                )
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                raise TrialFileError(f"line {lineno}: non-numeric sample") from None
        trials.append(Trial(data=np.array(rows), fs=fs, label=label))
    if lineno != len(lines):
        raise TrialFileError(f"line {lineno + 1}: trailing content after last trial")
    return trials
