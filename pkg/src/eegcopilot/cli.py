"""Batch experiment driver.

Subcommands: ``train``, ``build-pool``, ``gen-synthetic``, ``evaluate``,
``sweep-d``, ``export-plotdata``. Configuration is a flat
``key = value`` text file with dotted section prefixes (``env.*``,
``td3.*``, ``eeg.*``, ``human.*``, ``eval.*``, ``sweep.*``); every key
has a default, so a missing config file just runs the defaults. Exit
codes: 0 success, 2 configuration error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import copilot, eeg, evalkit, human_agent, rl_td3
from .copilot import Scheme
from .gridworld import EnvConfig


class ConfigError(ValueError):
    pass


_KNOWN_PREFIXES = ("env.", "td3.", "eeg.", "human.", "eval.", "sweep.")
_BARE_KEYS = {"seed"}


def parse_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _BARE_KEYS and not key.startswith(_KNOWN_PREFIXES):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


class Config:
    """Typed access over the flat key/value map."""

    def __init__(self, values: dict[str, str]):
        self.values = values

    def _get(self, key: str, default, cast):
        if key not in self.values:
            return default
        raw = self.values[key]
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None

    def get_int(self, key: str, default: int) -> int:
        return self._get(key, default, int)

    def get_float(self, key: str, default: float) -> float:
        return self._get(key, default, float)

    def get_str(self, key: str, default: str) -> str:
        return self._get(key, default, str)

    def get_bool(self, key: str, default: bool) -> bool:
        def cast(raw: str) -> bool:
            lowered = raw.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(raw)

        return self._get(key, default, cast)

    def get_floats(self, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
        def cast(raw: str) -> tuple[float, ...]:
            return tuple(float(v) for v in raw.split(",") if v.strip())

        return self._get(key, default, cast)


def load_config(path: str | None) -> Config:
    return Config(parse_config_file(path) if path else {})


def env_config_from(cfg: Config, invisible: bool) -> EnvConfig:
    return EnvConfig(
        grid_size=cfg.get_int("env.grid_size", 16),
        invisible_spawn_prob=(
            cfg.get_float("env.invisible_spawn_prob", 0.01) if invisible else 0.0
        ),
        shaping_reward=cfg.get_float("env.shaping_reward", 0.5),
        fail_penalty=cfg.get_float("env.fail_penalty", 10.0),
        visible_reach_reward=cfg.get_float("env.visible_reach_reward", 6.0),
    )


def hyperparams_from(cfg: Config) -> rl_td3.Hyperparams:
    return rl_td3.Hyperparams(
        total_steps=cfg.get_int("td3.total_steps", 60_000),
        batch_size=cfg.get_int("td3.batch_size", 64),
        buffer_capacity=cfg.get_int("td3.buffer_capacity", 50_000),
        warmup_steps=cfg.get_int("td3.warmup_steps", 1_000),
        learning_rate=cfg.get_float("td3.learning_rate", 3e-4),
        gamma=cfg.get_float("td3.gamma", 0.9),
        tau=cfg.get_float("td3.tau", 0.005),
        policy_delay=cfg.get_int("td3.policy_delay", 2),
        eps_start=cfg.get_float("td3.eps_start", 1.0),
        eps_end=cfg.get_float("td3.eps_end", 0.05),
        eps_anneal_frac=cfg.get_float("td3.eps_anneal_frac", 0.5),
        episode_cap=cfg.get_int("td3.episode_cap", 40),
        actor_logit_reg=cfg.get_float("td3.actor_logit_reg", 0.01),
        blocker_fail_fraction=cfg.get_float("td3.blocker_fail_fraction", 0.5),
        blocker_threshold=cfg.get_float("td3.blocker_threshold", 0.5),
        log_interval=cfg.get_int("td3.log_interval", 1_000),
    )


def synthetic_config_from(cfg: Config) -> eeg.SyntheticEegConfig:
    return eeg.SyntheticEegConfig(
        n_channels=cfg.get_int("eeg.channels", 8),
        fs=cfg.get_float("eeg.fs", 200.0),
        n_samples=cfg.get_int("eeg.samples", 200),
        trials_per_class=cfg.get_int("eeg.trials_per_class", 40),
        noise_level=cfg.get_float("eeg.noise_level", 1.0),
    )


def write_csv(path, header: list[str], rows: list[list], timestamp: bool) -> None:
    with open(path, "w", newline="") as f:
        if timestamp:
            f.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


# ---------------------------------------------------------------------------
# evaluation core (shared by cmd_evaluate and the acceptance suite)


@dataclass(frozen=True)
class RunRow:
    env: str
    scheme: Scheme
    repetition: int
    metrics: evalkit.RunMetrics
    report: evalkit.ScoreReport


def human_decoder_factory(cfg: Config, out_dir: Path):
    """Builds the configured per-step decoder (pool replay or surrogate)."""
    source = cfg.get_str("human.source", "surrogate")
    if source == "surrogate":
        spec = human_agent.make_surrogate(
            accuracy=cfg.get_float("human.accuracy", 0.55),
            rho=cfg.get_float("human.rho", 0.3),
            kappa=cfg.get_float("human.kappa", 6.0),
        )
        return human_agent.surrogate_decoder(spec)
    if source == "pool":
        pool_file = cfg.get_str("human.pool_file", str(out_dir / "pool.txt"))
        if not Path(pool_file).exists():
            raise ConfigError(f"pool file not found: {pool_file}")
        return human_agent.pool_decoder(human_agent.load_pool(pool_file))
    raise ConfigError(f"unknown human.source {source!r}")


def run_seed(base_seed: int, env_idx: int, scheme_idx: int, repetition: int):
    return np.random.default_rng(
        np.random.SeedSequence([base_seed, env_idx, scheme_idx, repetition])
    )


def evaluate_schemes(
    agent: rl_td3.Td3Agent,
    blocker: rl_td3.Blocker,
    env_config: EnvConfig,
    schemes: list[Scheme],
    human_decoder,
    repetitions: int,
    steps: int,
    base_seed: int,
    env_label: str,
    decision_dir: Path | None = None,
) -> list[RunRow]:
    """One seeded fixed-length run per scheme per repetition."""
    env_idx = 1 if env_config.invisible_spawn_prob > 0 else 0
    rl_policy = rl_td3.greedy_policy(agent, env_config.grid_size)
    blocker_fn = rl_td3.make_blocker_fn(blocker, env_config.grid_size)
    rows: list[RunRow] = []
    for scheme in schemes:
        scheme_idx = list(Scheme).index(scheme)
        for rep in range(repetitions):
            rng = run_seed(base_seed, env_idx, scheme_idx, rep)
            decisions, events = copilot.run_scheme(
                scheme,
                steps,
                env_config,
                rng,
                rl_policy=rl_policy,
                human_decoder=human_decoder,
                blocker_fn=blocker_fn,
            )
            metrics = evalkit.collect_metrics(decisions, events)
            rows.append(
                RunRow(env_label, scheme, rep, metrics, evalkit.score_report(metrics))
            )
            if decision_dir is not None:
                copilot.write_decision_log(
                    decision_dir / f"{env_label}_{scheme.value}_rep{rep}.csv", decisions
                )
    return rows


METRIC_NAMES = (
    "visible_score",
    "invisible_score",
    "total_fail",
    "total_block",
    "pct_human_action",
    "human_workload",
)


def metric_rows(rows: list[RunRow]) -> list[list]:
    out = []
    for r in rows:
        m = r.metrics
        out.append(
            [r.env, r.scheme.value, r.repetition]
            + [_fmt(getattr(m, name)) for name in METRIC_NAMES]
        )
    return out


def score_rows(rows: list[RunRow]) -> list[list]:
    out = []
    for r in rows:
        s = r.report
        out.append(
            [
                r.env,
                r.scheme.value,
                r.repetition,
                _fmt(s.aggregated),
                _fmt(s.score_human_action),
                _fmt(s.score_human_workload),
                _fmt(s.final),
                s.merge,
            ]
        )
    return out


def pvalue_rows(rows: list[RunRow], schemes: list[Scheme]) -> list[list]:
    """Wilcoxon p for every scheme pair, per env and quantity (unit diagonal)."""
    out = []
    envs = sorted({r.env for r in rows})
    quantities = METRIC_NAMES + ("final",)
    for env in envs:
        per_scheme: dict[Scheme, dict[str, np.ndarray]] = {}
        for scheme in schemes:
            runs = sorted(
                (r for r in rows if r.env == env and r.scheme == scheme),
                key=lambda r: r.repetition,
            )
            per_scheme[scheme] = {
                name: np.array([getattr(r.metrics, name) for r in runs])
                for name in METRIC_NAMES
            }
            per_scheme[scheme]["final"] = np.array([r.report.final for r in runs])
        for q in quantities:
            for sa in schemes:
                for sb in schemes:
                    if sa == sb:
                        p = 1.0
                    else:
                        _, p = evalkit.wilcoxon_signed_rank(
                            per_scheme[sa][q], per_scheme[sb][q]
                        )
                    out.append([env, q, sa.value, sb.value, _fmt(p)])
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hp = hyperparams_from(cfg)
    env_config = env_config_from(cfg, invisible=False)  # training sees no invisible targets
    rng = np.random.default_rng(seed)
    agent, blocker, log = rl_td3.train_td3(env_config, hp, rng)
    rl_td3.save_checkpoint(
        out_dir / "checkpoint.bin", agent, blocker, extra={"seed": seed}
    )
    rows = [
        [
            log.steps[i],
            _fmt(log.critic_loss[i]),
            _fmt(log.actor_loss[i]),
            _fmt(log.blocker_loss[i]),
            log.episode_fails[i],
            _fmt(log.mean_reward[i]),
        ]
        for i in range(len(log.steps))
    ]
    write_csv(
        out_dir / "training_curve.csv",
        ["step", "critic_loss", "actor_loss", "blocker_loss", "fails", "mean_reward"],
        rows,
        timestamp=not args.no_timestamp,
    )
    print(f"checkpoint written to {out_dir / 'checkpoint.bin'}")
    return 0


def cmd_gen_synthetic(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials = eeg.gen_synthetic_eeg(synthetic_config_from(cfg), np.random.default_rng(seed))
    path = out_dir / "trials.txt"
    eeg.write_trials(path, trials)
    print(f"{len(trials)} trials written to {path}")
    return 0


def cmd_build_pool(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials_file = cfg.get_str("human.trials_file", "")
    if trials_file:
        if not Path(trials_file).exists():
            raise ConfigError(f"trials file not found: {trials_file}")
        trials = eeg.read_trials(trials_file)
    else:
        trials = eeg.gen_synthetic_eeg(
            synthetic_config_from(cfg), np.random.default_rng(seed)
        )
    records = eeg.crossval_classify(
        trials,
        shrinkage=cfg.get_float("eeg.shrinkage", 0.1),
        folds=cfg.get_int("eeg.folds", 10),
        seed=seed,
    )
    pool_path = out_dir / "pool.txt"
    human_agent.save_pool(pool_path, records)
    stats = eeg.summarize_classification(records)
    print(
        f"pool written to {pool_path}: "
        f"fc={stats['acc_fc']:.4f} bp={stats['acc_bp']:.4f} "
        f"fused={stats['acc_fused']:.4f} union={stats['acc_union']:.4f}"
    )
    return 0


def _parse_schemes(cfg: Config) -> list[Scheme]:
    raw = cfg.get_str("eval.schemes", "td3,eeg-nb,eeg-fb,co-nb,co-ppb,co-fb")
    schemes = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            schemes.append(Scheme(token))
        except ValueError:
            raise ConfigError(f"unknown scheme {token!r}") from None
    if not schemes:
        raise ConfigError("eval.schemes is empty")
    return schemes


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = cfg.get_str("eval.checkpoint", str(out_dir / "checkpoint.bin"))
    if not Path(checkpoint).exists():
        raise ConfigError(f"checkpoint not found: {checkpoint}")
    agent, blocker, _ = rl_td3.load_checkpoint(checkpoint)
    schemes = _parse_schemes(cfg)
    decoder = human_decoder_factory(cfg, out_dir)
    repetitions = cfg.get_int("eval.repetitions", 12)
    steps = cfg.get_int("eval.steps", 1000)
    env_choice = cfg.get_str("eval.environments", "both")
    if env_choice not in ("both", "invisible", "plain"):
        raise ConfigError(f"bad eval.environments {env_choice!r}")
    variants = []
    if env_choice in ("both", "invisible"):
        variants.append(("invisible", True))
    if env_choice in ("both", "plain"):
        variants.append(("plain", False))

    decision_dir = None
    if cfg.get_bool("eval.write_decisions", True):
        decision_dir = out_dir / "decisions"
        decision_dir.mkdir(exist_ok=True)

    rows: list[RunRow] = []
    for env_label, invisible in variants:
        rows.extend(
            evaluate_schemes(
                agent,
                blocker,
                env_config_from(cfg, invisible),
                schemes,
                decoder,
                repetitions,
                steps,
                seed,
                env_label,
                decision_dir,
            )
        )
    stamp = not args.no_timestamp
    write_csv(
        out_dir / "metrics.csv",
        ["env", "scheme", "repetition", *METRIC_NAMES],
        metric_rows(rows),
        stamp,
    )
    write_csv(
        out_dir / "scores.csv",
        [
            "env",
            "scheme",
            "repetition",
            "aggregated",
            "score_human_action",
            "score_human_workload",
            "final",
            "merge",
        ],
        score_rows(rows),
        stamp,
    )
    write_csv(
        out_dir / "pvalues.csv",
        ["env", "quantity", "scheme_a", "scheme_b", "p"],
        pvalue_rows(rows, schemes),
        stamp,
    )
    print(f"evaluation results written to {out_dir}")
    return 0


DEFAULT_D_GRID = tuple(round(0.1 * i, 1) for i in range(11))
DEFAULT_ACCURACIES = tuple(
    round(0.30 + i * (0.65 / 11), 4) for i in range(12)
)


def sweep_disparity(
    sources: list[tuple[str, object]],
    d_grid: tuple[float, ...],
    base_seed: int,
    n_draws: int = 20_000,
    mc_samples: int = 100_000,
    p_block: float = 0.01,
) -> tuple[list[list], list[list]]:
    """Closed-form vs sampled analytics rows plus per-d correlation rows."""
    sweep_rows: list[list] = []
    acc_pp: dict[float, list[float]] = {d: [] for d in d_grid}
    delta_acc: dict[float, list[float]] = {d: [] for d in d_grid}
    ath_r_all: dict[float, list[float]] = {d: [] for d in d_grid}
    for s_idx, (label, source) in enumerate(sources):
        est_rng = np.random.default_rng(
            np.random.SeedSequence([base_seed, 900 + s_idx])
        )
        base = copilot.estimate_model_from_data(
            source, 0.0, rng=est_rng, n_draws=n_draws, p_block=p_block
        )
        for d_idx, d in enumerate(d_grid):
            model = copilot.DisparityModel(
                d=d, w1e=base.w1e, p_block=base.p_block,
                acc_e1=base.acc_e1, acc_e2=base.acc_e2,
            )
            ath_e, ath_r = copilot.authority(model)
            acc_c = copilot.copilot_accuracy(model)
            mc_rng = np.random.default_rng(
                np.random.SeedSequence([base_seed, s_idx, d_idx])
            )
            mc_e, mc_r, mc_acc = copilot.monte_carlo_authority(model, mc_samples, mc_rng)
            sweep_rows.append(
                [
                    label,
                    _fmt(d),
                    _fmt(model.w1e),
                    _fmt(model.p_block),
                    _fmt(model.acc_e1),
                    _fmt(model.acc_e2),
                    _fmt(model.w5e),
                    _fmt(ath_e),
                    _fmt(ath_r),
                    _fmt(acc_c),
                    _fmt(mc_e),
                    _fmt(mc_r),
                    _fmt(mc_acc),
                    _fmt(abs(ath_e - mc_e)),
                    _fmt(abs(ath_r - mc_r)),
                    _fmt(abs(acc_c - mc_acc)),
                ]
            )
            acc_pp[d].append(model.acc_pp)
            delta_acc[d].append(acc_c - model.acc_pp)
            ath_r_all[d].append(ath_r)

    corr_rows: list[list] = []
    if len(sources) >= 3:
        for d in d_grid:
            x = np.array(acc_pp[d])
            row: list = [_fmt(d)]
            for ys in (np.array(delta_acc[d]), np.array(ath_r_all[d])):
                if np.ptp(x) == 0.0 or np.ptp(ys) == 0.0:
                    row.extend(["nan", "nan"])
                else:
                    r, p = evalkit.pearson_r(x, ys)
                    row.extend([_fmt(r), _fmt(p)])
            corr_rows.append(row)
    return sweep_rows, corr_rows


SWEEP_HEADER = [
    "source",
    "d",
    "w1e",
    "p_block",
    "acc_e1",
    "acc_e2",
    "w5e",
    "ath_e",
    "ath_r",
    "acc_c",
    "mc_ath_e",
    "mc_ath_r",
    "mc_acc_c",
    "gap_ath_e",
    "gap_ath_r",
    "gap_acc_c",
]


def cmd_sweep_d(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    d_grid = cfg.get_floats("sweep.d_grid", DEFAULT_D_GRID)
    source_kind = cfg.get_str("human.source", "surrogate")
    sources: list[tuple[str, object]] = []
    if source_kind == "pool":
        pool_file = cfg.get_str("human.pool_file", str(out_dir / "pool.txt"))
        if not Path(pool_file).exists():
            raise ConfigError(f"pool file not found: {pool_file}")
        sources.append(("pool", human_agent.load_pool(pool_file)))
    elif source_kind == "surrogate":
        rho = cfg.get_float("sweep.rho", cfg.get_float("human.rho", 0.3))
        kappa = cfg.get_float("sweep.kappa", cfg.get_float("human.kappa", 6.0))
        for acc in cfg.get_floats("sweep.accuracies", DEFAULT_ACCURACIES):
            sources.append(
                (f"surrogate-{acc:.4g}", human_agent.make_surrogate(acc, rho, kappa))
            )
    else:
        raise ConfigError(f"unknown human.source {source_kind!r}")

    sweep_rows, corr_rows = sweep_disparity(
        sources,
        d_grid,
        seed,
        n_draws=cfg.get_int("sweep.draws", 20_000),
        mc_samples=cfg.get_int("sweep.mc_samples", 100_000),
        p_block=cfg.get_float("sweep.p_block", 0.01),
    )
    stamp = not args.no_timestamp
    write_csv(out_dir / "sweep.csv", SWEEP_HEADER, sweep_rows, stamp)
    write_csv(
        out_dir / "sweep_correlations.csv",
        ["d", "corr_accpp_dacc", "p_accpp_dacc", "corr_accpp_athr", "p_accpp_athr"],
        corr_rows,
        stamp,
    )
    print(f"disparity sweep written to {out_dir}")
    return 0


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as f:
        rows = [row for row in csv.reader(f) if row and not row[0].startswith("#")]
    return rows[0], rows[1:]


def cmd_export_plotdata(args) -> int:
    out_dir = Path(args.out_dir)
    stamp = not args.no_timestamp
    produced = []

    metrics_path = out_dir / "metrics.csv"
    if metrics_path.exists():
        header, rows = _read_csv(metrics_path)
        idx = {name: header.index(name) for name in header}
        long_rows = [
            [row[idx["env"]], row[idx["scheme"]], name, row[idx["repetition"]], row[idx[name]]]
            for row in rows
            for name in METRIC_NAMES
        ]
        write_csv(
            out_dir / "plot_metrics_long.csv",
            ["env", "scheme", "metric", "repetition", "value"],
            long_rows,
            stamp,
        )
        produced.append("plot_metrics_long.csv")

    scores_path = out_dir / "scores.csv"
    if scores_path.exists():
        header, rows = _read_csv(scores_path)
        idx = {name: header.index(name) for name in header}
        long_rows = [
            [row[idx["env"]], row[idx["scheme"]], name, row[idx["repetition"]], row[idx[name]]]
            for row in rows
            for name in ("aggregated", "score_human_action", "score_human_workload", "final")
        ]
        write_csv(
            out_dir / "plot_scores_long.csv",
            ["env", "scheme", "metric", "repetition", "value"],
            long_rows,
            stamp,
        )
        produced.append("plot_scores_long.csv")

    sweep_path = out_dir / "sweep.csv"
    if sweep_path.exists():
        header, rows = _read_csv(sweep_path)
        idx = {name: header.index(name) for name in header}
        quantities = [name for name in SWEEP_HEADER if name not in ("source", "d")]
        long_rows = [
            [row[idx["source"]], row[idx["d"]], name, row[idx[name]]]
            for row in rows
            for name in quantities
        ]
        write_csv(
            out_dir / "plot_sweep_long.csv",
            ["source", "d", "quantity", "value"],
            long_rows,
            stamp,
        )
        produced.append("plot_sweep_long.csv")

    if not produced:
        raise ConfigError(f"no exportable CSVs found in {out_dir}")
    print(f"exported: {', '.join(produced)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegcopilot",
        description="Train, evaluate, and analyze the copilot control schemes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "train": cmd_train,
        "gen-synthetic": cmd_gen_synthetic,
        "build-pool": cmd_build_pool,
        "evaluate": cmd_evaluate,
        "sweep-d": cmd_sweep_d,
        "export-plotdata": cmd_export_plotdata,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None, help="base seed (overrides config)")
        p.add_argument("--out-dir", default="results", help="output directory")
        p.add_argument(
            "--no-timestamp",
            action="store_true",
            help="suppress the timestamp header line in CSVs",
        )
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
