"""Command-line experiment runner.

Every command writes a CSV (one row per round, or per instance/horizon for
the aggregate commands) and a plain ``key: value`` summary. Outputs are a
pure function of the configuration and seed.

Exit codes: 0 success, 2 configuration error, 3 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import io
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .adversaries import ADVERSARIES, make_adversary
from .domain import BoxDomain, CallCounter
from .games import (ExpertsEmbedding, amplify, bilinear_game, double_well_game,
                    experts_eta, experts_regret_run, make_toy_gan_game, mixture_gap,
                    selfplay_run)
from .harness import (FiniteLossDistribution, compute_regret, ftpl_learner, ftrl_learner,
                      online_to_batch, scaling_fit, stability_probe_1d, stability_probe_kd,
                      trial_seeds)
from .learners import FRESH, SINGLE, FtplConfig, FtrlConfig, default_oracle, ftpl_run, ftrl_run, \
    schedule_params
from .losses import random_piecewise_loss, random_relu_loss, relu_regression
from .oracles import BudgetError, GridOracle, ScanOracle, oracle_report

__all__ = [
    "COMMANDS",
    "CSV_COLUMNS",
    "CSV_VERSION",
    "ConfigError",
    "RunConfig",
    "parse_config",
    "execute",
    "main",
]

COMMANDS = ("run-ftpl", "run-ftrl", "stability", "scaling", "game", "batch", "experts")
GAMES = ("bilinear", "toy-gan", "double-well")
CSV_VERSION = "ncftpl-csv/1"
SUMMARY_VERSION = "ncftpl-summary/1"
CSV_COLUMNS = (
    "trial", "t", "incurred_loss", "cumulative_loss", "best_in_hindsight", "regret",
    "avg_regret", "offline_calls", "value_calls", "gap_x", "gap_y", "l1_step_gap",
    "excess_risk",
)
DEFAULT_ADVERSARY = {"run-ftrl": "relu-adaptive"}
DEFAULT_T_GRID = "64,128,256,512,1024,2048,4096"


class ConfigError(ValueError):
    """Invalid or unreadable configuration (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    dim: int = 1
    T: int = 256
    eta: str = "auto"
    delta: str = "auto"
    adversary: Optional[str] = None
    resolution: Optional[float] = None
    seed: int = 0
    trials: int = 1
    output: Optional[str] = None
    summary: Optional[str] = None
    noise_mode: str = FRESH
    regularizer: str = "l2"
    weight: Optional[float] = None
    alpha: float = 0.5
    learner: str = "ftpl"
    T_grid: str = DEFAULT_T_GRID
    draws: int = 1000
    prefix: int = 5
    game: str = "bilinear"
    target: float = 0.0
    K: int = 8
    N: int = 4

    def eta_value(self, T: Optional[int] = None, dim: Optional[int] = None) -> float:
        if self.eta == "auto":
            return schedule_params(T or self.T, dim or self.dim).eta
        return float(self.eta)

    def delta_value(self) -> float:
        if self.delta == "auto":
            return schedule_params(self.T, self.dim).delta
        return float(self.delta)

    def adversary_name(self) -> str:
        return self.adversary or DEFAULT_ADVERSARY.get(self.command, "relu-teacher")

    def resolution_value(self) -> float:
        if self.resolution is not None:
            return self.resolution
        if self.command == "stability" and self.dim == 1:
            return 1e-4
        return 1e-3 if self.dim == 1 else 1.0 / 8.0

    def horizons(self) -> list[int]:
        return [int(v) for v in self.T_grid.split(",") if v.strip()]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw) -> object:
    if raw is None:
        return None
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("int",):
            return int(raw)
        if kind in ("float",):
            return float(raw)
        if kind == "Optional[float]":
            return None if str(raw).lower() in ("", "none", "auto") else float(raw)
        if kind == "str" and key in ("eta", "delta"):
            s = str(raw).strip().lower()
            return "auto" if s == "auto" else repr(float(s))
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None
    return str(raw)


def _read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {exc}") from None
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = key.strip().replace("-", "_")
            if name not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r} in {path!r}")
            values[name] = raw
    return values


def _build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--dim", help="decision-set dimension")
    common.add_argument("--T", help="number of rounds (sample size for batch)")
    common.add_argument("--eta", help="noise rate, a positive number or 'auto'")
    common.add_argument("--delta", help="k-dim stability margin, a positive number or 'auto'")
    common.add_argument("--adversary", choices=sorted(ADVERSARIES))
    common.add_argument("--resolution", help="oracle grid step")
    common.add_argument("--seed")
    common.add_argument("--trials")
    common.add_argument("--output", help="CSV path (default: stdout)")
    common.add_argument("--summary", help="summary path (default: <output>.summary.txt or stderr)")
    common.add_argument("--noise-mode", dest="noise_mode", choices=(FRESH, SINGLE))
    common.add_argument("--regularizer", choices=("l2", "l1"))
    common.add_argument("--weight", help="FTRL regularizer weight (default T^alpha)")
    common.add_argument("--alpha", help="FTRL weight exponent")
    common.add_argument("--learner", choices=("ftpl", "ftrl"))
    common.add_argument("--T-grid", dest="T_grid", help="comma-separated horizons")
    common.add_argument("--draws", help="noise draws per stability instance")
    common.add_argument("--prefix", help="prefix length of stability instances")
    common.add_argument("--game", choices=GAMES)
    common.add_argument("--target", help="toy GAN target in [-0.5, 0.5]")
    common.add_argument("--K", help="pairs certified by confidence amplification")
    common.add_argument("--N", help="number of experts")

    parser = argparse.ArgumentParser(prog="ncftpl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = {
        "run-ftpl": "FTPL against a built-in adversary",
        "run-ftrl": "FTRL baseline against a built-in adversary",
        "stability": "monotonicity and stability probes on random instances",
        "scaling": "fit the average-regret exponent over a horizon grid",
        "game": "self-play on a zero-sum game with an equilibrium certificate",
        "batch": "online-to-batch conversion on a finite ReLU distribution",
        "experts": "FTPL on the hypercube embedding of N experts",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], argument_default=S)
    return parser


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.T < 1:
        raise ConfigError("T must be at least 1")
    if cfg.dim < 1:
        raise ConfigError("dim must be at least 1")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    for name in ("eta", "delta"):
        v = getattr(cfg, name)
        if v != "auto" and not float(v) > 0:
            raise ConfigError(f"{name} must be positive, got {v}")
    if cfg.resolution is not None and not cfg.resolution > 0:
        raise ConfigError("resolution must be positive")
    if cfg.weight is not None and cfg.weight < 0:
        raise ConfigError("weight must be nonnegative")
    if cfg.draws < 1 or cfg.prefix < 0 or cfg.K < 1 or cfg.N < 1:
        raise ConfigError("draws, K and N must be positive and prefix nonnegative")
    if not -0.5 <= cfg.target <= 0.5:
        raise ConfigError("target must lie in [-0.5, 0.5]")
    try:
        horizons = cfg.horizons()
    except ValueError:
        raise ConfigError(f"invalid T_grid {cfg.T_grid!r}") from None
    if cfg.command == "scaling" and (len(horizons) < 4 or min(horizons) < 1):
        raise ConfigError("scaling needs at least four positive horizons")
    if cfg.adversary is not None and cfg.adversary not in ADVERSARIES:
        raise ConfigError(f"unknown adversary {cfg.adversary!r}")
    if cfg.noise_mode not in (FRESH, SINGLE):
        raise ConfigError(f"unknown noise mode {cfg.noise_mode!r}")
    if cfg.game not in GAMES:
        raise ConfigError(f"unknown game {cfg.game!r}")
    return cfg


def parse_config(argv: Optional[Sequence[str]] = None,
                 config_file: Optional[str] = None) -> RunConfig:
    """Merge defaults, an optional config file and command-line flags (in that order)."""
    parser = _build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command", None)
    path = args.pop("config", None) or config_file
    values = _read_config_file(path) if path else {}
    values.update(args)
    if command is not None:
        values["command"] = command
    if not values.get("command"):
        raise ConfigError(f"no command given; choose from {', '.join(COMMANDS)}")
    converted = {k: _convert(k, v) for k, v in values.items()}
    return _validate(RunConfig(**converted))


# --- output helpers -------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.ndarray):
        return " ".join(_fmt(x) for x in v.tolist())
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


class _Csv:
    def __init__(self):
        self.buf = io.StringIO()
        self.buf.write(f"# {CSV_VERSION}\n")
        self.buf.write(",".join(CSV_COLUMNS) + "\n")

    def row(self, **cols):
        unknown = set(cols) - set(CSV_COLUMNS)
        if unknown:
            raise KeyError(f"unknown CSV columns {sorted(unknown)}")
        self.buf.write(",".join(_fmt(cols.get(c)) for c in CSV_COLUMNS) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


def _summary_text(items: list) -> str:
    lines = [f"# {SUMMARY_VERSION}"]
    lines += [f"{k}: {_fmt(v)}" for k, v in items]
    return "\n".join(lines) + "\n"


def _add_counts(total: dict, counter: CallCounter) -> None:
    for k, v in oracle_report(counter).items():
        total[k] = total.get(k, 0) + v


def _stderr(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0


def _trajectory_rows(csv: _Csv, trial: int, traj, final: dict) -> None:
    cum = np.cumsum(traj.incurred)
    steps = traj.step_gaps()
    T = traj.T
    for i in range(T):
        extra = final if i == T - 1 else {}
        csv.row(trial=trial, t=i + 1, incurred_loss=traj.incurred[i], cumulative_loss=cum[i],
                offline_calls=traj.call_log[i, 0], value_calls=traj.call_log[i, 1],
                l1_step_gap=steps[i - 1] if i > 0 else None, **extra)


# --- commands --------------------------------------------------------------


def _run_online(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    domain = BoxDomain.cube(cfg.dim)
    res = cfg.resolution_value()
    oracle = default_oracle(domain, res)
    seeds = trial_seeds(cfg.seed, 2 * cfg.trials)
    regrets = []
    for k in range(cfg.trials):
        counter = CallCounter()
        adv = make_adversary(cfg.adversary_name(), domain, seeds[2 * k])
        if cfg.command == "run-ftpl":
            conf = FtplConfig(eta=cfg.eta_value(), noise_mode=cfg.noise_mode,
                              seed=seeds[2 * k + 1], oracle_resolution=res)
            traj = ftpl_run(adv, cfg.T, conf, oracle, counter)
        else:
            weight = cfg.weight if cfg.weight is not None else float(cfg.T) ** cfg.alpha
            conf = FtrlConfig(regularizer=cfg.regularizer, weight=weight, oracle_resolution=res)
            traj = ftrl_run(adv, cfg.T, conf, oracle, counter)
        rep = compute_regret(traj, oracle=oracle, counter=counter)
        _trajectory_rows(csv, k, traj, dict(best_in_hindsight=rep.best_in_hindsight_value,
                                            regret=rep.total_regret,
                                            avg_regret=rep.average_regret))
        regrets.append(rep.average_regret)
        _add_counts(totals, counter)
    items = []
    if cfg.command == "run-ftpl":
        items.append(("eta", cfg.eta_value()))
    else:
        items.append(("ftrl_weight", cfg.weight if cfg.weight is not None
                      else float(cfg.T) ** cfg.alpha))
    items += [("mean_avg_regret", float(np.mean(regrets))),
              ("stderr_avg_regret", _stderr(regrets))]
    return items


def _run_stability(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    domain = BoxDomain.cube(cfg.dim)
    res = cfg.resolution_value()
    eta = cfg.eta_value()
    counter = CallCounter()
    viol = first_order = checks = 0
    gaps, bounds = [], []
    for k, s in enumerate(trial_seeds(cfg.seed, cfg.trials)):
        rng = np.random.default_rng(s)
        if cfg.dim == 1:
            prefix = [random_relu_loss(rng, domain) for _ in range(cfg.prefix)]
            new = random_relu_loss(rng, domain)
            rep = stability_probe_1d(prefix, new, eta, cfg.draws, ScanOracle(res), rng,
                                     domain, counter)
        else:
            prefix = [random_piecewise_loss(rng, domain) for _ in range(cfg.prefix)]
            new = random_piecewise_loss(rng, domain)
            rep = stability_probe_kd(prefix, new, eta, cfg.delta_value(), cfg.draws,
                                     GridOracle(res), rng, domain, counter)
        viol += rep.violations
        first_order += rep.first_order_violations
        checks += rep.checks
        gaps.append(rep.mean_gap)
        bounds.append(rep.bound)
        csv.row(trial=k, t=k + 1, offline_calls=counter.offline_calls,
                value_calls=counter.value_calls, l1_step_gap=rep.mean_gap)
    _add_counts(totals, counter)
    items = [("eta", eta)]
    if cfg.dim > 1:
        items.append(("delta", cfg.delta_value()))
    items += [
        ("monotonicity_checks", checks),
        ("monotonicity_violations", viol),
        ("first_order_gap_violations", first_order),
        ("mean_l1_step_gap", float(np.mean(gaps))),
        ("stderr_l1_step_gap", _stderr(gaps) if len(gaps) > 1 else 0.0),
        ("stability_bound", float(np.max(bounds))),
    ]
    return items


def _run_scaling(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    domain = BoxDomain.cube(cfg.dim)
    res = cfg.resolution_value()
    oracle = default_oracle(domain, res)
    counter = CallCounter()
    if cfg.learner == "ftpl":
        eta = None if cfg.eta == "auto" else float(cfg.eta)
        learner = ftpl_learner(eta, cfg.noise_mode, res, oracle)
    else:
        learner = ftrl_learner(cfg.alpha, cfg.regularizer, res, oracle)
    name = cfg.adversary_name()
    fit = scaling_fit(learner, lambda T, s: make_adversary(name, domain, s), cfg.horizons(),
                      cfg.trials, cfg.seed, oracle, counter)
    for T, m in zip(fit.T_grid, fit.mean_avg_regret):
        csv.row(t=T, avg_regret=m)
    _add_counts(totals, counter)
    return [
        ("learner", cfg.learner),
        ("T_grid", list(fit.T_grid)),
        ("fitted_exponent", fit.exponent),
        ("fitted_intercept", fit.intercept),
        ("mean_avg_regret_per_T", fit.mean_avg_regret),
        ("stderr_per_T", fit.stderr),
        ("floored_per_T", [bool(b) for b in fit.floored]),
        ("floor_slack_per_T", fit.slack),
    ]


def _make_game(cfg: RunConfig):
    if cfg.game == "bilinear":
        return bilinear_game()
    if cfg.game == "toy-gan":
        return make_toy_gan_game(cfg.target)
    return double_well_game()


def _run_game(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    game = _make_game(cfg)
    res = cfg.resolution_value()
    ox, oy = default_oracle(game.domain_x, res), default_oracle(game.domain_y, res)
    eta_x = cfg.eta_value(dim=game.domain_x.dim)
    eta_y = cfg.eta_value(dim=game.domain_y.dim)
    gaps, mixes = [], []
    for k, s in enumerate(trial_seeds(cfg.seed, cfg.trials)):
        counter = CallCounter()
        sx, sy, sj = trial_seeds(s, 3)
        traj = selfplay_run(game, cfg.T, FtplConfig(eta_x, cfg.noise_mode, sx, res),
                            FtplConfig(eta_y, cfg.noise_mode, sy, res), ox, oy, counter)
        cert = amplify(traj, cfg.K, np.random.default_rng(sj), ox, oy, counter)
        mix = mixture_gap(traj, ox, oy, CallCounter())
        best_x = float(np.mean(traj.payoffs)) * traj.T - mix.gap_x * traj.T
        regret = mix.gap_x * traj.T
        cum = np.cumsum(traj.payoffs)
        for i in range(traj.T):
            calls = dict(offline_calls=traj.call_log[i, 0], value_calls=traj.call_log[i, 1])
            if i == traj.T - 1:
                # the last row also counts the 2K certification calls
                calls = dict(best_in_hindsight=best_x, regret=regret, avg_regret=mix.gap_x,
                             gap_x=cert.gap_x, gap_y=cert.gap_y,
                             offline_calls=counter.offline_calls, value_calls=counter.value_calls)
            csv.row(trial=k, t=i + 1, incurred_loss=traj.payoffs[i], cumulative_loss=cum[i],
                    **calls)
        gaps.append((cert.gap_x, cert.gap_y, cert.slack))
        mixes.append((mix.gap_x, mix.gap_y))
        _add_counts(totals, counter)
    g = np.array(gaps)
    m = np.array(mixes)
    return [
        ("game", game.label),
        ("eta_x", eta_x),
        ("eta_y", eta_y),
        ("K", cfg.K),
        ("gap_x", float(g[:, 0].mean())),
        ("gap_y", float(g[:, 1].mean())),
        ("gap_total", float((g[:, 0] + g[:, 1]).mean())),
        ("certificate_slack", float(g[:, 2].mean())),
        ("mixture_gap_x", float(m[:, 0].mean())),
        ("mixture_gap_y", float(m[:, 1].mean())),
    ]


def _relu_distribution(domain: BoxDomain, rng: np.random.Generator, atoms: int = 8):
    xs = rng.uniform(-1.0, 1.0, size=(atoms, domain.dim))
    ys = rng.uniform(0.0, 1.0, size=atoms)
    probs = rng.dirichlet(np.ones(atoms))
    return FiniteLossDistribution([relu_regression(x, y, domain) for x, y in zip(xs, ys)],
                                  probs, domain)


def _run_batch(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    domain = BoxDomain.cube(cfg.dim)
    res = cfg.resolution_value()
    oracle = default_oracle(domain, res)
    dist = _relu_distribution(domain, np.random.default_rng(cfg.seed))
    best = dist.minimize(oracle)
    best_risk = best.objective
    learner = ftpl_learner(None if cfg.eta == "auto" else float(cfg.eta), cfg.noise_mode,
                           res, oracle)
    excess, regrets = [], []
    for k, s in enumerate(trial_seeds(cfg.seed, cfg.trials)):
        counter = CallCounter()
        rng = np.random.default_rng(s)
        sample = dist.sample(rng, cfg.T)
        result = online_to_batch(sample, learner, rng, dist.sample(rng, 100), domain, counter)
        rep = compute_regret(result.trajectory, oracle=oracle, counter=counter)
        ex = dist.risk(result.w_hat) - best_risk
        excess.append(ex)
        regrets.append(rep.average_regret)
        csv.row(trial=k, t=cfg.T, incurred_loss=result.risk_estimate,
                cumulative_loss=result.trajectory.cumulative_loss,
                best_in_hindsight=rep.best_in_hindsight_value, regret=rep.total_regret,
                avg_regret=rep.average_regret, offline_calls=counter.offline_calls,
                value_calls=counter.value_calls, excess_risk=ex)
        _add_counts(totals, counter)
    return [
        ("eta", cfg.eta_value()),
        ("population_min_risk", best_risk),
        ("population_minimizer", best.w_hat),
        ("mean_excess_risk", float(np.mean(excess))),
        ("stderr_excess_risk", _stderr(excess)),
        ("mean_avg_regret", float(np.mean(regrets))),
        ("stderr_avg_regret", _stderr(regrets)),
    ]


def _run_experts(cfg: RunConfig, csv: _Csv, totals: dict) -> list:
    emb = ExpertsEmbedding(cfg.N)
    eta = experts_eta(cfg.T) if cfg.eta == "auto" else float(cfg.eta)
    regrets, baselines = [], []
    for k, s in enumerate(trial_seeds(cfg.seed, cfg.trials)):
        counter = CallCounter()
        rng = np.random.default_rng(s)
        means = rng.uniform(0.2, 0.8, size=cfg.N)
        L = (rng.random((cfg.T, cfg.N)) < means).astype(float)
        conf = FtplConfig(eta=eta, noise_mode=cfg.noise_mode, seed=int(rng.integers(2**62)))
        rep, traj = experts_regret_run(cfg.N, cfg.T, L, conf, counter=counter)
        uniform = (L.mean(axis=1).sum() - rep.best_in_hindsight_value) / cfg.T
        _trajectory_rows(csv, k, traj, dict(best_in_hindsight=rep.best_in_hindsight_value,
                                            regret=rep.total_regret,
                                            avg_regret=rep.average_regret))
        regrets.append(rep.average_regret)
        baselines.append(uniform)
        _add_counts(totals, counter)
    return [
        ("N", cfg.N),
        ("cube_dim", emb.d),
        ("eta", eta),
        ("mean_avg_regret", float(np.mean(regrets))),
        ("uniform_play_avg_regret", float(np.mean(baselines))),
    ]


_RUNNERS = {
    "run-ftpl": _run_online,
    "run-ftrl": _run_online,
    "stability": _run_stability,
    "scaling": _run_scaling,
    "game": _run_game,
    "batch": _run_batch,
    "experts": _run_experts,
}


def _parameter_items(cfg: RunConfig) -> list:
    items = [("command", cfg.command)]
    for k, v in asdict(cfg).items():
        if k in ("command", "output", "summary"):
            continue
        items.append((f"param.{k}", v))
    items += [("param.adversary_resolved", cfg.adversary_name()),
              ("param.resolution_resolved", cfg.resolution_value())]
    return items


def execute(cfg: RunConfig) -> tuple[str, str]:
    """Run ``cfg`` and return ``(csv_text, summary_text)``."""
    csv = _Csv()
    totals: dict = {}
    headline = _RUNNERS[cfg.command](cfg, csv, totals)
    items = _parameter_items(cfg)
    items.append(("seed", cfg.seed))
    for key in ("sample_count", "value_calls", "offline_calls", "oracle_complexity"):
        items.append((key, totals.get(key, 0)))
    items += headline
    return csv.text(), _summary_text(items)


def _write(path: Optional[str], text: str, stream) -> None:
    if path is None:
        stream.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"ncftpl: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        csv_text, summary = execute(cfg)
    except BudgetError as exc:
        print(f"ncftpl: oracle budget exceeded: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"ncftpl: invalid configuration: {exc}", file=sys.stderr)
        return 2
    _write(cfg.output, csv_text, sys.stdout)
    summary_path = cfg.summary or (cfg.output + ".summary.txt" if cfg.output else None)
    _write(summary_path, summary, sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
