"""Command-line front end.

Subcommands:

* ``run``: execute one experiment from a config, write CSV results.
* ``sweep``: repeat an experiment while varying one config key over a
  list of values, one CSV pair per value.
* ``plot``: render one or more summary CSVs as a self-contained SVG
  regret chart (mean line plus a one-standard-deviation band).
* ``oracle``: print the exhaustive optimum and the per-assignment gap
  table of an environment (joint spaces up to 2**20).

Config files are line-oriented ``key = value`` text; ``#`` starts a
comment. Unknown keys, missing required keys and type errors are fatal
and name the offending key and location. The same assignments can be
given inline with ``--set key=value``, which also overrides file values.

Keys:

    env        bernoulli_chain | poisson_chain | gem_mining |
               lower_bound | table
    policy     eps_mats | ucb_baseline | random
    T          horizon, integer >= 1
    trials     number of trials, integer >= 1
    seed       base seed; trial i uses seed + i
    log_every  checkpoint stride (default T // 100, at least 1)
    out        output path prefix (default: config file stem)

    m, d                 chain environments (d in {2, 3})
    villages, env_seed   gem_mining
    rho, L, X, delta     lower_bound (L defaults to the built-in decoy
                         sizing, X to 3.5, delta to 0.5)
    table_file           table environment definition file

    epsilon    eps_mats exploration probability, in (0, 1]
    c          eps_mats posterior-variance scale: a positive number or
               the literal ln_T, resolved to ln(T) at load time (default)
    ucb_range  ucb_baseline bonus scale, > 0

CSV schemas (floats always carry six fractional digits):

    <out>.trials.csv    trial,t,cum_regret
    <out>.summary.csv   t,mean_cum_regret,std_cum_regret,mean_wall_ns,
                        mean_gauss_draws

Results are byte-reproducible for a fixed config and seed; measured
wall time is therefore written as 0 unless --record-timing is given
(real timings always go to stderr).
"""

from __future__ import annotations

import argparse
import math
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .elimination import joint_totals
from .environments import (
    Environment,
    chain_env,
    decoys_per_group,
    gem_mining_env,
    load_table_env,
    lower_bound_env,
)
from .harness import ExperimentSpec, ExperimentSummary, RegretTrace, run_experiment
from .hypergraph import enumerate_joint
from .policies import POLICY_KINDS, PolicyConfig


class ConfigError(ValueError):
    pass


ENV_KINDS = ("bernoulli_chain", "poisson_chain", "gem_mining", "lower_bound", "table")

_COMMON_KEYS = {"env", "policy", "T", "trials", "seed", "log_every", "out"}
_ENV_KEYS = {
    "bernoulli_chain": {"m", "d"},
    "poisson_chain": {"m", "d"},
    "gem_mining": {"villages", "env_seed"},
    "lower_bound": {"rho", "L", "X", "delta"},
    "table": {"table_file"},
}
_POLICY_KEYS = {
    "eps_mats": {"epsilon", "c"},
    "ucb_baseline": {"ucb_range"},
    "random": set(),
}
_INT_KEYS = {"T", "trials", "seed", "log_every", "m", "d", "villages",
             "env_seed", "rho", "L"}
_FLOAT_KEYS = {"epsilon", "X", "delta", "ucb_range"}


@dataclass
class RunConfig:
    env_kind: str
    env_params: dict
    horizon: int
    trials: int
    base_seed: int
    log_every: int
    out_prefix: str
    policy_kind: Optional[str] = None
    policy_params: dict = field(default_factory=dict)
    c_raw: Optional[str] = None

    def build_env(self) -> Environment:
        kind = self.env_kind
        p = self.env_params
        if kind == "bernoulli_chain":
            return chain_env(p["m"], p["d"], "bernoulli")
        if kind == "poisson_chain":
            return chain_env(p["m"], p["d"], "poisson")
        if kind == "gem_mining":
            return gem_mining_env(p["villages"], random.Random(p["env_seed"]))
        if kind == "lower_bound":
            return lower_bound_env(p["rho"], p["L"], p["X"], p["delta"])
        return load_table_env(p["table_file"])

    def build_policy(self) -> PolicyConfig:
        if self.policy_kind is None:
            raise ConfigError("no policy configured")
        return PolicyConfig(self.policy_kind, **self.policy_params)

    def label(self) -> str:
        if self.policy_kind == "eps_mats":
            return f"eps_mats epsilon={self.policy_params['epsilon']:g}"
        return self.policy_kind or self.env_kind


def _parse_value(key: str, raw: str, where: str):
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"invalid value for '{key}' ({where}): expected integer, "
                f"got {raw!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(
                f"invalid value for '{key}' ({where}): expected number, "
                f"got {raw!r}") from None
    return raw


def _read_config_file(path: str) -> dict:
    entries = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, value = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise ConfigError(f"line {lineno}: expected 'key = value'")
                key, value = parts
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            if key in entries:
                raise ConfigError(f"duplicate key '{key}' (line {lineno})")
            entries[key] = (value, f"line {lineno}")
    return entries


def parse_config(path: Optional[str] = None,
                 assignments: Sequence[str] = (),
                 need_policy: bool = True) -> RunConfig:
    """Load and fully validate a run configuration from a file, inline
    key=value assignments, or both (assignments win)."""
    entries = _read_config_file(path) if path else {}
    for item in assignments:
        key, sep, value = item.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"bad --set argument {item!r}: expected key=value")
        entries[key] = (value, f"flag --set {item!r}")

    def take(key):
        return entries.pop(key, None)

    got = take("env")
    if got is None:
        raise ConfigError("missing required key 'env'")
    env_kind, where = got
    if env_kind not in ENV_KINDS:
        raise ConfigError(
            f"unknown environment '{env_kind}' ({where}); choose from "
            f"{', '.join(ENV_KINDS)}")

    policy_kind = None
    got = take("policy")
    if got is not None:
        policy_kind, where = got
        if policy_kind not in POLICY_KINDS:
            raise ConfigError(
                f"unknown policy '{policy_kind}' ({where}); choose from "
                f"{', '.join(POLICY_KINDS)}")
    elif need_policy:
        raise ConfigError("missing required key 'policy'")

    allowed = set(_COMMON_KEYS) | _ENV_KEYS[env_kind]
    if policy_kind is not None:
        allowed |= _POLICY_KEYS[policy_kind]
    for key, (_value, where) in entries.items():
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' ({where})")

    values = {}
    wheres = {}
    for key, (value, where) in entries.items():
        values[key] = _parse_value(key, value, where)
        wheres[key] = where

    def require(key):
        if key not in values:
            raise ConfigError(f"missing required key '{key}'")
        return values[key]

    horizon = require("T")
    if horizon < 1:
        raise ConfigError(f"'T' must be >= 1 ({wheres['T']})")
    trials = require("trials")
    if trials < 1:
        raise ConfigError(f"'trials' must be >= 1 ({wheres['trials']})")
    base_seed = require("seed")
    log_every = values.get("log_every", max(1, horizon // 100))
    if log_every < 1:
        raise ConfigError(f"'log_every' must be >= 1 ({wheres['log_every']})")
    if "out" in values:
        out_prefix = values["out"]
    elif path:
        out_prefix = os.path.splitext(os.path.basename(path))[0]
    else:
        out_prefix = "experiment"

    env_params = {}
    if env_kind in ("bernoulli_chain", "poisson_chain"):
        env_params["m"] = require("m")
        env_params["d"] = require("d")
        if env_params["d"] not in (2, 3):
            raise ConfigError(f"'d' must be 2 or 3 ({wheres['d']})")
        if env_params["m"] < env_params["d"]:
            raise ConfigError(f"'m' must be at least d ({wheres['m']})")
    elif env_kind == "gem_mining":
        env_params["villages"] = require("villages")
        env_params["env_seed"] = require("env_seed")
        if env_params["villages"] < 2:
            raise ConfigError(f"'villages' must be >= 2 ({wheres['villages']})")
    elif env_kind == "lower_bound":
        env_params["rho"] = require("rho")
        if env_params["rho"] < 1:
            raise ConfigError(f"'rho' must be >= 1 ({wheres['rho']})")
        env_params["L"] = values.get("L", decoys_per_group(env_params["rho"]))
        env_params["X"] = values.get("X", 3.5)
        env_params["delta"] = values.get("delta", 0.5)
        if env_params["L"] < 0:
            raise ConfigError(f"'L' must be >= 0 ({wheres['L']})")
        if not env_params["X"] > 3:
            raise ConfigError(f"'X' must exceed 3 ({wheres['X']})")
        if not env_params["delta"] > 0:
            raise ConfigError(f"'delta' must be positive ({wheres['delta']})")
    else:
        env_params["table_file"] = require("table_file")

    policy_params = {}
    c_raw = None
    if policy_kind == "eps_mats":
        epsilon = require("epsilon")
        if not 0.0 < epsilon <= 1.0:
            raise ConfigError(
                f"'epsilon' must lie in (0, 1] ({wheres['epsilon']})")
        c_raw = values.get("c", "ln_T")
        if c_raw == "ln_T":
            c_value = math.log(horizon)
        else:
            try:
                c_value = float(c_raw)
            except ValueError:
                raise ConfigError(
                    f"invalid value for 'c' ({wheres['c']}): expected a "
                    f"positive number or ln_T, got {c_raw!r}") from None
            if not c_value > 0:
                raise ConfigError(f"'c' must be positive ({wheres['c']})")
        policy_params = {"epsilon": epsilon, "c": c_value}
    elif policy_kind == "ucb_baseline":
        ucb_range = require("ucb_range")
        if not ucb_range > 0:
            raise ConfigError(f"'ucb_range' must be positive ({wheres['ucb_range']})")
        policy_params = {"ucb_range": ucb_range}

    return RunConfig(env_kind=env_kind, env_params=env_params,
                     horizon=horizon, trials=trials, base_seed=base_seed,
                     log_every=log_every, out_prefix=out_prefix,
                     policy_kind=policy_kind, policy_params=policy_params,
                     c_raw=str(c_raw) if c_raw is not None else None)


# ---------------------------------------------------------------------
# CSV emission and parsing
# ---------------------------------------------------------------------

TRIALS_HEADER = "trial,t,cum_regret"
SUMMARY_HEADER = "t,mean_cum_regret,std_cum_regret,mean_wall_ns,mean_gauss_draws"


def emit_csv(traces: Sequence[RegretTrace], summary: ExperimentSummary,
             prefix: str, record_timing: bool = False) -> tuple[str, str]:
    """Write <prefix>.trials.csv and <prefix>.summary.csv.

    Floats carry exactly six fractional digits and lines end with a bare
    newline, so identical experiments produce byte-identical files. Wall
    time is nondeterministic and is written as 0 unless record_timing is
    set.
    """
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    trials_path = f"{prefix}.trials.csv"
    summary_path = f"{prefix}.summary.csv"

    lines = [TRIALS_HEADER]
    for i, trace in enumerate(traces):
        for t, r in trace.checkpoints:
            lines.append(f"{i},{t},{r:.6f}")
    with open(trials_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    wall = summary.mean_wall_ns if record_timing else 0.0
    lines = [SUMMARY_HEADER]
    for t, mean, std in zip(summary.ts, summary.mean_cum_regret,
                            summary.std_cum_regret):
        lines.append(f"{t},{mean:.6f},{std:.6f},{wall:.6f},"
                     f"{summary.mean_gaussian_draws:.6f}")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return trials_path, summary_path


def read_summary_csv(path: str) -> ExperimentSummary:
    """Parse a summary CSV back into an ExperimentSummary (num_trials is
    not stored in the file and is reported as 0)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != SUMMARY_HEADER:
        raise ConfigError(f"{path}: not a summary CSV (bad header)")
    ts, means, stds = [], [], []
    wall = draws = 0.0
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 5:
            raise ConfigError(f"{path}: malformed row {ln!r}")
        ts.append(int(parts[0]))
        means.append(float(parts[1]))
        stds.append(float(parts[2]))
        wall = float(parts[3])
        draws = float(parts[4])
    return ExperimentSummary(ts=tuple(ts), mean_cum_regret=tuple(means),
                             std_cum_regret=tuple(stds), mean_wall_ns=wall,
                             mean_gaussian_draws=draws, num_trials=0)


# ---------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#e377c2")


def render_svg(series: Sequence[tuple[str, Sequence[int], Sequence[float],
                                      Sequence[float]]], path: str) -> str:
    """Render (label, ts, means, stds) series as a regret chart: one
    polyline per series plus a translucent band of one standard deviation
    around it. Returns the output path."""
    if not series:
        raise ConfigError("no summaries to plot")
    width, height = 880, 560
    left, right, top, bottom = 70, 200, 30, 50
    plot_w = width - left - right
    plot_h = height - top - bottom
    x_max = max(max(ts) for _, ts, _, _ in series)
    y_max = max(max(m + s for m, s in zip(means, stds))
                for _, _, means, stds in series)
    x_max = max(x_max, 1)
    y_max = max(y_max * 1.05, 1e-9)

    def px(t):
        return left + plot_w * (t / x_max)

    def py(v):
        return top + plot_h * (1.0 - v / y_max)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" '
        f'stroke="black"/>',
    ]
    for i in range(6):
        t = x_max * i / 5
        x = px(t)
        parts.append(f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" '
                     f'y2="{top + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{top + plot_h + 20}" '
                     f'font-size="12" text-anchor="middle">{t:g}</text>')
        v = y_max * i / 5
        y = py(v)
        parts.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" '
                     f'y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{v:.6g}</text>')
    parts.append(f'<text x="{left + plot_w / 2}" y="{height - 10}" '
                 f'font-size="13" text-anchor="middle">round t</text>')
    parts.append(f'<text x="18" y="{top + plot_h / 2}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 18 '
                 f'{top + plot_h / 2})">mean cumulative regret</text>')

    for i, (label, ts, means, stds) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        upper = [(px(t), py(m + s)) for t, m, s in zip(ts, means, stds)]
        lower = [(px(t), py(max(m - s, 0.0))) for t, m, s in zip(ts, means, stds)]
        band = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower[::-1])
        parts.append(f'<polygon points="{band}" fill="{color}" '
                     f'fill-opacity="0.18" stroke="none"/>')
        line = " ".join(f"{px(t):.2f},{py(m):.2f}" for t, m in zip(ts, means))
        parts.append(f'<polyline points="{line}" fill="none" '
                     f'stroke="{color}" stroke-width="1.8"/>')
        ly = top + 14 + 20 * i
        lx = left + plot_w + 18
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.8"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="12">'
                     f'{escape(label)}</text>')
    parts.append("</svg>")

    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


# ---------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------

def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("'--trials' must be >= 1")
        cfg.trials = args.trials
    if args.out is not None:
        cfg.out_prefix = args.out
    return cfg


def _run_one(cfg: RunConfig, record_timing: bool):
    env = cfg.build_env()
    spec = ExperimentSpec(env, cfg.build_policy(), cfg.horizon, cfg.trials,
                          cfg.base_seed, cfg.log_every)
    result = run_experiment(spec)
    trials_path, summary_path = emit_csv(result.traces, result.summary,
                                         cfg.out_prefix, record_timing)
    print(f"wrote {trials_path}")
    print(f"wrote {summary_path}")
    print(f"final mean cumulative regret: "
          f"{result.summary.mean_cum_regret[-1]:.6f}")
    print(f"mean trial wall time: {result.summary.mean_wall_ns / 1e9:.3f} s",
          file=sys.stderr)
    return result


def _cmd_run(args) -> int:
    cfg = _apply_overrides(parse_config(args.config, args.set), args)
    _run_one(cfg, args.record_timing)
    return 0


def _cmd_sweep(args) -> int:
    base_out = None
    for value in args.values.split(","):
        value = value.strip()
        if not value:
            raise ConfigError("empty value in --values")
        assignments = list(args.set) + [f"{args.param}={value}"]
        cfg = _apply_overrides(parse_config(args.config, assignments), args)
        if base_out is None:
            base_out = cfg.out_prefix
        cfg.out_prefix = f"{base_out}.{args.param}_{value}"
        print(f"[sweep] {args.param}={value}")
        _run_one(cfg, args.record_timing)
    return 0


def _cmd_plot(args) -> int:
    labels = None
    if args.labels:
        labels = [s.strip() for s in args.labels.split(",")]
        if len(labels) != len(args.summaries):
            raise ConfigError(
                f"{len(labels)} labels for {len(args.summaries)} summaries")
    series = []
    for i, path in enumerate(args.summaries):
        summary = read_summary_csv(path)
        label = labels[i] if labels else os.path.basename(path).removesuffix(
            ".summary.csv")
        series.append((label, summary.ts, summary.mean_cum_regret,
                       summary.std_cum_regret))
    out = render_svg(series, args.out)
    print(f"wrote {out}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = parse_config(args.config, args.set, need_policy=False)
    env = cfg.build_env()
    graph = env.graph
    totals = joint_totals(graph, list(env.means), cap=args.max_joint)
    gaps = float(totals.max()) - totals
    suboptimal = gaps[gaps > 0]
    print(f"environment: {env.name}")
    print(f"joint_arms: {graph.num_joint_arms}")
    print(f"local_arms: {graph.num_local_arms}")
    print(f"optimal_arm: {' '.join(map(str, env.optimal_assignment))}")
    print(f"mu_star: {env.optimal_value:.6f}")
    if suboptimal.size:
        print(f"delta_min: {float(suboptimal.min()):.6f}")
    else:
        print("delta_min: none (all assignments optimal)")
    print(f"delta_max: {float(gaps.max()):.6f}")
    print("arm,delta")
    for j, arms in enumerate(enumerate_joint(graph)):
        print(f"{' '.join(map(str, arms))},{gaps[j]:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mamab",
        description="Multi-agent bandit experiments on coordination hypergraphs")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policy=True):
        p.add_argument("config", nargs="?", default=None,
                       help="config file (may be omitted if --set covers "
                            "all required keys)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="inline config assignment, overrides the file")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--trials", type=int, default=None, help="override trials")
        p.add_argument("--out", default=None, help="override output prefix")
        if policy:
            p.add_argument("--record-timing", action="store_true",
                           help="write measured wall time into the summary CSV "
                                "(breaks byte-reproducibility across runs)")

    p_run = sub.add_parser("run", help="run one experiment")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="vary one config key over a list")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True, help="config key to vary")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list of values")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_plot = sub.add_parser("plot", help="render summary CSVs as an SVG chart")
    p_plot.add_argument("summaries", nargs="+", help="summary CSV files")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.add_argument("--labels", default=None,
                        help="comma-separated legend labels (default: file stems)")
    p_plot.set_defaults(func=_cmd_plot)

    p_oracle = sub.add_parser(
        "oracle", help="print the exhaustive optimum and gap table")
    common(p_oracle, policy=False)
    p_oracle.add_argument("--max-joint", type=int, default=1 << 20,
                          help="refuse joint spaces larger than this")
    p_oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # stdout consumer went away (e.g. piped into head); exit quietly
        try:
            sys.stdout.close()
        except OSError:
            pass
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
