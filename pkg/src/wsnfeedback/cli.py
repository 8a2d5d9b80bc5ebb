"""Command-line entry point.

Every run resolves a flat ``key = value`` configuration (defaults, then the
``--config`` file, then command-line overrides), validates it, and writes CSV
to ``--out`` or stdout. Tables and PMFs carry the resolved configuration as
``#`` comment lines.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelConfig, binomial_approx_pmf, brute_force_pmf, exact_success_pmf
from .estimator import variance_trajectory
from .policies.closed_form import (
    CostModel,
    OverheadModel,
    amp_stationary_metrics,
    max_snr_coordinated,
    max_snr_decentralized,
    na_closed_form,
    overhead_costs,
)
from .policies.dp import DpGrid, PolicyTable, coord_dp_solve, dec_dp_solve
from .policies.optimal_sequence import optimal_snr_sequence
from .process import PRESETS, load_chain
from .simulator.engine import SCENARIOS, CoordPolicy, DecPolicy, SimConfig, run_episode
from .simulator.mod17 import Mod17Config, mod17_tune, run_mod17
from .simulator.sweep import sweep_tradeoff
from .simulator.two_state import run_amp, run_na

SCHEMES = ("coord-dp", "dec-dp", "coord-snr", "dec-snr", "scdp", "sddp", "mod17", "na", "amp", "idle")


class ConfigError(ValueError):
    pass


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _range_spec(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("expected lo:hi:count")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < lo <= hi) or n < 1:
        raise ValueError("need 0 < lo <= hi and count >= 1")
    return text


# key -> (parser, default, validator, description)
KEYS = {
    "n_sensors": (int, 100, _positive, "number of sensors N_S"),
    "n_channels": (int, 5, _positive, "number of channels B"),
    "alpha": (float, 0.96, lambda a: 0 <= a < 1, "time correlation, 0 <= alpha < 1"),
    "s_ambient": (float, 20.0, _positive, "ambient SNR S_A"),
    "phi": (float, 0.25, _nonneg, "unit sensing cost"),
    "c_tx": (float, 1.0, _positive, "transmission cost"),
    "slots": (int, 100_000, _positive, "simulated slots"),
    "seed": (int, 0, _nonneg, "root seed"),
    "scenario": (str, "best-gamma", lambda s: s in SCENARIOS, f"one of {SCENARIOS}"),
    "chain": (str, "paper-v", lambda s: s in PRESETS or Path(s).exists(), "preset name or chain file"),
    "scheme": (str, "dec-dp", lambda s: s in SCHEMES, f"one of {SCHEMES}"),
    "lagrange": (float, None, _nonneg, "Lagrange multiplier"),
    "budget": (float, None, _positive, "network cost budget per slot"),
    "lambdas": (_range_spec, None, None, "multiplier sweep lo:hi:count (geometric)"),
    "budgets": (_range_spec, None, None, "budget sweep lo:hi:count (geometric)"),
    "zeta": (float, None, lambda z: 0 <= z, "normalized load per channel"),
    "q": (float, None, lambda q: 0 <= q <= 1, "activation probability"),
    "iterations": (int, 100, _positive, "DP iterations"),
    "n_v": (int, 2001, lambda n: n >= 3, "prior-variance grid points"),
    "n_zeta": (int, 201, lambda n: n >= 2, "activation grid points (dec-dp)"),
    "n_sm": (int, 200, lambda n: n >= 2, "measurement-SNR grid points (dec-dp)"),
    "outage_threshold": (float, 0.1, lambda v: 0 < v < 1, "outage variance threshold"),
    "table": (str, None, lambda s: Path(s).exists(), "policy table CSV"),
    "lambda_bar": (float, None, _positive, "mean aggregate SNR for oracle-seq"),
    "horizon": (int, 100, _nonneg, "horizon T for oracle-seq"),
    "c_gamma": (float, 1.0, _nonneg, "accuracy report cost"),
    "c_v": (float, 1.0, _nonneg, "quality broadcast cost"),
    "c_sc": (float, 1.0, _nonneg, "schedule message cost"),
    "avg_t_active": (float, None, _nonneg, "mean scheduled sensors per slot"),
    "mod17_slots": (int, 3000, _positive, "slots per censoring-baseline run"),
    "brute": (lambda s: s.lower() in ("1", "true", "yes"), False, None, "add brute-force PMF column"),
    "trajectory": (str, None, None, "path for a per-slot trajectory CSV"),
}

ALIASES = {"ns": "n_sensors", "b": "n_channels", "T": "slots"}


@dataclass
class RunManifest:
    subcommand: str
    config: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0

    @property
    def cost(self) -> CostModel:
        return CostModel(self.config["c_tx"], self.config["phi"])


def _coerce(key: str, raw):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    parser, _, check, desc = KEYS[key]
    try:
        val = parser(raw) if isinstance(raw, str) else raw
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
    if check is not None and val is not None and not check(val):
        raise ConfigError(f"{key}: invalid value {raw!r} ({desc})")
    return val


def parse_config(text: str, subcommand: str = "", overrides: dict | None = None) -> RunManifest:
    """Parse ``key = value`` lines (``#`` comments) over the defaults and validate."""
    cfg = {k: spec[1] for k, spec in KEYS.items()}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = ALIASES.get(key, key)
        cfg[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        key = ALIASES.get(key, key)
        cfg[key] = _coerce(key, raw)
    if cfg["n_channels"] > cfg["n_sensors"]:
        raise ConfigError("n_channels: must not exceed n_sensors")
    if cfg["lagrange"] is not None and cfg["budget"] is not None and subcommand in ("simulate",):
        raise ConfigError("lagrange/budget: set only one")
    return RunManifest(subcommand, cfg, seed=cfg["seed"])


def _geom(spec: str) -> np.ndarray:
    lo, hi, n = spec.split(":")
    return np.geomspace(float(lo), float(hi), int(n))


def _header(m: RunManifest) -> str:
    return "".join(f"# {k} = {v}\n" for k, v in m.config.items() if v is not None)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _require(m: RunManifest, *keys):
    for k in keys:
        if m.config.get(k) is None:
            raise ConfigError(f"{k}: required for '{m.subcommand}'")


def _sim_config(m: RunManifest) -> SimConfig:
    c = m.config
    chain = load_chain(c["chain"]) if c["scenario"] != "best-gamma" else None
    return SimConfig(c["n_sensors"], c["n_channels"], c["alpha"], c["s_ambient"], m.cost, c["scenario"], chain,
                     c["slots"], m.seed, c["outage_threshold"])


def _grid(m: RunManifest) -> DpGrid:
    c = m.config
    return DpGrid(n_v=c["n_v"], n_zeta=c["n_zeta"], n_sm=c["n_sm"])


def cmd_pmf(m: RunManifest) -> str:
    c = m.config
    N, B = c["n_sensors"], c["n_channels"]
    if c["q"] is None and c["zeta"] is None:
        raise ConfigError("q: set q or zeta for 'pmf'")
    q = c["q"] if c["q"] is not None else c["zeta"] * B / N
    if q > 1:
        raise ConfigError("zeta: implies an activation probability above 1")
    ch = ChannelConfig(N, B)
    exact = exact_success_pmf(q, ch)
    binom = binomial_approx_pmf(q * N / B, B)
    cols = ["r", "p_exact", "p_binomial"]
    data = [list(range(B + 1)), exact.probs, binom.probs]
    if c["brute"]:
        cols.append("p_bruteforce")
        data.append(brute_force_pmf(q, ch).probs)
    rows = [[int(r), *(float(d[i]) for d in data[1:])] for i, r in enumerate(data[0])]
    return _header(m) + _csv(rows, cols)


def _solve(m: RunManifest, scheme: str) -> PolicyTable:
    c = m.config
    _require(m, "lagrange")
    solver = coord_dp_solve if scheme.startswith("coord") else dec_dp_solve
    return solver(c["alpha"], c["s_ambient"], m.cost, c["n_channels"], c["lagrange"], c["iterations"], _grid(m))


def cmd_dp(m: RunManifest) -> str:
    scheme = m.config["scheme"]
    if scheme not in ("coord-dp", "dec-dp"):
        raise ConfigError("scheme: 'dp' solves coord-dp or dec-dp")
    return _solve(m, scheme).to_csv()


POINT_FIELDS = ("scheme", "scenario", "knob_kind", "knob_value", "per_sn_cost", "network_cost", "mse", "outage",
                "collisions_per_slot", "seed", "slots")


def _policy(m: RunManifest):
    c = m.config
    scheme = c["scheme"]
    if scheme in ("scdp", "sddp"):
        if c["table"] is None:
            raise ConfigError(f"table: '{scheme}' needs a solved best-gamma policy table (run 'dp' first)")
        table = PolicyTable.from_csv(Path(c["table"]).read_text())
        if scheme == "scdp":
            return CoordPolicy.from_table(table, "scdp"), ("lambda", table.params.get("lagrange", math.nan))
        return DecPolicy.from_table(table, "sddp"), ("lambda", table.params.get("lagrange", math.nan))
    if scheme in ("coord-dp", "dec-dp"):
        if c["table"] is not None:
            table = PolicyTable.from_csv(Path(c["table"]).read_text())
        else:
            table = _solve(m, scheme)
        cls = CoordPolicy if scheme == "coord-dp" else DecPolicy
        return cls.from_table(table, scheme), ("lambda", table.params.get("lagrange", math.nan))
    if scheme == "coord-snr":
        _require(m, "budget")
        res = max_snr_coordinated(c["budget"], m.cost, c["s_ambient"], c["n_channels"])
        return CoordPolicy.max_snr(res), ("epsilon", c["budget"])
    if scheme == "dec-snr":
        _require(m, "budget")
        z, s, _ = max_snr_decentralized(c["budget"], m.cost, c["s_ambient"], c["n_channels"])
        return DecPolicy.constant(z, s), ("epsilon", c["budget"])
    if scheme == "idle":
        return CoordPolicy.idle(), ("none", math.nan)
    raise ConfigError(f"scheme: {scheme!r} is not a slot-level policy")


def _simulate_point(m: RunManifest):
    c = m.config
    scheme = c["scheme"]
    if scheme == "na":
        _require(m, "zeta")
        return run_na(c["zeta"], c["alpha"], c["n_sensors"], c["c_tx"], c["slots"], m.seed), None
    if scheme == "amp":
        _require(m, "lagrange")
        return run_amp(c["lagrange"], c["alpha"], c["n_sensors"], c["c_tx"], c["slots"], m.seed), None
    if scheme == "mod17":
        _require(m, "budget")
        q, s = mod17_tune(c["budget"], m.cost, c["s_ambient"], c["n_channels"], c["n_sensors"])
        return run_mod17(_sim_config(m), Mod17Config.from_q(q, s), c["mod17_slots"], ("epsilon", c["budget"])), None
    policy, knob = _policy(m)
    res = run_episode(_sim_config(m), policy, knob, record=c["trajectory"] is not None)
    return res.point, res.trajectory


def cmd_simulate(m: RunManifest) -> str:
    point, traj = _simulate_point(m)
    if traj is not None:
        Path(m.config["trajectory"]).write_text(traj.to_csv())
    return _csv([[getattr(point, f) for f in POINT_FIELDS]], POINT_FIELDS)


def cmd_sweep(m: RunManifest, jobs: int = 1) -> str:
    c = m.config
    scheme = c["scheme"]
    if scheme.endswith("-dp") or scheme == "amp":
        _require(m, "lambdas")
        knobs = _geom(c["lambdas"])
    elif scheme == "na":
        _require(m, "lambdas")
        knobs = _geom(c["lambdas"])  # NA sweeps zeta
    else:
        _require(m, "budgets")
        knobs = _geom(c["budgets"])
    if scheme in ("coord-dp", "dec-dp", "coord-snr", "dec-snr"):
        points = sweep_tradeoff(_sim_config(m), knobs, scheme, jobs=jobs, grid=_grid(m), iterations=c["iterations"])
    else:
        points = []
        for k in knobs:
            key = {"na": "zeta", "amp": "lagrange", "mod17": "budget"}.get(scheme)
            if key is None:
                raise ConfigError(f"scheme: {scheme!r} cannot be swept")
            sub = RunManifest("simulate", {**c, key: float(k)}, m.out, m.seed)
            points.append(_simulate_point(sub)[0])
    return _csv([[getattr(p, f) for f in POINT_FIELDS] for p in points], POINT_FIELDS)


def cmd_oracle_seq(m: RunManifest) -> str:
    c = m.config
    _require(m, "lambda_bar")
    if not 0 < c["alpha"]:
        raise ConfigError("alpha: oracle-seq needs alpha > 0")
    seq = optimal_snr_sequence(c["lambda_bar"], c["alpha"], c["horizon"])
    v = variance_trajectory(1.0, seq.snrs, c["alpha"]).v_post
    rows = [[k, float(seq.snrs[k]), float(v[k])] for k in range(seq.snrs.size)]
    return _header(m) + f"# r_star = {seq.r_star!r}\n# regime = {seq.regime}\n" + _csv(rows, ["k", "lambda", "v_post"])


def cmd_stationary(m: RunManifest) -> str:
    chain = load_chain(m.config["chain"])
    rows = [[i, f"{g:.12f}", f"{p:.12f}"] for i, (g, p) in enumerate(zip(chain.states, chain.stationary))]
    return _header(m) + _csv(rows, ["state", "gamma", "pi"])


def cmd_overhead(m: RunManifest) -> str:
    c = m.config
    model = OverheadModel(c["c_gamma"], c["c_v"], c["c_sc"])
    chain = load_chain(c["chain"]) if c["scenario"] != "best-gamma" else load_chain("best-gamma")
    t_avg = c["avg_t_active"] if c["avg_t_active"] is not None else float(c["n_channels"])
    rows = []
    for scheme in ("coordinated", "decentralized"):
        up, down = overhead_costs(scheme, chain, model, c["n_sensors"], t_avg)
        rows.append([scheme, float(up), float(down)])
    return _header(m) + _csv(rows, ["scheme", "uplink", "downlink"])


COMMANDS = {
    "pmf": cmd_pmf,
    "dp": cmd_dp,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "oracle-seq": cmd_oracle_seq,
    "stationary": cmd_stationary,
    "overhead": cmd_overhead,
}


def dispatch(m: RunManifest, jobs: int = 1) -> str:
    if m.subcommand not in COMMANDS:
        raise ConfigError(f"unknown subcommand {m.subcommand!r}")
    if m.subcommand == "sweep":
        return cmd_sweep(m, jobs)
    return COMMANDS[m.subcommand](m)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsnfeedback", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--seed", type=int, help="root seed")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    for key in KEYS:
        if key == "seed":
            continue
        flag = "--" + key.replace("_", "-")
        if key == "brute":
            common.add_argument(flag, action="store_const", const="true", dest=key)
        else:
            common.add_argument(flag, dest=key, help=KEYS[key][3])
    common.add_argument("--ns", dest="n_sensors", help="alias of --n-sensors")
    common.add_argument("--b", dest="n_channels", help="alias of --n-channels")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    overrides = {k: getattr(args, k) for k in KEYS if k != "seed" and getattr(args, k, None) is not None}
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    try:
        manifest = parse_config(text, args.command, overrides)
        manifest.out = args.out
        output = dispatch(manifest, args.jobs)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
