"""Command-line front end.

Each command computes one table and writes it as CSV (default) or JSON to
``--out`` or stdout. Options may also come from a JSON config file given
with ``--config``; explicit flags win over file values.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .advisor import (
    Naive,
    Pooled,
    Separating,
    classify_policy,
    objective,
    policy_curve,
)
from .model import ModelError, PostingCost, Primitives, Technology, TestNoise
from .numerics import NumericsError, mixed_grid
from .oracle import mc_payoff
from .partition import (
    SeparatingKnob,
    asymptotic_check,
    boundary_vs_V,
    boundary_vs_gamma,
    partition_grid,
    value_of_information,
)

COMMANDS = ("effort", "objective-surface", "policy", "partition", "boundary", "voi", "asymptotics")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "V": 1.0,
    "gamma": 2.0,
    "lambda": 1.0,
    "alpha": 0.5,
    "technology": "mult",
    "eta_plus": 0.0,
    "eta_minus": 0.0,
    "posting_cost": "none",
    "regime": "naive",
    "T": 0.2,
    "T_grid": "log:1e-4:10:60",
    "theta_grid": "lin:0:1:21",
    "lambda_grid": "mixed",
    "V_grid": "0.5,1,2",
    "gamma_grid": "2",
    "axis": "V",
    "out": None,
    "format": "csv",
    "seed": 0,
    "draws": 0,
}


class ConfigError(ValueError):
    """Invalid command-line or config-file input."""


@dataclass
class RunConfig:
    command: str
    prim: Primitives
    knob: SeparatingKnob
    regime: object
    technology: Technology
    noise: TestNoise
    posting_cost: PostingCost
    T: float
    T_grid: np.ndarray
    theta_grid: np.ndarray
    lambda_grid: np.ndarray
    V_grid: np.ndarray
    gamma_grid: np.ndarray
    axis: str
    out: Optional[str]
    format: str
    seed: int
    draws: int
    raw: dict = field(default_factory=dict)


# --- parsing -----------------------------------------------------------------


def parse_grid(text, name: str) -> np.ndarray:
    """``a,b,c`` | ``lin:lo:hi:n`` | ``log:lo:hi:n`` | ``mixed[:lo:hi]``."""
    if isinstance(text, (list, tuple)):
        vals = np.asarray(text, dtype=float)
    else:
        text = str(text).strip()
        try:
            if text.startswith("mixed"):
                parts = text.split(":")[1:]
                vals = mixed_grid(*map(float, parts)) if parts else mixed_grid()
            elif text.startswith(("lin:", "log:")):
                kind, lo, hi, n = text.split(":")
                lo, hi, n = float(lo), float(hi), int(n)
                vals = np.linspace(lo, hi, n) if kind == "lin" else np.geomspace(lo, hi, n)
            elif text == "":
                vals = np.array([], dtype=float)
            else:
                vals = np.array([float(v) for v in text.split(",")])
        except (ValueError, TypeError, NumericsError) as exc:
            raise ConfigError(f"cannot parse {name} grid {text!r}: {exc}") from exc
    if np.any(~np.isfinite(vals)):
        raise ConfigError(f"{name} grid must be finite")
    if np.any(np.diff(vals) <= 0):
        raise ConfigError(f"{name} grid must be strictly ascending")
    return vals


def parse_regime(text: str):
    text = str(text).strip().lower()
    if text == "naive":
        return Naive()
    if text == "separating":
        return Separating()
    if text.startswith("pooled:"):
        try:
            a, b = (float(v) for v in text.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise ConfigError(f"pooled regime needs pooled:a,b, got {text!r}") from exc
        if not 0 <= a < b:
            raise ConfigError("pooled block needs 0 <= a < b")
        return Pooled(a, b)
    raise ConfigError(f"unknown regime {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thresholdgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file of option values (flags override)")
    p.add_argument("--V", type=float, dest="V")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", type=float, dest="lambda")
    p.add_argument("--alpha", type=float)
    p.add_argument("--technology", choices=("mult", "add"))
    p.add_argument("--eta-plus", type=float, dest="eta_plus")
    p.add_argument("--eta-minus", type=float, dest="eta_minus")
    p.add_argument("--posting-cost", dest="posting_cost", help="none | linear:c | power:c,p")
    p.add_argument("--regime", help="naive | separating | pooled:a,b")
    p.add_argument("--T", type=float, dest="T", help="complexity for the effort table")
    p.add_argument("--T-grid", dest="T_grid")
    p.add_argument("--theta-grid", dest="theta_grid")
    p.add_argument("--lambda-grid", dest="lambda_grid")
    p.add_argument("--V-grid", dest="V_grid")
    p.add_argument("--gamma-grid", dest="gamma_grid")
    p.add_argument("--axis", choices=("V", "gamma"))
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--draws", type=int, help="Monte-Carlo draws for the policy check (0 = off)")
    for a in p._actions:
        if a.dest not in ("help", "version", "command"):
            a.default = None
    return p


def load_config(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise ConfigError("invalid command line") from exc
    vals = dict(DEFAULTS)
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config!r}: {exc}") from exc
        if not isinstance(file_vals, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_vals) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        vals.update(file_vals)
    for k, v in vars(ns).items():
        if k in DEFAULTS and v is not None:
            vals[k] = v
    if vals["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if vals["axis"] not in ("V", "gamma"):
        raise ConfigError("axis must be V or gamma")
    try:
        prim = Primitives(float(vals["V"]), float(vals["gamma"]), float(vals["lambda"]))
        knob = SeparatingKnob(float(vals["alpha"]))
        tech = Technology(vals["technology"])
        noise = TestNoise(float(vals["eta_minus"]), float(vals["eta_plus"]))
        pcost = PostingCost.parse(str(vals["posting_cost"]))
        seed, draws = int(vals["seed"]), int(vals["draws"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if draws < 0:
        raise ConfigError("draws must be nonnegative")
    cfg = RunConfig(
        command=ns.command,
        prim=prim,
        knob=knob,
        regime=parse_regime(vals["regime"]),
        technology=tech,
        noise=noise,
        posting_cost=pcost,
        T=float(vals["T"]),
        T_grid=parse_grid(vals["T_grid"], "T"),
        theta_grid=parse_grid(vals["theta_grid"], "theta"),
        lambda_grid=parse_grid(vals["lambda_grid"], "lambda"),
        V_grid=parse_grid(vals["V_grid"], "V"),
        gamma_grid=parse_grid(vals["gamma_grid"], "gamma"),
        axis=vals["axis"],
        out=vals["out"],
        format=vals["format"],
        seed=seed,
        draws=draws,
        raw={k: vals[k] for k in sorted(vals) if k != "out"},
    )
    _check_domains(cfg)
    return cfg


def _check_domains(cfg: RunConfig) -> None:
    if cfg.T < 0:
        raise ConfigError("T must be nonnegative")
    if cfg.T_grid.size and cfg.T_grid[0] < 0:
        raise ConfigError("T grid must be nonnegative")
    if cfg.theta_grid.size and (cfg.theta_grid[0] < 0 or cfg.theta_grid[-1] > 1):
        raise ConfigError("theta grid must lie in [0, 1]")
    if cfg.lambda_grid.size and cfg.lambda_grid[0] <= 0:
        raise ConfigError("lambda grid must be positive")
    if cfg.V_grid.size and cfg.V_grid[0] <= 0:
        raise ConfigError("V grid must be positive")
    if cfg.gamma_grid.size and cfg.gamma_grid[0] <= 1:
        raise ConfigError("gamma grid entries must exceed 1")


# --- commands ----------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)


def _effort(cfg: RunConfig) -> Table:
    rows = []
    for th in cfg.theta_grid:
        b = objective(cfg.T, float(th), cfg.regime, cfg.prim, cfg.technology, cfg.noise, cfg.posting_cost)
        rows.append([float(th), b.e_pass, b.e_fail])
    return Table(["theta_star", "e_pass", "e_fail"], rows)


def _surface(cfg: RunConfig) -> Table:
    rows = []
    for T in cfg.T_grid:
        for th in cfg.theta_grid:
            b = objective(float(T), float(th), cfg.regime, cfg.prim, cfg.technology, cfg.noise, cfg.posting_cost)
            rows.append([float(T), float(th), b.total])
    return Table(["T", "theta_star", "U"], rows)


def _policy(cfg: RunConfig) -> Table:
    curve = policy_curve(cfg.T_grid, cfg.regime, cfg.prim, cfg.technology, cfg.noise, cfg.posting_cost)
    rep = classify_policy(curve)
    summary = {
        "class": rep.cls.value,
        "monotone": rep.monotone,
        "blocks": [[b.T1, b.T2, b.theta_bar] for b in rep.blocks],
        "near_ties": list(rep.flagged),
    }
    if cfg.draws > 0:
        mc = mc_payoff(curve, cfg.prim, cfg.technology, cfg.noise, cfg.draws, cfg.seed, cfg.regime, cfg.posting_cost)
        summary["mc_mean"], summary["mc_stderr"] = mc.mean, mc.stderr
    rows = [[float(T), float(t), float(v)] for T, t, v in zip(curve.T_grid, curve.theta_values, curve.values)]
    return Table(["T", "theta_star", "value"], rows, summary)


def _partition(cfg: RunConfig) -> Table:
    pts = partition_grid(cfg.lambda_grid, cfg.gamma_grid, cfg.prim.V, cfg.knob)
    rows = [[p.lam, p.V, p.gamma, p.alpha, p.u_sep, p.u_pool, p.phi, p.classification.value] for p in pts]
    return Table(["lambda", "V", "gamma", "alpha", "u_sep", "u_pool", "phi", "class"], rows)


def _boundary(cfg: RunConfig) -> Table:
    if cfg.axis == "V":
        curve = boundary_vs_V(cfg.V_grid, cfg.prim.gamma, cfg.knob)
    else:
        curve = boundary_vs_gamma(cfg.gamma_grid, cfg.prim.V, cfg.knob)
    rows = [
        [float(x), v if v is not None else float("nan"), "ok" if v is not None else "no-crossing"]
        for x, v in zip(curve.grid, curve.lambda_star_values)
    ]
    return Table(["axis_value", "lambda_star", "status"], rows, {"axis": cfg.axis})


def _voi(cfg: RunConfig) -> Table:
    r = value_of_information(cfg.prim, cfg.technology, cfg.noise, cfg.posting_cost, cfg.T_grid)
    return Table(
        ["value", "raw", "informed", "uninformed", "uninformed_threshold"],
        [[r.value, r.raw, r.informed, r.uninformed, r.uninformed_threshold]],
    )


def _asymptotics(cfg: RunConfig) -> Table:
    r = asymptotic_check(cfg.prim.V, cfg.prim.gamma, cfg.knob)
    rows = [
        ["sep_slope", r.sep_slope, r.sep_slope_target, r.sep_slope_rel_err],
        ["pool_exponent", r.pool_exponent, r.pool_exponent_target, r.pool_exponent_rel_err],
        ["u_sep_large", r.u_sep_large, r.u_sep_limit, r.sep_limit_gap],
        ["u_pool_large", r.u_pool_large, r.u_pool_limit, r.pool_limit_gap],
    ]
    return Table(["check", "value", "target", "error"], rows)


HANDLERS = {
    "effort": _effort,
    "objective-surface": _surface,
    "policy": _policy,
    "partition": _partition,
    "boundary": _boundary,
    "voi": _voi,
    "asymptotics": _asymptotics,
}


# --- output ------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def render(cfg: RunConfig, table: Table) -> str:
    if cfg.format == "json":
        doc = {
            "command": cfg.command,
            "params": cfg.raw,
            "columns": table.columns,
            "rows": [[None if isinstance(v, float) and math.isnan(v) else v for v in r] for r in table.rows],
            "summary": table.summary,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    params = " ".join(f"{k}={cfg.raw[k]}" for k in sorted(cfg.raw))
    lines = [f"# thresholdgame {cfg.command} {params}", ",".join(table.columns)]
    lines += [",".join(_fmt(v) for v in r) for r in table.rows]
    for k in sorted(table.summary):
        lines.append(f"# {k}={json.dumps(table.summary[k], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> int:
    table = HANDLERS[cfg.command](cfg)
    text = render(cfg, table)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _error(kind: str, exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = load_config(argv)
    except (ConfigError, ModelError) as exc:
        return _error("config", exc, EXIT_CONFIG)
    try:
        return run(cfg)
    except NumericsError as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except (ModelError, ValueError) as exc:
        return _error("config", exc, EXIT_CONFIG)
    except OSError as exc:
        return _error("config", exc, EXIT_CONFIG)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
