"""Command-line interface: curves, equilibria, adversaries, simulation.

Commands read a JSON run configuration (all keys optional, defaults are
documented in docs/formats), echo the fully resolved configuration next to
their outputs, and write deterministic artifacts: byte-identical reruns for
identical configs. Reports embed the resolved-config hash and the seed, and
data files carry no timestamps.

Exit codes: 0 success, 1 computation or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import noise_model
from .envelope import build_envelope
from .errors import ConfigError, DomainError
from .kernel import KernelContext
from .noise_model import DataModel
from .simulator import (CustomJointStrategy, GameConfig, ReplicatedStrategy,
                        dominance_check, run_monte_carlo, run_scenario_suite)
from .strategy import (AtomicAdversary, UtilitySpec, best_alpha_set,
                       build_adversary, solve_equilibrium)
from .tradeoff import (ALPHA_MIN, atom_accept_prob, atom_error_moment,
                       build_curve, build_oracle_table, c_alpha, oracle_c2)

OUTPUT_DIR_ENV = "STACKGAME_OUTPUT_DIR"

_GRID_SCHEMA = {
    "type": "object",
    "properties": {
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "start": {"type": "number"},
        "stop": {"type": "number"},
        "step": {"type": "number", "exclusiveMinimum": 0},
        "num": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "honest_noise": {
            "type": "object",
            "properties": {
                "kind": {"enum": list(noise_model.KINDS)},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "params": {"type": "object"},
            },
            "additionalProperties": False,
        },
        "data": {
            "type": "object",
            "properties": {"m": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "eta_grid": _GRID_SCHEMA,
        "alpha_grid": _GRID_SCHEMA,
        "report_alphas": _GRID_SCHEMA,
        "utility": {
            "type": "object",
            "properties": {
                "adversary": {
                    "type": "object",
                    "properties": {"family": {"type": "string"}, "params": {"type": "object"}},
                    "additionalProperties": False,
                },
                "dc": {
                    "type": "object",
                    "properties": {"family": {"type": "string"}, "params": {"type": "object"}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "simulation": {
            "type": "object",
            "properties": {
                "n_nodes": {"type": "array", "items": {"type": "integer", "minimum": 2},
                            "minItems": 1},
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "chunk_size": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "envelope": {
            "type": "object",
            "properties": {"grid_size": {"type": "integer", "minimum": 33}},
            "additionalProperties": False,
        },
        "oracle": {
            "type": "object",
            "properties": {"grid_size": {"type": "integer", "minimum": 64}},
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
    },
    "additionalProperties": False,
}

DEFAULT_CONFIG = {
    "honest_noise": {"kind": "uniform", "delta": 1.0, "params": {}},
    "data": {"m": 1000.0},
    "eta_grid": {"start": 2.0, "stop": 8.0, "step": 0.01},
    "alpha_grid": {"start": ALPHA_MIN, "stop": 1.0, "num": 1000},
    "report_alphas": {"start": 0.1, "stop": 1.0, "num": 10},
    "utility": {
        "adversary": {"family": "scaled_product", "params": {"c": 1.0}},
        "dc": {"family": "linear_penalty", "params": {"gamma": 1.0}},
    },
    "simulation": {"n_nodes": [2, 3, 5], "trials": 100000, "seed": 20260814,
                   "chunk_size": 65536},
    "envelope": {"grid_size": 4096},
    "oracle": {"grid_size": 2048},
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _resolve_grid(spec: dict, path: str) -> np.ndarray:
    if "values" in spec:
        grid = np.asarray(spec["values"], dtype=float)
    elif "start" in spec and "stop" in spec and "step" in spec:
        start, stop, step = spec["start"], spec["stop"], spec["step"]
        if stop < start:
            raise ConfigError(f"{path}: stop must be >= start")
        num = int(round((stop - start) / step)) + 1
        grid = np.linspace(start, stop, num)
    elif "start" in spec and "stop" in spec and "num" in spec:
        if spec["stop"] < spec["start"]:
            raise ConfigError(f"{path}: stop must be >= start")
        grid = np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    else:
        raise ConfigError(f"{path}: grid needs either values or start/stop with step or num")
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ConfigError(f"{path}: grid must be nonempty and finite")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{path}: grid values must be strictly increasing")
    return grid


class RunConfig:
    """Fully resolved run configuration plus the derived model objects."""

    def __init__(self, resolved: dict, base_dir=None, output_override=None):
        self.raw = resolved
        self.noise = noise_model.from_spec(resolved["honest_noise"], base_dir=base_dir)
        self.data = DataModel(resolved["data"]["m"])
        self.eta_grid = _resolve_grid(resolved["eta_grid"], "/eta_grid")
        self.alpha_grid = _resolve_grid(resolved["alpha_grid"], "/alpha_grid")
        self.report_alphas = _resolve_grid(resolved["report_alphas"], "/report_alphas")
        self.utility = UtilitySpec.from_spec(resolved["utility"])
        sim = resolved["simulation"]
        self.n_nodes = [int(n) for n in sim["n_nodes"]]
        self.trials = int(sim["trials"])
        self.seed = int(sim["seed"])
        self.chunk_size = int(sim["chunk_size"])
        self.envelope_grid = int(resolved["envelope"]["grid_size"])
        self.oracle_grid = int(resolved["oracle"]["grid_size"])
        out = output_override or resolved.get("output_dir") \
            or os.environ.get(OUTPUT_DIR_ENV) or "out"
        self.output_dir = Path(out)
        self.raw = dict(resolved)
        self.raw["output_dir"] = str(out)
        self.config_hash = hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()

        self._semantic_checks()

    def _semantic_checks(self):
        problems = []
        if self.eta_grid[0] < 2.0:
            problems.append(
                "/eta_grid: every threshold multiple must satisfy eta >= 2; the "
                "acceptance window must cover the worst honest-only spread of 2*delta")
        if self.alpha_grid[0] < ALPHA_MIN - 1e-15 or self.alpha_grid[-1] > 1.0:
            problems.append(f"/alpha_grid: acceptance levels must lie in [{ALPHA_MIN}, 1]")
        if self.report_alphas[0] < ALPHA_MIN - 1e-15 or self.report_alphas[-1] > 1.0:
            problems.append(f"/report_alphas: acceptance levels must lie in [{ALPHA_MIN}, 1]")
        if self.data.m < 100.0 * self.noise.delta:
            problems.append(
                "/data/m: the value range must dominate the noise (m >= 100 * delta)")
        m_max = ((self.eta_grid[-1] + 2.0) * self.noise.delta) ** 2
        for msg in self.utility.monotonicity_violations(m_max):
            problems.append(f"/utility: {msg}")
        if problems:
            raise ConfigError("; ".join(problems))


def parse_config(path=None, output_override=None) -> RunConfig:
    """Load, validate, and resolve a JSON run configuration.

    Schema violations are collected with JSON-pointer paths; a missing path
    means an empty configuration (all defaults).
    """
    user: dict = {}
    base_dir = None
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        base_dir = p.parent
        try:
            user = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
    validator = Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(user), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for err in errors:
            pointer = "/" + "/".join(str(part) for part in err.absolute_path)
            msgs.append(f"{pointer}: {err.message}")
        raise ConfigError("; ".join(msgs))
    resolved = _merge(DEFAULT_CONFIG, user)
    try:
        return RunConfig(resolved, base_dir=base_dir, output_override=output_override)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


# --- deterministic writers -----------------------------------------------------

def _np_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_np_default) + "\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows, append: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w") as fh:
        if fresh:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# --- command implementations ----------------------------------------------------

def _stamp(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.config_hash, "seed": cfg.seed}


def cmd_validate_noise(cfg: RunConfig, out: Path) -> int:
    report = noise_model.validate(cfg.noise)
    payload = {
        "noise": cfg.raw["honest_noise"],
        **report.to_json_dict(),
        **_stamp(cfg),
    }
    _write_json(out / "noise_validation.json", payload)
    return 0 if report.passed else 1


def _hcurve_rows(env):
    qs = env.source_qs
    hs = env.source_vals
    stars = env.evaluate(qs)
    touch = env.is_touch(qs)
    return zip(qs, hs, stars, touch)


def cmd_tradeoff(cfg: RunConfig, out: Path, eta: float, alphas=None) -> int:
    ctx = KernelContext(eta, cfg.noise)
    grid = cfg.report_alphas if alphas is None else np.asarray(alphas, dtype=float)
    curve = build_curve(ctx, grid, grid_size=cfg.envelope_grid)
    table = build_oracle_table(ctx, cfg.oracle_grid)
    oracle_vals = np.array([oracle_c2(ctx, a, table=table) for a in curve.alphas])
    diffs = np.abs(curve.values - oracle_vals)

    _write_csv(out / "level_curve.csv", ["q", "h", "h_star", "is_touch"],
               _hcurve_rows(curve.envelope))
    _write_csv(out / "tradeoff.csv", ["alpha", "c_formula", "c_oracle", "abs_diff"],
               zip(curve.alphas, curve.values, oracle_vals, diffs))
    rel_scale = np.maximum(1.0, np.abs(curve.values))
    summary = {
        "eta": float(eta),
        "n_alphas": int(curve.alphas.size),
        "max_abs_diff": float(np.max(diffs)),
        "max_rel_diff": float(np.max(diffs / rel_scale)),
        "zero_limit": curve.zero_limit,
        "chords": [[c.q1, c.q2] for c in curve.envelope.chords()],
        **_stamp(cfg),
    }
    _write_json(out / "tradeoff_summary.json", summary)
    return 0


def _solve(cfg: RunConfig):
    ctxs = [KernelContext(float(e), cfg.noise) for e in cfg.eta_grid]
    return solve_equilibrium(ctxs, cfg.utility, cfg.alpha_grid,
                             grid_size=cfg.envelope_grid)


def cmd_solve(cfg: RunConfig, out: Path, report=None) -> int:
    report = report or _solve(cfg)
    payload = {**report.to_json_dict(), **_stamp(cfg)}
    _write_json(out / "equilibrium.json", payload)
    rows = []
    for eta in sorted(report.dc_guaranteed_utility):
        aset = report.best_alpha_sets[eta]
        rows.append((eta, report.dc_guaranteed_utility[eta], len(aset),
                     float(aset[0]), float(aset[-1])))
    _write_csv(out / "eta_utility.csv",
               ["eta", "dc_guaranteed_utility", "n_best_alphas",
                "alpha_best_min", "alpha_best_max"], rows)
    return 0


def cmd_adversary(cfg: RunConfig, out: Path, eta: float, alpha: float) -> int:
    ctx = KernelContext(eta, cfg.noise)
    env = build_envelope(ctx, cfg.envelope_grid)
    adv = build_adversary(env, ctx, alpha)
    achieved_pa = float(sum(w * atom_accept_prob(ctx, z) for z, w in adv.atoms))
    achieved_mse = float(sum(w * atom_error_moment(ctx, z) for z, w in adv.atoms)
                         / (4.0 * achieved_pa))
    payload = {
        **adv.to_json_dict(),
        "achieved_pa": achieved_pa,
        "achieved_mse": achieved_mse,
        "c_alpha": float(c_alpha(env, alpha)),
        **_stamp(cfg),
    }
    _write_json(out / "adversary.json", payload)
    return 0


def _load_adversary(path) -> AtomicAdversary:
    try:
        raw = json.loads(Path(path).read_text())
        atoms = tuple((float(a["z"]), float(a["weight"])) for a in raw["atoms"])
        return AtomicAdversary(atoms=atoms, alpha=float(raw["alpha"]),
                               eta=float(raw["eta"]), delta=float(raw["delta"]))
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load adversary file {path}: {exc}") from exc


def _simulate_rows(cfg: RunConfig, adv: AtomicAdversary):
    strategy = ReplicatedStrategy.from_atomic(adv)
    rows = []
    results = []
    for i, n in enumerate(cfg.n_nodes):
        seed = cfg.seed + i
        game = GameConfig(n_nodes=n, eta=adv.eta, data=cfg.data, noise=cfg.noise,
                          trials=cfg.trials, seed=seed, chunk_size=cfg.chunk_size)
        res = run_monte_carlo(game, strategy)
        rows.append((n, adv.eta, adv.alpha, res.pa_hat, res.mse_hat,
                     res.pa_stderr, res.mse_stderr, seed))
        results.append({"n_nodes": n, "seed": seed, **res.to_json_dict()})
    return rows, results


def cmd_simulate(cfg: RunConfig, out: Path, adversary_path=None) -> int:
    if adversary_path is not None:
        adv = _load_adversary(adversary_path)
    else:
        report = _solve(cfg)
        ctx = KernelContext(report.eta_star, cfg.noise)
        env = report.envelopes[report.eta_star]
        adv = build_adversary(env, ctx, report.equilibrium_pa)
    rows, results = _simulate_rows(cfg, adv)
    _write_csv(out / "simulations.csv",
               ["n_nodes", "eta", "alpha", "pa_hat", "mse_hat",
                "pa_stderr", "mse_stderr", "seed"], rows, append=True)
    payload = {"adversary": adv.to_json_dict(), "results": results, **_stamp(cfg)}
    _write_json(out / "simulation.json", payload)
    return 0


def _random_candidates(ctx, rng, n_replicated: int, n_iid: int):
    """Random symmetric atomic strategies: replicated and independent draws."""
    cands = []
    for i in range(n_replicated):
        n_atoms = int(rng.integers(1, 3))  # 1 or 2 symmetric offset pairs
        zs = rng.uniform(0.0, ctx.z_hi, n_atoms)
        locs = np.concatenate([-zs, zs])
        w = rng.uniform(0.2, 1.0, n_atoms)
        w = np.concatenate([w, w])
        w = w / w.sum()
        cands.append((f"replicated_{i}", ReplicatedStrategy(locs, w)))
    base_for_iid = []
    for i in range(n_iid):
        n_atoms = int(rng.integers(1, 3))
        zs = rng.uniform(0.0, ctx.z_hi, n_atoms)
        locs = np.concatenate([-zs, zs])
        w = rng.uniform(0.2, 1.0, n_atoms)
        w = np.concatenate([w, w])
        w = w / w.sum()
        base_for_iid.append((locs, w))

    def make_sampler(locs, w):
        def sampler(rng_, count, n_adv):
            idx = rng_.choice(locs.size, size=(n_adv, count), p=w)
            return locs[idx]
        return sampler

    iid = []
    for i, (locs, w) in enumerate(base_for_iid):
        iid.append((f"iid_{i}", make_sampler(locs, w)))
    return cands, iid


def cmd_verify(cfg: RunConfig, out: Path, realizations: int = 100_000,
               candidates: int = 20, trials: int | None = None) -> int:
    eta = float(cfg.eta_grid[0])
    n_nodes = cfg.n_nodes[0]
    scenario = run_scenario_suite(cfg.noise, eta, realizations,
                                  max(cfg.n_nodes) - 1, cfg.seed)

    ctx = KernelContext(eta, cfg.noise)
    env = build_envelope(ctx, cfg.envelope_grid)
    aset = best_alpha_set(env, cfg.utility, cfg.alpha_grid)
    alpha_star = float(aset[0])
    optimum = ReplicatedStrategy.from_atomic(build_adversary(env, ctx, alpha_star))
    rng = np.random.default_rng(cfg.seed)
    replicated, iid_specs = _random_candidates(ctx, rng, candidates, max(2, candidates // 10))
    cands = replicated + [(label, CustomJointStrategy(s, n_nodes - 1))
                          for label, s in iid_specs]
    game = GameConfig(n_nodes=n_nodes, eta=eta, data=cfg.data, noise=cfg.noise,
                      trials=trials or cfg.trials, seed=cfg.seed,
                      chunk_size=cfg.chunk_size)
    dom = dominance_check(game, cfg.utility, cands, optimum)

    payload = {
        "scenario_suite": scenario,
        "dominance": dom.to_json_dict(),
        "alpha_star": alpha_star,
        "eta": eta,
        **_stamp(cfg),
    }
    _write_json(out / "verify_report.json", payload)
    return 0 if scenario["passed"] else 1


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    report = _solve(cfg)
    cmd_solve(cfg, out, report=report)

    eta_star = report.eta_star
    cmd_tradeoff(cfg, out, eta_star)

    ctx = KernelContext(eta_star, cfg.noise)
    env = report.envelopes[eta_star]
    adv_eq = build_adversary(env, ctx, report.equilibrium_pa)
    _write_json(out / "adversary.json", {**adv_eq.to_json_dict(), **_stamp(cfg)})

    rows = []
    worst_pa_sigmas = 0.0
    worst_mse_sigmas = 0.0
    cell = 0
    for n in cfg.n_nodes:
        for a in cfg.report_alphas:
            adv = build_adversary(env, ctx, float(a))
            strategy = ReplicatedStrategy.from_atomic(adv)
            seed = cfg.seed + cell
            cell += 1
            game = GameConfig(n_nodes=n, eta=eta_star, data=cfg.data, noise=cfg.noise,
                              trials=cfg.trials, seed=seed, chunk_size=cfg.chunk_size)
            res = run_monte_carlo(game, strategy)
            rows.append((n, eta_star, float(a), res.pa_hat, res.mse_hat,
                         res.pa_stderr, res.mse_stderr, seed))
            if res.pa_stderr > 0:
                worst_pa_sigmas = max(worst_pa_sigmas,
                                      abs(res.pa_hat - float(a)) / res.pa_stderr)
            if res.mse_hat is not None and res.mse_stderr and res.mse_stderr > 0:
                predicted = c_alpha(env, float(a))
                worst_mse_sigmas = max(worst_mse_sigmas,
                                       abs(res.mse_hat - predicted) / res.mse_stderr)
    _write_csv(out / "sweep_simulations.csv",
               ["n_nodes", "eta", "alpha", "pa_hat", "mse_hat",
                "pa_stderr", "mse_stderr", "seed"], rows)

    payload = {
        "eta_star": eta_star,
        "equilibrium": {"mse": report.equilibrium_mse, "pa": report.equilibrium_pa},
        "cells": len(rows),
        "worst_pa_deviation_sigmas": worst_pa_sigmas,
        "worst_mse_deviation_sigmas": worst_mse_sigmas,
        "artifacts": ["equilibrium.json", "eta_utility.csv", "level_curve.csv",
                      "tradeoff.csv", "tradeoff_summary.json", "adversary.json",
                      "sweep_simulations.csv"],
        **_stamp(cfg),
    }
    _write_json(out / "sweep_report.json", payload)
    return 0


# --- argument parsing ------------------------------------------------------------

def _parse_alpha_spec(spec: str) -> np.ndarray:
    """Either comma-separated values or start:stop:count."""
    try:
        if ":" in spec:
            start, stop, num = spec.split(":")
            return np.linspace(float(start), float(stop), int(num))
        return np.array([float(tok) for tok in spec.split(",") if tok.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad alpha spec {spec!r}: {exc}") from exc


def dispatch(command: str, cfg: RunConfig, **options) -> int:
    """Run one CLI command against a resolved configuration."""
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "resolved_config.json", cfg.raw)
    if command == "validate-noise":
        return cmd_validate_noise(cfg, out)
    if command == "tradeoff":
        return cmd_tradeoff(cfg, out, options.get("eta", float(cfg.eta_grid[0])),
                            options.get("alphas"))
    if command == "solve":
        return cmd_solve(cfg, out)
    if command == "adversary":
        return cmd_adversary(cfg, out, options.get("eta", float(cfg.eta_grid[0])),
                             options["alpha"])
    if command == "simulate":
        return cmd_simulate(cfg, out, options.get("adversary_path"))
    if command == "verify":
        return cmd_verify(cfg, out,
                          realizations=options.get("realizations", 100_000),
                          candidates=options.get("candidates", 20),
                          trials=options.get("trials"))
    if command == "sweep":
        return cmd_sweep(cfg, out)
    raise ConfigError(f"unknown command {command!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackgame",
        description="Trade-off curves, equilibria, and optimal adversaries for the "
                    "accept/estimate aggregation game.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration (defaults apply)")
        p.add_argument("--output", help="output directory (default: config, "
                                        f"then ${OUTPUT_DIR_ENV}, then ./out)")

    common(sub.add_parser("validate-noise", help="check the noise model assumptions"))

    p = sub.add_parser("tradeoff", help="formula-vs-oracle trade-off curve")
    common(p)
    p.add_argument("--eta", type=float, help="threshold multiple (default: grid start)")
    p.add_argument("--alphas", help="acceptance levels: 'a,b,c' or 'start:stop:count'")

    common(sub.add_parser("solve", help="equilibrium threshold and best responses"))

    p = sub.add_parser("adversary", help="optimal atoms at a given acceptance level")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eta", type=float, help="threshold multiple (default: grid start)")

    p = sub.add_parser("simulate", help="Monte Carlo runs of a replicated adversary")
    common(p)
    p.add_argument("--adversary", dest="adversary_path",
                   help="adversary JSON (default: the solved equilibrium optimum)")

    p = sub.add_parser("verify", help="scenario-reduction and dominance suites")
    common(p)
    p.add_argument("--realizations", type=int, default=100_000)
    p.add_argument("--candidates", type=int, default=20)
    p.add_argument("--trials", type=int)

    common(sub.add_parser("sweep", help="full pipeline with a combined report"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, output_override=args.output)
        options = {}
        if args.command in ("tradeoff", "adversary") and args.eta is not None:
            options["eta"] = args.eta
        if args.command == "tradeoff" and args.alphas is not None:
            options["alphas"] = _parse_alpha_spec(args.alphas)
        if args.command == "adversary":
            options["alpha"] = args.alpha
        if args.command == "simulate" and args.adversary_path:
            options["adversary_path"] = args.adversary_path
        if args.command == "verify":
            options.update(realizations=args.realizations,
                           candidates=args.candidates, trials=args.trials)
        return dispatch(args.command, cfg, **options)
    except ConfigError as exc:
        json.dump({"error": {"type": "ConfigError", "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 2
    except Exception as exc:  # computation/check failures -> structured stderr
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
