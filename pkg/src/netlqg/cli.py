"""Command-line entry point.

Subcommands: ``validate`` (model assumptions report), ``plan`` (known-model
gains and average cost), ``simulate`` (one learning trajectory with episode
log), ``experiment`` (Monte-Carlo regret benchmark writing CSV + manifest).

Exit codes are stable: 0 ok, 2 configuration error, 3 violated model
assumption, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import sim
from .errors import AssumptionError, ConfigError, DareError, TrajectoryDiverged
from .model import build_model
from .riccati import gains_for, optimal_average_cost, true_blocks
from .spectral import decompose_coupling

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSUMPTION = 3
EXIT_NUMERIC = 4

OUT_DIR_ENV = "NETLQG_OUT"

MODEL_PRESETS = ("meanfield", "lowrank")
EXPERIMENT_PRESETS = ("meanfield", "lowrank", "fig2", "fig3")

# defaults for the figure-style batch presets; all overridable via
# experiment.* keys
FIG2_NS = (1, 10, 100)
FIG3_SIZES = (4, 40, 80, 100)          # total agent counts (multiples of 4)
FIG3_AB = ((0.05, 0.05), (5.0, 5.0))


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_overrides(config: dict, pairs: list[str]) -> dict:
    """Apply repeatable --set key=value flags; keys are dotted paths into the
    {model: ..., experiment: ...} tree."""
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        parts = key.split(".")
        if parts[0] not in ("model", "experiment"):
            raise ConfigError(f"unknown config section {parts[0]!r} in --set {key!r} "
                              f"(expected model.* or experiment.*)")
        node = config
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"config path {key!r} crosses a non-mapping value")
        node[parts[-1]] = _parse_set_value(raw)
    return config


def _load_config(args) -> dict:
    config: dict = {"model": {}, "experiment": {}}
    if args.config:
        try:
            with open(args.config) as f:
                loaded = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config}: invalid JSON ({exc})")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {args.config}: expected an object at top level")
        for key in loaded:
            if key not in ("model", "experiment", "preset"):
                raise ConfigError(f"unknown top-level config key {key!r}")
        config["model"].update(loaded.get("model", {}))
        config["experiment"].update(loaded.get("experiment", {}))
        if "preset" in loaded:
            config["preset"] = loaded["preset"]
    if args.preset:
        config["preset"] = args.preset
    _apply_overrides(config, args.set or [])
    if args.seed is not None:
        config["experiment"]["base_seed"] = args.seed
    if args.jobs is not None:
        config["experiment"]["jobs"] = args.jobs
    return config


def _model_config(config: dict, *, require_model_preset: bool = True) -> dict:
    preset = config.get("preset")
    model_cfg = dict(config.get("model", {}))
    if preset is not None:
        if require_model_preset and preset not in MODEL_PRESETS:
            raise ConfigError(f"preset {preset!r} is not a model preset; "
                              f"choose from {MODEL_PRESETS}")
        model_cfg["preset"] = preset
    if "preset" not in model_cfg and "M" not in model_cfg:
        raise ConfigError("no model given: select --preset or provide model.M "
                          "and companions in the config")
    return model_cfg


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _experiment_kwargs(config: dict) -> dict:
    exp = dict(config.get("experiment", {}))
    # batch-preset and naming keys are consumed by _build_specs, not the spec
    for key in ("ns", "sizes", "ab_pairs", "label"):
        exp.pop(key, None)
    allowed = {f.name for f in sim.ExperimentSpec.__dataclass_fields__.values()}
    unknown = set(exp) - allowed
    if unknown:
        raise ConfigError(f"unknown experiment key(s): {sorted(unknown)}")
    return exp


def _build_specs(config: dict) -> list[sim.ExperimentSpec]:
    """Expand the resolved config into one spec per sub-experiment."""
    preset = config.get("preset")
    exp_cfg = config.get("experiment", {})
    kwargs = _experiment_kwargs(config)
    model_overrides = dict(config.get("model", {}))

    if preset == "fig2":
        ns = exp_cfg.get("ns", list(FIG2_NS))
        specs = []
        for n in ns:
            mc = dict(model_overrides)
            mc.update({"preset": "meanfield", "n": int(n)})
            specs.append(sim.ExperimentSpec(name="meanfield", model=mc, **kwargs))
        return specs
    if preset == "fig3":
        sizes = exp_cfg.get("sizes", list(FIG3_SIZES))
        ab_pairs = exp_cfg.get("ab_pairs", [list(p) for p in FIG3_AB])
        specs = []
        for a, b in ab_pairs:
            for size in sizes:
                if size % 4 != 0:
                    raise ConfigError(f"fig3 sizes must be multiples of 4, got {size}")
                mc = dict(model_overrides)
                mc.update({"preset": "lowrank", "a": float(a), "b": float(b),
                           "n_rep": size // 4})
                specs.append(sim.ExperimentSpec(name=f"lowrank-a{a}-b{b}", model=mc,
                                                **kwargs))
        return specs

    model_cfg = _model_config(config)
    name = exp_cfg.get("label", preset or "custom")
    return [sim.ExperimentSpec(name=name, model=model_cfg, **kwargs)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    config = _load_config(args)
    model = build_model(_model_config(config))
    print(f"model: n={model.n} d_x={model.d_x} d_u={model.d_u} sigma_w2={model.sigma_w2}")
    print("A2: ok (Q, R symmetric positive definite)")

    try:
        basis = decompose_coupling(model, strict_a5=False)
    except AssumptionError as exc:
        print(f"{exc.assumption}: VIOLATED ({exc})")
        return EXIT_ASSUMPTION

    print(f"L = {basis.rank}")
    for ell in range(basis.rank):
        print(f"lambda[{ell}] = {basis.eigenvalues[ell]:.10g}  "
              f"q = {basis.q_eigen[ell]:.10g}  r = {basis.r_eigen[ell]:.10g}  "
              f"rep_agent = {int(basis.rep_agents[ell])}")
    print("A3: ok (q_0, r_0 and all eigen cost weights positive)")

    failures = []
    if not basis.has_aux:
        failures.append(("A5", "no agent retains an auxiliary noise component "
                                "(full-rank coupling)"))
        print("A5: VIOLATED (no agent retains an auxiliary noise component)")
    else:
        print(f"A5: ok (min auxiliary share {basis.aux_frac.min():.6g})")

    aux, eigen = true_blocks(model, basis)
    try:
        gains_for(aux if basis.has_aux else None, eigen, basis, model)
        n_blocks = basis.rank + (1 if basis.has_aux else 0)
        print(f"A1: ok (all {n_blocks} block Riccati equations solvable)")
    except DareError as exc:
        failures.append(("A1", str(exc)))
        print(f"A1: VIOLATED ({exc})")

    if failures:
        print(f"validation failed: {', '.join(name for name, _ in failures)}")
        return EXIT_ASSUMPTION
    print("validation passed")
    return EXIT_OK


def cmd_plan(args) -> int:
    config = _load_config(args)
    model = build_model(_model_config(config))
    basis = decompose_coupling(model, strict_a5=False)
    aux, eigen = true_blocks(model, basis)
    gains = gains_for(aux if basis.has_aux else None, eigen, basis, model)
    J = optimal_average_cost(gains, basis, model)

    plan = {"n": model.n, "L": basis.rank, "J": J,
            "eigenvalues": basis.eigenvalues.tolist(), "blocks": []}
    if basis.has_aux:
        plan["blocks"].append({"tag": "aux", "S": gains.S_aux.tolist(),
                               "G": gains.G_aux.tolist()})
        print(f"aux:     S = {np.array2string(gains.S_aux, precision=8)}  "
              f"G = {np.array2string(gains.G_aux, precision=8)}")
    for ell in range(basis.rank):
        plan["blocks"].append({"tag": f"eigen{ell}",
                               "lambda": float(basis.eigenvalues[ell]),
                               "S": gains.S_eigen[ell].tolist(),
                               "G": gains.G_eigen[ell].tolist()})
        print(f"eigen{ell}:  lambda = {basis.eigenvalues[ell]:.10g}  "
              f"S = {np.array2string(gains.S_eigen[ell], precision=8)}  "
              f"G = {np.array2string(gains.G_eigen[ell], precision=8)}")
    print(f"J = {J:.10g}")

    out = _out_dir(args)
    path = os.path.join(out, "plan.json")
    with open(path, "w") as f:
        json.dump(plan, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load_config(args)
    specs = _build_specs(config)
    if len(specs) != 1:
        raise ConfigError("simulate runs a single model; figure presets are "
                          "experiment-only")
    spec = specs[0]
    if args.log_posteriors:
        spec.log_posteriors = True
    ctx = sim.prepare(spec)
    result = sim.run_trajectory(ctx, spec, args.index)

    out = _out_dir(args)
    ep_path = os.path.join(out, "episodes.jsonl")
    with open(ep_path, "w") as f:
        for rec in result.episodes:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    trace_path = os.path.join(out, "trace.csv")
    with open(trace_path, "w", newline="") as f:
        f.write("t,cumulative_cost,regret\n")
        for t in range(1, spec.T + 1):
            f.write(f"{t},{repr(float(result.cumulative_cost[t-1]))},"
                    f"{repr(float(result.regret[t-1]))}\n")

    if result.aborted:
        print(f"trajectory aborted at t={result.abort_t} (state blow-up)")
        print(f"wrote {ep_path} and {trace_path}")
        return EXIT_NUMERIC
    print(f"J = {result.J:.10g}")
    print(f"final regret R(T) = {result.regret[-1]:.10g} at T = {spec.T}")
    print(f"episodes: {len(result.episodes)} closes across "
          f"{ctx.basis.rank + (1 if ctx.basis.has_aux else 0)} actors")
    print(f"wrote {ep_path} and {trace_path}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = _load_config(args)
    specs = _build_specs(config)
    results = sim.run_batch(specs)

    out = _out_dir(args)
    rows = [row for res in results for row in res.rows]
    csv_path = os.path.join(out, "regret.csv")
    sim.write_csv(rows, csv_path)
    manifest_path = os.path.join(out, "manifest.json")
    sim.write_manifest(specs, results, manifest_path)

    print(f"{'experiment':<24} {'n':>5} {'T':>7} {'mean R(T)':>14} "
          f"{'R(T)/sqrt(T)':>14} {'completed':>10}")
    for res in results:
        final = res.rows[-1]
        print(f"{final['experiment']:<24} {final['n']:>5} {final['T_checkpoint']:>7} "
              f"{final['mean_regret']:>14.4f} {final['mean_regret_over_sqrtT']:>14.4f} "
              f"{res.n_completed:>10}")
        if res.n_aborted:
            print(f"  warning: {res.n_aborted} trajectories aborted "
                  f"(excluded from aggregate)")
    print(f"wrote {csv_path} and {manifest_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file with model/experiment sections")
    p.add_argument("--preset", help="named preset: " + ", ".join(EXPERIMENT_PRESETS))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (dotted path, e.g. model.n=20)")
    p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    p.add_argument("--seed", type=int, help="base seed for trajectory derivation")
    p.add_argument("--jobs", type=int, help="parallel trajectory workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netlqg",
        description="Networked-LQG spectral Thompson-sampling benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check model assumptions and report the spectrum")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plan", help="solve the known-model gains and average cost")
    _add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run one learning trajectory")
    _add_common(p)
    p.add_argument("--index", type=int, default=0, help="trajectory index (seed derivation)")
    p.add_argument("--log-posteriors", action="store_true",
                   help="embed posterior snapshots in the episode log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a Monte-Carlo regret experiment")
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (DareError, TrajectoryDiverged, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
