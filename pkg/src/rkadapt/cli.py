"""Command line front-end.

Subcommands:
  train          learn a tableau for the configured family, write it + report
  eval           global-error sweep of a tableau on the configured family
  compare        relative-error sweeps against a classic reference
  order-check    print the fitted convergence slope of a tableau
  bench-scaling  per-epoch training time across task dimensions

Every run writes a manifest (config, seed, version, output list) next to its
outputs. Exit codes: 0 success, 1 config/validation failure, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import ConfigError, RkadaptError
from .evaluation import (
    error_sweep,
    generalization_sweep,
    scaling_benchmark,
    write_error_csv,
    write_scaling_csv,
    write_sweep_csv,
)
from .experiment import (
    ExperimentConfig,
    build_family,
    build_grid,
    build_train_config,
    build_variants,
    load_config,
)
from .fields import KIND_NAMES
from .rk import get_tableau, load_tableau, save_tableau
from .training import train, write_train_report


def _revision() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _write_manifest(out_dir: Path, command: str, cfg: ExperimentConfig,
                    seed: int, outputs) -> None:
    doc = {
        "command": command,
        "name": cfg.name,
        "seed": seed,
        "version": __version__,
        "revision": _revision(),
        "kernel_lane": kernels.LANE,
        "config": cfg.to_dict(),
        "outputs": sorted(str(o) for o in outputs),
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare(args, need_train: bool = False):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if need_train and cfg.train is None:
        raise ConfigError("required for this command", field="train")
    if need_train and args.stages is not None:
        cfg = replace(cfg, train=replace(cfg.train, stages=args.stages))
    if need_train and args.order is not None:
        cfg = replace(cfg, train=replace(cfg.train, target_order=args.order))
    out_dir = Path(args.out or cfg.out_dir or f"runs/{cfg.name}")
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def _resolve_tableau(spec: str):
    """A tableau file path, or the label of a catalog method."""
    if os.path.exists(spec):
        return load_tableau(spec)
    try:
        return get_tableau(spec)
    except KeyError:
        raise ConfigError(f"no tableau file or classic label {spec!r}",
                          field="--tableau")


def cmd_train(args) -> int:
    cfg, out_dir = _prepare(args, need_train=True)
    family = build_family(cfg.family)
    tc = build_train_config(cfg)
    report = train(tc, family)
    tab_path = out_dir / "tableau.json"
    rep_path = out_dir / "train_report.csv"
    save_tableau(tab_path, report.params, label=cfg.name)
    write_train_report(rep_path, report)
    _write_manifest(out_dir, "train", cfg, cfg.seed,
                    [tab_path.name, rep_path.name])
    print(f"trained {cfg.name}: {report.stopping_reason}, "
          f"final gamma={report.final_gamma:.6g} -> {tab_path}")
    return 0


def cmd_eval(args) -> int:
    cfg, out_dir = _prepare(args)
    family = build_family(cfg.family)
    grid = build_grid(cfg)
    integrator = _resolve_tableau(args.tableau)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    errs, gmean, fit = error_sweep(integrator, family, grid, rng)
    path = out_dir / f"{cfg.name}_eval.csv"
    write_error_csv(path, grid.h_values, errs, gmean, fit)
    _write_manifest(out_dir, "eval", cfg, cfg.seed, [path.name])
    print(f"eval {cfg.name}: slope={fit.slope:.4f} -> {path}")
    return 0


def cmd_compare(args) -> int:
    cfg, out_dir = _prepare(args)
    integrator = _resolve_tableau(args.tableau)
    ref_label = args.reference or cfg.eval.reference
    if ref_label == "auto":
        order = cfg.train.target_order if cfg.train else 3
        ref_label = {1: "euler", 2: "rk2", 3: "rk3"}.get(order, "rk4")
    reference = get_tableau(ref_label)
    variants = build_variants(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    reports = generalization_sweep(integrator, reference, variants, rng)
    outputs = []
    for name, _, _ in variants:
        path = out_dir / f"{cfg.name}_{name}.csv"
        write_sweep_csv(path, reports[name])
        outputs.append(path.name)
        gms = reports[name].ratio_gmean
        print(f"compare {cfg.name}/{name} vs {reference.label}: "
              f"ratio gmean range [{gms.min():.4g}, {gms.max():.4g}]")
    _write_manifest(out_dir, "compare", cfg, cfg.seed, outputs)
    return 0


def cmd_order_check(args) -> int:
    cfg, _ = _prepare(args)
    family = build_family(cfg.family)
    grid = build_grid(cfg)
    integrator = _resolve_tableau(args.tableau)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    _, _, fit = error_sweep(integrator, family, grid, rng)
    print(f"slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
          f"max_residual={fit.max_residual:.6g}")
    return 0


def cmd_bench_scaling(args) -> int:
    cfg, out_dir = _prepare(args)
    if cfg.scaling is None:
        raise ConfigError("required for this command", field="scaling")
    base = build_train_config(cfg) if cfg.train else None
    report = scaling_benchmark(
        cfg.scaling.dims, KIND_NAMES[cfg.scaling.kind], base=base,
        epochs=cfg.scaling.epochs, seed=cfg.seed,
    )
    path = out_dir / f"{cfg.name}_scaling.csv"
    write_scaling_csv(path, report)
    _write_manifest(out_dir, "bench-scaling", cfg, cfg.seed, [path.name])
    print(f"scaling exponent={report.exponent:.3f} "
          f"(within [0.5, 2.5]: {report.within_expected_range}) -> {path}")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rkadapt",
                                description="Learned Runge-Kutta integrators")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tableau=False, train_flags=False, reference=False):
        sp.add_argument("--config", required=True, help="experiment YAML")
        sp.add_argument("--seed", type=int, default=None, help="override seed")
        sp.add_argument("--out", default=None, help="override output directory")
        if tableau:
            sp.add_argument("--tableau", required=True,
                            help="tableau file or classic label (e.g. rk3)")
        if train_flags:
            sp.add_argument("--stages", type=int, default=None)
            sp.add_argument("--order", type=int, default=None)
        if reference:
            sp.add_argument("--reference", default=None,
                            help="classic reference label")

    common(sub.add_parser("train", help="learn a tableau"), train_flags=True)
    common(sub.add_parser("eval", help="global-error sweep"), tableau=True)
    common(sub.add_parser("compare", help="relative-error sweeps"),
           tableau=True, reference=True)
    common(sub.add_parser("order-check", help="print fitted slope"), tableau=True)
    common(sub.add_parser("bench-scaling", help="epoch-time scaling table"))
    return p


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "order-check": cmd_order_check,
    "bench-scaling": cmd_bench_scaling,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RkadaptError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
