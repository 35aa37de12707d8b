"""Command-line interface.

Subcommands:
    run       single trajectory from a JSON config (defaults if omitted)
    sweep     parameter sweep from a JSON config (sweep axis required)
    fig       one of the named presets fig1..fig6
    validate  run the oracle suite (closed-form cross-checks)

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import ConfigError, NumericalFailure
from .experiments import (
    ExperimentConfig,
    PRESETS,
    fig_preset,
    run_experiment,
    validate_oracles,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stqsim",
        description="Dissipative entanglement dynamics of two coupled "
        "singlet-triplet qubits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--dt", type=float, default=None, help="override integrator step (ns)")
        p.add_argument("--markov", action="store_true", help="use the fixed-window memory integral")

    p_run = sub.add_parser("run", help="run a single trajectory")
    p_run.add_argument("--config", default=None, help="JSON config file")
    add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", required=True, help="JSON config file with a sweep axis")
    add_common(p_sweep)

    p_fig = sub.add_parser("fig", help="run a figure preset")
    p_fig.add_argument("name", help=f"one of {', '.join(PRESETS)}")
    add_common(p_fig)

    sub.add_parser("validate", help="run the oracle suite")
    return parser


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    integ = cfg.integrator
    if args.dt is not None:
        integ = dataclasses.replace(
            integ, dt=args.dt, kernel_dtau=min(integ.kernel_dtau, args.dt / 2.0)
        )
    if args.markov:
        integ = dataclasses.replace(integ, markov_mode=True)
    return dataclasses.replace(cfg, integrator=integ)


def _report(records, out_dir: str, run_id: str) -> None:
    print(f"wrote {out_dir}/{run_id}/ ({len(records)} trajectory/ies)")
    failed = [r for r in records if r.error is not None]
    for rec in records:
        tag = " ".join(f"{k}={v:g}" for k, v in rec.point.items()) or "single run"
        if rec.error is None:
            s = rec.summary
            death = "none" if s["death_t_ns"] is None else f"{s['death_t_ns']:g} ns"
            print(
                f"  {tag}: max DDSE {s['max_ddse']:.4f} at {s['argmax_t_ns']:g} ns, "
                f"death {death}"
            )
        else:
            print(f"  {tag}: FAILED ({rec.error})")
    if failed:
        raise NumericalFailure(f"{len(failed)} sweep point(s) failed")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return 0 if validate_oracles() else 3
        if args.command == "fig":
            cfg = fig_preset(args.name)
        else:
            cfg = _load_config(args.config)
            if args.command == "sweep" and not cfg.sweep:
                raise ConfigError("sweep command needs a config with a sweep axis")
            if args.command == "run" and cfg.sweep:
                raise ConfigError("run command got a sweep config; use the sweep command")
        cfg = _apply_overrides(cfg, args)
        records = run_experiment(cfg, args.out, threads=args.threads)
        _report(records, args.out, cfg.run_id)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
