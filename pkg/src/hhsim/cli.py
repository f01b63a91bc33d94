"""Command-line interface.

Exit codes: 0 success, 1 runtime/numerical failure, 2 configuration error.
On failure an error.json with {"error", "message"} is written to the output
directory when one is known.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ConfigError, NumericsError
from .observables import total_ionization
from .scenarios import (
    ScenarioConfig,
    dump_config,
    load_config,
    preset_config,
    presets,
    relax_scenario,
    run_scenario,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhsim",
        description="Quantum dynamics of two distant 1D hydrogen atoms in shaped laser fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--config", type=Path, help="INI config file")
        p.add_argument("--preset", help="preset name (see `hhsim presets`)")
        if with_out:
            p.add_argument("--out", type=Path, default=Path("hhsim-out"), help="output directory")
        p.add_argument("--threads", type=int, help="FFT worker threads")
        p.add_argument("--frozen-r", action="store_true", help="clamp R at its initial value")
        p.add_argument("--duration-fs", type=float, help="total propagation time in fs")

    run_p = sub.add_parser("run", help="relax and propagate a full scenario")
    add_common(run_p)
    run_p.add_argument(
        "--initial", type=Path,
        help="reuse a stored wavefunction snapshot instead of relaxing",
    )
    add_common(sub.add_parser("relax", help="produce and store the initial state"))
    add_common(sub.add_parser("validate", help="parse and validate a config"), with_out=False)
    sub.add_parser("presets", help="list available presets")
    return parser


def _resolve_config(args) -> ScenarioConfig:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        cfg = preset_config(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    else:
        cfg = ScenarioConfig()
    overrides = {}
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        overrides["workers"] = args.threads
    if args.frozen_r:
        overrides["frozen_r"] = True
    if args.duration_fs is not None:
        if args.duration_fs <= 0:
            raise ConfigError("--duration-fs must be positive")
        overrides["duration_fs"] = args.duration_fs
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _write_error(out_dir: Path | None, exc: Exception) -> None:
    if out_dir is None:
        return
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2)
        )
    except OSError:
        pass


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "presets":
        for name in presets():
            print(name)
        return 0

    out_dir = getattr(args, "out", None)
    try:
        cfg = _resolve_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        _write_error(out_dir, exc)
        return 2

    if args.command == "validate":
        print(dump_config(cfg), end="")
        return 0

    try:
        if args.command == "relax":
            path, energy = relax_scenario(cfg, out_dir)
            print(f"initial state written to {path}")
            print(f"relaxed energy: {energy:.8f} a.u.")
            return 0
        art = run_scenario(cfg, out_dir, initial_state=args.initial)
        rec = art.result.record
        acc = art.result.accumulators
        i_a, i_b = total_ionization(acc)
        print(f"run complete: {len(rec)} rows -> {art.record_csv}")
        if args.initial is None:
            print(f"relaxed energy: {art.relax_energy:.8f} a.u.")
        else:
            print(f"initial state reused from {args.initial}")
        print(f"final survival probability: {rec.last('norm'):.6f}")
        print(f"ionization: I_A={i_a:.4e} I_B={i_b:.4e}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        _write_error(out_dir, exc)
        return 2
    except (NumericsError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        _write_error(out_dir, exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
