"""Command line interface.

    spindetect <kind> (--config cfg.json | --preset figure1) [--out DIR]
               [--jobs N] [--no-shift] [--snapshots N] [--fields]
    spindetect validate (--config cfg.json | --preset figure1)

Exit codes: 0 success, 1 runtime failure (including partially failed
sweeps), 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import RUN_KINDS, config_from_file, load_preset, resolve_config
from .errors import ConfigurationError, SpindetectError

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spindetect",
        description="Arrival-time statistics of matter waves at a spin-flip "
                    "detector: discrete-bath scattering, complex-potential "
                    "propagation, rates, fluorescence analog, sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in RUN_KINDS + ("validate",):
        p = sub.add_parser(kind, help=f"{kind} run" if kind != "validate"
                           else "validate a config without running it")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", type=Path, metavar="PATH",
                         help="JSON config file (a manifest.json works too)")
        src.add_argument("--preset", metavar="NAME",
                         help="bundled preset name (e.g. figure1)")
        if kind != "validate":
            p.add_argument("--out", type=Path, default=Path("spindetect-out"),
                           metavar="DIR", help="output directory "
                           "(default: ./spindetect-out)")
            p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                           metavar="N", help="sweep worker processes")
            p.add_argument("--no-shift", action="store_true",
                           help="drop the real level shift from the potential")
            p.add_argument("--snapshots", type=int, metavar="N",
                           help="override the stored field snapshot count")
            p.add_argument("--fields", action="store_true",
                           help="also write field snapshot CSVs")
    return parser


def _load_config(args) -> dict:
    if args.preset is not None:
        return load_preset(args.preset)
    return config_from_file(args.config)


def _apply_flag_overrides(cfg: dict, args) -> dict:
    if getattr(args, "no_shift", False):
        cfg["include_shift"] = False
    snapshots = getattr(args, "snapshots", None)
    fields = getattr(args, "fields", False)
    if snapshots is not None or fields:
        cont = cfg.setdefault("numerics", {}).setdefault("continuum", {})
        if snapshots is not None:
            cont["snapshots"] = int(snapshots)
        if fields:
            cont["write_fields"] = True
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        raw = _load_config(args)
    except (OSError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        try:
            cfg = resolve_config(raw, require_kind=False)
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        label = cfg.get("label")
        print(f"config OK: kind={cfg.get('kind', 'unspecified')}"
              + (f" label={label}" if label else ""))
        return 0
    kind = args.command

    raw = _apply_flag_overrides(raw, args)
    try:
        cfg = resolve_config(raw, kind=kind)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    from .runner import run_config
    try:
        manifest = run_config(cfg, args.out, jobs=max(1, args.jobs))
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpindetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for name, fname in manifest["outputs"].items():
        print(f"wrote {Path(args.out) / fname}")
    print(f"wrote {Path(args.out) / 'manifest.json'}")
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if manifest["failed_sub_runs"]:
        print(f"error: {manifest['failed_sub_runs']} sweep sub-run(s) failed "
              "(see manifest.json)", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
