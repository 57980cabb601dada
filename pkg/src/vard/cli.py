"""Command line entry point: ``vard --config run.json [--sweep-c 0.04,0.02]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, parse_config, with_overrides
from .run import EXIT_CONFIG, run_single, run_sweep


def _floats(text: str) -> list[float]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [float(t) for t in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vard", description="Normalized ground states for variable exponent problems.")
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides outputs.directory)")
    sweeps = ap.add_mutually_exclusive_group()
    sweeps.add_argument("--sweep-c", type=_floats, metavar="LIST", help="comma-separated mass levels")
    sweeps.add_argument("--sweep-sigma", type=_floats, metavar="LIST", help="comma-separated ball radii")
    sweeps.add_argument("--sweep-r0", type=_floats, metavar="LIST", help="comma-separated class-P radii")
    ap.add_argument("--figures", action="store_true", help="also write PNG figures (needs matplotlib)")
    ap.add_argument("--quiet", action="store_true", help="suppress console summary")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config)
        figures = args.figures or bool(cfg.outputs.get("figures"))
        sweep = None
        for kind in ("c", "sigma", "r0"):
            vals = getattr(args, f"sweep_{kind}")
            if vals is not None:
                sweep = (kind, vals)
        if sweep is None and len(cfg.c_values) > 1:
            sweep = ("c", cfg.c_values)
        if sweep is None:
            return run_single(cfg, args.out, figures=figures, quiet=args.quiet)
        kind, vals = sweep
        if not vals:
            raise ConfigError(f"--sweep-{kind} list is empty")
        if kind == "c":
            cfg = with_overrides(cfg, {"solve.c": vals[0]})
        code, _ = run_sweep(cfg, kind, vals, args.out, figures=figures, quiet=args.quiet)
        return code
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
