"""Command line entry point.

Usage:
    insider-default figure1 --out out/
    insider-default figure2 --out out/ --svg
    insider-default sweep --param delta --values 0,0.1,0.3,0.5 --gamma=0.5 --workers 4
    insider-default unbounded --psi 1,5,25,125 --n 100000
    insider-default verify --n 100000
    insider-default verify --terminal over_p      # fault injection, must fail

Any model key can be overridden with ``--key=value`` (mu0, sigma0, gamma,
T, p, delta, lambda, x0, profile.kind); command-line overrides win over
``--config``, which wins over the figure's own parameter choices.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .before_default import TERMINAL_VARIANTS
from .experiments import (
    AUTO,
    ExperimentSpec,
    run_figure,
    run_sweep,
    run_unbounded,
    write_atomic,
    write_manifest,
)
from .market import CONFIG_KEYS, ModelValidationError, load_config, model_from_mapping
from .verify import VerifyOptions, run_verify

COMMANDS = ("figure1", "figure2", "figure3", "figure4", "sweep", "verify", "unbounded")
OVERRIDE_KEYS = CONFIG_KEYS + ("profile.kind",)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text}")
    return value


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _barrier(text: str) -> float | str | None:
    if text.lower() in ("none", "never"):
        return None
    if text.lower() == AUTO:
        return AUTO
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("barrier level must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="insider-default",
        description="Insider, investor and Merton portfolios under a default with a hidden barrier.",
        epilog="Model keys are overridden with --key=value, e.g. --lambda=0.5 --gamma=0.5.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="JSON configuration file")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    ap.add_argument("--seed", type=_u64, default=0)
    ap.add_argument("--n", type=_u64, default=100_000, help="Monte Carlo sample count")
    ap.add_argument("--svg", action="store_true", help="also render SVG line plots (needs matplotlib)")
    ap.add_argument("--barrier", type=_barrier, default=AUTO,
                    help="figures 1-3: scenario barrier level (default at barrier/lambda), 'none' for no "
                         "default, or 'auto' for a mid-horizon default at the figure's own intensity")
    ap.add_argument("--param", default="gamma", help="sweep: model key to vary")
    ap.add_argument("--values", type=_floats, default=[0.1, 0.3, 0.5], help="sweep: comma-separated values")
    ap.add_argument("--investor-floor", action="store_true",
                    help="sweep: give the investor the insider's short-sale floor")
    ap.add_argument("--workers", type=int, default=1, help="sweep: parallel worker processes")
    ap.add_argument("--psi", type=_floats, default=[1.0, 5.0, 25.0, 125.0], help="unbounded: short sizes")
    ap.add_argument("--terminal", choices=TERMINAL_VARIANTS, default="corrected",
                    help="verify: insider terminal condition (over_p injects a known fault)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def parse_overrides(extra: list[str]) -> dict[str, object]:
    out: dict[str, object] = {}
    for item in extra:
        if not item.startswith("--") or "=" not in item:
            raise ModelValidationError([f"unrecognised argument {item!r} (use --key=value)"])
        key, value = item[2:].split("=", 1)
        if key not in OVERRIDE_KEYS:
            raise ModelValidationError([f"unknown model key {key!r}; expected one of {', '.join(OVERRIDE_KEYS)}"])
        if key == "profile.kind":
            out[key] = value
            continue
        try:
            out[key] = float(value)
        except ValueError:
            raise ModelValidationError([f"--{key} needs a number, got {value!r}"]) from None
    return out


def make_spec(args: argparse.Namespace, extra: list[str]) -> ExperimentSpec:
    overrides = dict(load_config(args.config)) if args.config else {}
    overrides.update(parse_overrides(extra))
    model_from_mapping(overrides)  # fail early on invalid overrides
    extras = {}
    if args.command == "sweep":
        if args.param not in CONFIG_KEYS:
            raise ModelValidationError([f"cannot sweep {args.param!r}"])
        extras = {"param": args.param, "values": args.values, "investor_floor": args.investor_floor,
                  "workers": args.workers}
    elif args.command == "unbounded":
        extras = {"psis": args.psi}
    elif args.command == "verify":
        extras = {"terminal": args.terminal}
    return ExperimentSpec(args.command, overrides, args.out, args.seed, args.n, args.svg, args.barrier, extras)


def _verify(spec: ExperimentSpec) -> int:
    model = spec.model()
    report = run_verify(model, VerifyOptions(n=spec.n, seed=spec.seed, terminal=spec.extra["terminal"]))
    text = report.text()
    sys.stdout.write(text)
    path = Path(spec.out_dir) / "verify_report.txt"
    write_atomic(path, text)
    write_manifest(spec, {"model": model}, [path], {
        "passed": report.ok,
        "failures": [c.name for c in report.failures],
    })
    return 0 if report.ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        spec = make_spec(args, extra)
    except ModelValidationError as exc:
        parser.error(str(exc))
    except (OSError, ValueError) as exc:
        parser.error(f"could not read configuration: {exc}")
    try:
        if args.command == "verify":
            return _verify(spec)
        if args.command == "sweep":
            run_sweep(spec)
        elif args.command == "unbounded":
            run_unbounded(spec)
        else:
            run_figure(int(args.command[-1]), spec)
    except OSError as exc:
        print(f"insider-default: I/O error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.command} outputs to {spec.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
