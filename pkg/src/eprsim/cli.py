"""Command-line interface: ``eprsim {sweep,chsh,sphi,reference}``.

Exit codes: 0 success, 2 configuration error, 3 no-data error.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path
from typing import Sequence

from . import output
from .engine import RunConfig, SweepSpec, run_sweep
from .model import ConfigError
from .reference import LABELS, reference_curve
from .statistics import NoDataError, chsh_experiment, phi_grid, s_phi_curve

EXIT_CONFIG = 2
EXIT_NO_DATA = 3

_ANGLE_RE = re.compile(
    r"""^\s*
    (?:
      (?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
      |
      (?P<coef>[-+]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+\.?\d*))?
    )
    \s*(?P<unit>rad|deg)?\s*$""",
    re.VERBOSE,
)

# options that shape results and are echoed into every output file
_ECHO = {
    "sweep": ("pairs", "threshold", "decoherence", "beta", "sweep_start", "sweep_stop", "sweep_step", "runs", "seed"),
    "chsh": ("pairs", "threshold_grid", "decoherence", "runs", "seed"),
    "sphi": ("pairs", "threshold", "threshold_grid", "decoherence", "beta", "runs", "phi_steps", "seed"),
    "reference": ("model", "pairs", "deltas", "sweep_start", "sweep_stop", "sweep_step", "quadrature_steps"),
}


def parse_angle(text: str) -> float:
    """Angle in radians from ``0.3``, ``0.3rad``, ``22.5deg``, ``pi/100`` or ``2*pi``."""
    m = _ANGLE_RE.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    if m.group("num") is not None:
        value = float(m.group("num"))
    else:
        coef = m.group("coef")
        value = (float(coef) if coef not in (None, "", "+", "-") else (-1.0 if coef == "-" else 1.0)) * math.pi
        if m.group("den"):
            value /= float(m.group("den"))
    if m.group("unit") == "deg":
        value = math.radians(value)
    return value


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive of ``stop`` when it lands on the grid) or ``a,b,c``."""
    if "," in str(text) or ":" not in str(text):
        try:
            return [float(x) for x in str(text).split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None
    try:
        start, stop, step = (float(x) for x in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"grid needs step > 0 and stop >= start, got {text!r}")
    n = math.floor((stop - start) / step + 1e-9)
    return [round(start + i * step, 12) for i in range(n + 1)]


def parse_angle_list(text: str) -> list[float]:
    return [parse_angle(t) for t in str(text).split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser, runs_default: int) -> None:
    p.add_argument("--pairs", type=int, default=10000, help="photon pairs per setting")
    p.add_argument("--threshold", type=float, default=0.0, help="PBS dead band half-width, in [0, 0.5)")
    p.add_argument("--decoherence", type=float, default=0.0, help="decoherence fraction d in [0, 1]")
    p.add_argument("--beta", type=parse_angle, default=0.0, help="fixed polarizer-2 angle (rad or deg suffix)")
    p.add_argument("--runs", type=int, default=runs_default, help="independent repetitions")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (required)")
    _add_io(p)


def _add_sweep(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sweep-start", type=parse_angle, default=0.0)
    p.add_argument("--sweep-stop", type=parse_angle, default=math.pi)
    p.add_argument("--sweep-step", type=parse_angle, default=math.pi / 100)


def _add_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers; never changes results")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None, help="override EPRSIM_BACKEND")
    p.add_argument("--config", type=Path, default=None, help="key = value file of flag defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprsim",
        description="Monte Carlo simulation of EPR photon-pair correlations in a local hidden-variables model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="N++ coincidence curve over a polarizer-1 sweep, plus visibility")
    _add_common(p, runs_default=1)
    _add_sweep(p)

    p = sub.add_parser("chsh", help="CHSH statistic over a threshold grid")
    _add_common(p, runs_default=10)
    p.add_argument("--threshold-grid", type=parse_grid, default=parse_grid("0:0.2:0.02"), help="start:stop:step")

    p = sub.add_parser("sphi", help="S(phi) = 3E(phi) - E(3phi) curves")
    _add_common(p, runs_default=1)
    p.add_argument("--threshold-grid", type=parse_grid, default=None, help="start:stop:step (overrides --threshold)")
    p.add_argument("--phi-steps", type=int, default=50, help="phi grid k*(pi/2)/steps, k=1..steps-1")

    p = sub.add_parser("reference", help="analytic reference curves")
    p.add_argument("--model", required=True, choices=LABELS)
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--deltas", type=parse_angle_list, default=None, help="comma-separated angles (else the sweep spec)")
    p.add_argument("--quadrature-steps", type=int, default=10000)
    _add_sweep(p)
    _add_io(p)
    return parser


def read_config_file(path: Path) -> dict[str, str]:
    """``key = value`` lines; keys are flag names without leading dashes."""
    out: dict[str, str] = {}
    for n, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    values = read_config_file(args.config)
    # re-parse with file values as defaults so explicit flags still win
    file_argv = []
    for key, value in values.items():
        file_argv += [f"--{key.replace('_', '-')}", value]
    return parser.parse_args([args.command, *file_argv, *argv[1:]])


def _check(args: argparse.Namespace) -> None:
    def bad(flag: str, msg: str) -> None:
        raise ConfigError(f"{flag} {msg}")

    if args.pairs < 1:
        bad("--pairs", f"must be >= 1, got {args.pairs}")
    if args.command == "reference":
        if args.quadrature_steps < 100:
            bad("--quadrature-steps", f"must be >= 100, got {args.quadrature_steps}")
        if args.deltas is None:
            _check_sweep(args)
        return
    if args.seed is None:
        bad("--seed", "is required")
    if not 0 <= args.seed < 2**64:
        bad("--seed", f"must be a 64-bit unsigned integer, got {args.seed}")
    if not 0.0 <= args.decoherence <= 1.0:
        bad("--decoherence", f"must be in [0, 1], got {args.decoherence}")
    if args.runs < 1:
        bad("--runs", f"must be >= 1, got {args.runs}")
    if args.command == "chsh" and args.runs < 2:
        bad("--runs", f"must be >= 2 for a CHSH spread, got {args.runs}")
    thresholds = [args.threshold]
    if getattr(args, "threshold_grid", None):
        thresholds = args.threshold_grid
        flag = "--threshold-grid"
    else:
        flag = "--threshold"
    for t in thresholds:
        if not 0.0 <= t < 0.5:
            bad(flag, f"values must be in [0, 0.5), got {t}")
    if args.command == "sweep":
        _check_sweep(args)
    if args.command == "sphi" and args.phi_steps < 2:
        bad("--phi-steps", f"must be >= 2, got {args.phi_steps}")


def _check_sweep(args: argparse.Namespace) -> None:
    if args.sweep_step <= 0:
        raise ConfigError(f"--sweep-step must be > 0, got {args.sweep_step}")
    if not args.sweep_start < args.sweep_stop:
        raise ConfigError(f"--sweep-stop must exceed --sweep-start, got {args.sweep_start} >= {args.sweep_stop}")


def echo_config(args: argparse.Namespace) -> dict:
    return {k: getattr(args, k) for k in _ECHO[args.command]}


def config_to_argv(command: str, config: dict) -> list[str]:
    """Flags that reproduce a run from its echoed configuration."""
    argv = [command]
    for key, value in config.items():
        if value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if key in ("threshold_grid", "deltas"):
            value = ",".join(repr(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        argv += [flag, str(value)]
    return argv


def _run_config(args: argparse.Namespace, **overrides) -> RunConfig:
    fields = dict(
        seed=args.seed,
        pairs_per_setting=args.pairs,
        decoherence=args.decoherence,
        threshold=args.threshold,
        beta=args.beta,
        runs=args.runs,
    )
    if args.command == "sweep":
        fields["sweep"] = SweepSpec(args.sweep_start, args.sweep_stop, args.sweep_step)
    fields.update(overrides)
    return RunConfig(**fields)


def render(args: argparse.Namespace) -> list[tuple[Path | None, str]]:
    """Compute every result for ``args`` and return ``(path, text)`` pairs."""
    cfg = echo_config(args)
    fmt = args.format
    kw = dict(workers=args.workers, backend=args.backend)

    if args.command == "sweep":
        rc = _run_config(args)
        curves = [run_sweep(rc, k, **kw) for k in range(rc.runs)]
        if fmt == "json":
            return [(args.out, output.sweep_json(cfg, curves))]
        if len(curves) == 1 or args.out is None:
            return [(args.out, "".join(output.sweep_csv(cfg, c) for c in curves))]
        return [
            (args.out.with_name(f"{args.out.stem}.run{c.run_index}{args.out.suffix}"), output.sweep_csv(cfg, c))
            for c in curves
        ]

    if args.command == "chsh":
        rows = []
        for t in args.threshold_grid:
            report = chsh_experiment(_run_config(args, threshold=t), **kw)
            rows.append(output.chsh_row(t, args.decoherence, args.pairs, report))
        text = output.chsh_json(cfg, rows) if fmt == "json" else output.chsh_csv(cfg, rows)
        return [(args.out, text)]

    if args.command == "sphi":
        phis = phi_grid(args.phi_steps)
        thresholds = args.threshold_grid or [args.threshold]
        curves = [(t, s_phi_curve(_run_config(args, threshold=t), phis, **kw)) for t in thresholds]
        text = output.sphi_json(cfg, curves) if fmt == "json" else output.sphi_csv(cfg, curves)
        return [(args.out, text)]

    deltas = args.deltas
    if deltas is None:
        deltas = SweepSpec(args.sweep_start, args.sweep_stop, args.sweep_step).alphas()
    curve = reference_curve(args.model, args.pairs, deltas, args.quadrature_steps)
    text = output.reference_json(cfg, curve) if fmt == "json" else output.reference_csv(cfg, curve)
    return [(args.out, text)]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        _check(args)
        results = render(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"eprsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoDataError as exc:
        print(f"eprsim: no data: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    # files are written only once every result is complete
    for path, text in results:
        if path is None:
            sys.stdout.write(text)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
