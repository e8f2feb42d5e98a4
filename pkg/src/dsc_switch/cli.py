"""Command-line entry point.

Exit codes: 0 success, 1 validation/usage error, 2 numeric or convergence error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import parse_config, parse_override, to_spec, to_toml
from .errors import NumericError, ValidationError
from .io import write_series_csv
from .observables import QUADRATURE_CONVENTION
from .scenarios import run_scenario

SUBCOMMANDS = {
    "simulate": None,
    "wigner": "wigner_snapshots",
    "switch": "pulse_switch",
    "sweep": "coupling_sweep",
    "parity-check": "parity_check",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dsc-switch",
        description="Three-level emitter + resonator dynamics in the deep-strong-coupling regime.",
    )
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="TOML run configuration")
        p.add_argument("--out", type=Path, help="output directory (default: output_dir key, else ./out)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--nmax", type=int, help="Fock truncation n_max")
        p.add_argument("--tmax", type=float, help="end time t_end in units of 1/omega_c")
    return parser


def _format_summary(summary: dict) -> str:
    parts = [
        f"samples={summary.get('samples')}",
        f"final_norm2={summary.get('final_norm2', float('nan')):.12g}",
        f"max_mean_photon={summary.get('max_mean_photon', float('nan')):.12g}",
    ]
    for key in ("commutator_h0_max_abs", "anticommutator_hd_max_abs",
                "coupling_e1_antisym0_re", "coupling_e2_antisym1_re", "max_odd_weight"):
        if key in summary:
            parts.append(f"{key}={summary[key]:.6g}")
    if summary.get("failed"):
        parts.append(f"failed_g={summary['failed']}")
    return " ".join(parts)


def run(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(argv)
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    overrides = [parse_override(item) for item in args.overrides]
    if args.nmax is not None:
        overrides.append(("n_max", args.nmax))
    if args.tmax is not None:
        overrides.append(("t_end", args.tmax))
    config = parse_config(text, overrides, kind=SUBCOMMANDS[args.command])

    result = run_scenario(to_spec(config))
    out_dir = args.out if args.out is not None else Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = to_toml(config)
    notes = [
        f"quadratures: {QUADRATURE_CONVENTION}",
        f"pulse_exponent_convention: {config.pulse_exponent_convention}",
        "pulse rotation angles (A cos(omega t_c) exp(-omega^2 tau^2/2)): "
        + ", ".join(repr(a) for a in result.metadata.get("pulse_rotation_angles", [])),
        "probabilities are taken from the unnormalized state (no renormalization under losses)",
    ]
    for name in sorted(result.artifacts):
        table = result.artifacts[name]
        write_series_csv(table, out_dir / f"{name}.csv", metadata=echo,
                         notes=[n for n in notes if n not in table.notes])
    print(_format_summary(result.summary))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return run(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
