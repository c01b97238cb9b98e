"""Command-line entry point: ``optrec rate|compare-reg|noisy|cheb-demo|recover``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import DegenerateCertificate, DomainError, InvalidArgument, NumericalFailure, UnsupportedParameter
from . import experiments
from .config import ExperimentConfig
from .reports import ChebDemoReport

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

COMMANDS = {
    "rate": "rate",
    "compare-reg": "compare_reg",
    "noisy": "noisy",
    "cheb-demo": "cheb_demo",
    "recover": "recover",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _m_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad m list {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="optrec", description="Recovery experiments over spline spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
        p.add_argument("--target", help="quarter_sqrt, linear, constant:<v> or spline:<path>")
        p.add_argument("--p", type=float)
        p.add_argument("--m", type=_m_list, dest="m_list", help="comma-separated sample counts")
        p.add_argument("--n", type=int)
        p.add_argument("--mu", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--tau", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--seed", type=_u64)
        p.add_argument("--schedule", choices=("practical", "theoretical"))
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out", type=Path, dest="output")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise InvalidArgument(f"cannot read config: {exc}") from None
        base = ExperimentConfig.from_json(text).to_dict()
    base["experiment"] = COMMANDS[args.command]
    for key in ("target", "p", "m_list", "n", "mu", "alpha", "beta", "tau", "gamma", "seed", "schedule",
                "format"):
        v = getattr(args, key)
        if v is not None:
            base[key] = v
    if args.output is not None:
        base["output"] = str(args.output)
    if (args.n is not None or args.mu is not None) and args.schedule is None:
        base["schedule"] = "explicit"
    return ExperimentConfig.from_dict(base)


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _emit_cheb(report: ChebDemoReport, cfg: ExperimentConfig) -> None:
    from ..chebyshev import curve_to_csv, slice_curve_to_csv

    if cfg.format == "json":
        _write(report.to_json() + "\n", cfg.output)
        return
    if cfg.output is None:
        sys.stdout.write(slice_curve_to_csv(report.slice_rows))
        for w, rows in report.inflated.items():
            sys.stdout.write(f"# inflated w_hat={w!r}\n")
            sys.stdout.write(curve_to_csv(rows))
        return
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "slice.csv").write_text(slice_curve_to_csv(report.slice_rows))
    for w, rows in report.inflated.items():
        (out / f"inflated_w{w!r}.csv").write_text(curve_to_csv(rows))


def emit(report, cfg: ExperimentConfig) -> None:
    if isinstance(report, ChebDemoReport):
        _emit_cheb(report, cfg)
        return
    text = report.to_json() + "\n" if cfg.format == "json" else report.to_csv()
    _write(text, cfg.output)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO if args.verbose or os.environ.get("OPTREC_VERBOSE") else logging.WARNING
    logging.basicConfig(level=level, format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report = experiments.run(cfg)
        emit(report, cfg)
    except NumericalFailure as exc:
        print(f"optrec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidArgument, UnsupportedParameter, DomainError, DegenerateCertificate, TypeError) as exc:
        print(f"optrec: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"optrec: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
