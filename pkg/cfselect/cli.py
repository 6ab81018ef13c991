"""Command line entry point: threshold tables, benchmarks and single-channel runs."""
import argparse
import logging
import sys
from logging import getLogger
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from cfselect.selector_constructor import create_selector
from cfselect.src.bench import (
    run_complexity_experiment,
    run_rate_experiment,
    scaling_check,
    write_csv,
)
from cfselect.src.exceptions import (
    BudgetExceededError,
    CfSelectError,
    ConfigError,
)
from cfselect.src.models import ALGORITHM_NAMES, Channel, ExperimentConfig
from cfselect.src.thresholds import build_table, parse, serialize

log = getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
DEFAULT_SNR_GRID = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
DEFAULT_TABLE_BINS = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0)


def parse_channel(text: str) -> np.ndarray:
    """Parses "re,im;re,im;..." into a complex vector."""
    gains = []
    for entry in text.split(";"):
        parts = entry.split(",")
        if len(parts) != 2:
            raise ConfigError(f"Channel entries are 're,im' pairs, got {entry!r}.")
        try:
            gains.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"Invalid channel entry {entry!r}.") from exc
    return np.array(gains, dtype=np.complex128)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ring", default="gaussian", help="gaussian or eisenstein")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)


def _add_experiment(parser: argparse.ArgumentParser) -> None:
    _add_common(parser)
    parser.add_argument("--users", type=int, default=5)
    parser.add_argument("--snr", type=float, nargs="+", default=list(DEFAULT_SNR_GRID))
    parser.add_argument(
        "--algorithms",
        nargs="+",
        default=["ex2", "ll", "clll", "linear"],
        choices=ALGORITHM_NAMES,
    )
    parser.add_argument("--table", type=Path, help="thresholds of the linear search")
    parser.add_argument("--budget", type=float, default=1e8)
    parser.add_argument("--out", type=Path, help="CSV path, stdout when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfselect",
        description="Coefficient selection for compute-and-forward relays.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    table = commands.add_parser("gen-table", help="build a threshold table")
    _add_common(table)
    table.add_argument("--users", type=int, nargs="+", default=[5, 8, 10])
    table.add_argument(
        "--snr-bins", type=float, nargs="+", default=list(DEFAULT_TABLE_BINS)
    )
    table.add_argument("--budget", type=float, default=5e9)
    table.add_argument("--table-out", type=Path)

    _add_experiment(commands.add_parser("rate-bench", help="mean rate per algorithm"))
    _add_experiment(commands.add_parser("flops-bench", help="mean flops per algorithm"))

    scaling = commands.add_parser("scaling-check", help="growth of candidate counts")
    _add_experiment(scaling)
    scaling.add_argument("--l-values", type=int, nargs="*", default=[])

    select = commands.add_parser("select", help="run every algorithm on one channel")
    select.add_argument("--ring", default="gaussian")
    select.add_argument("--h", required=True, help='"re,im;re,im;..."')
    select.add_argument("--snr-db", type=float, default=20.0)
    select.add_argument(
        "--algorithms",
        nargs="+",
        default=["ex2", "ll", "clll", "linear"],
        choices=ALGORITHM_NAMES,
    )
    select.add_argument("--table", type=Path)
    return parser


def _config(args: argparse.Namespace, count_flops: bool = False) -> ExperimentConfig:
    return ExperimentConfig(
        ring=args.ring,
        users=args.users,
        snr_points_db=tuple(args.snr),
        trials=args.trials,
        seed=args.seed,
        algorithms=tuple(args.algorithms),
        table_path=args.table,
        count_flops=count_flops,
        budget=args.budget,
    )


def _emit(text: str, path: Path | None, stream: TextIO) -> None:
    if path is None:
        stream.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _run_command(args: argparse.Namespace, stream: TextIO) -> None:
    if args.command == "gen-table":
        table = build_table(
            args.ring, args.users, args.snr_bins, args.trials, args.seed, args.budget
        )
        if not table.complete:
            log.warning("Some bins exceeded the budget and fall back to exhaustive.")
        _emit(serialize(table), args.table_out, stream)
        return

    if args.command in ("rate-bench", "flops-bench"):
        counting = args.command == "flops-bench"
        config = _config(args, count_flops=counting)
        runner = run_complexity_experiment if counting else run_rate_experiment
        rows = runner(config)
        if args.out is None:
            write_csv(rows, stream)
        else:
            with args.out.open("w", encoding="utf-8", newline="") as file:
                write_csv(rows, file)
        return

    if args.command == "scaling-check":
        report = scaling_check(_config(args), args.l_values)
        slopes = {
            "snr_slope_ex2": report.ex2_snr_slope,
            "snr_slope_linear": report.linear_snr_slope,
            "l_slope_ex2_quantizations": report.ex2_l_slope,
        }
        lines = [
            f"{key},{value:.6g}" for key, value in slopes.items() if value is not None
        ]
        if report.linear_samples is not None:
            for snr_db, found, expected in zip(
                report.snr_db, report.linear_samples, report.expected_linear_samples
            ):
                lines.append(f"linear_samples_{snr_db:g}db,{found:.6g},{expected:.6g}")
        _emit("\n".join(lines) + "\n", args.out, stream)
        return

    ch = Channel.from_snr_db(parse_channel(args.h), args.snr_db)
    for name in args.algorithms:
        kwargs: dict[str, object] = {}
        if name == "linear" and args.table is not None:
            kwargs["table"] = parse(args.table.read_text(encoding="utf-8"))
        result = create_selector(name, args.ring, **kwargs).select(ch)
        stream.write(
            f"{name} {result.a_opt} {result.rate:.6f} {result.candidates_examined}\n"
        )


def main(argv: Sequence[str] | None = None, stream: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        _run_command(args, stream or sys.stdout)
    except BudgetExceededError as exc:
        log.error("%s", exc)
        return EXIT_BUDGET
    except (CfSelectError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
