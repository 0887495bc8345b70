"""Command-line experiment driver.

Subcommands: ``run`` streams a synthetic or file-backed input through one
(or all) filters and writes checkpointed CSV reports; ``theory`` sweeps an
analytical recurrence; ``choose-k`` prints the partition-count rule;
``compare`` joins reports into one wide CSV for plotting.

Flags may also be supplied through ``--config FILE`` holding ``key=value``
lines with the same names (underscores or dashes); explicit flags win. The
``DEDUP_SEED`` environment variable supplies the default seed. Exit codes:
0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .experiment import (
    ExperimentConfig,
    compare_reports,
    run_experiment,
    theory_sweep,
    write_theory_csv,
)
from .filters import ALGORITHMS, FilterConfig
from .streams import MODES, StreamSpec
from .theory import choose_k, k_formula

_RUN_ALGOS = list(ALGORITHMS) + ["all"]
_THEORY_ALGOS = ["rsbf", "bsbf", "bsbfsd", "rlbsbf"]


def _default_seed() -> int:
    return int(os.environ.get("DEDUP_SEED", "0"))


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="stream an input through one or all filters")
    p.add_argument("--algo", choices=_RUN_ALGOS, default="bsbf")
    p.add_argument("--memory-bits", type=int, default=1 << 20)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--fpr-threshold", type=float, default=0.1)
    p.add_argument("--pstar", type=float, default=0.03)
    p.add_argument("--mode", choices=MODES, default="controlled")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--universe", type=int, default=1 << 20,
                   help="universe size for uniform mode")
    p.add_argument("--distinct", type=float, default=0.6,
                   help="distinct fraction for controlled mode")
    p.add_argument("--path", help="record file for file mode")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report-interval", type=int, default=10_000)
    p.add_argument("--windowed", type=int, default=None,
                   help="also write per-window rates at this interval")
    p.add_argument("--out", required=True)


def _add_theory_parser(sub) -> None:
    p = sub.add_parser("theory", help="sweep an analytical recurrence")
    p.add_argument("--algo", choices=_THEORY_ALGOS, default="bsbf")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--s", type=int, required=True, help="bits per partition")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--universe", type=int, default=1 << 20)
    p.add_argument("--pstar", type=float, default=0.03)
    p.add_argument("--load-trajectory",
                   help="file of per-arrival expected loads (rlbsbf only)")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dedup",
        description="streaming duplicate-detection experiments",
    )
    parser.add_argument("--config", help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_theory_parser(sub)
    p = sub.add_parser("choose-k", help="partition-count selection rule")
    p.add_argument("--fpr-threshold", type=float, default=0.1)
    p = sub.add_parser("compare", help="join reports on their checkpoint grid")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", required=True)
    parser._dedup_subparsers = sub.choices  # for config-file defaults
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        parser.error("--config needs a file argument")
    path = argv[idx + 1]
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    converters = {
        "memory_bits": int, "k": int, "n": int, "universe": int,
        "report_interval": int, "windowed": int, "seed": int, "m_max": int,
        "s": int, "fpr_threshold": float, "pstar": float, "distinct": float,
    }
    typed = {}
    for key, value in values.items():
        try:
            typed[key] = converters.get(key, str)(value)
        except ValueError:
            parser.error(f"{path}: bad value for {key}: {value!r}")
    for subparser in parser._dedup_subparsers.values():
        known = {a.dest for a in subparser._actions}
        subparser.set_defaults(**{k: v for k, v in typed.items() if k in known})


def _cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    stream = StreamSpec(
        mode=args.mode,
        n=args.n,
        universe_size=args.universe,
        distinct_fraction=args.distinct,
        path=args.path,
        seed=seed,
    )
    algos = list(ALGORITHMS) if args.algo == "all" else [args.algo]
    config = ExperimentConfig(
        algorithms=algos,
        filter_config=FilterConfig(
            algorithm=algos[0],
            memory_bits=args.memory_bits,
            k=args.k,
            fpr_threshold=args.fpr_threshold,
            pstar=args.pstar,
            seed=seed,
        ),
        stream=stream,
        report_interval=args.report_interval,
        windowed=args.windowed,
        out=args.out,
    )
    for path in run_experiment(config):
        print(path)
    return 0


def _cmd_theory(args) -> int:
    trajectory = None
    if args.algo == "rlbsbf":
        if not args.load_trajectory:
            raise UsageError("rlbsbf theory requires --load-trajectory")
        trajectory = np.loadtxt(args.load_trajectory, dtype=np.float64, ndmin=1)
    rows = theory_sweep(
        args.algo, args.k, args.s, args.m_max, args.universe,
        pstar=args.pstar, load_trajectory=trajectory,
    )
    print(write_theory_csv(args.out, rows))
    return 0


def _cmd_choose_k(args) -> int:
    kf = k_formula(args.fpr_threshold)
    print(f"k_formula={kf:.6g} k={choose_k(args.fpr_threshold)}")
    return 0


class UsageError(Exception):
    pass


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            if args.mode == "file" and not args.path:
                parser.error("file mode requires --path")
            return _cmd_run(args)
        if args.command == "theory":
            return _cmd_theory(args)
        if args.command == "choose-k":
            return _cmd_choose_k(args)
        if args.command == "compare":
            print(compare_reports(args.reports, args.out))
            return 0
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError) as exc:
        print(f"dedup: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
