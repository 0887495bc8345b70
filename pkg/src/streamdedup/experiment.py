"""Experiment engine behind the CLI: stream runs, theory sweeps, report joins.

Reports are CSV with the stable header

    m,algorithm,fp,fn,tp_dup,tn_dis,fpr_pct,fnr_pct,load_fraction,seed

preceded by ``#`` metadata comments that pin everything needed to reproduce
a run (stream recipe, filter parameters including derived ones, digest
scheme, rate denominators). One row is written per checkpoint plus a final
summary row at m = n; all numeric rates carry 6 significant digits and a
rerun of the same configuration is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import theory
from .filters import ALGORITHMS, FilterConfig, StableBloomFilter, Verdict, make_filter
from .metrics import ExactOracle
from .streams import StreamSpec, ingest_file, synthetic_ids
from .validation import check_positive_int, element_digests

REPORT_HEADER = (
    "m,algorithm,fp,fn,tp_dup,tn_dis,fpr_pct,fnr_pct,load_fraction,seed"
)
THEORY_HEADER = "m,X,Y,FPR,FNR"


@dataclass
class ExperimentConfig:
    """One harness invocation: which filters, which stream, how to report."""

    algorithms: list[str] = field(default_factory=lambda: ["bsbf"])
    filter_config: FilterConfig = field(default_factory=FilterConfig)
    stream: StreamSpec = field(default_factory=StreamSpec)
    report_interval: int = 10_000
    windowed: int | None = None
    out: str = "report.csv"

    def __post_init__(self):
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}")
        check_positive_int(self.report_interval, "report_interval")
        if self.windowed is not None:
            check_positive_int(self.windowed, "windowed")


@dataclass
class RunResult:
    """Per-element outcome of one filter over one stream."""

    algorithm: str
    truth: np.ndarray      # bool, ground-truth is-duplicate
    verdicts: np.ndarray   # bool, reported is-duplicate
    loads: np.ndarray      # int64, occupied slots after each element
    slots: int             # total slots (k*s, or cell count for sbf)
    seed: int
    metadata: dict


def stream_arrays(spec: StreamSpec) -> tuple[np.ndarray | list, np.ndarray]:
    """(elements, truth) for any stream mode.

    Synthetic modes return uint64 id arrays with vectorized exact labels;
    file mode returns the list of raw records labeled by an exact-bytes
    oracle.
    """
    if spec.mode in ("uniform", "controlled"):
        return synthetic_ids(spec)
    oracle = ExactOracle(storage="exact")
    elements: list[bytes] = []
    labels: list[bool] = []
    for record in ingest_file(spec.path):
        labels.append(oracle.label_and_record(record) is Verdict.DUPLICATE)
        elements.append(record)
    return elements, np.array(labels, dtype=bool)


def run_filter_over_stream(
    algorithm: str, filter_config: FilterConfig, elements, truth: np.ndarray
) -> RunResult:
    """Feed one stream through one freshly built filter."""
    cfg = FilterConfig(
        algorithm=algorithm,
        memory_bits=filter_config.memory_bits,
        k=filter_config.k,
        fpr_threshold=filter_config.fpr_threshold,
        pstar=filter_config.pstar,
        seed=filter_config.seed,
    )
    filt = make_filter(cfg)
    filt.reset()
    g1, g2 = element_digests(elements, filt.hashes_.seed)
    verdicts, loads = filt.process_digests(g1, g2)

    meta = {
        "algorithm": algorithm,
        "memory_bits": cfg.memory_bits,
        "k": cfg.k,
        "seed": cfg.seed,
    }
    if isinstance(filt, StableBloomFilter):
        slots = filt.n_cells_
        meta.update(
            counter_bits=filt.counter_bits,
            max_value=filt.max_value_,
            probes=cfg.k,
            decrements=filt.decrements_,
            fpr_threshold=cfg.fpr_threshold,
        )
    else:
        slots = filt.bits_.k * filt.bits_.s
        meta["s"] = filt.s_
        if algorithm == "rsbf":
            meta.update(pstar=cfg.pstar, phase3_start=filt.phase3_start_)
    return RunResult(
        algorithm=algorithm,
        truth=np.asarray(truth, dtype=bool),
        verdicts=verdicts.astype(bool),
        loads=loads,
        slots=slots,
        seed=cfg.seed,
        metadata=meta,
    )


def checkpoint_grid(n: int, interval: int) -> list[int]:
    grid = list(range(interval, n + 1, interval))
    return grid


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _rows_for(result: RunResult, marks: list[int], cumulative: bool) -> list[str]:
    truth = result.truth
    verdicts = result.verdicts
    fp_c = np.cumsum(~truth & verdicts)
    fn_c = np.cumsum(truth & ~verdicts)
    tp_c = np.cumsum(truth & verdicts)
    tn_c = np.cumsum(~truth & ~verdicts)
    rows = []
    prev = 0
    for m in marks:
        i = m - 1
        if cumulative:
            fp, fn, tp, tn = fp_c[i], fn_c[i], tp_c[i], tn_c[i]
        else:
            j = prev - 1
            fp = fp_c[i] - (fp_c[j] if prev else 0)
            fn = fn_c[i] - (fn_c[j] if prev else 0)
            tp = tp_c[i] - (tp_c[j] if prev else 0)
            tn = tn_c[i] - (tn_c[j] if prev else 0)
            prev = m
        fpr = 100.0 * fp / max(fp + tn, 1)
        fnr = 100.0 * fn / max(fn + tp, 1)
        lf = result.loads[i] / result.slots
        rows.append(
            f"{m},{result.algorithm},{fp},{fn},{tp},{tn},"
            f"{_fmt(fpr)},{_fmt(fnr)},{_fmt(lf)},{result.seed}"
        )
    return rows


def _metadata_lines(stream: StreamSpec, meta: dict) -> list[str]:
    if stream.mode == "file":
        stream_desc = f"mode=file path={stream.path}"
    elif stream.mode == "uniform":
        stream_desc = (
            f"mode=uniform n={stream.n} universe_size={stream.universe_size} "
            f"seed={stream.seed}"
        )
    else:
        stream_desc = (
            f"mode=controlled n={stream.n} "
            f"distinct_fraction={stream.distinct_fraction} seed={stream.seed}"
        )
    filter_desc = " ".join(f"{k}={v}" for k, v in meta.items())
    return [
        f"# stream: {stream_desc}",
        f"# filter: {filter_desc}",
        "# digest: seeded splitmix64 lane chain; positions by double hashing"
        " (g1 + i*g2|1 mod s)",
        "# rates: fpr_pct = 100*fp/(fp+tn_dis), fnr_pct = 100*fn/(fn+tp_dup);"
        " empty denominators report 0",
    ]


def write_report(
    path: str | Path,
    result: RunResult,
    stream: StreamSpec,
    report_interval: int,
    cumulative: bool = True,
) -> Path:
    n = len(result.truth)
    marks = checkpoint_grid(n, report_interval)
    lines = _metadata_lines(stream, result.metadata)
    lines.append(REPORT_HEADER)
    lines.extend(_rows_for(result, marks, cumulative))
    if cumulative:
        # summary row: the full-stream tally, equal to the last checkpoint
        # whenever the grid is aligned with n
        lines.extend(_rows_for(result, [n], cumulative=True))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _algo_out_path(out: str | Path, algorithm: str, multi: bool) -> Path:
    out = Path(out)
    if not multi:
        return out
    return out.with_name(f"{out.stem}.{algorithm}{out.suffix or '.csv'}")


def run_experiment(config: ExperimentConfig) -> list[Path]:
    """Run every configured algorithm over one shared stream; returns the
    written report paths (plus ``*.windowed.csv`` companions if requested)."""
    elements, truth = stream_arrays(config.stream)
    multi = len(config.algorithms) > 1
    written: list[Path] = []
    for name in config.algorithms:
        result = run_filter_over_stream(
            name, config.filter_config, elements, truth
        )
        out = _algo_out_path(config.out, name, multi)
        written.append(
            write_report(out, result, config.stream, config.report_interval)
        )
        if config.windowed:
            wpath = out.with_name(f"{out.stem}.windowed{out.suffix or '.csv'}")
            n = len(result.truth)
            marks = checkpoint_grid(n, config.windowed)
            lines = _metadata_lines(config.stream, result.metadata)
            lines.append(REPORT_HEADER)
            lines.extend(_rows_for(result, marks, cumulative=False))
            wpath.write_text("\n".join(lines) + "\n")
            written.append(wpath)
    return written


# -- theory sweeps ----------------------------------------------------------


def theory_sweep(
    algorithm: str,
    k: int,
    s: int,
    m_max: int,
    universe_size: int,
    pstar: float = 0.03,
    load_trajectory: np.ndarray | None = None,
) -> np.ndarray:
    """(m, X, Y, FPR, FNR) rows for one recurrence, m = 1..m_max."""
    if algorithm == "bsbf":
        X = theory.iterate_X_bsbf(k, s, m_max)
    elif algorithm == "bsbfsd":
        X = theory.iterate_X_bsbfsd(k, s, m_max)
    elif algorithm == "rsbf":
        X = theory.iterate_X_rsbf(k, s, pstar, m_max)
    elif algorithm == "rlbsbf":
        if load_trajectory is None:
            raise ValueError("rlbsbf theory needs a load trajectory")
        X = theory.iterate_X_rlbsbf(k, s, load_trajectory, m_max)
    else:
        raise ValueError(f"no recurrence for algorithm {algorithm!r}")
    m = np.arange(1, m_max + 1, dtype=np.float64)
    Y = ((universe_size - 1) / universe_size) ** (m - 1.0)
    fpr, fnr, _, _ = theory.rates_from_XY(X, Y)
    return np.column_stack([m, X, Y, fpr, fnr])


def write_theory_csv(path: str | Path, rows: np.ndarray) -> Path:
    lines = [THEORY_HEADER]
    for m, x, y, fpr, fnr in rows:
        lines.append(
            f"{int(m)},{_fmt(x)},{_fmt(y)},{_fmt(fpr)},{_fmt(fnr)}"
        )
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# -- report joining ---------------------------------------------------------


def read_report(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """(header fields, data rows) of one report; comment lines skipped."""
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: no header row found")
    return header, rows


def compare_reports(paths: list[str | Path], out: str | Path) -> Path:
    """Join reports on their checkpoint column into one wide CSV.

    All inputs must share the same m grid; offenders are named otherwise.
    """
    if not paths:
        raise ValueError("no reports to compare")
    parsed = []
    for p in paths:
        header, rows = read_report(p)
        if header != REPORT_HEADER.split(","):
            raise ValueError(f"{p}: unexpected header {','.join(header)}")
        grid = [r[0] for r in rows]
        algo = rows[0][1] if rows else "empty"
        parsed.append((Path(p), algo, grid, rows))
    ref_path, _, ref_grid, _ = parsed[0]
    bad = [str(p) for p, _, grid, _ in parsed if grid != ref_grid]
    if bad:
        raise ValueError(
            "checkpoint grids differ from "
            f"{ref_path}: {', '.join(bad)}"
        )
    names: list[str] = []
    for _, algo, _, _ in parsed:
        name = algo
        i = 2
        while name in names:
            name = f"{algo}{i}"
            i += 1
        names.append(name)
    value_fields = REPORT_HEADER.split(",")[2:]  # drop m, algorithm
    header = ["m"]
    for name in names:
        header.extend(f"{name}_{f}" for f in value_fields)
    lines = [",".join(header)]
    for i, m in enumerate(ref_grid):
        row = [m]
        for _, _, _, rows in parsed:
            row.extend(rows[i][2:])
        lines.append(",".join(row))
    out = Path(out)
    out.write_text("\n".join(lines) + "\n")
    return out
