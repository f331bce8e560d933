"""Benchmark harness comparing static routing with teleport-aware compilation.

Every sample draws a random circuit and a random initial mapping from one
seed and runs both compilers on that identical pair.  Cells aggregate the
per-sample statistics as mean and sample standard deviation.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import multiprocessing
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from lsmove.circuit import random_circuit
from lsmove.router import route_static
from lsmove.routing_graph import build_layout
from lsmove.teleport_optimizer import AnnealConfig, compile_optimized

log = logging.getLogger(__name__)

CSV_HEADER = (
    "layout,q,g,dL,samples,dst_mean,dst_std,dopt_mean,dopt_std,"
    "rtilde_mean,rtilde_std,delta_mean,delta_std,delta_over_dst_mean"
).split(",")


class BenchError(RuntimeError):
    pass


@dataclass
class RunRecord:
    layout: str
    q: int
    g: int
    d_L: int
    seed: int
    d_st: int
    d_opt: int
    time_st: float
    time_opt: float

    @property
    def delta(self) -> int:
        return self.d_st - self.d_opt

    @property
    def rtilde(self) -> float | None:
        """Relative layer overhead; undefined when static routing meets the lower bound."""
        if self.d_st <= self.d_L:
            return None
        return (self.d_opt - self.d_L) / (self.d_st - self.d_L)


@dataclass
class AggregateRow:
    layout: str
    q: int
    g: int
    d_L: int
    samples: int
    dst_mean: float
    dst_std: float
    dopt_mean: float
    dopt_std: float
    rtilde_mean: float | None
    rtilde_std: float | None
    delta_mean: float
    delta_std: float
    delta_over_dst_mean: float
    note: str = ""

    def csv_row(self) -> list[str]:
        def fmt(x):
            if x is None:
                return "NA"
            if isinstance(x, float):
                return f"{x:.6g}"
            return str(x)

        values = [
            self.layout, self.q, self.g, self.d_L, self.samples,
            self.dst_mean, self.dst_std, self.dopt_mean, self.dopt_std,
            self.rtilde_mean, self.rtilde_std, self.delta_mean, self.delta_std,
            self.delta_over_dst_mean,
        ]
        return [fmt(v) for v in values]


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if len(arr) == 0:
        return math.nan, math.nan
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def aggregate(records: Sequence[RunRecord], note: str = "") -> AggregateRow:
    if not records:
        raise ValueError("nothing to aggregate")
    first = records[0]
    dst = _mean_std([r.d_st for r in records])
    dopt = _mean_std([r.d_opt for r in records])
    delta = _mean_std([r.delta for r in records])
    ratios = [r.rtilde for r in records if r.rtilde is not None]
    rt = _mean_std(ratios) if ratios else (None, None)
    return AggregateRow(
        layout=first.layout,
        q=first.q,
        g=first.g,
        d_L=first.d_L,
        samples=len(records),
        dst_mean=dst[0],
        dst_std=dst[1],
        dopt_mean=dopt[0],
        dopt_std=dopt[1],
        rtilde_mean=rt[0],
        rtilde_std=rt[1],
        delta_mean=delta[0],
        delta_std=delta[1],
        delta_over_dst_mean=float(np.mean([r.delta / r.d_st for r in records])),
        note=note,
    )


def run_sample(layout: str, q: int, g: int, d_L: int, seed: int, cfg: AnnealConfig | None = None) -> RunRecord:
    """Compile one seeded circuit/mapping pair with both compilers."""
    cfg = replace(cfg or AnnealConfig(), seed=seed)
    try:
        graph, mapping = build_layout(layout, q, seed)
        circuit = random_circuit(q, g, d_L, seed)
        t0 = time.perf_counter()
        d_st = route_static(graph, mapping, circuit).depth
        t1 = time.perf_counter()
        d_opt = compile_optimized(graph, mapping, circuit, cfg).depth
        t2 = time.perf_counter()
    except Exception as exc:
        raise BenchError(f"layout={layout} q={q} g={g} d_L={d_L} seed={seed}: {exc}") from exc
    rec = RunRecord(layout, q, g, d_L, seed, d_st, d_opt, t1 - t0, t2 - t1)
    if d_opt > d_st:
        log.warning("finding: optimized depth %d exceeds static depth %d (%s)", d_opt, d_st, asdict(rec))
    return rec


def _run_task(task: tuple) -> RunRecord:
    return run_sample(*task)


def _execute(tasks: list[tuple], jobs: int, progress: Callable[[RunRecord], None] | None) -> list[RunRecord]:
    out = []
    if jobs > 1:
        with multiprocessing.Pool(jobs) as pool:
            for rec in pool.imap(_run_task, tasks):
                out.append(rec)
                if progress:
                    progress(rec)
    else:
        for task in tasks:
            rec = _run_task(task)
            out.append(rec)
            if progress:
                progress(rec)
    return out


def run_grid(
    layouts: Iterable[str],
    depths: Iterable[int],
    q: int = 120,
    g: int = 8,
    samples: int = 10,
    cfg: AnnealConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
    progress: Callable[[RunRecord], None] | None = None,
) -> tuple[list[AggregateRow], list[RunRecord]]:
    """Layout x depth grid; sample ``i`` of every cell uses seed ``seed + i``.

    Returns:
        One aggregate row per (layout, depth) cell in input order, and the
        raw records.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    cells = [(layout, d_L) for layout in layouts for d_L in depths]
    tasks = [(layout, q, g, d_L, seed + i, cfg) for layout, d_L in cells for i in range(samples)]
    records = _execute(tasks, jobs, progress)
    rows = [aggregate(records[k * samples : (k + 1) * samples]) for k in range(len(cells))]
    return rows, records


def run_density_sweep(
    g_values: Iterable[int],
    G_total: int = 500,
    q: int = 60,
    layout: str = "triple",
    samples: int = 10,
    cfg: AnnealConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
    progress: Callable[[RunRecord], None] | None = None,
) -> tuple[list[AggregateRow], list[RunRecord]]:
    """Vary gates per layer at a fixed total gate count.

    When ``g`` does not divide ``G_total`` the depth is rounded up and the
    row's ``note`` records the adjusted gate count.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    g_values = list(g_values)
    for g in g_values:
        if g < 1 or 2 * g > q:
            raise ValueError(f"g={g} does not fit {q} qubits")
    plan = []
    for g in g_values:
        d_L = math.ceil(G_total / g)
        note = "" if g * d_L == G_total else f"G adjusted to {g * d_L}"
        plan.append((g, d_L, note))
    tasks = [(layout, q, g, d_L, seed + i, cfg) for g, d_L, _ in plan for i in range(samples)]
    records = _execute(tasks, jobs, progress)
    rows = [aggregate(records[k * samples : (k + 1) * samples], note) for k, (_, _, note) in enumerate(plan)]
    return rows, records


def linear_fit(points: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Ordinary least squares line through ``(x, y)`` points."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or len(pts) < 2 or len(np.unique(pts[:, 0])) < 2:
        raise ValueError("need at least two distinct abscissae")
    x, y = pts[:, 0], pts[:, 1]
    xm = x.mean()
    slope = float(((x - xm) * (y - y.mean())).sum() / ((x - xm) ** 2).sum())
    return slope, float(y.mean() - slope * xm)


def write_csv(rows: Sequence[AggregateRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_row())


def write_records(records: Sequence[RunRecord], path: str | Path, rows: Sequence[AggregateRow] = ()) -> None:
    payload = {
        "records": [asdict(r) for r in records],
        "notes": [{"layout": r.layout, "g": r.g, "dL": r.d_L, "note": r.note} for r in rows if r.note],
    }
    Path(path).write_text(json.dumps(payload, indent=1))
