"""Seeded Monte-Carlo risk engine, PRI tables and figure data.

Randomness
----------
Cell ``i`` of a grid uses seed ``substream(base_seed, i)``; replication ``m``
of a run seeded ``s`` draws its k×n sample from stream ``substream(s, m)``
(see :mod:`tsallisexp.streams`). All estimators in a cell are evaluated on
the same replications (common random numbers). Results therefore do not
depend on evaluation order or on the number of worker threads.

The table presets fix the grid layout (u, q, n); individual cell values
depend on the seed and are not meant to match any externally published run.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import streams
from .errors import DomainError
from .estimators import (
    BoxBound,
    EstimatorKind,
    IGPrior,
    baee_risk_closed_form,
    batch_estimates,
    bz_smooth_multiplier,
    interval_bounds,
    stein_multiplier,
)
from .expmodel import BatchStats, EntropicConfig, PopulationParams, sample_batch, summarize_batch, theta

__all__ = [
    "RiskReport",
    "PriCell",
    "ExperimentGrid",
    "PRESETS",
    "preset_grid",
    "replication_stats",
    "replication_losses",
    "mc_risk",
    "mc_risks",
    "paired_se",
    "loss_variance_finite",
    "pri",
    "run_grid",
    "ci_coverage",
    "format_table",
    "parse_table_csv",
    "export_table",
    "TABLE_JSON_SCHEMA",
    "figure_data",
    "risk_rows",
    "rows_to_csv",
    "FIGURE_PRESETS",
]

BLOCK = 1 << 16
MIN_REPLICATIONS = 1000


@dataclass(frozen=True)
class RiskReport:
    estimator_kind: EstimatorKind
    risk_mean: float
    std_error: float
    M: int
    seed: int


@dataclass(frozen=True)
class PriCell:
    u: tuple[float, ...]
    q: float
    n: int
    pri_stein: float
    pri_bz: float
    baseline_risk: float
    # Not exported; kept for dominance checks.
    risk_stein: float = field(default=math.nan, compare=False)
    risk_bz: float = field(default=math.nan, compare=False)
    se_diff_stein: float = field(default=math.nan, compare=False)
    se_diff_bz: float = field(default=math.nan, compare=False)


@dataclass(frozen=True)
class ExperimentGrid:
    u_values: tuple[tuple[float, ...], ...]
    q_values: tuple[float, ...]
    n_values: tuple[int, ...]
    sigma: float = 1.0
    k: int = 1
    M: int = 10000
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.M < MIN_REPLICATIONS:
            raise DomainError(f"M must be at least {MIN_REPLICATIONS} (got {self.M})")
        us = tuple(tuple(float(x) for x in np.atleast_1d(u)) for u in self.u_values)
        for u in us:
            if len(u) != self.k:
                raise DomainError(f"location vector {u} does not have k={self.k} entries")
        object.__setattr__(self, "u_values", us)
        # reject invalid (n, q) pairs up front
        for cfg, _ in self.cells():
            pass

    def cells(self) -> Iterable[tuple[EntropicConfig, PopulationParams]]:
        """Cells in output order: u outermost, then q, then n."""
        for u in self.u_values:
            for q in self.q_values:
                for n in self.n_values:
                    yield EntropicConfig(self.k, n, q), PopulationParams(u, self.sigma)

    def __len__(self) -> int:
        return len(self.u_values) * len(self.q_values) * len(self.n_values)


_TABLE_U = tuple((round(0.1 * i, 1),) for i in range(1, 7))
_TABLE_Q = (0.2, 0.4, 0.6, 0.8, 1.2, 1.4)

PRESETS = {
    "table1": dict(u_values=_TABLE_U, q_values=_TABLE_Q, n_values=(4, 6, 8)),
    "table2": dict(u_values=_TABLE_U, q_values=_TABLE_Q, n_values=(10, 15, 20, 30)),
}


def preset_grid(name: str, *, M: int = 10000, base_seed: int = 0, sigma: float = 1.0) -> ExperimentGrid:
    if name not in PRESETS:
        raise DomainError(f"unknown grid preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentGrid(sigma=sigma, k=1, M=M, base_seed=base_seed, **PRESETS[name])


# -- risk engine --------------------------------------------------------------


def replication_stats(cfg: EntropicConfig, params: PopulationParams, M: int, seed: int) -> BatchStats:
    """Sufficient statistics of replications ``0 .. M-1`` of stream ``seed``."""
    parts = []
    for start in range(0, M, BLOCK):
        count = min(BLOCK, M - start)
        seeds = streams.substreams(seed, count, start=start)
        parts.append(summarize_batch(sample_batch(cfg, params, seeds)))
    if len(parts) == 1:
        return parts[0]
    return BatchStats(
        x_min=np.concatenate([p.x_min for p in parts]),
        t=np.concatenate([p.t for p in parts]),
        w=np.concatenate([p.w for p in parts]),
        k=cfg.k,
        n=cfg.n,
    )


def replication_losses(
    kind: EstimatorKind | str,
    cfg: EntropicConfig,
    params: PopulationParams,
    stats: BatchStats,
    **kw,
) -> np.ndarray:
    """Per-replication quadratic loss (δ/Θ(σ) − 1)²."""
    est = batch_estimates(kind, cfg, stats, **kw)
    return (est / theta(cfg, params.sigma) - 1.0) ** 2


def _report(kind: EstimatorKind, losses: np.ndarray, seed: int) -> RiskReport:
    M = losses.shape[0]
    return RiskReport(
        estimator_kind=kind,
        risk_mean=float(np.mean(losses)),
        std_error=float(np.std(losses, ddof=1) / math.sqrt(M)),
        M=M,
        seed=seed,
    )


def loss_variance_finite(cfg: EntropicConfig) -> bool:
    """Whether quadratic losses of rules c·T^{k(1−q)} have finite variance.

    Needs E[T^{4k(1−q)}] < ∞, i.e. k(n−1) + 4k(1−q) > 0 (q < (n+3)/4). Outside
    this region ``std_error`` is not a reliable accuracy measure.
    """
    return cfg.shape + 4.0 * cfg.power > 0.0


def _check_M(M: int) -> None:
    if M < MIN_REPLICATIONS:
        raise DomainError(f"M must be at least {MIN_REPLICATIONS} (got {M})")


def mc_risk(
    cfg: EntropicConfig,
    params: PopulationParams,
    kind: EstimatorKind | str,
    M: int,
    seed: int,
    *,
    r: BoxBound | None = None,
    prior: IGPrior | None = None,
) -> RiskReport:
    """Monte-Carlo quadratic risk of one estimator.

    When :func:`loss_variance_finite` is false the mean still converges but
    the reported standard error understates its error.

    Raises:
        DegenerateSampleError: naming the first replication with T = 0.
    """
    _check_M(M)
    params.check(cfg)
    kind = EstimatorKind(kind)
    stats = replication_stats(cfg, params, M, seed)
    losses = replication_losses(kind, cfg, params, stats, r=r, prior=prior)
    return _report(kind, losses, seed)


def mc_risks(
    cfg: EntropicConfig,
    params: PopulationParams,
    kinds: Sequence[EstimatorKind | str],
    M: int,
    seed: int,
    *,
    r: BoxBound | None = None,
    prior: IGPrior | None = None,
) -> tuple[dict[EstimatorKind, RiskReport], dict[EstimatorKind, np.ndarray]]:
    """Risks of several estimators on common random numbers.

    Returns the reports and the raw per-replication losses (for paired
    comparisons).
    """
    _check_M(M)
    params.check(cfg)
    stats = replication_stats(cfg, params, M, seed)
    reports, losses = {}, {}
    for kind in kinds:
        kind = EstimatorKind(kind)
        losses[kind] = replication_losses(kind, cfg, params, stats, r=r, prior=prior)
        reports[kind] = _report(kind, losses[kind], seed)
    return reports, losses


def paired_se(a: np.ndarray, b: np.ndarray) -> float:
    """Standard error of mean(a − b) for losses on common random numbers."""
    d = np.asarray(a) - np.asarray(b)
    return float(np.std(d, ddof=1) / math.sqrt(d.shape[0]))


def pri(baseline: RiskReport | float, improved: RiskReport | float) -> float:
    """Percentage risk improvement 100·(R_baseline − R_improved)/R_baseline."""
    r1 = baseline.risk_mean if isinstance(baseline, RiskReport) else float(baseline)
    r2 = improved.risk_mean if isinstance(improved, RiskReport) else float(improved)
    if not r1 > 0.0:
        raise DomainError("baseline risk must be positive")
    return (r1 - r2) / r1 * 100.0


def _pri_cell(cfg: EntropicConfig, params: PopulationParams, M: int, seed: int) -> PriCell:
    kinds = (EstimatorKind.BAEE, EstimatorKind.STEIN, EstimatorKind.BZ_SMOOTH)
    reports, losses = mc_risks(cfg, params, kinds, M, seed)
    base = reports[EstimatorKind.BAEE]
    st = reports[EstimatorKind.STEIN]
    bz = reports[EstimatorKind.BZ_SMOOTH]
    return PriCell(
        u=params.u,
        q=cfg.q,
        n=cfg.n,
        pri_stein=pri(base, st),
        pri_bz=pri(base, bz),
        baseline_risk=base.risk_mean,
        risk_stein=st.risk_mean,
        risk_bz=bz.risk_mean,
        se_diff_stein=paired_se(losses[EstimatorKind.STEIN], losses[EstimatorKind.BAEE]),
        se_diff_bz=paired_se(losses[EstimatorKind.BZ_SMOOTH], losses[EstimatorKind.BAEE]),
    )


def run_grid(grid: ExperimentGrid, workers: int = 1) -> list[PriCell]:
    """One :class:`PriCell` per grid cell, in :meth:`ExperimentGrid.cells` order."""
    jobs = [
        (cfg, params, grid.M, streams.substream(grid.base_seed, i))
        for i, (cfg, params) in enumerate(grid.cells())
    ]
    if workers <= 1:
        return [_pri_cell(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _pri_cell(*job), jobs))


def risk_rows(grid: ExperimentGrid, kinds: Sequence[EstimatorKind | str], workers: int = 1,
              prior: IGPrior | None = None) -> list[dict]:
    """Long-format risk table: one row per (cell, estimator)."""
    kinds = [EstimatorKind(k) for k in kinds]

    def one(job):
        i, (cfg, params) = job
        seed = streams.substream(grid.base_seed, i)
        reports, _ = mc_risks(cfg, params, kinds, grid.M, seed, prior=prior)
        return [
            dict(u=params.u, q=cfg.q, n=cfg.n, kind=k.value, risk_mean=rep.risk_mean,
                 std_error=rep.std_error, M=rep.M, seed=seed)
            for k, rep in reports.items()
        ]

    jobs = list(enumerate(grid.cells()))
    if workers <= 1:
        nested = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(one, jobs))
    return [row for rows in nested for row in rows]


def ci_coverage(
    cfg: EntropicConfig, params: PopulationParams, alpha_level: float, M: int, seed: int
) -> float:
    """Fraction of replications whose interval contains σ^{k(1−q)}."""
    _check_M(M)
    params.check(cfg)
    stats = replication_stats(cfg, params, M, seed)
    lo, hi = interval_bounds(stats.t, cfg, alpha_level)
    target = theta(cfg, params.sigma)
    return float(np.mean((lo <= target) & (target <= hi)))


# -- tables ---------------------------------------------------------------------

TABLE_COLUMNS = ("u", "q", "n", "pri_stein", "pri_bz", "baseline_risk")

TABLE_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "PRI table",
    "type": "object",
    "required": ["columns", "cells"],
    "additionalProperties": False,
    "properties": {
        "columns": {"const": list(TABLE_COLUMNS)},
        "cells": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": list(TABLE_COLUMNS),
                "additionalProperties": False,
                "properties": {
                    "u": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "q": {"type": "number", "exclusiveMinimum": 0},
                    "n": {"type": "integer", "minimum": 2},
                    "pri_stein": {"type": "number"},
                    "pri_bz": {"type": "number"},
                    "baseline_risk": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
    },
}


def _f6(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _cell_record(c: PriCell) -> dict:
    return {
        "u": [float(_f6(v)) for v in c.u],
        "q": float(_f6(c.q)),
        "n": int(c.n),
        "pri_stein": float(_f6(c.pri_stein)),
        "pri_bz": float(_f6(c.pri_bz)),
        "baseline_risk": float(_f6(c.baseline_risk)),
    }


def format_table(cells: Sequence[PriCell], fmt: str = "csv") -> str:
    """Render cells as CSV (6 decimals; k>1 locations joined by ';') or JSON."""
    if not cells:
        raise DomainError("no cells to export")
    if fmt == "json":
        doc = {"columns": list(TABLE_COLUMNS), "cells": [_cell_record(c) for c in cells]}
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise DomainError(f"unknown table format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for c in cells:
        writer.writerow(
            [";".join(_f6(v) for v in c.u), _f6(c.q), c.n, _f6(c.pri_stein), _f6(c.pri_bz), _f6(c.baseline_risk)]
        )
    return buf.getvalue()


def parse_table_csv(text: str) -> list[PriCell]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise DomainError(f"unexpected table header {reader.fieldnames}")
    return [
        PriCell(
            u=tuple(float(v) for v in row["u"].split(";")),
            q=float(row["q"]),
            n=int(row["n"]),
            pri_stein=float(row["pri_stein"]),
            pri_bz=float(row["pri_bz"]),
            baseline_risk=float(row["baseline_risk"]),
        )
        for row in reader
    ]


def export_table(cells: Sequence[PriCell], fmt: str, path: str | Path) -> None:
    text = format_table(cells, fmt)
    with open(path, "w", newline="") as fh:
        fh.write(text)


# -- figure data ----------------------------------------------------------------

FIGURE_PRESETS = {
    "fig1": dict(kind="pri_vs_q", n=4, sigma=1.0, u_values=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
                 q_values=tuple(round(0.05 * i, 2) for i in range(1, 30) if i != 20)),
    "fig3": dict(kind="risk_per_sample", n=4, sigma=1.0, u=0.1, q=0.1, samples=50),
    "fig4": dict(kind="risk_per_sample", n=8, sigma=1.0, u=0.1, q=0.1, samples=50),
    "fig5": dict(kind="pri_vs_n", n_values=tuple(range(2, 51)), sigma=1.0, u=0.1, q=0.1),
}


def _pri_vs_q(n, sigma, u_values, q_values, M, seed, exact=True):
    from .oracle import single_population_risk, stein_kink

    rows = []
    for ui, u in enumerate(u_values):
        # same replications for every q at a given u
        cell_seed = streams.substream(seed, ui)
        params = PopulationParams((u,), sigma)
        for q in q_values:
            if q == 1.0:
                continue
            cfg = EntropicConfig(1, n, q)
            reports, _ = mc_risks(cfg, params, (EstimatorKind.BAEE, EstimatorKind.BZ_SMOOTH,
                                                EstimatorKind.STEIN), M, cell_seed)
            row = dict(
                u=u, q=q,
                pri_bz=pri(reports[EstimatorKind.BAEE], reports[EstimatorKind.BZ_SMOOTH]),
                pri_stein=pri(reports[EstimatorKind.BAEE], reports[EstimatorKind.STEIN]),
            )
            if exact and u >= 0.0:
                base = baee_risk_closed_form(cfg)
                bz = single_population_risk(
                    cfg, u / sigma, lambda w: float(bz_smooth_multiplier(cfg, np.array([w])))
                )
                st = single_population_risk(
                    cfg, u / sigma, lambda w: float(stein_multiplier(cfg, np.array([w]))),
                    breakpoints=(stein_kink(cfg),),
                )
                row["pri_bz_exact"] = pri(base, bz)
                row["pri_stein_exact"] = pri(base, st)
            rows.append(row)
    return rows


def _risk_per_sample(n, sigma, u, q, samples, seed):
    cfg = EntropicConfig(1, n, q)
    params = PopulationParams((u,), sigma)
    stats = replication_stats(cfg, params, samples, seed)
    line = baee_risk_closed_form(cfg)
    losses = {
        k: replication_losses(k, cfg, params, stats)
        for k in (EstimatorKind.BAEE, EstimatorKind.STEIN, EstimatorKind.BZ_SMOOTH)
    }
    return [
        dict(sample=i + 1, loss_baee=float(losses[EstimatorKind.BAEE][i]),
             loss_stein=float(losses[EstimatorKind.STEIN][i]),
             loss_bz=float(losses[EstimatorKind.BZ_SMOOTH][i]), baee_risk=line)
        for i in range(samples)
    ]


def _pri_vs_n(n_values, sigma, u, q, M, seed):
    rows = []
    for i, n in enumerate(n_values):
        cfg = EntropicConfig(1, n, q)
        cell = _pri_cell(cfg, PopulationParams((u,), sigma), M, streams.substream(seed, i))
        rows.append(dict(n=n, pri_stein=cell.pri_stein, pri_bz=cell.pri_bz, baseline_risk=cell.baseline_risk))
    return rows


def figure_data(kind: str, *, M: int = 10000, seed: int = 0, exact: bool = True, **config) -> list[dict]:
    """x/y series for the figure presets.

    ``kind`` is ``pri_vs_q``, ``risk_per_sample`` or ``pri_vs_n``, or one of the
    presets ``fig1``, ``fig3``, ``fig4``, ``fig5``; keyword arguments override
    preset values.
    """
    if kind in FIGURE_PRESETS:
        merged = dict(FIGURE_PRESETS[kind])
        merged.update(config)
        kind = merged.pop("kind")
        config = merged
    if kind == "pri_vs_q":
        _check_M(M)
        return _pri_vs_q(config["n"], config.get("sigma", 1.0), config["u_values"], config["q_values"],
                         M, seed, exact=exact)
    if kind == "risk_per_sample":
        return _risk_per_sample(config["n"], config.get("sigma", 1.0), config["u"], config["q"],
                                config.get("samples", 50), seed)
    if kind == "pri_vs_n":
        _check_M(M)
        return _pri_vs_n(config["n_values"], config.get("sigma", 1.0), config["u"], config["q"], M, seed)
    raise DomainError(f"unknown figure kind {kind!r}")


def rows_to_csv(rows: Sequence[dict]) -> str:
    """Generic CSV rendering for figure/risk rows (floats to 6 decimals)."""
    if not rows:
        raise DomainError("no rows to export")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0].keys())
    writer.writerow(cols)
    for row in rows:
        out = []
        for c in cols:
            v = row[c]
            if isinstance(v, tuple):
                out.append(";".join(_f6(x) for x in v))
            elif isinstance(v, float):
                out.append(_f6(v))
            else:
                out.append(v)
        writer.writerow(out)
    return buf.getvalue()
