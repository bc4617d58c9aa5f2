"""
Rolling-origin backtests, empirical interval coverage, interval scores and
coverage/score ratios against a baseline method.
"""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .baselines import forecast_baseline_ar, forecast_baseline_es, forecast_baseline_tvar
from .forecast import (
    NOMINAL_LEVELS,
    MIN_FORLAP_LENGTH,
    ForecastResult,
    ForlapOptions,
    FvbvsConfig,
    forecast_forlap,
    forecast_fvbvs,
    normal_quantile,
)
from .simulate import ModelSpec, simulate

logger = logging.getLogger(__name__)

Method = Callable[..., ForecastResult]


def interval_score(lower, upper, truth, alpha):
    """Interval score of a central (1 - alpha) prediction interval.

    ``(u - l) + 2/alpha * (l - y) 1{y < l} + 2/alpha * (y - u) 1{y > u}``;
    lower is better.  Works elementwise on arrays.
    """
    lower, upper, truth = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (lower, upper, truth)))
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")
    score = (upper - lower) + (2 / alpha) * (
        np.clip(lower - truth, 0, None) + np.clip(truth - upper, 0, None)
    )
    return score if score.ndim else float(score)


# --------------------------------------------------------------------------
# forecasting methods by name


def _forlap(series, h, alpha, **options):
    return forecast_forlap(series, h, alpha, ForlapOptions(**options))


def _fvbvs(series, h, alpha, **config):
    return forecast_fvbvs(series, FvbvsConfig(**config), h, alpha)


def _ar(series, h, alpha, **kw):
    return forecast_baseline_ar(series, h, alpha, **kw)


def _es(series, h, alpha, **kw):
    return forecast_baseline_es(series, h, alpha, **kw)


def _tvar(series, h, alpha, order=2, window=None):
    return forecast_baseline_tvar(series, order, window, h, alpha)


METHODS = {"forlap": _forlap, "fvbvs": _fvbvs, "ar": _ar, "es": _es, "tvar": _tvar}
METHOD_LABELS = {"ar": "AR-AIC", "forlap": "FORLAP", "fvbvs": "FVBvS", "tvar": "TVAR2", "es": "ES"}


def make_method(name: str, **params) -> Method:
    """Picklable forecaster ``f(series, h, alpha) -> ForecastResult``."""
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {sorted(METHODS)}")
    return functools.partial(METHODS[name], **params)


# --------------------------------------------------------------------------
# backtests


@dataclass(frozen=True)
class BacktestRun:
    """One forecast per origin; ``origins`` are the forecast target indices."""

    method: str
    origins: np.ndarray
    truths: np.ndarray
    points: np.ndarray
    mspe: np.ndarray
    horizon: int = 1
    levels: tuple = NOMINAL_LEVELS
    p_used: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.origins)

    def interval(self, level: float):
        hw = normal_quantile(1 - level) * np.sqrt(self.mspe)
        return self.points - hw, self.points + hw

    def covered(self, level: float) -> np.ndarray:
        lo, hi = self.interval(level)
        return (self.truths >= lo) & (self.truths <= hi)

    def coverage(self, level: float) -> float:
        """Percentage of origins whose interval contains the truth."""
        return 100.0 * float(np.mean(self.covered(level)))

    def mean_interval_score(self, level: float = 0.9) -> float:
        lo, hi = self.interval(level)
        return float(np.mean(interval_score(lo, hi, self.truths, 1 - level)))

    def records(self, levels: Sequence[float] | None = None) -> list[dict]:
        rows = []
        for i, origin in enumerate(self.origins):
            row = {"origin": int(origin), "truth": float(self.truths[i]),
                   "point": float(self.points[i]), "mspe": float(self.mspe[i])}
            for lv in levels or self.levels:
                lo, hi = self.interval(lv)
                row[f"lower_{round(lv * 100)}"] = float(lo[i])
                row[f"upper_{round(lv * 100)}"] = float(hi[i])
            rows.append(row)
        return rows


def rolling_backtest(series, method: Method, last_n: int, h: int = 1,
                     levels: Sequence[float] = NOMINAL_LEVELS, alpha: float = 0.1,
                     name: str | None = None) -> BacktestRun:
    """Forecast each of the last ``last_n`` observations from the data before it.

    The target at index ``k`` is predicted ``h`` steps ahead from
    ``series[:k - h + 1]``; every nominal level reuses the same MSPE.
    """
    x = np.asarray(series, dtype=float)
    T = len(x)
    if last_n < 1:
        raise ValueError("last_n must be >= 1")
    if last_n >= T - MIN_FORLAP_LENGTH or T - last_n - h + 1 < MIN_FORLAP_LENGTH:
        raise ValueError(
            f"insufficient history: last_n={last_n}, h={h} leaves fewer than "
            f"{MIN_FORLAP_LENGTH} observations before the first origin (T={T})"
        )
    origins = np.arange(T - last_n, T)
    points = np.empty(last_n)
    mspe = np.empty(last_n)
    p_used = np.empty(last_n, dtype=int)
    for i, k in enumerate(origins):
        res = method(x[: k - h + 1], h, alpha)
        points[i] = res.points[h - 1]
        mspe[i] = res.mspe[h - 1]
        p_used[i] = res.p_used
    label = name or getattr(getattr(method, "func", method), "__name__", "method").lstrip("_")
    return BacktestRun(label, origins, x[origins].copy(), points, mspe, h, tuple(levels), p_used)


@dataclass(frozen=True)
class CoverageReport:
    coverage: dict  # level -> percentage
    n_origins: int
    n_replications: int

    def row(self, levels=NOMINAL_LEVELS) -> list[float]:
        return [self.coverage[lv] for lv in levels]


def coverage_report(runs: Sequence[BacktestRun], levels=NOMINAL_LEVELS) -> CoverageReport:
    """Coverage per replication, then averaged over replications."""
    if not runs:
        raise ValueError("no runs to summarise")
    cov = {lv: float(np.mean([r.coverage(lv) for r in runs])) for lv in levels}
    return CoverageReport(cov, len(runs[0]), len(runs))


@dataclass(frozen=True)
class RelativeMetrics:
    mcr: float
    mis: float
    n_replications: int
    n_excluded: int = 0


def aggregate_relative(runs: Mapping[str, Sequence[BacktestRun]], baseline: str,
                       level: float = 0.9) -> dict[str, RelativeMetrics]:
    """Mean coverage ratio and mean interval-score ratio against ``baseline``.

    Ratios are taken per replication and then averaged.  Replications where
    the baseline has zero coverage (or zero interval score) are dropped from
    the respective mean and counted in ``n_excluded``.
    """
    if baseline not in runs:
        raise ValueError(f"baseline {baseline!r} not among runs")
    base = runs[baseline]
    out = {}
    for name, method_runs in runs.items():
        if len(method_runs) != len(base):
            raise ValueError(f"{name}: {len(method_runs)} replications vs {len(base)} for baseline")
        cr, isr, excluded = [], [], 0
        for r, b in zip(method_runs, base):
            if not np.array_equal(r.origins, b.origins):
                raise ValueError(f"{name}: origins differ from baseline")
            bc, bs = b.coverage(level), b.mean_interval_score(level)
            if bc > 0:
                cr.append(r.coverage(level) / bc)
            else:
                excluded += 1
            if bs > 0:
                isr.append(r.mean_interval_score(level) / bs)
        if excluded:
            logger.warning("%s: %d replications with zero baseline coverage excluded", name, excluded)
        out[name] = RelativeMetrics(
            float(np.mean(cr)) if cr else math.nan,
            float(np.mean(isr)) if isr else math.nan,
            len(method_runs),
            excluded,
        )
    return out


# --------------------------------------------------------------------------
# Monte-Carlo replications


def _replicate(args):
    spec, seed, rep, methods, last_n, h = args
    x = simulate(spec, seed, rep)
    return {name: rolling_backtest(x, fn, last_n, h, name=name) for name, fn in methods.items()}


def monte_carlo(spec: ModelSpec, methods: Mapping[str, Method], K: int, seed: int = 0,
                last_n: int = 20, h: int = 1, workers: int = 1,
                progress: Callable[[int], None] | None = None) -> dict[str, list[BacktestRun]]:
    """Backtest every method on K seeded realisations of ``spec``.

    Replication ``r`` uses the stream keyed by ``(seed, r)``, so results do not
    depend on ``workers``.
    """
    jobs = [(spec, seed, r, dict(methods), last_n, h) for r in range(K)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=max(1, K // (4 * workers))))
    else:
        results = []
        for i, job in enumerate(jobs):
            results.append(_replicate(job))
            if progress:
                progress(i + 1)
    return {name: [res[name] for res in results] for name in methods}


@dataclass
class TableRow:
    model: str
    method: str
    coverage: CoverageReport
    relative: RelativeMetrics | None

    def as_list(self, levels=NOMINAL_LEVELS):
        mcr = "" if self.relative is None else f"{self.relative.mcr:.2f}"
        mis = "" if self.relative is None else f"{self.relative.mis:.2f}"
        return [self.model, self.method] + [f"{c:.1f}" for c in self.coverage.row(levels)] + [mcr, mis]


def coverage_table(model: str, runs: Mapping[str, Sequence[BacktestRun]], baseline: str = "ar",
                   levels=NOMINAL_LEVELS) -> list[TableRow]:
    rel = aggregate_relative(runs, baseline) if baseline in runs else {}
    rows = []
    for name, method_runs in runs.items():
        rows.append(TableRow(model, name, coverage_report(method_runs, levels),
                             None if name == baseline else rel.get(name)))
    return rows


TABLE_HEADER = ["model", "method"] + [f"{round(lv * 100)}" for lv in NOMINAL_LEVELS] + ["MCR", "MIS"]
