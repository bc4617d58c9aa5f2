"""
Command line interface.

Commands: ``forecast``, ``backtest``, ``simulate``, ``table`` and ``lpacf``,
plus ``rerun`` which replays the configuration stored in a manifest.
Every run writes its reports plus ``manifest.json`` (full configuration,
seeds, package versions) into the output directory, which defaults to
``$FORLAP_OUTPUT_DIR`` or ``./forlap-output``.  Reports contain no
timestamps, so rerunning a manifest reproduces them byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigurationError, NumericalError
from .evaluation import (
    METHOD_LABELS,
    METHODS,
    TABLE_HEADER,
    coverage_table,
    make_method,
    monte_carlo,
    rolling_backtest,
)
from .forecast import NOMINAL_LEVELS, WindowConfig
from .lpacf import lpacf_confidence, lpacf_windowed, select_p
from .preprocess import difference, ingest_csv, integrate_forecast, signed_sqrt
from .simulate import INNOVATIONS, MODEL_IDS, RNG_ALGORITHM, ModelSpec, simulate
from .wavelets import WaveletFamily

OUTPUT_ENV = "FORLAP_OUTPUT_DIR"
DEFAULT_OUTPUT = "forlap-output"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

logger = logging.getLogger("forlap")


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    column: str | None = None
    model: str | None = None
    models: list = field(default_factory=list)
    seed: int = 0
    replication: int = 0
    replications: int = 1
    length: int | None = None
    innovation: str = "gaussian"
    wavelet: str = "haar"
    J: int | None = None
    alpha: float = 0.05
    horizon: int = 1
    last_n: int = 20
    level: float = 95.0
    methods: list = field(default_factory=lambda: ["forlap"])
    baseline: str = "ar"
    regularize: bool = False
    difference: int = 0
    demean: bool = False
    integrate: bool = False
    fvbvs_m: int | None = None
    p0: int = 3
    g0: float = 0.1
    delta: float = 0.05
    kernel: str = "box"
    z: float | None = None
    window: int | None = None
    tau_max: int | None = None
    workers: int = 1
    output_dir: str = DEFAULT_OUTPUT

    def validate(self) -> None:
        """Collect every violation, then raise once."""
        v = []
        if self.command in ("forecast", "backtest", "lpacf"):
            if (self.input is None) == (self.model is None):
                v.append("give exactly one of --input or --model")
        if self.model is not None and self.model not in MODEL_IDS:
            v.append(f"--model must be one of {', '.join(MODEL_IDS)}")
        for m in self.models:
            if m not in MODEL_IDS:
                v.append(f"unknown model {m!r} in --models")
        if self.command == "table" and not self.models:
            v.append("--models is required for table")
        if self.innovation not in INNOVATIONS:
            v.append(f"--innovation must be one of {', '.join(INNOVATIONS)}")
        try:
            WaveletFamily.parse(self.wavelet)
        except ConfigurationError as exc:
            v.append(str(exc))
        if self.J is not None and self.J < 1:
            v.append("--J must be >= 1")
        if not 0 < self.alpha < 1:
            v.append("--alpha must lie in (0, 1)")
        if self.horizon < 1:
            v.append("--horizon must be >= 1")
        if self.last_n < 1:
            v.append("--last-n must be >= 1")
        if not 0 < self.level < 100:
            v.append("--level must be a percentage in (0, 100)")
        for m in self.methods:
            if m not in METHODS:
                v.append(f"unknown method {m!r}; choose from {', '.join(sorted(METHODS))}")
        if self.command == "forecast" and len(self.methods) != 1:
            v.append("forecast takes a single --method")
        if self.command == "table" and self.baseline not in self.methods:
            v.append(f"baseline {self.baseline!r} must be among --methods")
        if "fvbvs" in self.methods and self.command in ("forecast", "backtest", "table"):
            if self.fvbvs_m is None:
                v.append("FVBvS needs an explicit training length --fvbvs-m")
            elif self.fvbvs_m < 1:
                v.append("--fvbvs-m must be >= 1")
            if self.p0 < 1:
                v.append("--p0 must be >= 1")
            if self.g0 <= 0 or self.delta <= 0:
                v.append("--g0 and --delta must be positive")
            if self.kernel not in ("box", "normal"):
                v.append("--kernel must be box or normal")
        if self.difference not in (0, 1, 2):
            v.append("--difference must be 0, 1 or 2")
        if self.integrate and self.difference == 0:
            v.append("--integrate only makes sense with --difference 1 or 2")
        if self.replications < 1:
            v.append("--replications must be >= 1")
        if self.workers < 1:
            v.append("--workers must be >= 1")
        if self.length is not None and self.length < 2:
            v.append("--length must be >= 2")
        if self.z is not None and not 0 <= self.z < 1:
            v.append("--z must lie in [0, 1)")
        if self.window is not None and (self.window < 3 or self.window % 2 == 0):
            v.append("--window must be an odd integer >= 3")
        if self.tau_max is not None and self.tau_max < 1:
            v.append("--tau-max must be >= 1")
        if v:
            raise ConfigurationError("invalid configuration:\n  - " + "\n  - ".join(v), v)

    # helpers ------------------------------------------------------------

    @property
    def family(self) -> WaveletFamily:
        return WaveletFamily.parse(self.wavelet)

    def method_params(self, name: str) -> dict:
        if name == "forlap":
            return {"family": self.family, "J": self.J, "regularize": self.regularize}
        if name == "fvbvs":
            return {"m": self.fvbvs_m, "p0": self.p0, "g0": self.g0, "delta": self.delta,
                    "kernel": self.kernel, "family": self.family, "J": self.J,
                    "regularize": self.regularize}
        return {}

    def methods_map(self) -> dict:
        return {m: make_method(m, **self.method_params(m)) for m in self.methods}

    def spec(self, model: str | None = None) -> ModelSpec:
        return ModelSpec(model or self.model, self.length, self.innovation)


def _manifest(cfg: RunConfig, status: str, outputs: list[str], error: dict | None = None) -> dict:
    d = asdict(cfg)
    d.pop("output_dir")
    out = {
        "status": status,
        "config": d,
        "seeds": {"seed": cfg.seed, "replication": cfg.replication,
                  "replications": cfg.replications, "rng": RNG_ALGORITHM},
        "versions": {"forlap": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "outputs": sorted(outputs),
    }
    if error:
        out["error"] = error
    return out


class _Writer:
    """Writes report files and remembers their names for the manifest."""

    def __init__(self, directory: Path):
        self.dir = directory
        self.files: list[str] = []

    def text(self, name: str, content: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / name).write_text(content, encoding="utf-8", newline="")
        self.files.append(name)

    def json(self, name: str, obj) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def rows(self, name: str, header, rows, delimiter=",") -> None:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self.text(name, buf.getvalue())


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, WaveletFamily):
        return o.name
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _fmt(v: float) -> str:
    return repr(float(v))


# --------------------------------------------------------------------------
# data loading


def load_series(cfg: RunConfig):
    """Series on the working (differenced, demeaned) scale plus preprocessing info."""
    if cfg.input is not None:
        raw = ingest_csv(cfg.input, cfg.column)
        source = {"input": os.path.basename(cfg.input), "column": cfg.column}
    else:
        raw = simulate(cfg.spec(), cfg.seed, cfg.replication)
        source = {"model": cfg.spec().to_dict(), "seed": cfg.seed, "replication": cfg.replication}
    x, meta = difference(raw, cfg.difference)
    mean = float(x.mean()) if cfg.demean else 0.0
    return x - mean, {"source": source, "n_raw": len(raw), "difference": meta, "mean": mean}


# --------------------------------------------------------------------------
# commands


def run_forecast(cfg: RunConfig, out: _Writer) -> dict:
    x, prep = load_series(cfg)
    method = cfg.methods[0]
    res = make_method(method, **cfg.method_params(method))(x, cfg.horizon, cfg.alpha)
    points = res.points + prep["mean"]
    lo, hi = res.interval()
    report = {
        "method": METHOD_LABELS[method],
        "n": len(x),
        "horizon": cfg.horizon,
        "alpha": cfg.alpha,
        "p_used": res.p_used,
        "points": points,
        "mspe": res.mspe,
        "lower": lo + prep["mean"],
        "upper": hi + prep["mean"],
        "scale": f"difference order {cfg.difference}",
        "preprocessing": {"difference": prep["difference"].to_dict(), "mean": prep["mean"]},
    }
    if cfg.integrate:
        report["level_points"] = integrate_forecast(points, prep["difference"])
    out.json("forecast.json", report)
    return report


def _plot_rows(run, level):
    lo, hi = run.interval(level)
    rows = []
    for i, k in enumerate(run.origins):
        vals = (run.truths[i], run.points[i], lo[i], hi[i])
        rows.append([int(k), *map(_fmt, vals), *(_fmt(signed_sqrt(v)) for v in vals)])
    return rows


PLOT_HEADER = ["origin", "truth", "point", "lower", "upper",
               "truth_ssqrt", "point_ssqrt", "lower_ssqrt", "upper_ssqrt"]


def run_backtest(cfg: RunConfig, out: _Writer) -> dict:
    x, prep = load_series(cfg)
    level = cfg.level / 100
    levels = tuple(sorted(set(NOMINAL_LEVELS) | {level}))
    results = {}
    for name, fn in cfg.methods_map().items():
        run = rolling_backtest(x, fn, cfg.last_n, cfg.horizon, levels, name=name)
        results[name] = {
            "label": METHOD_LABELS[name],
            "success_percentage": run.coverage(level),
            "coverage": {f"{round(lv * 100)}": run.coverage(lv) for lv in levels},
            "mean_interval_score": run.mean_interval_score(level),
            "p_used": run.p_used,
        }
        out.rows(f"plot_{name}.tsv", PLOT_HEADER, _plot_rows(run, level), delimiter="\t")
    report = {"n": len(x), "last_n": cfg.last_n, "horizon": cfg.horizon, "level": cfg.level,
              "methods": results, "source": prep["source"],
              "preprocessing": {"difference": prep["difference"].to_dict(), "mean": prep["mean"]}}
    out.json("backtest.json", report)
    return report


def run_simulate(cfg: RunConfig, out: _Writer) -> dict:
    spec = cfg.spec()
    rows = []
    for r in range(cfg.replications):
        x = simulate(spec, cfg.seed, r)
        rows.extend([r, t, _fmt(v)] for t, v in enumerate(x))
    out.rows("simulate.csv", ["replication", "t", "x"], rows)
    report = {"model": spec.to_dict(), "seed": cfg.seed, "replications": cfg.replications}
    out.json("simulate.json", report)
    return report


def run_table(cfg: RunConfig, out: _Writer) -> dict:
    methods = cfg.methods_map()
    table_rows, report = [], {}
    for model in cfg.models:
        spec = cfg.spec(model)
        runs = monte_carlo(spec, methods, cfg.replications, cfg.seed, cfg.last_n,
                           cfg.horizon, cfg.workers)
        rows = coverage_table(model, runs, cfg.baseline)
        for r in rows:
            r.method = METHOD_LABELS[r.method]
            table_rows.append(r.as_list())
        report[model] = {
            r.method: {"coverage": r.coverage.coverage,
                       "mcr": None if r.relative is None else r.relative.mcr,
                       "mis": None if r.relative is None else r.relative.mis,
                       "n_excluded": 0 if r.relative is None else r.relative.n_excluded}
            for r in rows
        }
    out.rows("table.csv", TABLE_HEADER, table_rows)
    out.json("table.json", {"replications": cfg.replications, "last_n": cfg.last_n,
                            "baseline": METHOD_LABELS[cfg.baseline], "models": report})
    return report


def run_lpacf(cfg: RunConfig, out: _Writer) -> dict:
    x, prep = load_series(cfg)
    T = len(x)
    base = WindowConfig.default(T, cfg.alpha)
    W = cfg.window or base.window_length
    tau = cfg.tau_max or min(base.tau_max, (W - 1) // 2)
    est = lpacf_windowed(x, WindowConfig(W, tau, cfg.alpha), cfg.z, cfg.family)
    bounds = lpacf_confidence(est)
    rows = [[int(lag), _fmt(q), _fmt(lo), _fmt(hi)]
            for lag, q, (lo, hi) in zip(est.lags, est.values, bounds)]
    out.rows("lpacf.tsv", ["lag", "lpacf", "lower", "upper"], rows, delimiter="\t")
    report = {**est.to_dict(), "p_selected": select_p(est)}
    out.json("lpacf.json", report)
    return report


COMMANDS = {"forecast": run_forecast, "backtest": run_backtest, "simulate": run_simulate,
            "table": run_table, "lpacf": run_lpacf}


# --------------------------------------------------------------------------
# argument parsing


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forlap", description=__doc__.split("\n\n")[1])
    parser.add_argument("--version", action="version", version=f"forlap {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None,
                        help=f"report directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    common.add_argument("--wavelet", default="haar", help="haar or dbN (N = 2..10)")
    common.add_argument("--J", type=int, default=None, help="number of wavelet scales")
    common.add_argument("--alpha", type=float, default=0.05)
    common.add_argument("--horizon", type=int, default=1)
    common.add_argument("--regularize", action="store_true",
                        help="rescale predictor weights to unit norm")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--innovation", default="gaussian", choices=INNOVATIONS)
    common.add_argument("--length", type=int, default=None, help="override model length")
    common.add_argument("--workers", type=int, default=1)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--input", help="CSV file with one numeric column")
    source.add_argument("--column", help="column name or index when several are numeric")
    source.add_argument("--model", help="simulate the series from model A..M instead")
    source.add_argument("--replication", type=int, default=0)
    source.add_argument("--difference", type=int, default=0, help="differencing order 0, 1 or 2")
    source.add_argument("--demean", action="store_true")

    fv = argparse.ArgumentParser(add_help=False)
    fv.add_argument("--fvbvs-m", type=int, default=None, help="FVBvS training length")
    fv.add_argument("--p0", type=int, default=3)
    fv.add_argument("--g0", type=float, default=0.1)
    fv.add_argument("--delta", type=float, default=0.05)
    fv.add_argument("--kernel", default="box")

    p = sub.add_parser("forecast", parents=[common, source, fv], help="forecast the next values")
    p.add_argument("--method", default="forlap")
    p.add_argument("--integrate", action="store_true",
                   help="also report point forecasts integrated back to levels")

    p = sub.add_parser("backtest", parents=[common, source, fv],
                       help="rolling one-step backtest over the last observations")
    p.add_argument("--methods", type=_csv_list, default=["forlap", "ar"])
    p.add_argument("--last-n", type=int, default=50)
    p.add_argument("--level", type=float, default=95.0, help="nominal level in percent")

    p = sub.add_parser("simulate", parents=[common], help="simulate a model")
    p.add_argument("--model", required=True)
    p.add_argument("--replications", type=int, default=1)

    p = sub.add_parser("table", parents=[common, fv], help="Monte-Carlo coverage table")
    p.add_argument("--models", type=_csv_list, required=True)
    p.add_argument("--methods", type=_csv_list, default=["ar", "forlap"])
    p.add_argument("--baseline", default="ar")
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--last-n", type=int, default=20)

    p = sub.add_parser("rerun", help="replay a run from its manifest.json")
    p.add_argument("manifest", help="manifest.json (or failure.json) of an earlier run")
    p.add_argument("--output-dir", default=None)

    p = sub.add_parser("lpacf", parents=[common, source], help="windowed lpacf with bounds")
    p.add_argument("--z", type=float, default=None, help="rescaled time (default: last point)")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--tau-max", type=int, default=None)
    return parser


def config_from_manifest(path, output_dir: str | None) -> RunConfig:
    try:
        stored = json.loads(Path(path).read_text())["config"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
    known = RunConfig.__dataclass_fields__
    unknown = sorted(set(stored) - set(known))
    if unknown:
        raise ConfigurationError(f"manifest has unknown fields: {', '.join(unknown)}", unknown)
    out = output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    return RunConfig(**stored, output_dir=out)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    d = vars(args).copy()
    d.pop("verbose", None)
    if "method" in d:
        d["methods"] = [d.pop("method")]
    d["output_dir"] = d.get("output_dir") or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    known = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in d.items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "rerun":
            cfg = config_from_manifest(args.manifest, args.output_dir)
        else:
            cfg = config_from_args(args)
    except ConfigurationError as exc:
        print(f"forlap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    writer = _Writer(Path(cfg.output_dir))
    try:
        cfg.validate()
        COMMANDS[cfg.command](cfg, writer)
    except ConfigurationError as exc:
        print(f"forlap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # argument errors raised by the library (e.g. too little history)
        print(f"forlap: {exc}", file=sys.stderr)
        _fail(cfg, writer, "config", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"forlap: numerical failure in stage {exc.stage}: {exc}", file=sys.stderr)
        _fail(cfg, writer, "numerical", exc, {"stage": exc.stage, "diagnostics": exc.diagnostics})
        return EXIT_NUMERICAL
    writer.json("manifest.json", _manifest(cfg, "ok", writer.files))
    return EXIT_OK


def _fail(cfg, writer, kind, exc, extra=None):
    err = {"kind": kind, "type": type(exc).__name__, "message": str(exc), **(extra or {})}
    logger.debug("".join(traceback.format_exception(exc)))
    writer.json("failure.json", _manifest(cfg, "failed", list(writer.files), err))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
