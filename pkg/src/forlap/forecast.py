"""
Local linear prediction for locally stationary wavelet processes.

``forecast_forlap`` picks the number of past observations from the local
partial autocorrelation at the last time point, estimates the spectrum with
forward (trailing) smoothing, and solves the generalised Yule-Walker system
built from the local autocovariance.  ``forecast_fvbvs`` is the older
grid-search procedure over (p, g) with kernel smoothing of the local
autocovariance.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, stats

from .errors import NumericalError
from .lpacf import LocalAcv, WindowConfig, local_acv, lpacf_windowed, select_p
from .spectral import estimate_spectrum, raw_wavelet_periodogram
from .wavelets import HAAR, WaveletFamily, a_matrix, autocorrelation_wavelet, default_levels

logger = logging.getLogger(__name__)

MIN_FORLAP_LENGTH = 32
NOMINAL_LEVELS = (0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def normal_quantile(alpha: float) -> float:
    return float(stats.norm.ppf(1 - alpha / 2))


@dataclass(frozen=True)
class ForecastResult:
    """Point forecasts and Gaussian prediction intervals for steps 1..h."""

    points: np.ndarray
    mspe: np.ndarray
    alpha: float = 0.05
    p_used: int = 0
    regularized: bool = False
    method: str = "forlap"
    weights: tuple = field(default=(), repr=False)

    @property
    def horizon(self) -> int:
        return len(self.points)

    def halfwidth(self, level: float | None = None) -> np.ndarray:
        alpha = self.alpha if level is None else 1 - level
        return normal_quantile(alpha) * np.sqrt(self.mspe)

    def interval(self, level: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) arrays at the given nominal level (default 1 - alpha)."""
        hw = self.halfwidth(level)
        return self.points - hw, self.points + hw

    @property
    def intervals(self) -> np.ndarray:
        lo, hi = self.interval()
        return np.column_stack([lo, hi])

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "alpha": self.alpha,
            "points": self.points.tolist(),
            "mspe": self.mspe.tolist(),
            "intervals": self.intervals.tolist(),
            "p_used": self.p_used,
            "regularized": self.regularized,
        }


# --------------------------------------------------------------------------
# generalised Yule-Walker system


@dataclass(frozen=True)
class GywSystem:
    """Local covariance matrix over times t-p .. t+h-1 and the right-hand side
    for predicting X_{t+h-1} from X_{t-p} .. X_{t-1}.

    Rows and columns of ``B`` are ordered by time, so the last ``p`` past
    observations occupy the leading block.
    """

    B: np.ndarray
    rhs: np.ndarray
    p: int
    h: int
    t: int

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t - self.p, self.t + self.h)

    @property
    def principal(self) -> np.ndarray:
        return self.B[: self.p, : self.p]

    def mspe(self, b: np.ndarray) -> float:
        """b~' B b~ with b~ = (b_{p-1}, ..., b_0, 0, ..., 0, -1)."""
        bt = np.zeros(self.p + self.h)
        bt[: self.p] = np.asarray(b)[::-1]
        bt[-1] = -1.0
        return float(bt @ self.B @ bt)


def build_gyw(lacv: LocalAcv, t: int, p: int, h: int = 1) -> GywSystem:
    """Entries B_{m,n} = c((m+n)/2T, m-n) over times t-p .. t+h-1."""
    if p < 1 or h < 1:
        raise ValueError("p and h must be >= 1")
    if t - p < 0:
        raise ValueError(f"p={p} exceeds the {t} available observations")
    if p + h - 1 > lacv.tau_max:
        raise ValueError(f"lag {p + h - 1} beyond local acv tau_max={lacv.tau_max}")
    if t + h - 1 >= lacv.n_times:
        raise ValueError(f"time {t + h - 1} beyond local acv grid (0..{lacv.n_times - 1})")
    times = np.arange(t - p, t + h)
    B = lacv.covariance(times)
    B = 0.5 * (B + B.T)
    return GywSystem(B, B[:p, -1].copy(), p, h, t)


def repair_psd(system: GywSystem) -> tuple[GywSystem, float]:
    """Add the smallest ridge from 1e-8 trace/(p+1) x (1, 10, 100, 1000) that
    makes ``B`` positive semi-definite; if none does, the exact shift
    ``-lambda_min`` plus the base ridge.  Returns the system and the ridge used.
    """
    B = system.B
    lam_min = float(np.linalg.eigvalsh(B)[0])
    trace = float(np.trace(B))
    if lam_min >= 0 or trace <= 0:
        return system, 0.0
    base = 1e-8 * trace / (system.p + 1)
    for ridge in (base * 10 ** i for i in range(4)):
        if lam_min + ridge >= 0:
            break
    else:
        ridge = base - lam_min
    logger.debug("GYW matrix indefinite (lambda_min=%.3g); ridge %.3g", lam_min, ridge)
    return replace(system, B=B + ridge * np.eye(len(B)), rhs=system.rhs.copy()), ridge


def _factor_solve(M, r):
    c = linalg.cho_factor(M, lower=True, check_finite=False)
    return linalg.cho_solve(c, r, check_finite=False)


def solve_gyw(system: GywSystem, regularize: bool = False) -> np.ndarray:
    """Predictor weights b = (b_0, ..., b_{p-1}); b_0 multiplies X_{t-1}.

    The p x p principal block is Cholesky-factorised.  If that fails a ridge
    ``lambda I`` with ``lambda = 1e-8 trace(B)/(p+1)`` is added, growing ten-fold
    for up to three retries.  With ``regularize`` the solution is rescaled to
    unit Euclidean norm.
    """
    P = system.principal
    r = system.rhs
    p = system.p
    trace = float(np.trace(system.B))
    if trace <= 0 or not np.any(P):
        return np.zeros(p)
    lam = 1e-8 * trace / (p + 1)
    attempts = [0.0] + [lam * 10 ** i for i in range(3)]
    for ridge in attempts:
        try:
            sol = _factor_solve(P + ridge * np.eye(p), r)
            break
        except linalg.LinAlgError:
            continue
    else:
        raise NumericalError(
            "generalised Yule-Walker matrix not positive definite after ridge repair",
            stage="solve_gyw",
            diagnostics={"p": p, "min_eig": float(np.linalg.eigvalsh(P)[0]), "trace": trace},
        )
    b = sol[::-1].copy()
    if regularize:
        norm = float(np.linalg.norm(b))
        if norm > 0:
            b = b / norm
    return b


def predict_with_weights(x, b) -> float:
    """sum_{s=t-p}^{t-1} b_{t-1-s} X_s."""
    x = np.asarray(x, dtype=float)
    p = len(b)
    return float(np.dot(np.asarray(b), x[::-1][:p]))


def _gyw_forecast(x, lacv, t, p, h, regularize):
    points, mspe, weights = np.empty(h), np.empty(h), []
    for step in range(1, h + 1):
        system, _ = repair_psd(build_gyw(lacv, t, p, step))
        b = solve_gyw(system, regularize)
        points[step - 1] = predict_with_weights(x, b)
        m = system.mspe(b)
        if m < -1e-10 * max(1.0, float(np.trace(system.B))):
            raise NumericalError(f"negative MSPE {m:.3g}", stage="mspe")
        mspe[step - 1] = max(m, 0.0)
        weights.append(tuple(b))
    return points, mspe, tuple(weights)


# --------------------------------------------------------------------------
# FORLAP


@dataclass(frozen=True)
class ForlapOptions:
    family: WaveletFamily = HAAR
    J: int | None = None
    regularize: bool = False
    bandwidth: int | None = None
    window: WindowConfig | None = None
    lpacf_alpha: float = 0.05
    lpacf_estimator: str = "spectral"
    p: int | None = None  # fixed p, bypasses lpacf selection
    max_p: int | None = None
    boundary: str = "mirror"


def select_forecast_window(x, options: ForlapOptions = ForlapOptions()) -> int:
    """Number of past observations: largest significant lpacf lag at t-1."""
    T = len(x)
    cfg = options.window or WindowConfig.default(T, options.lpacf_alpha)
    est = lpacf_windowed(x, cfg, (T - 1) / T, options.family, options.lpacf_estimator)
    return select_p(est)


def forecast_forlap(series, h: int = 1, alpha: float = 0.05,
                    options: ForlapOptions | None = None, **kwargs) -> ForecastResult:
    """Forecast X_t .. X_{t+h-1} from X_0 .. X_{t-1}.

    Keyword arguments override fields of :class:`ForlapOptions`.
    """
    options = replace(options or ForlapOptions(), **kwargs)
    x = np.asarray(series, dtype=float)
    T = len(x)
    if T < MIN_FORLAP_LENGTH:
        raise ValueError(f"need at least {MIN_FORLAP_LENGTH} observations, got {T}")
    if h < 1:
        raise ValueError("horizon h must be >= 1")
    if not np.any(x):
        return ForecastResult(np.zeros(h), np.zeros(h), alpha, 1, options.regularize, "forlap")
    J = options.J or default_levels(T)
    table = autocorrelation_wavelet(options.family, J)

    stage = "lpacf"
    try:
        p = options.p if options.p is not None else select_forecast_window(x, options)
        cap = min(T - 1, table.max_lag - h + 1)
        if options.max_p is not None:
            cap = min(cap, options.max_p)
        p = max(1, min(p, cap))
        stage = "spectrum"
        ews = estimate_spectrum(x, options.family, J, options.bandwidth, n_forward=h,
                                boundary=options.boundary)
        stage = "local_acv"
        lacv = local_acv(ews, table, p + h - 1)
        stage = "gyw"
        points, mspe, weights = _gyw_forecast(x, lacv, T, p, h, options.regularize)
    except NumericalError as exc:
        if exc.stage is None:
            exc.stage = stage
        raise
    return ForecastResult(points, mspe, alpha, p, options.regularize, "forlap", weights)


# --------------------------------------------------------------------------
# FVBvS


@dataclass(frozen=True)
class FvbvsConfig:
    m: int
    p0: int = 3
    g0: float = 0.1
    delta: float = 0.05
    kernel: str = "box"
    family: WaveletFamily = HAAR
    J: int | None = None
    regularize: bool = False

    def __post_init__(self):
        if self.p0 < 1:
            raise ValueError("p0 must be >= 1")
        if self.g0 <= 0 or self.delta <= 0:
            raise ValueError("g0 and delta must be positive")
        if self.m < 1:
            raise ValueError("training length m must be >= 1")
        if self.kernel not in ("box", "normal"):
            raise ValueError(f"unknown kernel {self.kernel!r}")


def _unsmoothed_spectrum(x, family, J):
    raw = raw_wavelet_periodogram(x, family, J)
    A = a_matrix(autocorrelation_wavelet(family, J))
    return A.inverse @ raw.values  # (J, t)


def _kernel_smooth_columns(L, cols, g, kernel):
    """Kernel-smooth the spectrum rows over time at the requested columns.

    Only observed columns ``0..t-1`` enter each average, so column ``t`` is a
    one-sided (forward) estimate.  ``g`` is a rescaled-time bandwidth.
    """
    J, t = L.shape
    width = max(g * t, 1.0)
    out = np.empty((J, len(cols)))
    k = np.arange(t)
    for i, c in enumerate(cols):
        if kernel == "box":
            lo, hi = max(0, int(np.ceil(c - width))), min(t, int(np.floor(c + width)) + 1)
            if hi <= lo:
                lo, hi = max(0, t - 1), t
            out[:, i] = L[:, lo:hi].mean(axis=1)
        else:
            lo = max(0, int(c - 4 * width))
            w = np.exp(-0.5 * ((k[lo:] - c) / width) ** 2)
            out[:, i] = L[:, lo:] @ w / w.sum()
    return out


def _plain_gyw_forecast(x, lacv, t, p, h, regularize):
    """Generalised Yule-Walker forecast solved as is: symmetric indefinite
    factorisation, no positivity repair, MSPE floored at zero."""
    points, mspe, weights = np.empty(h), np.empty(h), []
    for step in range(1, h + 1):
        system = build_gyw(lacv, t, p, step)
        P, r = system.principal, system.rhs
        if not np.any(P):
            sol = np.zeros(p)
        else:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", linalg.LinAlgWarning)
                    sol = linalg.solve(P, r, assume_a="sym")
            except linalg.LinAlgError:
                sol = np.linalg.lstsq(P, r, rcond=None)[0]
        b = sol[::-1].copy()
        if regularize and np.linalg.norm(b) > 0:
            b /= np.linalg.norm(b)
        points[step - 1] = predict_with_weights(x, b)
        mspe[step - 1] = max(system.mspe(b), 0.0)
        weights.append(tuple(b))
    return points, mspe, tuple(weights)


def _fvbvs_single(x, p, g, h, config, L=None):
    """One FVBvS forecast of X_t..X_{t+h-1} for a fixed (p, g).

    The local autocovariance is built from the unsmoothed corrected
    periodogram and kernel-smoothed over time; smoothing is linear, so it is
    applied to the spectrum rows before mapping to lags.
    """
    t = len(x)
    J = config.J or default_levels(t)
    table = autocorrelation_wavelet(config.family, J)
    p = max(1, min(p, t - 1, table.max_lag - h + 1))
    if L is None:
        L = _unsmoothed_spectrum(x, config.family, J)
    first = t - p
    cols = np.arange(first, t + h)
    S = _kernel_smooth_columns(L, cols, g, config.kernel)
    psi = table.matrix(np.arange(p + h))
    grid = np.zeros((t + h, p + h))
    grid[first:] = S.T @ psi
    lacv = LocalAcv(grid)
    return _plain_gyw_forecast(x, lacv, t, p, h, config.regularize), p


def _fvbvs_candidates(p, g, delta, g_min):
    cands = [(p, g)]
    for dp in (1, -1):
        for dg in (delta, -delta):
            cands.append((max(1, p + dp), max(g_min, g + dg)))
    return cands


def forecast_fvbvs(series, config: FvbvsConfig, h: int = 1, alpha: float = 0.05) -> ForecastResult:
    """Grid-search forecaster over (p, g) trained on the last ``m`` points.

    At each training index u = t-m .. t-1 the current pair and its four
    diagonal neighbours (p +/- 1, g +/- delta) forecast X_u from X_0..X_{u-1};
    the pair with the smallest relative absolute error
    ``|X_hat - X_u| / max(|X_u|, 1e-8)`` is carried forward.  The final pair
    forecasts X_t.
    """
    x = np.asarray(series, dtype=float)
    t = len(x)
    if config.m >= t:
        raise ValueError(f"training length m={config.m} must be < series length {t}")
    if t - config.m < MIN_FORLAP_LENGTH // 2:
        raise ValueError("too little history before the training segment")
    if not np.any(x):
        return ForecastResult(np.zeros(h), np.zeros(h), alpha, config.p0,
                              config.regularize, "fvbvs")
    p, g = config.p0, config.g0
    g_min = config.delta / 2
    for u in range(t - config.m, t):
        prefix = x[:u]
        J = config.J or default_levels(u)
        L = _unsmoothed_spectrum(prefix, config.family, J)
        best, best_err = (p, g), np.inf
        for cand in _fvbvs_candidates(p, g, config.delta, g_min):
            (pts, _, _), _ = _fvbvs_single(prefix, cand[0], cand[1], 1, config, L)
            err = abs(pts[0] - x[u]) / max(abs(x[u]), 1e-8)
            if err < best_err:
                best, best_err = cand, err
        p, g = best
    (points, mspe, weights), p_used = _fvbvs_single(x, p, g, h, config)
    return ForecastResult(points, mspe, alpha, p_used, config.regularize, "fvbvs", weights)
