"""
Local autocovariance and local partial autocorrelation.

The local autocovariance is c(z, tau) = sum_j S_j(z) Psi_j(tau).  Covariances
between two observations at integer times a and b are read off at the
midpoint, cov(X_a, X_b) ~ c((a + b) / 2T, a - b); half-integer midpoints are
linearly interpolated between the two neighbouring time columns.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .errors import NumericalError
from .spectral import BandwidthFallbackWarning, EwsEstimate, estimate_spectrum
from .wavelets import HAAR, AcWaveletTable, WaveletFamily, autocorrelation_wavelet, default_levels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalAcv:
    """c(k/T, tau) on integer times ``k = 0..n_times-1`` and lags ``0..tau_max``."""

    values: np.ndarray  # (n_times, tau_max + 1)

    @property
    def tau_max(self) -> int:
        return self.values.shape[1] - 1

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    def at(self, twice_time, lag):
        """c at time ``twice_time / 2`` and lag ``|lag|`` (vectorised)."""
        a = np.asarray(twice_time)
        lag = np.abs(np.asarray(lag))
        if np.any(lag > self.tau_max):
            raise ValueError(f"lag {int(lag.max())} beyond tau_max={self.tau_max}")
        lo, hi = a // 2, (a + 1) // 2
        if np.any(lo < 0) or np.any(hi >= self.n_times):
            raise ValueError(
                f"time {float(np.max(a)) / 2} outside estimated grid 0..{self.n_times - 1}"
            )
        return 0.5 * (self.values[lo, lag] + self.values[hi, lag])

    def covariance(self, times) -> np.ndarray:
        """Local covariance matrix of X at the given integer times."""
        times = np.asarray(times, dtype=int)
        a = times[:, None] + times[None, :]
        return self.at(a, times[:, None] - times[None, :])

    @classmethod
    def stationary(cls, acv, n_times: int) -> "LocalAcv":
        """Time-constant local autocovariance built from a classical acv."""
        acv = np.asarray(acv, dtype=float)
        return cls(np.tile(acv, (n_times, 1)))


def local_acv(ews: EwsEstimate, ac_table: AcWaveletTable, tau_max: int) -> LocalAcv:
    """c(k/T, tau) = sum_j S_j(k/T) Psi_j(tau) on every column of ``ews``."""
    if ews.levels != ac_table.levels:
        raise ValueError("spectrum and autocorrelation wavelets disagree on J")
    if not 0 <= tau_max <= ac_table.max_lag:
        raise ValueError(
            f"tau_max={tau_max} outside 0..{ac_table.max_lag} (autocorrelation wavelet support)"
        )
    psi = ac_table.matrix(np.arange(tau_max + 1))
    return LocalAcv(ews.values.T @ psi)


def _solve_spd(B, r, scale):
    """Solve B x = r; on failure retry once with a ridge of 1e-8 * scale."""
    for ridge in (0.0, 1e-8 * scale):
        M = B + ridge * np.eye(len(B)) if ridge else B
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", linalg.LinAlgWarning)
                return linalg.solve(M, r, assume_a="sym")
        except (linalg.LinAlgError, linalg.LinAlgWarning):
            continue
    raise NumericalError("singular local Yule-Walker system", stage="lpacf",
                         diagnostics={"order": len(B), "scale": scale})


def lpacf_from_acv(lacv: LocalAcv, target: int, tau_max: int) -> np.ndarray:
    """Local partial autocorrelation at lags ``1..tau_max`` for the segment
    ending at time ``target``.

    For each lag tau the order-tau forecast weights of X_target on
    X_{target-tau..target-1} give the last coefficient phi; it is rescaled by
    the square root of the ratio of the order-(tau-1) backcast MSPE (of
    X_{target-tau}) to the order-(tau-1) forecast MSPE (of X_target), both
    computed from the same local covariances.  For a time-constant
    autocovariance the factor is exactly one and the result is the classical
    pacf.
    """
    if target - tau_max < 0:
        raise ValueError("segment starts before the first observation")
    times = np.arange(target - tau_max, target + 1)
    cov = lacv.covariance(times)
    c0 = max(float(cov[-1, -1]), 0.0)
    out = np.zeros(tau_max)
    if c0 <= 0.0:
        return out
    n = tau_max + 1
    last = n - 1
    for tau in range(1, tau_max + 1):
        past = np.arange(last - tau, last)  # times target-tau .. target-1
        phi = _solve_spd(cov[np.ix_(past, past)], cov[past, last], c0)
        phi_tt = phi[0]  # coefficient on X_{target-tau}
        inner = past[1:]
        first = last - tau
        if len(inner):
            bf = _solve_spd(cov[np.ix_(inner, inner)], cov[inner, last], c0)
            bb = _solve_spd(cov[np.ix_(inner, inner)], cov[inner, first], c0)
            mspe_f = cov[last, last] - cov[inner, last] @ bf
            mspe_b = cov[first, first] - cov[inner, first] @ bb
        else:
            mspe_f, mspe_b = cov[last, last], cov[first, first]
        if mspe_f <= 0 or mspe_b <= 0:
            out[tau - 1] = 0.0
            continue
        out[tau - 1] = phi_tt * math.sqrt(mspe_b / mspe_f)
    over = np.abs(out) > 1 + 1e-8
    if over.any():
        logger.info("clipped %d lpacf values to [-1, 1]", int(over.sum()))
    return np.clip(out, -1.0, 1.0)


@dataclass(frozen=True)
class WindowConfig:
    """Window length W (odd), maximum lag and significance level for the lpacf."""

    window_length: int
    tau_max: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.tau_max < 1:
            raise ValueError("tau_max must be >= 1")
        if self.window_length % 2 == 0:
            raise ValueError("window length must be odd")
        if self.window_length < 2 * self.tau_max + 1:
            raise ValueError("window length must be >= 2 * tau_max + 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @classmethod
    def default(cls, T: int, alpha: float = 0.05) -> "WindowConfig":
        """W = largest odd integer <= T/3, tau_max = min(floor(10 log10 T), (W-1)/2)."""
        W = int(T // 3)
        if W % 2 == 0:
            W -= 1
        if W < 3:
            raise ValueError(f"series of length {T} too short for a lpacf window")
        tau_max = min(int(math.floor(10 * math.log10(T))), (W - 1) // 2)
        return cls(W, tau_max, alpha)


@dataclass(frozen=True)
class LpacfEstimate:
    z: float
    values: np.ndarray  # lags 1..tau_max
    ci_halfwidth: np.ndarray
    window_length: int
    alpha: float
    window: tuple = (0, 0)  # [start, stop) indices into the series

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, len(self.values) + 1)

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "lags": self.lags.tolist(),
            "lpacf": self.values.tolist(),
            "ci_halfwidth": self.ci_halfwidth.tolist(),
            "window_length": self.window_length,
            "window": list(self.window),
            "alpha": self.alpha,
        }


def window_bounds(T: int, W: int, z: float) -> tuple[int, int]:
    """Data window of length min(W, T) centred at round(zT), shifted inside 0..T-1."""
    centre = int(round(z * T))
    centre = min(max(centre, 0), T - 1)
    W = min(W, T)
    start = centre - (W - 1) // 2
    start = min(max(start, 0), T - W)
    return start, start + W


def sample_acv(x, tau_max: int) -> np.ndarray:
    """Biased (divide-by-n) sample autocovariance of a zero-mean segment."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    return np.array([x[: n - k] @ x[k:] / n for k in range(tau_max + 1)])


def lpacf_windowed(series, config: WindowConfig | None = None, z: float | None = None,
                   family: WaveletFamily = HAAR, estimator: str = "spectral") -> LpacfEstimate:
    """Windowed lpacf estimate at rescaled time ``z`` with normal confidence bounds.

    Parameters
    ----------
    series : array_like
    config : WindowConfig, optional
        Defaults to :meth:`WindowConfig.default` for the series length.
    z : float, optional
        Rescaled time; defaults to the last observation ``(T-1)/T``.
    family : WaveletFamily
    estimator : {"spectral", "sample"}
        How the local autocovariance inside the window is estimated:
        ``"spectral"`` runs the wavelet spectrum pipeline on the (reflected)
        window segment and evaluates the local quantities at the position of
        ``z``; ``"sample"`` uses the window's sample autocovariance, for which
        the nonstationarity factor is one.
    """
    x = np.asarray(series, dtype=float)
    T = len(x)
    if config is None:
        config = WindowConfig.default(T, 0.05)
    if z is None:
        z = (T - 1) / T
    start, stop = window_bounds(T, config.window_length, z)
    seg = x[start:stop]
    W_eff = len(seg)
    if W_eff < 2 * config.tau_max + 1:
        raise ValueError(
            f"window holds {W_eff} observations, need >= {2 * config.tau_max + 1}"
        )
    target = min(max(int(round(z * T)), start), stop - 1) - start
    tau_max = config.tau_max
    if estimator == "sample":
        acv = sample_acv(seg, tau_max)
        lacv = LocalAcv.stationary(acv, W_eff)
        target = max(target, tau_max)
    elif estimator == "spectral":
        J = default_levels(W_eff)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BandwidthFallbackWarning)
            ews = estimate_spectrum(seg, family, J, n_forward=1)
        table = autocorrelation_wavelet(family, J)
        tau_max = min(tau_max, table.max_lag)
        lacv = local_acv(ews, table, tau_max)
        target = max(target, tau_max)
    else:
        raise ValueError(f"unknown lpacf estimator {estimator!r}")
    values = np.zeros(config.tau_max)
    values[:tau_max] = lpacf_from_acv(lacv, target, tau_max)
    h = np.full(config.tau_max, lpacf_halfwidth(config.alpha, W_eff))
    return LpacfEstimate(float(z), values, h, W_eff, config.alpha, (start, stop))


def lpacf_halfwidth(alpha: float, n_eff: int) -> float:
    if n_eff <= 0:
        raise ValueError("effective window size must be positive")
    return float(stats.norm.ppf(1 - alpha / 2) / math.sqrt(n_eff))


def lpacf_confidence(estimate: LpacfEstimate) -> np.ndarray:
    """Per-lag bounds, shape (tau_max, 2): q - h and q + h."""
    return np.column_stack([estimate.values - estimate.ci_halfwidth,
                            estimate.values + estimate.ci_halfwidth])


def select_p(estimate: LpacfEstimate) -> int:
    """Largest lag whose lpacf lies outside its confidence bound; 1 if none."""
    sig = np.flatnonzero(np.abs(estimate.values) > estimate.ci_halfwidth)
    return int(sig[-1] + 1) if len(sig) else 1
