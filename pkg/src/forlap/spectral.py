"""
Evolutionary wavelet spectrum estimation.

Pipeline: raw wavelet periodogram -> running-mean smoothing in time (with a
trailing-mean forward column at the forecast origin) -> correction by the
inverse inner-product matrix -> clamping of negative power.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .wavelets import (
    HAAR,
    InnerProductMatrix,
    WaveletFamily,
    a_matrix,
    autocorrelation_wavelet,
    default_levels,
    ndwt,
)

logger = logging.getLogger(__name__)

MIN_AUTO_BANDWIDTH_LENGTH = 16


class BandwidthFallbackWarning(UserWarning):
    """Series too short for automatic bandwidth selection; s = 1 used."""


@dataclass(frozen=True)
class RawPeriodogram:
    values: np.ndarray  # (J, T)
    family: WaveletFamily = HAAR
    coefficients: np.ndarray | None = field(default=None, repr=False)

    @property
    def levels(self) -> int:
        return self.values.shape[0]

    @property
    def source_length(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SmoothedPeriodogram:
    values: np.ndarray  # (J, t + n_forward)
    bandwidth: int
    horizon: int
    per_scale_bandwidths: tuple | None = None


@dataclass(frozen=True)
class EwsEstimate:
    """Corrected spectrum S_j(k/T) on columns k = 0..t (+ extra forward columns)."""

    values: np.ndarray  # (J, t + n_forward)
    clamped: np.ndarray  # bool, same shape
    family: WaveletFamily = HAAR
    bandwidth: int | None = None
    horizon: int | None = None
    raw_values: np.ndarray | None = field(default=None, repr=False)

    @property
    def levels(self) -> int:
        return self.values.shape[0]

    def to_dict(self) -> dict:
        return {
            "family": self.family.name,
            "levels": self.levels,
            "bandwidth": self.bandwidth,
            "horizon": self.horizon,
            "spectrum": self.values.tolist(),
            "clamped": self.clamped.astype(int).tolist(),
        }


def raw_wavelet_periodogram(series, family: WaveletFamily = HAAR, J: int | None = None,
                            boundary: str = "mirror") -> RawPeriodogram:
    """Squared non-decimated wavelet coefficients I_{j,k} = d_{j,k}^2."""
    d = ndwt(series, family, J, boundary=boundary)
    return RawPeriodogram(d * d, family, d)


def _window_sums(values, lo, hi):
    """Row-wise sums of values[:, lo[k]:hi[k]] via cumulative sums."""
    cs = np.zeros((values.shape[0], values.shape[1] + 1))
    np.cumsum(values, axis=1, out=cs[:, 1:])
    return cs[:, hi] - cs[:, lo]


def bandwidth_grid(T: int) -> list[int]:
    top = max(1, T // 4)
    grid = []
    s = 1
    while s < top:
        grid.append(s)
        s *= 2
    grid.append(top)
    return grid


def _ordinate_covariance(raw: RawPeriodogram, max_lag: int) -> np.ndarray:
    """Cov(I_{j,k}, I_{j,k+u}) for u = 0..max_lag, averaged over k.

    For Gaussian coefficients Cov(d^2_k, d^2_{k+u}) = 2 Cov(d_k, d_{k+u})^2;
    the coefficient covariance is estimated by the lagged mean product.
    """
    d = raw.coefficients
    J, T = d.shape
    out = np.zeros((J, max_lag + 1))
    for u in range(min(max_lag, T - 1) + 1):
        out[:, u] = 2.0 * np.mean(d[:, : T - u] * d[:, u:], axis=1) ** 2
    return out


def bandwidth_scores(raw: RawPeriodogram) -> dict[int, float]:
    """Even/odd cross-validation score for each candidate bandwidth.

    For each odd index k the even-indexed ordinates within ``[k-s, k+s]`` are
    averaged and compared with I_{j,k}; squared errors are summed over k and
    over scales.  Neighbouring ordinates are correlated (wavelets at adjacent
    shifts overlap), which rewards undersmoothing, so each term carries the
    penalty ``2 Cov(mean, I_{j,k})`` estimated by :func:`_ordinate_covariance`.
    """
    I = raw.values
    J, T = I.shape
    k = np.arange(T)
    even = (k % 2 == 0).astype(float)
    odd_k = k[1::2]
    masked = I * even
    grid = bandwidth_grid(T)
    gamma = _ordinate_covariance(raw, max(grid)) if raw.coefficients is not None else None
    scores = {}
    for s in grid:
        lo = np.clip(odd_k - s, 0, T)
        hi = np.clip(odd_k + s + 1, 0, T)
        n = _window_sums(even[None, :], lo, hi)[0]
        est = _window_sums(masked, lo, hi) / n
        score = float(np.sum((est - I[:, odd_k]) ** 2))
        if gamma is not None:
            # Cov(est_k, I_k) = sum over even neighbours u of gamma(|u - k|) / n_k
            cov = 0.0
            for u in range(1, s + 1, 2):
                sides = (odd_k - u >= 0).astype(float) + (odd_k + u < T)
                cov += gamma[:, u].sum() * float(np.sum(sides / n))
            score += 2.0 * cov
        scores[s] = score
    return scores


def auto_bandwidth(raw: RawPeriodogram) -> int:
    """Running-mean bandwidth chosen by even/odd cross-validation.

    Candidates are ``1, 2, 4, ...`` capped by ``floor(T/4)``; ties go to the
    larger bandwidth.  Series shorter than 16 get ``s = 1`` with a
    :class:`BandwidthFallbackWarning`.
    """
    T = raw.source_length
    if T < MIN_AUTO_BANDWIDTH_LENGTH:
        warnings.warn(
            f"series length {T} < {MIN_AUTO_BANDWIDTH_LENGTH}; using bandwidth s=1",
            BandwidthFallbackWarning,
            stacklevel=2,
        )
        return 1
    scores = bandwidth_scores(raw)
    best = min(scores.values())
    # rounding-level differences count as ties
    tol = 1e-12 * float(np.sum(raw.values ** 2))
    return max(s for s, v in scores.items() if v <= best + tol)


def running_mean_smooth(raw: RawPeriodogram, s: int, horizon: int | None = None,
                        n_forward: int = 1) -> SmoothedPeriodogram:
    """Centred running mean of width 2s+1, truncated at both ends.

    Parameters
    ----------
    raw : RawPeriodogram
    s : int
        Half-width, ``1 <= s <= max(1, T // 4)``.
    horizon : int, optional
        Number ``t`` of leading raw columns used (default: all ``T``).
    n_forward : int
        Number of forward columns ``t, t+1, ...`` appended; each equals the
        trailing mean of the last ``min(2s+1, t)`` raw values.

    Returns
    -------
    SmoothedPeriodogram
        Values of shape ``(J, t + n_forward)``.
    """
    T = raw.source_length
    t = T if horizon is None else int(horizon)
    if not 1 <= t <= T:
        raise ValueError(f"horizon t={t} must lie in 1..{T}")
    if not isinstance(s, (int, np.integer)) or not 1 <= s <= max(1, T // 4):
        raise ValueError(f"bandwidth s={s!r} outside 1..{max(1, T // 4)}")
    if n_forward < 0:
        raise ValueError("n_forward must be nonnegative")
    I = raw.values[:, :t]
    k = np.arange(t)
    lo = np.clip(k - s, 0, t)
    hi = np.clip(k + s + 1, 0, t)
    out = np.empty((I.shape[0], t + n_forward))
    out[:, :t] = _window_sums(I, lo, hi) / (hi - lo)
    if n_forward:
        width = min(2 * s + 1, t)
        out[:, t:] = I[:, t - width:].mean(axis=1, keepdims=True)
    return SmoothedPeriodogram(out, int(s), t)


def correct_spectrum(smoothed: SmoothedPeriodogram | np.ndarray,
                     a_inv: InnerProductMatrix, family: WaveletFamily = HAAR) -> EwsEstimate:
    """Apply A^{-1} to every time column; clamp negative power to zero."""
    vals = smoothed.values if isinstance(smoothed, SmoothedPeriodogram) else np.asarray(smoothed)
    if vals.ndim != 2 or vals.shape[0] != a_inv.J:
        raise ValueError(
            f"periodogram has {vals.shape[0] if vals.ndim == 2 else '?'} scales, A is {a_inv.J}x{a_inv.J}"
        )
    S = a_inv.inverse @ vals
    clamped = S < 0
    if clamped.any():
        logger.debug("clamped %d negative spectral entries", int(clamped.sum()))
        S = np.where(clamped, 0.0, S)
    bandwidth = getattr(smoothed, "bandwidth", None)
    horizon = getattr(smoothed, "horizon", None)
    return EwsEstimate(S, clamped, family, bandwidth, horizon)


def estimate_spectrum(series, family: WaveletFamily = HAAR, J: int | None = None,
                      bandwidth: int | None = None, n_forward: int = 1,
                      boundary: str = "mirror") -> EwsEstimate:
    """Full smoothing-then-correction pipeline on the whole observed series."""
    x = np.asarray(series, dtype=float)
    if J is None:
        J = default_levels(len(x))
    raw = raw_wavelet_periodogram(x, family, J, boundary)
    if bandwidth is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BandwidthFallbackWarning)
            bandwidth = auto_bandwidth(raw)
    bandwidth = min(int(bandwidth), max(1, len(x) // 4))
    smoothed = running_mean_smooth(raw, bandwidth, n_forward=n_forward)
    A = a_matrix(autocorrelation_wavelet(family, J))
    ews = correct_spectrum(smoothed, A, family)
    return EwsEstimate(ews.values, ews.clamped, family, bandwidth, len(x), raw.values)
