"""
Discrete non-decimated wavelets, autocorrelation wavelets and the
inner-product matrix linking the raw wavelet periodogram to the spectrum.

Conventions
-----------
``psi[j-1]`` is the scale-``j`` discrete wavelet :math:`\\psi_{j,0}` (finest
scale is ``j = 1``).  Shifted wavelets are :math:`\\psi_{j,k}(t) =
\\psi_{j,0}(t-k)`, so the non-decimated coefficient at shift ``k`` is

.. math:: d_{j,k} = \\sum_n \\psi_{j,0}(n) X_{k+n}.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ._filters import DAUBECHIES_LOWPASS
from .errors import ConfigurationError, IllConditionedError

MAX_LEVELS = 20
A_MATRIX_MAX_CONDITION = 1e10


@dataclass(frozen=True)
class WaveletFamily:
    """Daubechies extremal-phase family; one vanishing moment is Haar."""

    vanishing_moments: int = 1

    def __post_init__(self):
        n = self.vanishing_moments
        if not isinstance(n, (int, np.integer)) or n not in DAUBECHIES_LOWPASS:
            raise ConfigurationError(
                f"unsupported vanishing-moment count {n!r}; expected 1..10"
            )

    @classmethod
    def haar(cls) -> "WaveletFamily":
        return cls(1)

    @classmethod
    def daubechies(cls, vanishing_moments: int) -> "WaveletFamily":
        return cls(vanishing_moments)

    @classmethod
    def parse(cls, name: str) -> "WaveletFamily":
        """Parse ``"haar"``, ``"db4"`` or ``"DaubExPhase4"`` style names."""
        key = str(name).strip().lower()
        if key == "haar":
            return cls(1)
        for prefix in ("daubexphase", "db"):
            if key.startswith(prefix):
                try:
                    return cls(int(key[len(prefix):]))
                except ValueError:
                    break
        raise ConfigurationError(f"unknown wavelet family {name!r}")

    @property
    def name(self) -> str:
        return "haar" if self.vanishing_moments == 1 else f"db{self.vanishing_moments}"

    @property
    def lowpass(self) -> np.ndarray:
        return np.array(DAUBECHIES_LOWPASS[self.vanishing_moments], dtype=float)

    @property
    def highpass(self) -> np.ndarray:
        h = self.lowpass
        L = len(h)
        return np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])

    @property
    def filter_length(self) -> int:
        return 2 * self.vanishing_moments


HAAR = WaveletFamily(1)


def _check_levels(J):
    if not isinstance(J, (int, np.integer)) or not 1 <= J <= MAX_LEVELS:
        raise ValueError(f"number of levels J must be an integer in 1..{MAX_LEVELS}, got {J!r}")


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _upsample(f, step):
    out = np.zeros((len(f) - 1) * step + 1)
    out[::step] = f
    return out


@dataclass(frozen=True)
class DiscreteWaveletSet:
    family: WaveletFamily
    levels: int
    vectors: tuple  # vectors[j-1] is psi_{j,0}

    def __getitem__(self, j):
        return self.vectors[j - 1]


@functools.lru_cache(maxsize=64)
def build_discrete_wavelets(family: WaveletFamily, J: int) -> DiscreteWaveletSet:
    """Discrete wavelet vectors for scales 1..J by the upsampled-filter cascade."""
    _check_levels(J)
    h, g = family.lowpass, family.highpass
    phi = np.array([1.0])
    vectors = []
    for j in range(1, J + 1):
        step = 2 ** (j - 1)
        psi = np.convolve(phi, _upsample(g, step))
        phi = np.convolve(phi, _upsample(h, step))
        # cascade preserves norm only up to rounding; renormalise
        vectors.append(_readonly(psi / np.linalg.norm(psi)))
    return DiscreteWaveletSet(family, J, tuple(vectors))


def support_length(family: WaveletFamily, j: int) -> int:
    return (2 ** j - 1) * (family.filter_length - 1) + 1


@dataclass(frozen=True)
class AcWaveletTable:
    """Autocorrelation wavelets; ``values[j-1]`` holds lags ``-M_j..M_j``."""

    family: WaveletFamily
    levels: int
    values: tuple

    def support(self, j: int) -> int:
        return (len(self.values[j - 1]) - 1) // 2

    @property
    def max_lag(self) -> int:
        return self.support(self.levels)

    def __call__(self, j: int, tau) -> np.ndarray:
        """Evaluate Psi_j(tau), zero outside the support."""
        vals = self.values[j - 1]
        M = (len(vals) - 1) // 2
        tau = np.asarray(tau)
        out = np.zeros(tau.shape)
        inside = np.abs(tau) <= M
        out[inside] = vals[tau[inside] + M]
        return out if out.ndim else float(out)

    def matrix(self, lags) -> np.ndarray:
        """J x len(lags) array of Psi_j(lag)."""
        lags = np.asarray(lags, dtype=int)
        return np.vstack([self(j, lags) for j in range(1, self.levels + 1)])


@functools.lru_cache(maxsize=64)
def autocorrelation_wavelet(family: WaveletFamily, J: int) -> AcWaveletTable:
    """Psi_j(tau) = sum_k psi_j(k) psi_j(k + tau) over the full support."""
    ws = build_discrete_wavelets(family, J)
    values = []
    for psi in ws.vectors:
        ac = np.correlate(psi, psi, mode="full")
        M = len(psi) - 1
        ac = 0.5 * (ac + ac[::-1])  # exact symmetry
        ac[M] = 1.0 if abs(ac[M] - 1.0) < 1e-10 else ac[M]
        values.append(_readonly(ac))
    return AcWaveletTable(family, J, tuple(values))


@dataclass(frozen=True)
class InnerProductMatrix:
    J: int
    entries: np.ndarray
    inverse: np.ndarray
    condition_number: float


@functools.lru_cache(maxsize=64)
def _a_matrix_cached(family, J):
    return _a_matrix(autocorrelation_wavelet(family, J))


def a_matrix(table: AcWaveletTable) -> InnerProductMatrix:
    """Gram matrix A_{j,l} = sum_tau Psi_j(tau) Psi_l(tau) and its inverse.

    Raises
    ------
    IllConditionedError
        If cond(A) exceeds 1e10.
    """
    if table is autocorrelation_wavelet(table.family, table.levels):
        return _a_matrix_cached(table.family, table.levels)
    return _a_matrix(table)


def _a_matrix(table):
    J = table.levels
    A = np.empty((J, J))
    for j in range(1, J + 1):
        for l in range(j, J + 1):
            M = min(table.support(j), table.support(l))
            lags = np.arange(-M, M + 1)
            A[j - 1, l - 1] = A[l - 1, j - 1] = float(np.dot(table(j, lags), table(l, lags)))
    eig = np.linalg.eigvalsh(A)
    cond = float(eig[-1] / eig[0]) if eig[0] > 0 else math.inf
    if cond > A_MATRIX_MAX_CONDITION:
        raise IllConditionedError(
            f"A matrix for J={J} has condition number {cond:.3g}", J, cond
        )
    # LAPACK sysv: Bunch-Kaufman pivoted symmetric factorisation
    inv = linalg.solve(A, np.eye(J), assume_a="sym")
    inv = 0.5 * (inv + inv.T)
    return InnerProductMatrix(J, _readonly(A), _readonly(inv), cond)


def default_levels(T: int) -> int:
    """floor(log2 T), capped at the supported maximum."""
    if T < 2:
        raise ValueError("series must have at least 2 observations")
    return min(int(math.floor(math.log2(T))), MAX_LEVELS)


def padded_length(T: int) -> int:
    """Smallest power of two holding a full mirror period of the series."""
    return 1 << int(math.ceil(math.log2(max(2 * T, 2))))


def reflect_pad(x: np.ndarray, N: int) -> np.ndarray:
    """Extend ``x`` to length ``N`` by mirror reflection without edge repeat."""
    T = len(x)
    if T == 1:
        return np.full(N, x[0], dtype=float)
    period = 2 * T - 2
    idx = np.arange(N) % period
    idx = np.where(idx < T, idx, period - idx)
    return np.asarray(x, dtype=float)[idx]


@functools.lru_cache(maxsize=256)
def _wavelet_ffts(family, J, N):
    ws = build_discrete_wavelets(family, J)
    out = np.empty((J, N // 2 + 1), dtype=complex)
    for j, psi in enumerate(ws.vectors):
        per = np.zeros(N)
        np.add.at(per, np.arange(len(psi)) % N, psi)
        out[j] = np.conj(np.fft.rfft(per))
    out.setflags(write=False)
    return out


def ndwt(series, family: WaveletFamily = HAAR, J: int | None = None,
         boundary: str = "mirror") -> np.ndarray:
    """Non-decimated wavelet coefficients d_{j,k}, shape (J, T).

    Parameters
    ----------
    series : array_like
        Observations ``X_0..X_{T-1}``.
    family : WaveletFamily
    J : int, optional
        Number of scales; defaults to ``floor(log2 T)``.
    boundary : {"mirror", "reflect", "periodic"}
        ``"mirror"`` extends the series by mirror reflection out to a power
        of two of at least twice its length and wraps periodically there, so
        no coefficient at an observed shift mixes the two ends of the series.
        ``"reflect"`` mirror-pads only up to the next power of two (a dyadic
        series is left as is) and then wraps.  ``"periodic"`` wraps the raw
        series and needs a dyadic length.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    T = len(x)
    if J is None:
        J = default_levels(T)
    _check_levels(J)
    if T < 2 or J > math.floor(math.log2(T)):
        raise ValueError(f"J={J} exceeds floor(log2 T) for T={T}")
    if boundary == "mirror":
        N = padded_length(T)
        y = reflect_pad(x, N)
    elif boundary == "reflect":
        N = 1 << int(math.ceil(math.log2(T)))
        y = reflect_pad(x, N) if N > T else x
    elif boundary == "periodic":
        if T & (T - 1):
            raise ValueError("periodic boundary requires a dyadic series length")
        N, y = T, x
    else:
        raise ValueError(f"unknown boundary rule {boundary!r}")
    fy = np.fft.rfft(y)
    d = np.fft.irfft(fy[None, :] * _wavelet_ffts(family, J, N), n=N, axis=1)
    return d[:, :T]
