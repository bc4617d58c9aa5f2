"""
Simulation models A-M.

A-C are stationary (white noise, AR(1), MA(1)); D-G time-varying AR; H-J
time-varying MA; K uniformly modulated white noise; L and M locally
stationary wavelet processes with spectra P3 and P4.  Coefficient paths are
evaluated at rescaled time z = t/T for t = 1..T.

Randomness comes from numpy's Philox counter-based bit generator keyed by
``(seed, replication)`` through :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .wavelets import HAAR, WaveletFamily, build_discrete_wavelets

RNG_ALGORITHM = "numpy.random.Philox(4x64-10) via SeedSequence([seed, replication])"
BURN_IN = 100
MODEL_IDS = tuple("ABCDEFGHIJKLM")
INNOVATIONS = ("gaussian", "t4_unit_variance")
DEFAULT_LENGTHS = {**{m: 128 for m in "ABCDEFGHIJK"}, "L": 512, "M": 350}


def make_rng(seed: int, replication: int = 0) -> np.random.Generator:
    """Generator for one replication; streams for distinct (seed, rep) are independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replication)])))


@dataclass(frozen=True)
class ModelSpec:
    id: str
    length_override: int | None = None
    innovation: str = "gaussian"

    def __post_init__(self):
        if self.id not in MODEL_IDS:
            raise ValueError(f"unknown model {self.id!r}; expected one of A..M")
        if self.innovation not in INNOVATIONS:
            raise ValueError(f"unknown innovation {self.innovation!r}")

    @property
    def length(self) -> int:
        return self.length_override or DEFAULT_LENGTHS[self.id]

    def to_dict(self) -> dict:
        return {"id": self.id, "length": self.length, "innovation": self.innovation}


def innovations(rng: np.random.Generator, n: int, kind: str = "gaussian") -> np.ndarray:
    if kind == "gaussian":
        return rng.standard_normal(n)
    if kind == "t4_unit_variance":
        # Var(t_4) = 2
        return rng.standard_t(4, n) / math.sqrt(2.0)
    raise ValueError(f"unknown innovation {kind!r}")


# coefficient paths -------------------------------------------------------

def alpha_d(z):
    return 1.8 * z - 0.9


_E_PIECES = (
    (0 / 8, lambda z: 5.6 * z - 0.9),
    (1 / 8, lambda z: 4.8 * z - 0.8),
    (2 / 8, lambda z: 3.2 * z - 0.4),
    (3 / 8, lambda z: 0.8 + 0.0 * z),
    (5 / 8, lambda z: -2.4 * z + 2.6),
    (6 / 8, lambda z: -7.2 * z + 5.4),
    (7 / 8, lambda z: -1.6 * z + 0.5),
)


def alpha_e(z):
    """Piecewise path on left-closed, right-open intervals (z = 1 joins the last)."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    starts = [s for s, _ in _E_PIECES]
    idx = np.searchsorted(starts, z, side="right") - 1
    idx = np.clip(idx, 0, len(_E_PIECES) - 1)
    for i, (_, f) in enumerate(_E_PIECES):
        sel = idx == i
        out[sel] = f(z[sel])
    return out if out.ndim else float(out)


def alpha_f(z):
    return 1.6 * z - 1.1


def alpha_g12(z):
    return 0.7 * z - 0.4


def alpha_g_lag12(z):
    return 0.3 * z


def beta_h(z):
    return np.where(np.asarray(z) < 0.9, 1.0, -1.0)


def beta_i(z):
    return 2 * z - 1


def beta_j2(z):
    return 9 * z - 0.8


def sigma2_k(z):
    return (9 * z + 1) ** 1.5


# spectra ---------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumFunction:
    """S_j(z) for j = 1..levels; scales above ``levels`` carry no power."""

    evaluator: Callable
    levels: int
    name: str = ""

    def __call__(self, j: int, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if j < 1 or j > self.levels:
            return np.zeros(z.shape)
        return np.asarray(self.evaluator(j, z), dtype=float) * np.ones(z.shape)


def _p3_s1(z):
    return 0.25 - (z - 0.5) ** 2


def spectrum_p3() -> SpectrumFunction:
    def ev(j, z):
        if j == 1:
            return _p3_s1(z)
        if j == 2:
            return _p3_s1(np.mod(z + 0.5, 1.0))
        return np.zeros_like(z)
    return SpectrumFunction(ev, 2, "P3")


def _p4_s1(z):
    return np.exp(-4 * (z - 0.25) ** 2)


def spectrum_p4() -> SpectrumFunction:
    def ev(j, z):
        if j == 1:
            return _p4_s1(z)
        if j == 3:
            return _p4_s1(np.mod(z - 0.25, 1.0))
        if j == 4:
            return _p4_s1(np.mod(z + 0.25, 1.0))
        return np.zeros_like(z)
    return SpectrumFunction(ev, 4, "P4")


def lsw_synthesize(spectrum: SpectrumFunction, T: int, family: WaveletFamily = HAAR,
                   seed: int | None = None, rng: np.random.Generator | None = None,
                   innovation: str = "gaussian") -> np.ndarray:
    """X_t = sum_j sum_k S_j(k/T)^{1/2} psi_{j,k}(t) xi_{j,k}, periodic in t.

    ``T`` must be a power of two no smaller than the finest non-zero scale's
    support.
    """
    if T < 2 or T & (T - 1):
        raise ValueError("LSW synthesis needs a dyadic length")
    if rng is None:
        rng = make_rng(0 if seed is None else seed)
    J = int(math.log2(T))
    if spectrum.levels > J:
        raise ValueError(f"spectrum has {spectrum.levels} scales, T={T} supports {J}")
    z = np.arange(T) / T
    ws = build_discrete_wavelets(family, spectrum.levels)
    x = np.zeros(T)
    for j in range(1, spectrum.levels + 1):
        S = spectrum(j, z)
        if np.any(S < 0):
            raise ValueError(f"negative spectrum at scale {j}")
        xi = innovations(rng, T, innovation)
        if not np.any(S):
            continue
        a = np.sqrt(S) * xi
        psi = np.zeros(T)
        np.add.at(psi, np.arange(len(ws[j])) % T, ws[j])
        # X_t = sum_k a_k psi(t - k): circular convolution
        x += np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(psi), n=T)
    return x


# model simulation ---------------------------------------------------------

def _tvar(coef_fn, lags, T, eps):
    """X_t = sum_i a_i(t/T) X_{t-lag_i} + Z_t with a burn-in at z = 0 coefficients."""
    n = BURN_IN + T
    z = np.concatenate([np.zeros(BURN_IN), np.arange(1, T + 1) / T])
    coefs = coef_fn(z)  # (len(lags), n)
    x = np.zeros(n)
    for t in range(n):
        v = eps[t]
        for i, lag in enumerate(lags):
            if t - lag >= 0:
                v += coefs[i][t] * x[t - lag]
        x[t] = v
    return x[BURN_IN:]


def _tvma(coef_fn, T, eps):
    """X_t = Z_t + sum_i b_i(t/T) Z_{t-i}; pre-sample innovations from the burn-in."""
    z = np.arange(1, T + 1) / T
    coefs = coef_fn(z)
    Z = eps[BURN_IN:]
    x = Z.copy()
    for i, b in enumerate(coefs, start=1):
        x += b * eps[BURN_IN - i: BURN_IN - i + T]
    return x


def simulate(spec: ModelSpec | str, seed: int = 0, replication: int = 0) -> np.ndarray:
    """One realisation of the model; deterministic in (spec, seed, replication)."""
    if isinstance(spec, str):
        spec = ModelSpec(spec)
    rng = make_rng(seed, replication)
    T = spec.length
    kind = spec.innovation
    m = spec.id
    if m in "LM":
        n = 512 if m == "M" else T
        N = 1 << max(1, int(math.ceil(math.log2(n))))
        sp = spectrum_p3() if m == "L" else spectrum_p4()
        return lsw_synthesize(sp, N, HAAR, rng=rng, innovation=kind)[:T]
    eps = innovations(rng, BURN_IN + T, kind)
    if m == "A":
        return eps[BURN_IN:].copy()
    if m == "B":
        return _tvar(lambda z: [np.full_like(z, 0.7)], [1], T, eps)
    if m == "C":
        return _tvma(lambda z: [np.full_like(z, -0.5)], T, eps)
    if m == "D":
        return _tvar(lambda z: [alpha_d(z)], [1], T, eps)
    if m == "E":
        return _tvar(lambda z: [alpha_e(z)], [1], T, eps)
    if m == "F":
        return _tvar(lambda z: [alpha_f(z), alpha_f(z)], [1, 2], T, eps)
    if m == "G":
        return _tvar(lambda z: [alpha_g12(z), alpha_g12(z), alpha_g_lag12(z)], [1, 2, 12], T, eps)
    if m == "H":
        return _tvma(lambda z: [beta_h(z)], T, eps)
    if m == "I":
        return _tvma(lambda z: [beta_i(z)], T, eps)
    if m == "J":
        return _tvma(lambda z: [beta_i(z), beta_j2(z)], T, eps)
    if m == "K":
        z = np.arange(1, T + 1) / T
        return np.sqrt(sigma2_k(z)) * eps[BURN_IN:]
    raise AssertionError(m)


def model_coefficients(model: str, z) -> dict:
    """Coefficient paths of the time-varying models at rescaled times ``z``."""
    z = np.asarray(z, dtype=float)
    table = {
        "D": {"alpha": alpha_d},
        "E": {"alpha": alpha_e},
        "F": {"alpha1": alpha_f, "alpha2": alpha_f},
        "G": {"alpha1": alpha_g12, "alpha2": alpha_g12, "alpha12": alpha_g_lag12},
        "H": {"beta": beta_h},
        "I": {"beta": beta_i},
        "J": {"beta1": beta_i, "beta2": beta_j2},
        "K": {"sigma2": sigma2_k},
    }
    if model not in table:
        raise ValueError(f"model {model!r} has no coefficient path")
    return {k: f(z) for k, f in table[model].items()}
