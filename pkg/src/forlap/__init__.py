"""Forecasting locally stationary time series with lpacf-selected windows."""

from .errors import ConfigurationError, IllConditionedError, NumericalError
from .forecast import (
    ForecastResult,
    ForlapOptions,
    FvbvsConfig,
    build_gyw,
    forecast_forlap,
    forecast_fvbvs,
    solve_gyw,
)
from .baselines import forecast_baseline_ar, forecast_baseline_es, forecast_baseline_tvar
from .lpacf import LocalAcv, WindowConfig, local_acv, lpacf_confidence, lpacf_windowed, select_p
from .simulate import ModelSpec, lsw_synthesize, simulate, spectrum_p3, spectrum_p4
from .spectral import (
    auto_bandwidth,
    correct_spectrum,
    estimate_spectrum,
    raw_wavelet_periodogram,
    running_mean_smooth,
)
from .wavelets import (
    HAAR,
    WaveletFamily,
    a_matrix,
    autocorrelation_wavelet,
    build_discrete_wavelets,
    ndwt,
)
from .evaluation import aggregate_relative, interval_score, rolling_backtest

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "IllConditionedError", "NumericalError",
    "ForecastResult", "ForlapOptions", "FvbvsConfig", "build_gyw", "forecast_forlap",
    "forecast_fvbvs", "solve_gyw",
    "forecast_baseline_ar", "forecast_baseline_es", "forecast_baseline_tvar",
    "LocalAcv", "WindowConfig", "local_acv", "lpacf_confidence", "lpacf_windowed", "select_p",
    "ModelSpec", "lsw_synthesize", "simulate", "spectrum_p3", "spectrum_p4",
    "auto_bandwidth", "correct_spectrum", "estimate_spectrum", "raw_wavelet_periodogram",
    "running_mean_smooth",
    "HAAR", "WaveletFamily", "a_matrix", "autocorrelation_wavelet", "build_discrete_wavelets", "ndwt",
    "aggregate_relative", "interval_score", "rolling_backtest",
]
