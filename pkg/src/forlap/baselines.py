"""Stationary comparison forecasters: AR(q) with AIC, exponential smoothing, windowed AR."""

from __future__ import annotations

import numpy as np

from .forecast import ForecastResult


def levinson_durbin(acv, order: int):
    """AR coefficients and innovation variances for orders 0..order.

    Returns
    -------
    coefs : list of ndarray
        ``coefs[q]`` holds the order-q coefficients (lag 1 first).
    sigma2 : ndarray
        Innovation variance for each order.
    pacf : ndarray
        Partial autocorrelations at lags 1..order.
    """
    acv = np.asarray(acv, dtype=float)
    sigma2 = np.empty(order + 1)
    sigma2[0] = acv[0]
    coefs = [np.zeros(0)]
    pacf = np.zeros(order)
    phi = np.zeros(0)
    for k in range(1, order + 1):
        if sigma2[k - 1] <= 0:
            sigma2[k:] = 0.0
            coefs.extend([np.append(phi, np.zeros(j)) for j in range(1, order - k + 2)])
            break
        kappa = (acv[k] - phi @ acv[1:k][::-1]) / sigma2[k - 1]
        phi = np.append(phi - kappa * phi[::-1], kappa)
        pacf[k - 1] = kappa
        sigma2[k] = sigma2[k - 1] * (1 - kappa * kappa)
        coefs.append(phi.copy())
    return coefs, sigma2, pacf


def _psi_weights(phi, h):
    """MA(infinity) weights psi_0..psi_{h-1} of a causal AR."""
    psi = np.zeros(h)
    psi[0] = 1.0
    for i in range(1, h):
        psi[i] = sum(phi[k] * psi[i - 1 - k] for k in range(min(len(phi), i)))
    return psi


def _ar_recursive(x, phi, mean, h):
    hist = list(np.asarray(x, dtype=float) - mean)
    out = np.empty(h)
    for i in range(h):
        nxt = sum(phi[k] * hist[-1 - k] for k in range(len(phi)))
        hist.append(nxt)
        out[i] = nxt + mean
    return out


def forecast_baseline_ar(series, h: int = 1, alpha: float = 0.05, max_order: int = 10,
                         demean: bool = True) -> ForecastResult:
    """Yule-Walker AR(q), q = 0..min(max_order, T/5), chosen by AIC."""
    x = np.asarray(series, dtype=float)
    T = len(x)
    mean = float(x.mean()) if demean else 0.0
    xc = x - mean
    qmax = int(min(max_order, T // 5))
    acv = np.array([xc[: T - k] @ xc[k:] / T for k in range(qmax + 1)])
    if acv[0] <= 1e-14 * max(1.0, mean * mean):
        return ForecastResult(np.full(h, x[-1] if not demean else mean), np.zeros(h),
                              alpha, 0, False, "ar")
    coefs, sigma2, _ = levinson_durbin(acv, qmax)
    with np.errstate(divide="ignore"):
        aic = T * np.log(np.maximum(sigma2, 1e-300)) + 2 * (np.arange(qmax + 1) + 1)
    q = int(np.argmin(aic))
    phi = coefs[q]
    points = _ar_recursive(x, phi, mean, h)
    psi = _psi_weights(phi, h)
    mspe = sigma2[q] * np.cumsum(psi ** 2)
    return ForecastResult(points, mspe, alpha, q, False, "ar", (tuple(phi),))


def _ses_sse(x, a):
    level = x[0]
    sse = 0.0
    for v in x[1:]:
        e = v - level
        sse += e * e
        level += a * e
    return sse, level


def forecast_baseline_es(series, h: int = 1, alpha: float = 0.05,
                         grid=None) -> ForecastResult:
    """Simple exponential smoothing; weight minimising in-sample one-step SSE."""
    x = np.asarray(series, dtype=float)
    if len(x) == 1:
        return ForecastResult(np.full(h, x[0]), np.zeros(h), alpha, 0, False, "es")
    grid = np.round(np.arange(0.01, 1.0, 0.01), 2) if grid is None else np.asarray(grid)
    best = None
    for a in grid:
        sse, level = _ses_sse(x, a)
        if best is None or sse < best[0]:
            best = (sse, a, level)
    sse, a, level = best
    sigma2 = sse / (len(x) - 1)
    mspe = sigma2 * (1 + np.arange(h) * a * a)
    return ForecastResult(np.full(h, level), mspe, alpha, 0, False, "es", ((float(a),),))


def forecast_baseline_tvar(series, order: int = 2, window: int | None = None, h: int = 1,
                           alpha: float = 0.05) -> ForecastResult:
    """Least-squares AR(order) on the trailing ``window`` observations (default T/3)."""
    x = np.asarray(series, dtype=float)
    T = len(x)
    window = T // 3 if window is None else int(window)
    if window > T:
        raise ValueError(f"window {window} longer than series ({T})")
    if window < 2 * order + 2:
        raise ValueError(f"window {window} too short for order {order}")
    seg = x[T - window:]
    y = seg[order:]
    X = np.column_stack([seg[order - k - 1: len(seg) - k - 1] for k in range(order)])
    if not np.any(seg):
        return ForecastResult(np.zeros(h), np.zeros(h), alpha, order, False, "tvar")
    phi, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ phi
    sigma2 = float(resid @ resid / max(len(y) - order, 1))
    points = _ar_recursive(x, phi, 0.0, h)
    mspe = sigma2 * np.cumsum(_psi_weights(phi, h) ** 2)
    return ForecastResult(points, mspe, alpha, order, False, "tvar", (tuple(phi),))
