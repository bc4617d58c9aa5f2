"""Brute-force reference implementations used only by the tests.

Everything here is written as direct sums or dense linear algebra, with no
FFTs, cumulative sums or factorisation tricks, so it is independent of the
code under test.
"""

import math

import numpy as np


def haar_psi(j):
    """Haar discrete wavelet at scale j: 2^{j-1} values +2^{-j/2}, then as many -2^{-j/2}."""
    half = 2 ** (j - 1)
    return np.array([2 ** (-j / 2)] * half + [-(2 ** (-j / 2))] * half)


def haar_ac_closed_form(j, tau):
    """Closed form of the Haar autocorrelation wavelet."""
    a = abs(tau)
    n = 2 ** j
    if a <= n / 2:
        return 1 - 3 * a / n
    if a <= n:
        return a / n - 1
    return 0.0


def ac_brute(psi, tau):
    L = len(psi)
    total = 0.0
    for k in range(L):
        if 0 <= k + tau < L:
            total += psi[k] * psi[k + tau]
    return total


def a_matrix_brute(psis):
    J = len(psis)
    A = np.zeros((J, J))
    for j in range(J):
        for l in range(J):
            M = max(len(psis[j]), len(psis[l]))
            for tau in range(-M, M + 1):
                A[j, l] += ac_brute(psis[j], tau) * ac_brute(psis[l], tau)
    return A


def haar_a_closed_form(J):
    A = np.zeros((J, J))
    for j in range(1, J + 1):
        A[j - 1, j - 1] = (2 ** (2 * j) + 5) / (3 * 2 ** j)
        for l in range(j + 1, J + 1):
            A[j - 1, l - 1] = A[l - 1, j - 1] = (2 ** (2 * j - 1) + 1) / 2 ** l
    return A


def mirror_value(x, m):
    """x extended past its right end by bouncing reflection (no edge repeat)."""
    T = len(x)
    period = 2 * T - 2
    m = m % period
    return x[m] if m < T else x[period - m]


def ndwt_brute(x, psis, boundary="mirror"):
    T = len(x)
    d = np.zeros((len(psis), T))
    for j, psi in enumerate(psis):
        for k in range(T):
            s = 0.0
            for n, w in enumerate(psi):
                if boundary == "periodic":
                    s += w * x[(k + n) % T]
                else:
                    s += w * mirror_value(x, k + n)
            d[j, k] = s
    return d


def running_mean_brute(I, s, n_forward=1):
    J, t = I.shape
    out = np.zeros((J, t + n_forward))
    for j in range(J):
        for k in range(t):
            vals = [I[j, u] for u in range(k - s, k + s + 1) if 0 <= u < t]
            out[j, k] = sum(vals) / len(vals)
        w = min(2 * s + 1, t)
        for f in range(n_forward):
            out[j, t + f] = sum(I[j, t - w:]) / w
    return out


def ar_acv(phi, sigma2=1.0, nlags=20):
    """Autocovariance of a causal AR process from a long MA(inf) expansion."""
    n = 4000
    psi = np.zeros(n)
    psi[0] = 1.0
    for i in range(1, n):
        psi[i] = sum(phi[k] * psi[i - 1 - k] for k in range(min(len(phi), i)))
    return np.array([sigma2 * float(psi[: n - h] @ psi[h:]) for h in range(nlags + 1)])


def pacf_from_precision(acv, tau):
    """Partial autocorrelation at lag tau via the inverse covariance matrix.

    For (X_0..X_tau) with covariance G, the partial correlation of the end
    points given the middle is -P[0,tau]/sqrt(P[0,0] P[tau,tau]) with P = G^{-1}.
    """
    G = np.array([[acv[abs(a - b)] for b in range(tau + 1)] for a in range(tau + 1)])
    P = np.linalg.inv(G)
    return -P[0, tau] / math.sqrt(P[0, 0] * P[tau, tau])


def lpacf_precision_oracle(cov):
    """Local partial autocorrelations from a covariance matrix over times
    target-tau_max..target (last row is the target), lag by lag."""
    n = len(cov)
    out = []
    for tau in range(1, n):
        idx = list(range(n - 1 - tau, n))
        P = np.linalg.inv(cov[np.ix_(idx, idx)])
        out.append(-P[0, -1] / math.sqrt(P[0, 0] * P[-1, -1]))
    return np.array(out)


def gyw_dense(B, p, h):
    """Weights (b_0 on X_{t-1}) and MSPE from a dense inverse of the principal block."""
    P = B[:p, :p]
    r = B[:p, p + h - 1]
    sol = np.linalg.inv(P) @ r
    mspe = B[-1, -1] - r @ sol
    return sol[::-1], mspe
