"""Hot numeric kernels with numba and pure-numpy implementations.

Every public function here dispatches to the backend picked in
:mod:`fracvol.backend`.  The numba versions are straight loop translations of
the numpy expressions; within one backend results are fully deterministic.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc as _erfc

from .backend import using_numba

_SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _fbm_transform_numpy(increments: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # weights is lower triangular (n, n); increments (m, n)
    return increments @ weights.T


def _willard_moments_numpy(sig: np.ndarray, d_bm: np.ndarray, dt: float):
    qv = np.einsum("ij,ij->i", sig, sig) * dt
    ito = np.einsum("ij,ij->i", sig, d_bm)
    return qv, ito


def _norm_cdf_numpy(x: np.ndarray) -> np.ndarray:
    return 0.5 * _erfc(-x / _SQRT2)


def _conditional_call_numpy(spot_eff, total_sd, strike):
    out = np.maximum(spot_eff - strike, 0.0)
    ok = total_sd > 0.0
    sd = total_sd[ok]
    d1 = np.log(spot_eff[ok] / strike) / sd + 0.5 * sd
    out[ok] = spot_eff[ok] * _norm_cdf_numpy(d1) - strike * _norm_cdf_numpy(d1 - sd)
    return out


def _conditional_digital_numpy(cond_mean, total_sd, threshold):
    out = (cond_mean > threshold).astype(np.float64)
    ok = total_sd > 0.0
    out[ok] = _norm_cdf_numpy((cond_mean[ok] - threshold) / total_sd[ok])
    return out


def _log_trapezoid_exp_numpy(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    zmax = z.max(axis=1, keepdims=True)
    return zmax[:, 0] + np.log(np.exp(z - zmax) @ w)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if using_numba():
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _fbm_transform_numba(increments, weights):
        m, n = increments.shape
        out = np.empty((m, n))
        for p in prange(m):
            for i in range(n):
                acc = 0.0
                for j in range(i + 1):
                    acc += weights[i, j] * increments[p, j]
                out[p, i] = acc
        return out

    @njit(cache=True, parallel=True)
    def _willard_moments_numba(sig, d_bm, dt):
        m, n = sig.shape
        qv = np.empty(m)
        ito = np.empty(m)
        for p in prange(m):
            a = 0.0
            b = 0.0
            for j in range(n):
                s = sig[p, j]
                a += s * s
                b += s * d_bm[p, j]
            qv[p] = a * dt
            ito[p] = b
        return qv, ito

    @njit(cache=True)
    def _phi(x):
        return 0.5 * math.erfc(-x / _SQRT2)

    @njit(cache=True, parallel=True)
    def _conditional_call_numba(spot_eff, total_sd, strike):
        m = spot_eff.shape[0]
        out = np.empty(m)
        for p in prange(m):
            sd = total_sd[p]
            if sd > 0.0:
                d1 = math.log(spot_eff[p] / strike) / sd + 0.5 * sd
                out[p] = spot_eff[p] * _phi(d1) - strike * _phi(d1 - sd)
            else:
                out[p] = max(spot_eff[p] - strike, 0.0)
        return out

    @njit(cache=True, parallel=True)
    def _conditional_digital_numba(cond_mean, total_sd, threshold):
        m = cond_mean.shape[0]
        out = np.empty(m)
        for p in prange(m):
            sd = total_sd[p]
            if sd > 0.0:
                out[p] = _phi((cond_mean[p] - threshold) / sd)
            else:
                out[p] = 1.0 if cond_mean[p] > threshold else 0.0
        return out

    @njit(cache=True, parallel=True)
    def _log_trapezoid_exp_numba(z, w):
        m, k = z.shape
        out = np.empty(m)
        for p in prange(m):
            zmax = z[p, 0]
            for j in range(1, k):
                if z[p, j] > zmax:
                    zmax = z[p, j]
            acc = 0.0
            for j in range(k):
                acc += w[j] * math.exp(z[p, j] - zmax)
            out[p] = zmax + math.log(acc)
        return out

    fbm_transform = _fbm_transform_numba
    willard_moments = _willard_moments_numba
    conditional_call = _conditional_call_numba
    conditional_digital = _conditional_digital_numba
    log_trapezoid_exp = _log_trapezoid_exp_numba
else:
    fbm_transform = _fbm_transform_numpy
    willard_moments = _willard_moments_numpy
    conditional_call = _conditional_call_numpy
    conditional_digital = _conditional_digital_numpy
    log_trapezoid_exp = _log_trapezoid_exp_numpy
