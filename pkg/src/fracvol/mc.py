"""Monte Carlo validation of the asymptotic formulas.

Call and digital prices are computed by conditioning on the volatility
driver: given the fBM path (and hence the volatility path), the log-price is
conditionally Gaussian, so each sampled path contributes an exact
Black-Scholes-type price rather than a payoff draw.  This removes all
variance coming from the price noise and is what makes half-million-path
runs at short maturities informative.

All estimators draw chunk c of paths from ``default_rng([seed, c])`` with a
fixed chunk size, so results are bit-identical for a given seed regardless
of the number of worker threads.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import (conditional_call, conditional_digital, fbm_transform,
                       log_trapezoid_exp, willard_moments)
from .fbm import CHUNK_SIZE, Hurst, KernelGrid, get_kernel_grid, \
    sample_fbm_unit_interval
from .ritz import VolFunction
from .smile import implied_vol


@dataclass(frozen=True)
class ModelSpec:
    """Rough-volatility price model dS = S sigma(B^H) dW, d<W,B> = rho dt."""

    vol: VolFunction
    hurst: Hurst
    rho: float
    spot: float = 1.0

    def __post_init__(self) -> None:
        if not -1.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if self.spot <= 0.0:
            raise ValueError("spot must be positive")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    wall_time: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error,
                "n_samples": self.n_samples, "seed": self.seed}


def _moments_chunk(kg: KernelGrid, vol: VolFunction, seed: int,
                   chunk_idx: int, m: int):
    """Integrated variance and Ito integral of sigma against B for one chunk.

    Mirrors the chunk protocol of :func:`fracvol.fbm.sample_paths`: chunk c
    draws from ``default_rng([seed, c])``, volatility is evaluated at the
    left endpoint of each cell.
    """
    n = kg.grid.n_steps
    dt = kg.grid.dt
    rng = np.random.default_rng([seed, chunk_idx])
    d_bm = np.sqrt(dt) * rng.standard_normal((m, n))
    fbm = fbm_transform(d_bm, kg.weights / dt)
    sig_left = np.concatenate([np.zeros((m, 1)), fbm[:, :-1]], axis=1)
    sig = vol(sig_left)
    return willard_moments(np.ascontiguousarray(sig), d_bm, dt)


_MOMENT_CACHE: dict = {}


def _conditional_moments(model: ModelSpec, t: float, n_paths: int,
                         n_steps: int, seed: int, threads: int = 1):
    """(integrated variance, Ito integral) for all paths, cached."""
    key = (model.vol.descriptor, model.hurst.h, t, n_paths, n_steps, seed)
    if key in _MOMENT_CACHE:
        return _MOMENT_CACHE[key]
    kg = get_kernel_grid(model.hurst.h, n_steps, t)
    sizes = []
    done = 0
    while done < n_paths:
        sizes.append(min(CHUNK_SIZE, n_paths - done))
        done += sizes[-1]
    qv = np.empty(n_paths)
    ito = np.empty(n_paths)
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def work(c: int) -> None:
        a, b = _moments_chunk(kg, model.vol, seed, c, sizes[c])
        qv[offsets[c]:offsets[c + 1]] = a
        ito[offsets[c]:offsets[c + 1]] = b

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, range(len(sizes))))
    else:
        for c in range(len(sizes)):
            work(c)
    _MOMENT_CACHE.clear()
    _MOMENT_CACHE[key] = (qv, ito)
    return qv, ito


def mc_call_price(model: ModelSpec, t: float, strike: float, n_paths: int,
                  n_steps: int, seed: int, threads: int = 1) -> McEstimate:
    """Conditional Monte Carlo call price E[(S_t - K)^+]."""
    if strike <= 0.0 or t <= 0.0:
        raise ValueError("strike and maturity must be positive")
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    start = time.perf_counter()
    qv, ito = _conditional_moments(model, t, n_paths, n_steps, seed, threads)
    rho = model.rho
    spot_eff = model.spot * np.exp(rho * ito - 0.5 * rho * rho * qv)
    total_sd = np.sqrt((1.0 - rho * rho) * qv)
    prices = conditional_call(spot_eff, total_sd, strike)
    mean = float(np.mean(prices))
    se = float(np.std(prices, ddof=1) / np.sqrt(n_paths))
    return McEstimate(mean, se, n_paths, seed, time.perf_counter() - start)


@dataclass(frozen=True)
class McSmilePoint:
    x: float
    strike: float
    price: float
    price_se: float
    implied_vol: float
    iv_lo: float
    iv_hi: float


def mc_smile(model: ModelSpec, t: float, xs: Sequence[float], n_paths: int,
             n_steps: int, seed: int, threads: int = 1) -> list:
    """Implied-vol curve at strikes K = spot * exp(x sqrt(t) / t^H).

    All strikes share one set of simulated paths.  ``iv_lo``/``iv_hi`` are
    the implied vols of price -/+ one standard error.
    """
    h = model.hurst.h
    out = []
    for x in xs:
        strike = model.spot * float(np.exp(x * t ** (0.5 - h)))
        est = mc_call_price(model, t, strike, n_paths, n_steps, seed, threads)
        iv = implied_vol(est.mean, model.spot, strike, t)
        iv_lo = implied_vol(est.mean - est.std_error, model.spot, strike, t)
        iv_hi = implied_vol(est.mean + est.std_error, model.spot, strike, t)
        out.append(McSmilePoint(x=float(x), strike=strike, price=est.mean,
                                price_se=est.std_error, implied_vol=iv,
                                iv_lo=iv_lo, iv_hi=iv_hi))
    return out


def mc_digital_prob(model: ModelSpec, t: float, x: float, n_paths: int,
                    n_steps: int, seed: int, threads: int = 1) -> McEstimate:
    """P(X_t >= x t^{1/2 - H} sqrt(t)... ) -- tail probability of the
    log-price beyond the large-deviation threshold k = x t^{1/2 - H}.

    For x > 0 the upper tail P(X_t > k) is returned, for x < 0 the lower
    tail P(X_t < k); each path contributes the exact conditional Gaussian
    probability.
    """
    if x == 0.0:
        raise ValueError("x must be nonzero")
    start = time.perf_counter()
    qv, ito = _conditional_moments(model, t, n_paths, n_steps, seed, threads)
    rho = model.rho
    cond_mean = rho * ito - 0.5 * qv
    total_sd = np.sqrt((1.0 - rho * rho) * qv)
    k = x * t ** (0.5 - model.hurst.h)
    probs = conditional_digital(cond_mean, total_sd, k)
    if x < 0.0:
        probs = 1.0 - probs
    mean = float(np.mean(probs))
    se = float(np.std(probs, ddof=1) / np.sqrt(n_paths))
    return McEstimate(mean, se, n_paths, seed, time.perf_counter() - start)


def mc_martingale_check(model: ModelSpec, t: float, n_paths: int,
                        n_steps: int, seed: int, threads: int = 1) -> McEstimate:
    """E[S_t] under conditioning; should equal the spot."""
    start = time.perf_counter()
    qv, ito = _conditional_moments(model, t, n_paths, n_steps, seed, threads)
    rho = model.rho
    vals = model.spot * np.exp(rho * ito - 0.5 * rho * rho * qv)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n_paths))
    return McEstimate(mean, se, n_paths, seed, time.perf_counter() - start)


def default_exponential_steps(t: float) -> int:
    """Time-step count for the exponential-functional experiments."""
    return int(min(max(100.0 * t, 100.0), 1e6))


@dataclass(frozen=True)
class ExponentialFunctionalSample:
    """Samples of the normalized log exponential functional of fBM.

    ``stat`` holds (1/t^H) * (log(A_t / t) - 2 mu t) where
    A_t = int_0^t exp(2 (mu s + B^H_s)) ds, computed through the
    self-similarity reduction A_t / t = int_0^1 exp(2 (mu t u + t^H beta_u)) du
    with beta a unit-interval fBM.  ``ref_double_max`` holds independent
    samples of 2 max_{[0,1]} B^H, the large-t limit law for mu = 0;
    ``ref_double_normal`` holds samples of 2 N(0, 1), the limit law for
    mu > 0 and H < 1/2 (and, by reflection, |ref_double_normal| is the
    mu = 0 limit when H = 1/2).
    """

    t: float
    hurst: float
    mu: float
    stat: np.ndarray
    ref_double_max: np.ndarray
    ref_double_normal: np.ndarray


def mc_exponential_functional(hurst: Hurst, t: float, mu: float,
                              n_paths: int, seed: int,
                              n_steps: Optional[int] = None
                              ) -> ExponentialFunctionalSample:
    """Sample the normalized exponential functional and its limit law."""
    if t <= 0.0 or n_paths < 2:
        raise ValueError("need t > 0 and n_paths >= 2")
    if n_steps is None:
        n_steps = default_exponential_steps(t)
    n = int(n_steps)
    u = np.linspace(0.0, 1.0, n + 1)
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    th = t ** hurst.h
    rows_per_chunk = max(1, int(2e7) // (n + 1))
    stat = np.empty(n_paths)
    done = 0
    chunk_idx = 0
    while done < n_paths:
        m = min(rows_per_chunk, n_paths - done)
        rng = np.random.default_rng([seed, chunk_idx])
        beta = sample_fbm_unit_interval(hurst, n, m, rng)
        z = 2.0 * (mu * t * u + th * beta)
        stat[done:done + m] = (log_trapezoid_exp(z, w) - 2.0 * mu * t) / th
        done += m
        chunk_idx += 1
    ref_rng = np.random.default_rng([seed, 999983])
    ref = sample_fbm_unit_interval(hurst, 4096, n_paths, ref_rng)
    ref_double_max = 2.0 * np.max(ref, axis=1)
    ref_double_normal = 2.0 * ref_rng.standard_normal(n_paths)
    return ExponentialFunctionalSample(t=t, hurst=hurst.h, mu=mu,
                                       stat=stat,
                                       ref_double_max=ref_double_max,
                                       ref_double_normal=ref_double_normal)
