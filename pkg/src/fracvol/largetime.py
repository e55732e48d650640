"""Large-time asymptotics: CEV transition density, large-deviation rates for
the CEV diffusion and its rough time-changed counterpart.

The CEV model is dS = sigma S^beta dW with beta in (0, 1); writing
beta_bar = beta - 1 < 0 and nu = 1 / (2 |beta_bar|), the transition density
before absorption is an explicit Bessel-type expression, and the large-time
decay of moments E[S_t^q] is governed by the rate

    I_beta(S) = S^{2 |beta_bar|} / (2 sigma^2 beta_bar^2).

For the time-changed model (a rough-volatility clock of self-similarity
index p), the variational rate J(a) scales as a^{1/p} J(1), and the
resulting moment rate is an explicit one-dimensional infimum with a closed
form minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize, minimize_scalar

from .fbm import KernelGrid
from .ritz import DEFAULT_OPTIONS, RitzOptions, _basis, _energy_from_array, \
    _minimize_restarted, _path_map, _require_unit_horizon


# ---------------------------------------------------------------------------
# modified Bessel function of the first kind
# ---------------------------------------------------------------------------

def _log_bessel_i_series(nu: float, z: float) -> float:
    """log I_nu(z) by the ascending power series (small and moderate z)."""
    half = 0.5 * z
    log_term = nu * math.log(half) - math.lgamma(nu + 1.0)
    # accumulate the series in ratio form for stability
    total = 1.0
    term = 1.0
    for k in range(1, 500):
        term *= half * half / (k * (nu + k))
        total += term
        if term < 1e-17 * total:
            break
    return log_term + math.log(total)


def _log_bessel_i_asymptotic(nu: float, z: float) -> float:
    """log I_nu(z) by the uniform large-z expansion
    I_nu(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k."""
    mu4 = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 60):
        term *= -(mu4 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        # the expansion is divergent: truncate at the smallest term
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-17 * abs(total):
            break
    return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(total)


def bessel_crossover(nu: float) -> float:
    """Switch point between the series and asymptotic branches."""
    return 15.0 + nu


def log_bessel_i(nu: float, z: float) -> float:
    """log of the modified Bessel function I_nu(z) for z > 0, nu >= 0."""
    if z <= 0.0 or nu < 0.0:
        raise ValueError("need z > 0 and nu >= 0")
    if z < bessel_crossover(nu):
        return _log_bessel_i_series(nu, z)
    return _log_bessel_i_asymptotic(nu, z)


def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function I_nu(z): power series below the crossover
    z = 15 + nu, uniform asymptotic expansion above it."""
    return math.exp(log_bessel_i(nu, z))


# ---------------------------------------------------------------------------
# CEV diffusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CevSpec:
    """CEV diffusion dS = sigma S^beta dW, beta in (0, 1)."""

    beta: float
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")

    @property
    def beta_bar(self) -> float:
        return self.beta - 1.0

    @property
    def nu(self) -> float:
        return 1.0 / (2.0 * abs(self.beta_bar))


def cev_density(spec: CevSpec, t: float, s0: float, s: float) -> float:
    """Transition density p_t(s0, s) of the CEV diffusion before absorption.

    Computed in log scale throughout so the Bessel factor never overflows.
    """
    if t <= 0.0 or s0 <= 0.0 or s <= 0.0:
        raise ValueError("t, s0 and s must be positive")
    bb = abs(spec.beta_bar)
    denom = spec.sigma ** 2 * bb ** 2 * t
    z = (s0 * s) ** bb / denom
    log_pref = (0.5 - 2.0 * spec.beta) * math.log(s) \
        + 0.5 * math.log(s0) - math.log(denom)
    arg = (s0 ** (2.0 * bb) + s ** (2.0 * bb)) / (2.0 * denom)
    return bb * math.exp(log_pref - arg + log_bessel_i(spec.nu, z))


def cev_rate(spec: CevSpec, s: float) -> float:
    """Large-time rate: -lim t log p_t(s0, s)... per unit time,
    I(s) = s^{2 |beta_bar|} / (2 sigma^2 beta_bar^2)."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    bb = abs(spec.beta_bar)
    return s ** (2.0 * bb) / (2.0 * spec.sigma ** 2 * bb ** 2)


@dataclass(frozen=True)
class LargeTimeRate:
    """Speed and rate of a large-time moment asymptotic.

    ``speed_exponent`` is zeta = 2 |beta_bar| q - 1: the q-th moment decays
    like exp(-c t^zeta) when zeta > 0.
    """

    q: float
    speed_exponent: float
    rate: Callable[[float], float]


def cev_moment_asymptotics(spec: CevSpec, q: float) -> LargeTimeRate:
    """Speed/rate pair for the large-time decay of E[S_t^q 1_{t < T_0}]."""
    if q <= 0.0:
        raise ValueError("q must be positive")
    zeta = 2.0 * abs(spec.beta_bar) * q - 1.0
    return LargeTimeRate(q=q, speed_exponent=zeta,
                         rate=lambda s: cev_rate(spec, s))


# ---------------------------------------------------------------------------
# variational rate of the rough clock
# ---------------------------------------------------------------------------

_J_ONE_CACHE: dict = {}


def _j_one(kg: KernelGrid, p: float, n_modes: int,
           opts: RitzOptions) -> float:
    """J(1) = min over f = K_H hdot of energy(hdot) / psi(f)^{1/p}
    with psi(f) = int_0^1 |f|^{2p}."""
    key = (kg.hurst.h, kg.grid.n_steps, p, n_modes)
    if key in _J_ONE_CACHE:
        return _J_ONE_CACHE[key]
    _require_unit_horizon(kg)
    path_map = _path_map(kg, n_modes)
    dt = kg.grid.dt
    two_p = 2.0 * p

    def objective(c: np.ndarray) -> float:
        f = np.concatenate([[0.0], path_map @ c])
        psi = trapezoid(np.abs(f) ** two_p, dx=dt)
        if psi <= 0.0:
            return np.inf
        return _energy_from_array(c) / psi ** (1.0 / p)

    x0 = np.zeros(1 + 2 * n_modes)
    x0[0] = 1.0
    res, _ = _minimize_restarted(objective, x0, opts)
    val = float(res.fun)
    _J_ONE_CACHE[key] = val
    return val


def j_rate(kg: KernelGrid, p: float, a: float, n_modes: int = 4,
           opts: RitzOptions = DEFAULT_OPTIONS) -> float:
    """Rate of the rough clock at level a: J(a) = a^{1/p} J(1).

    J(a) = inf { energy(hdot) : int_0^1 |K_H hdot|^{2p} >= a }; the scaling
    hdot -> c hdot multiplies the constraint by c^{2p}, which collapses the
    family to the single scale-invariant minimization J(1).
    """
    if p <= 0.0:
        raise ValueError("p must be positive")
    if a < 0.0:
        raise ValueError("a must be nonnegative")
    if a == 0.0:
        return 0.0
    return a ** (1.0 / p) * _j_one(kg, p, n_modes, opts)


def j_rate_penalty(kg: KernelGrid, p: float, a: float, n_modes: int = 4,
                   penalty: float = 1e6,
                   opts: RitzOptions = DEFAULT_OPTIONS) -> float:
    """Direct constrained evaluation of J(a) by quadratic penalty.

    Independent of the scaling reduction used by :func:`j_rate`; intended as
    a cross-check, not for production use.
    """
    if a <= 0.0 or p <= 0.0:
        raise ValueError("need a > 0 and p > 0")
    _require_unit_horizon(kg)
    path_map = _path_map(kg, n_modes)
    dt = kg.grid.dt
    two_p = 2.0 * p

    def make_objective(pen: float):
        def objective(c: np.ndarray) -> float:
            f = np.concatenate([[0.0], path_map @ c])
            psi = trapezoid(np.abs(f) ** two_p, dx=dt)
            gap = max(a - psi, 0.0)
            return _energy_from_array(c) + pen * gap * gap
        return objective

    x0 = np.zeros(1 + 2 * n_modes)
    x0[0] = 1.0
    # continuation in the penalty weight, warm-starting each stage
    pen = 10.0
    while True:
        res, _ = _minimize_restarted(make_objective(pen), x0, opts)
        x0 = res.x
        if pen >= penalty:
            break
        pen = min(pen * 100.0, penalty)
    return float(res.fun)


@dataclass(frozen=True)
class SvRateResult:
    """Large-time rate of the rough time-changed CEV model with the
    numerically and analytically optimal clock levels."""

    value: float
    a_numeric: float
    a_closed_form: float


def sv_rate_detail(spec: CevSpec, kg: KernelGrid, p: float, s: float,
                   n_modes: int = 4,
                   opts: RitzOptions = DEFAULT_OPTIONS) -> SvRateResult:
    """Rate inf_a [ S^{2|beta_bar|} / (2 beta_bar^2 a) + J(a) ] with its
    minimizer; the closed form is a* = (A p / J(1))^{p / (p + 1)} with
    A = S^{2|beta_bar|} / (2 beta_bar^2)."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    bb = abs(spec.beta_bar)
    amp = s ** (2.0 * bb) / (2.0 * bb ** 2)
    j1 = _j_one(kg, p, n_modes, opts)
    if s == 0.0:
        return SvRateResult(0.0, 0.0, 0.0)

    def g(log_a: float) -> float:
        a = math.exp(log_a)
        return amp / a + a ** (1.0 / p) * j1

    a_closed = (amp * p / j1) ** (p / (p + 1.0))
    res = minimize_scalar(g, bracket=(math.log(a_closed) - 2.0,
                                      math.log(a_closed) + 2.0),
                          method="brent", options={"xtol": 1e-12})
    return SvRateResult(value=float(res.fun),
                        a_numeric=float(math.exp(res.x)),
                        a_closed_form=a_closed)


def sv_rate(spec: CevSpec, kg: KernelGrid, p: float, s: float,
            n_modes: int = 4,
            opts: RitzOptions = DEFAULT_OPTIONS) -> float:
    """Large-time moment rate of the rough time-changed CEV model."""
    return sv_rate_detail(spec, kg, p, s, n_modes, opts).value
