"""Asymptotic implied-volatility smiles and Black-Scholes utilities.

The zeroth-order smile at log-moneyness scale x is

    sigma_0(x) = |x| / sqrt(2 Lambda*(x)),

where Lambda* is the one-sided infimum of the large-deviation rate.  A
second-order small-maturity refinement adds the log-prefactor corrections of
the out-of-the-money call expansion; it is only defined for maturities small
enough that the leading term dominates the logarithm.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .fbm import KernelGrid
from .ritz import DEFAULT_OPTIONS, RitzOptions, VolFunction, lambda_star

# sigma_0 is continuous at the money; at x = 0 the ratio 0/0 is resolved by
# evaluating at this nearby scale instead.
ATM_EVAL_POINT = 1e-3


@dataclass(frozen=True)
class BsQuote:
    """A Black-Scholes call quote (zero rates, unit maturity units)."""

    spot: float
    strike: float
    maturity: float
    sigma: float

    def __post_init__(self) -> None:
        if min(self.spot, self.strike, self.maturity, self.sigma) <= 0.0:
            raise ValueError("spot, strike, maturity and sigma must be positive")

    @property
    def price(self) -> float:
        return bs_call(self.spot, self.strike, self.maturity, self.sigma)


def bs_call(spot: float, strike: float, maturity: float, sigma: float) -> float:
    """Black-Scholes call price with zero rates."""
    if spot <= 0.0 or strike <= 0.0 or maturity <= 0.0:
        raise ValueError("spot, strike and maturity must be positive")
    if sigma <= 0.0:
        return max(spot - strike, 0.0)
    sd = sigma * math.sqrt(maturity)
    d1 = math.log(spot / strike) / sd + 0.5 * sd
    return float(spot * norm.cdf(d1) - strike * norm.cdf(d1 - sd))


def bs_vega(spot: float, strike: float, maturity: float, sigma: float) -> float:
    sd = sigma * math.sqrt(maturity)
    d1 = math.log(spot / strike) / sd + 0.5 * sd
    return float(spot * norm.pdf(d1) * math.sqrt(maturity))


def implied_vol(price: float, spot: float, strike: float, maturity: float,
                tol: Optional[float] = None) -> float:
    """Invert the Black-Scholes call price for sigma.

    Bisection on [1e-8, 5.0] down to a narrow bracket, then Newton polish
    until the price error is below ``tol`` (default ``1e-12 * spot``).
    Raises ValueError for prices at or below intrinsic value, or at or above
    the spot, with messages that distinguish the two failure directions.
    """
    if spot <= 0.0 or strike <= 0.0 or maturity <= 0.0:
        raise ValueError("spot, strike and maturity must be positive")
    if tol is None:
        tol = 1e-12 * spot
    intrinsic = max(spot - strike, 0.0)
    if price <= intrinsic:
        raise ValueError(
            f"price {price} is at or below intrinsic value {intrinsic}")
    if price >= spot:
        raise ValueError(f"price {price} is at or above the spot {spot}")

    lo, hi = 1e-8, 5.0
    if bs_call(spot, strike, maturity, hi) < price:
        raise ValueError("price exceeds the vol bracket [1e-8, 5.0]")
    # bisection in vol-space to near machine precision (prices can underflow
    # far below tol in the wings, so a price criterion alone is not enough)
    while hi - lo > 1e-12 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if bs_call(spot, strike, maturity, mid) < price:
            lo = mid
        else:
            hi = mid
    sigma = 0.5 * (lo + hi)
    # Newton polish on the price residual where vega permits
    for _ in range(50):
        diff = bs_call(spot, strike, maturity, sigma) - price
        if abs(diff) < tol:
            break
        vega = bs_vega(spot, strike, maturity, sigma)
        if vega <= 0.0 or not math.isfinite(vega):
            break
        sigma = min(max(sigma - diff / vega, 1e-8), 5.0)
    return sigma


@dataclass(frozen=True)
class SmilePoint:
    x: float
    sigma0: float
    lambda_star: float


@dataclass(frozen=True)
class SmileCurve:
    """Zeroth-order asymptotic smile over a grid of log-moneyness scales."""

    points: tuple
    hurst: float
    rho: float
    vol_descriptor: str

    def sigma0(self) -> np.ndarray:
        return np.array([p.sigma0 for p in self.points])

    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "sigma0", "lambda_star"])
        for p in self.points:
            w.writerow([repr(p.x), repr(p.sigma0), repr(p.lambda_star)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "hurst": self.hurst,
            "rho": self.rho,
            "vol": self.vol_descriptor,
            "points": [{"x": p.x, "sigma0": p.sigma0,
                        "lambda_star": p.lambda_star} for p in self.points],
        }, indent=2)


def asymptotic_smile(kg: KernelGrid, vol: VolFunction, rho: float,
                     xs: Sequence[float], n_modes: int = 4,
                     opts: RitzOptions = DEFAULT_OPTIONS) -> SmileCurve:
    """Zeroth-order smile sigma_0(x) = |x| / sqrt(2 Lambda*(x)).

    x = 0 is handled by continuity: the smile is evaluated at the nearby
    scale ``ATM_EVAL_POINT`` instead.  A nonpositive Lambda* at x != 0
    signals a degenerate rate and raises ArithmeticError.
    """
    points = []
    warm = opts.initial
    for x in xs:
        x_eval = float(x) if x != 0.0 else ATM_EVAL_POINT
        local = replace(opts, initial=warm)
        lam = lambda_star(kg, vol, rho, x_eval, n_modes, local)
        if lam <= 0.0:
            raise ArithmeticError(
                f"degenerate rate Lambda*={lam} at x={x_eval}")
        points.append(SmilePoint(x=float(x),
                                 sigma0=abs(x_eval) / math.sqrt(2.0 * lam),
                                 lambda_star=lam))
    return SmileCurve(points=tuple(points), hurst=kg.hurst.h, rho=rho,
                      vol_descriptor=vol.descriptor)


def second_order_vol(lam: float, x: float, t: float, h: float) -> float:
    """Second-order small-maturity implied vol for an out-of-the-money call.

    With L = Lambda*(x) / t^{2H} and k = t^{1/2-H} x, returns

        sqrt(2/t) * ( sqrt(L + k - 1.5 log L + log(k / (4 sqrt(pi))))
                      - sqrt(L - 1.5 log L + log(k / (4 sqrt(pi)))) ).

    Only valid when both bracketed expressions are positive, i.e. for t
    small enough that the leading rate term dominates the logarithmic
    corrections; otherwise an ArithmeticError is raised.
    """
    if lam <= 0.0:
        raise ValueError("lambda_star must be positive")
    if x <= 0.0:
        raise ValueError("x must be positive (out-of-the-money call)")
    if t <= 0.0:
        raise ValueError("maturity must be positive")
    big_l = lam / t ** (2.0 * h)
    k = t ** (0.5 - h) * x
    log_terms = -1.5 * math.log(big_l) + math.log(k / (4.0 * math.sqrt(math.pi)))
    upper = big_l + k + log_terms
    lower = big_l + log_terms
    if lower <= 0.0 or upper <= 0.0:
        raise ArithmeticError(
            "maturity too large: logarithmic corrections overwhelm the "
            "leading rate term, the second-order formula is undefined here")
    v_total = math.sqrt(2.0) * (math.sqrt(upper) - math.sqrt(lower))
    return v_total / math.sqrt(t)
