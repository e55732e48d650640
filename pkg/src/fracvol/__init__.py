"""fracvol: large-deviation asymptotics for rough (fractional) stochastic
volatility models.

Highlights:

* :mod:`fracvol.fbm` -- Volterra kernel of fractional Brownian motion,
  integrated-kernel grids, exact-law samplers.
* :mod:`fracvol.ritz` -- rate-function minimization over a Fourier basis.
* :mod:`fracvol.smile` -- asymptotic implied-vol smiles, Black-Scholes
  utilities.
* :mod:`fracvol.mc` -- conditional Monte Carlo validation.
* :mod:`fracvol.largetime` -- CEV density and large-time rates.
* :mod:`fracvol.cli` -- command-line entry point (``fracvol``).
"""

from .backend import BACKEND, using_numba
from .fbm import (Hurst, KernelGrid, TimeGrid, apply_rkhs_operator,
                  build_kernel_grid, covariance, get_kernel_grid,
                  kernel_value, sample_fbm_unit_interval, sample_paths,
                  sample_paths_cholesky)
from .largetime import (CevSpec, LargeTimeRate, SvRateResult, bessel_i,
                        cev_density, cev_moment_asymptotics, cev_rate,
                        j_rate, j_rate_penalty, log_bessel_i, sv_rate,
                        sv_rate_detail)
from .mc import (ExponentialFunctionalSample, McEstimate, ModelSpec,
                 mc_call_price, mc_digital_prob, mc_exponential_functional,
                 mc_martingale_check, mc_smile)
from .ritz import (FourierCoefficients, RateResult, RitzOptions, VolFunction,
                   energy, f_functional, g_functional, lambda_star,
                   rate_correlated, rate_uncorrelated)
from .smile import (BsQuote, SmileCurve, SmilePoint, asymptotic_smile,
                    bs_call, bs_vega, implied_vol, second_order_vol)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "using_numba",
    "Hurst", "TimeGrid", "KernelGrid", "covariance", "kernel_value",
    "build_kernel_grid", "get_kernel_grid", "sample_paths",
    "sample_paths_cholesky", "sample_fbm_unit_interval",
    "apply_rkhs_operator",
    "VolFunction", "FourierCoefficients", "RitzOptions", "RateResult",
    "energy", "f_functional", "g_functional", "rate_uncorrelated",
    "rate_correlated", "lambda_star",
    "BsQuote", "SmileCurve", "SmilePoint", "bs_call", "bs_vega",
    "implied_vol", "asymptotic_smile", "second_order_vol",
    "ModelSpec", "McEstimate", "mc_call_price", "mc_smile",
    "mc_digital_prob", "mc_martingale_check", "mc_exponential_functional",
    "ExponentialFunctionalSample",
    "CevSpec", "LargeTimeRate", "SvRateResult", "bessel_i", "log_bessel_i",
    "cev_density", "cev_rate", "cev_moment_asymptotics", "j_rate",
    "j_rate_penalty", "sv_rate", "sv_rate_detail",
]
