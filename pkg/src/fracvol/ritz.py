"""Large-deviation rate functions via Ritz minimization over a truncated
Fourier basis.

The control hdot in L^2[0,1] is parameterized as

    hdot(s) = a0 + sum_{n=1}^{N} [a_n cos(2 pi n s) + b_n sin(2 pi n s)],

for which the quadratic energy (half the squared L^2 norm) is available in
closed form by Parseval.  The induced volatility path is the RKHS image
(K_H hdot) evaluated through the kernel grid, and the rate at log-moneyness
scale x is the minimum of the resulting smooth objective over the 2N + 1
coefficients, found with a restarted Nelder-Mead simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize

from .fbm import KernelGrid


@dataclass(frozen=True)
class VolFunction:
    """Volatility as a function of the (fractional) driver level."""

    fn: Callable[[np.ndarray], np.ndarray]
    holder_exponent: float = 1.0
    descriptor: str = "custom"

    def __post_init__(self) -> None:
        if not 0.0 < self.holder_exponent <= 1.0:
            raise ValueError("holder_exponent must lie in (0, 1]")

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.fn(y)

    @staticmethod
    def tanh(c0: float, c1: float) -> "VolFunction":
        """sigma(y) = c0 + c1 * tanh(y); requires c0 > |c1| for positivity."""
        if c0 <= abs(c1):
            raise ValueError("tanh vol needs c0 > |c1| to stay positive")
        return VolFunction(
            fn=lambda y: c0 + c1 * np.tanh(y),
            descriptor=f"tanh:{c0},{c1}",
        )

    @staticmethod
    def constant(s0: float) -> "VolFunction":
        if s0 <= 0.0:
            raise ValueError("constant vol must be positive")
        return VolFunction(fn=lambda y: np.full_like(np.asarray(y, float), s0),
                           descriptor=f"const:{s0}")


@dataclass(frozen=True)
class FourierCoefficients:
    """Truncated Fourier coefficients (a0, a_1..a_N, b_1..b_N) of hdot."""

    a0: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have equal length")

    @property
    def n_modes(self) -> int:
        return len(self.a)

    def to_array(self) -> np.ndarray:
        out = np.empty(1 + 2 * self.n_modes)
        out[0] = self.a0
        out[1::2] = self.a
        out[2::2] = self.b
        return out

    @staticmethod
    def from_array(c: np.ndarray) -> "FourierCoefficients":
        c = np.asarray(c, dtype=np.float64)
        if len(c) % 2 != 1:
            raise ValueError("coefficient array must have odd length 2N+1")
        return FourierCoefficients(a0=float(c[0]), a=c[1::2].copy(), b=c[2::2].copy())

    @staticmethod
    def zeros(n_modes: int) -> "FourierCoefficients":
        return FourierCoefficients(0.0, np.zeros(n_modes), np.zeros(n_modes))

    def evaluate(self, s: np.ndarray) -> np.ndarray:
        """hdot at the points s."""
        return _basis(s, self.n_modes) @ self.to_array()


def _basis(s: np.ndarray, n_modes: int) -> np.ndarray:
    """Design matrix [1, cos(2 pi s), sin(2 pi s), cos(4 pi s), ...]."""
    s = np.asarray(s, dtype=np.float64)
    cols = np.empty((len(s), 1 + 2 * n_modes))
    cols[:, 0] = 1.0
    for k in range(1, n_modes + 1):
        cols[:, 2 * k - 1] = np.cos(2.0 * np.pi * k * s)
        cols[:, 2 * k] = np.sin(2.0 * np.pi * k * s)
    return cols


def energy(coeffs: FourierCoefficients) -> float:
    """Half the squared L^2 norm of hdot, exact by Parseval."""
    return 0.5 * (coeffs.a0**2 + 0.5 * (np.dot(coeffs.a, coeffs.a)
                                        + np.dot(coeffs.b, coeffs.b)))


def _energy_from_array(c: np.ndarray) -> float:
    return 0.5 * (c[0] ** 2 + 0.5 * float(np.dot(c[1:], c[1:])))


def _require_unit_horizon(kg: KernelGrid) -> None:
    if abs(kg.grid.horizon - 1.0) > 1e-12:
        raise ValueError("rate functionals require a kernel grid on [0, 1]")


def _path_map(kg: KernelGrid, n_modes: int) -> np.ndarray:
    """Matrix sending coefficient vectors to the RKHS path at t_1..t_n."""
    return kg.weights @ _basis(kg.quad_nodes, n_modes)


def f_functional(kg: KernelGrid, vol: VolFunction,
                 coeffs: FourierCoefficients) -> float:
    """F = int_0^1 sigma((K_H hdot)(s))^2 ds by trapezoid on the grid."""
    _require_unit_horizon(kg)
    y = np.concatenate([[0.0], kg.weights @ coeffs.evaluate(kg.quad_nodes)])
    sv = vol(y)
    return float(trapezoid(sv * sv, kg.grid.nodes))


def g_functional(kg: KernelGrid, vol: VolFunction,
                 coeffs: FourierCoefficients) -> float:
    """G = int_0^1 sigma((K_H hdot)(s)) hdot(s) ds by trapezoid on the grid."""
    _require_unit_horizon(kg)
    nodes = kg.grid.nodes
    y = np.concatenate([[0.0], kg.weights @ coeffs.evaluate(kg.quad_nodes)])
    return float(trapezoid(vol(y) * coeffs.evaluate(nodes), nodes))


@dataclass(frozen=True)
class RitzOptions:
    """Convergence and restart policy for the simplex minimization."""

    xatol: float = 1e-8
    fatol: float = 1e-10
    max_evals: int = 20000
    restarts: int = 2
    coeff_cap: float = 1e3
    initial: Optional[FourierCoefficients] = None


DEFAULT_OPTIONS = RitzOptions()


@dataclass(frozen=True)
class RateResult:
    """Minimized rate value with the optimizer's diagnostics."""

    x: float
    value: float
    coeffs: FourierCoefficients
    optimal_path: np.ndarray = field(repr=False)
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "value": self.value,
            "a0": self.coeffs.a0,
            "a": self.coeffs.a.tolist(),
            "b": self.coeffs.b.tolist(),
            "optimal_path": self.optimal_path.tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _minimize_restarted(objective, x0: np.ndarray, opts: RitzOptions):
    nm_opts = dict(xatol=opts.xatol, fatol=opts.fatol,
                   maxfev=opts.max_evals, maxiter=opts.max_evals)
    res = minimize(objective, x0, method="Nelder-Mead", options=nm_opts)
    evals = res.nfev
    for _ in range(opts.restarts):
        res2 = minimize(objective, res.x, method="Nelder-Mead", options=nm_opts)
        evals += res2.nfev
        improved = res2.fun < res.fun - opts.fatol
        if res2.fun <= res.fun:
            res = res2
        if not improved:
            break
    return res, evals


def _solve_rate(kg: KernelGrid, vol: VolFunction, x: float, rho: float,
                n_modes: int, opts: RitzOptions) -> RateResult:
    _require_unit_horizon(kg)
    nodes = kg.grid.nodes
    path_map = _path_map(kg, n_modes)
    basis_nodes = _basis(nodes, n_modes)
    rho_bar_sq = 1.0 - rho * rho
    dt = kg.grid.dt

    def objective(c: np.ndarray) -> float:
        y = path_map @ c
        sv = vol(np.concatenate([[0.0], y]))
        f_val = trapezoid(sv * sv, dx=dt)
        if rho == 0.0:
            drift = x
        else:
            g_val = trapezoid(sv * (basis_nodes @ c), dx=dt)
            drift = x - rho * g_val
        return drift * drift / (2.0 * rho_bar_sq * f_val) + _energy_from_array(c)

    dim = 1 + 2 * n_modes
    if x == 0.0 and opts.initial is None:
        c = np.zeros(dim)
        return RateResult(x=x, value=0.0, coeffs=FourierCoefficients.from_array(c),
                          optimal_path=np.zeros(len(nodes)), iterations=0,
                          converged=True)

    x0 = opts.initial.to_array() if opts.initial is not None else np.zeros(dim)
    if len(x0) != dim:
        raise ValueError("initial coefficients have the wrong mode count")
    res, evals = _minimize_restarted(objective, x0, opts)
    capped = bool(np.max(np.abs(res.x)) > opts.coeff_cap)
    coeffs = FourierCoefficients.from_array(res.x)
    path = np.concatenate([[0.0], path_map @ res.x])
    return RateResult(x=x, value=float(res.fun), coeffs=coeffs,
                      optimal_path=path, iterations=evals,
                      converged=bool(res.success) and not capped)


def rate_uncorrelated(kg: KernelGrid, vol: VolFunction, x: float,
                      n_modes: int = 4,
                      opts: RitzOptions = DEFAULT_OPTIONS) -> RateResult:
    """Rate function of the zero-correlation model:
    min over hdot of x^2 / (2 F) + energy."""
    return _solve_rate(kg, vol, x, 0.0, n_modes, opts)


def rate_correlated(kg: KernelGrid, vol: VolFunction, x: float, rho: float,
                    n_modes: int = 4,
                    opts: RitzOptions = DEFAULT_OPTIONS) -> RateResult:
    """Rate function of the correlated model:
    min over hdot of (x - rho G)^2 / (2 rho_bar^2 F) + energy."""
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie in (-1, 1)")
    return _solve_rate(kg, vol, x, rho, n_modes, opts)


def lambda_star(kg: KernelGrid, vol: VolFunction, rho: float, x: float,
                n_modes: int = 4, opts: RitzOptions = DEFAULT_OPTIONS,
                n_grid: int = 21) -> float:
    """One-sided infimum of the rate: inf_{y > x} I(y) for x >= 0 and
    inf_{y < x} I(y) for x <= 0.

    Evaluated by a warm-started grid search over [x, x + 2|x|] (mirrored for
    x < 0) with one local refinement pass around an interior minimum.
    """
    if x == 0.0:
        return 0.0

    def rate_at(y: float, warm: Optional[FourierCoefficients]) -> RateResult:
        local = replace(opts, initial=warm)
        return rate_correlated(kg, vol, y, rho, n_modes, local)

    ys = np.linspace(x, x + 2.0 * abs(x) * np.sign(x), n_grid)
    warm = opts.initial
    values = []
    results = []
    for y in ys:
        r = rate_at(float(y), warm)
        warm = r.coeffs
        values.append(r.value)
        results.append(r)
    k = int(np.argmin(values))
    best = values[k]
    if 0 < k < len(ys) - 1:
        # refine around the interior minimum
        fine = np.linspace(ys[k - 1], ys[k + 1], 7)[1:-1]
        warm = results[k].coeffs
        for y in fine:
            r = rate_at(float(y), warm)
            best = min(best, r.value)
    return best
