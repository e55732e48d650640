"""Fractional Brownian motion: covariance, Volterra kernel, RKHS operator and
path simulation.

The central object is :class:`KernelGrid`: a discretization of the Volterra
kernel on a uniform time grid, stored in integrated-weight form

    w[i][j] = integral of K_H(s, t_{i+1}) over the cell [t_j, t_{j+1}],

with every row rescaled so that the simulated marginal variance of the fBM is
exactly t^{2H} at each node.  The integrated-weight form tames the
(t - s)^{H - 1/2} blow-up of the kernel near the diagonal for H < 1/2.

Singular inner integrals are evaluated with fixed-order Gauss-Legendre after a
power substitution that removes the endpoint singularity analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma
from typing import Iterator, Optional

import numpy as np

from ._kernels import fbm_transform

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)

#: paths per chunk in the streaming samplers; fixed so that results are
#: independent of how chunks are distributed over workers.
CHUNK_SIZE = 32768


@dataclass(frozen=True)
class Hurst:
    """Hurst index of the fBM, in (0, 1)."""

    h: float

    def __post_init__(self) -> None:
        if not 0.0 < self.h < 1.0:
            raise ValueError(f"Hurst index must lie in (0, 1), got {self.h}")

    @property
    def is_brownian(self) -> bool:
        return self.h == 0.5


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < t_1 < ... < t_{n_steps} = horizon."""

    n_steps: int
    horizon: float

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError("n_steps must be positive")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        t = self.nodes
        return 0.5 * (t[:-1] + t[1:])


def covariance(hurst: Hurst, s: float, t: float) -> float:
    """Covariance of fBM: (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2."""
    if s < 0.0 or t < 0.0:
        raise ValueError("times must be nonnegative")
    twoh = 2.0 * hurst.h
    return 0.5 * (t**twoh + s**twoh - abs(t - s) ** twoh)


def _beta(a: float, b: float) -> float:
    return gamma(a) * gamma(b) / gamma(a + b)


def _c_plus(h: float) -> float:
    return (h * (2.0 * h - 1.0) / _beta(2.0 - 2.0 * h, h - 0.5)) ** 0.5


def _c_minus(h: float) -> float:
    return (2.0 * h / ((1.0 - 2.0 * h) * _beta(1.0 - 2.0 * h, h + 0.5))) ** 0.5


def _inner_high(h: float, s: np.ndarray, t: float) -> np.ndarray:
    """int_s^t (u-s)^{H-3/2} u^{H-1/2} du for H > 1/2, vectorized over s.

    Substituting w = (u-s)^{H-1/2} makes the integrand bounded:
    the integral becomes (1/(H-1/2)) int_0^{(t-s)^{H-1/2}} (s + w^{1/(H-1/2)})^{H-1/2} dw.
    """
    a = h - 0.5
    delta = t - s
    near_delta = np.minimum(delta, s)
    wmax = near_delta ** a
    w = 0.5 * wmax[None, :] * (_GL_NODES[:, None] + 1.0)
    vals = (s[None, :] + w ** (1.0 / a)) ** a
    out = (0.5 * wmax / a) * (_GL_WEIGHTS @ vals)
    # far piece u in [2s, t] in log coordinates (see _inner_low)
    far = delta > s
    if np.any(far):
        sf = s[far]
        lo = np.log(2.0 * sf)
        hi = np.full_like(lo, np.log(t))
        w = 0.5 * (hi - lo)[None, :] * (_GL_NODES[:, None] + 1.0) + lo[None, :]
        u = np.exp(w)
        vals = (u - sf[None, :]) ** (h - 1.5) * u ** (h + 0.5)
        out[far] += 0.5 * (hi - lo) * (_GL_WEIGHTS @ vals)
    return out


def _inner_low(h: float, s: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """int_s^t u^{H-3/2} (u-s)^{H-1/2} du for H < 1/2, vectorized over s.

    Substituting v = (u-s)^{H+1/2} removes the (u-s)^{H-1/2} singularity:
    the integral becomes (1/(H+1/2)) int_0^{delta^{H+1/2}} (s + v^{1/(H+1/2)})^{H-3/2} dv
    with delta = t - s.
    """
    a = h + 0.5
    # near piece u in [s, s + min(delta, s)]: the substitution resolves the
    # (u-s)^{H-1/2} singularity on its natural scale
    near_delta = np.minimum(delta, s)
    vmax = near_delta**a
    v = 0.5 * vmax[None, :] * (_GL_NODES[:, None] + 1.0)
    vals = (s[None, :] + v ** (1.0 / a)) ** (h - 1.5)
    out = (0.5 * vmax / a) * (_GL_WEIGHTS @ vals)
    # far piece u in [2s, t] (present when delta > s): integrate in log u so
    # the u^{2H-2}-type decay across many decades stays resolved
    far = delta > s
    if np.any(far):
        sf = s[far]
        lo = np.log(2.0 * sf)
        hi = np.log(sf + delta[far])
        w = 0.5 * (hi - lo)[None, :] * (_GL_NODES[:, None] + 1.0) + lo[None, :]
        u = np.exp(w)
        vals = u ** (h - 0.5) * (u - sf[None, :]) ** (h - 0.5)
        out[far] += 0.5 * (hi - lo) * (_GL_WEIGHTS @ vals)
    return out


def _kernel_low(h: float, s: np.ndarray, t: float, delta: np.ndarray) -> np.ndarray:
    """K_H(s, t) for H < 1/2 with the gap t - s supplied explicitly."""
    cm = _c_minus(h)
    first = (t / s) ** (h - 0.5) * delta ** (h - 0.5)
    second = (0.5 - h) * s ** (0.5 - h) * _inner_low(h, s, delta)
    return cm * (first + second)


def _kernel_high(h: float, s: np.ndarray, t: float) -> np.ndarray:
    return _c_plus(h) * s ** (0.5 - h) * _inner_high(h, s, t)


def kernel_value(hurst: Hurst, s: float, t: float) -> float:
    """Volterra kernel K_H(s, t) for 0 < s < t (identically 1 for H = 1/2)."""
    if not 0.0 < s < t:
        raise ValueError(f"kernel requires 0 < s < t, got s={s}, t={t}")
    h = hurst.h
    if h == 0.5:
        return 1.0
    sa = np.asarray([float(s)])
    if h > 0.5:
        return float(_kernel_high(h, sa, t)[0])
    return float(_kernel_low(h, sa, t, np.asarray([t - s]))[0])


def _cell_integrals(h: float, t: float, edges: np.ndarray) -> np.ndarray:
    """Integrals of K_H(s, t) over consecutive cells [edges[j], edges[j+1]].

    The last cell is assumed to touch t (edges[-1] == t); for H < 1/2 it is
    integrated in the variable z = (t - s)^{H + 1/2}, which cancels the
    diagonal singularity of the kernel exactly.  For H > 1/2 the first cell
    (touching s = 0) is integrated in y = s^{3/2 - H} to absorb the s^{1/2-H}
    factor.
    """
    n_cells = len(edges) - 1
    out = np.empty(n_cells)
    if h == 0.5:
        return np.diff(edges)

    if h > 0.5:
        b = 1.5 - h
        # first cell via y = s^b: integrand becomes (c_+ / b) * inner(s, t)
        y_hi = edges[1] ** b
        y = 0.5 * y_hi * (_GL_NODES + 1.0)
        s = y ** (1.0 / b)
        vals = (_c_plus(h) / b) * _inner_high(h, s, t)
        out[0] = 0.5 * y_hi * np.dot(_GL_WEIGHTS, vals)
        for j in range(1, n_cells):
            lo, hi = edges[j], edges[j + 1]
            s = 0.5 * (hi - lo) * (_GL_NODES + 1.0) + lo
            out[j] = 0.5 * (hi - lo) * np.dot(_GL_WEIGHTS, _kernel_high(h, s, t))
        return out

    # H < 1/2
    cm = _c_minus(h)
    a = h + 0.5
    for j in range(n_cells - 1):
        lo, hi = edges[j], edges[j + 1]
        s = 0.5 * (hi - lo) * (_GL_NODES + 1.0) + lo
        vals = _kernel_low(h, s, t, t - s)
        out[j] = 0.5 * (hi - lo) * np.dot(_GL_WEIGHTS, vals)
    # diagonal cell via z = (t - s)^a; the (t-s)^{H-1/2} factor of the
    # kernel's first term cancels against the Jacobian analytically
    z_hi = (t - edges[-2]) ** a
    z = 0.5 * z_hi * (_GL_NODES + 1.0)
    delta = z ** (1.0 / a)
    s = t - delta
    first = (cm / a) * (t / s) ** (h - 0.5)
    jac = (1.0 / a) * z ** (1.0 / a - 1.0)
    second = cm * (0.5 - h) * s ** (0.5 - h) * _inner_low(h, s, delta) * jac
    out[-1] = 0.5 * z_hi * np.dot(_GL_WEIGHTS, first + second)
    return out


@dataclass(frozen=True)
class KernelGrid:
    """Discretized Volterra kernel plus induced covariance matrices.

    Attributes
    ----------
    weights : (n, n) lower-triangular; rescaled cell integrals of the kernel.
        Row i reproduces Var(B^H_{t_{i+1}}) = t_{i+1}^{2H} exactly:
        sum_j weights[i, j]^2 / dt == t_{i+1}^{2H}.
    cov_fbm : (n+1, n+1) exact fBM covariance at the grid nodes.
    cov_cross : (n+1, n+1); cov_cross[i, j] = Cov(B_{t_i}, B^H_{t_j}) induced
        by the rescaled weights (the joint law of the simulated pair).
    """

    hurst: Hurst
    grid: TimeGrid
    weights: np.ndarray = field(repr=False)
    cov_fbm: np.ndarray = field(repr=False)
    cov_cross: np.ndarray = field(repr=False)

    @property
    def quad_nodes(self) -> np.ndarray:
        """Cell midpoints: the nodes at which hdot is sampled."""
        return self.grid.midpoints

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            h=self.hurst.h,
            n_steps=self.grid.n_steps,
            horizon=self.grid.horizon,
            weights=self.weights,
            cov_fbm=self.cov_fbm,
            cov_cross=self.cov_cross,
        )

    @staticmethod
    def load(path) -> "KernelGrid":
        with np.load(path) as d:
            return KernelGrid(
                hurst=Hurst(float(d["h"])),
                grid=TimeGrid(int(d["n_steps"]), float(d["horizon"])),
                weights=d["weights"],
                cov_fbm=d["cov_fbm"],
                cov_cross=d["cov_cross"],
            )


def build_kernel_grid(hurst: Hurst, grid: TimeGrid) -> KernelGrid:
    """Build the integrated-weight kernel discretization on a uniform grid."""
    if grid.n_steps < 2:
        raise ValueError("need at least 2 time steps")
    n = grid.n_steps
    t = grid.nodes
    dt = grid.dt
    h = hurst.h

    w = np.zeros((n, n))
    for i in range(1, n + 1):
        w[i - 1, :i] = _cell_integrals(h, t[i], t[: i + 1])
        var = np.dot(w[i - 1, :i], w[i - 1, :i]) / dt
        target = t[i] ** (2.0 * h)
        if not np.isfinite(var) or var <= 0.0:
            raise ArithmeticError(f"kernel quadrature failed on row {i}")
        w[i - 1, :i] *= np.sqrt(target / var)

    cov = np.empty((n + 1, n + 1))
    twoh = 2.0 * h
    tt = t[:, None]
    cov[:, :] = 0.5 * (tt**twoh + tt.T**twoh - np.abs(tt - tt.T) ** twoh)

    # Cov(B_{t_i}, B^H_{t_j}) = int_0^{min(t_i, t_j)} K_H(u, t_j) du,
    # realized here through the rescaled weights (cumulative row sums).
    cross = np.zeros((n + 1, n + 1))
    csum = np.cumsum(w, axis=1)
    for j in range(1, n + 1):
        cross[1:, j] = csum[j - 1, np.minimum(np.arange(1, n + 1), j) - 1]

    return KernelGrid(hurst=hurst, grid=grid, weights=w, cov_fbm=cov, cov_cross=cross)


@lru_cache(maxsize=32)
def _cached_grid(h: float, n_steps: int, horizon: float) -> KernelGrid:
    return build_kernel_grid(Hurst(h), TimeGrid(n_steps, horizon))


def get_kernel_grid(h: float, n_steps: int, horizon: float = 1.0) -> KernelGrid:
    """Memoized :func:`build_kernel_grid`."""
    return _cached_grid(float(h), int(n_steps), float(horizon))


@dataclass(frozen=True)
class GaussianPathSample:
    """One chunk of jointly simulated (B, B^H) paths.

    ``fbm_path`` is the deterministic linear image of ``bm_increments`` under
    the kernel weights, so the joint law of the pair is correct by
    construction.  ``independent_bm_increments`` carries the orthogonal
    driver for the correlated price model (None when not requested).
    """

    bm_increments: np.ndarray  # (m, n)
    fbm_path: np.ndarray  # (m, n+1), starts at 0
    independent_bm_increments: Optional[np.ndarray]  # (m, n) or None


def sample_paths(
    kg: KernelGrid,
    n_paths: int,
    seed: int,
    correlated: bool = False,
) -> Iterator[GaussianPathSample]:
    """Stream chunks of fBM paths jointly with the driving Brownian motion.

    Each chunk draws from an independent substream keyed by (seed, chunk
    index), so the output is deterministic regardless of chunking order or
    worker count.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n = kg.grid.n_steps
    dt = kg.grid.dt
    scale = kg.weights / dt  # row i maps increments to B^H_{t_{i+1}}
    done = 0
    chunk_idx = 0
    sd = np.sqrt(dt)
    while done < n_paths:
        m = min(CHUNK_SIZE, n_paths - done)
        rng = np.random.default_rng([seed, chunk_idx])
        d_bm = sd * rng.standard_normal((m, n))
        fbm = fbm_transform(d_bm, scale)
        path = np.concatenate([np.zeros((m, 1)), fbm], axis=1)
        d_ind = sd * rng.standard_normal((m, n)) if correlated else None
        yield GaussianPathSample(d_bm, path, d_ind)
        done += m
        chunk_idx += 1


def sample_paths_cholesky(kg: KernelGrid, n_paths: int, seed: int) -> np.ndarray:
    """Exact-covariance fBM sampler (marginal law only), for cross-checking.

    Returns paths of shape (n_paths, n_steps + 1).  The Volterra sampler is
    canonical because the correlated model needs the joint (B, B^H) law.
    """
    c = kg.cov_fbm[1:, 1:]
    jitter = 1e-12 * np.trace(c) / len(c)
    chol = np.linalg.cholesky(c + jitter * np.eye(len(c)))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_paths, len(c)))
    paths = z @ chol.T
    return np.concatenate([np.zeros((n_paths, 1)), paths], axis=1)


def sample_fbm_unit_interval(
    hurst: Hurst, n_steps: int, n_paths: int, rng: np.random.Generator
) -> np.ndarray:
    """fBM paths on [0, 1] via circulant embedding of the increment process.

    O(n log n) per path, exact in law on the grid; used for the large-horizon
    exponential-functional experiments where the O(n^2) Volterra and Cholesky
    constructions are impractical.  Returns shape (n_paths, n_steps + 1).
    """
    h = hurst.h
    n = n_steps
    k = np.arange(n + 1, dtype=np.float64)
    acf = 0.5 * ((k + 1.0) ** (2 * h) + np.abs(k - 1.0) ** (2 * h) - 2.0 * k ** (2 * h))
    circ = np.concatenate([acf, acf[-2:0:-1]])
    lam = np.fft.fft(circ).real
    # eigenvalues are nonnegative for fGn up to round-off
    lam = np.maximum(lam, 0.0)
    m = len(circ)
    w = rng.standard_normal((n_paths, m)) + 1j * rng.standard_normal((n_paths, m))
    z = np.fft.fft(w * np.sqrt(lam / (2.0 * m)), axis=1)
    increments = np.sqrt(2.0) * z.real[:, :n] * (1.0 / n) ** h
    paths = np.empty((n_paths, n + 1))
    paths[:, 0] = 0.0
    np.cumsum(increments, axis=1, out=paths[:, 1:])
    return paths


def apply_rkhs_operator(kg: KernelGrid, hdot: np.ndarray) -> np.ndarray:
    """Deterministic RKHS path (K_H hdot)(t_i) from hdot at the cell midpoints.

    Returns the path at all n_steps + 1 grid nodes (zero at t = 0).
    """
    hdot = np.asarray(hdot, dtype=np.float64)
    if hdot.shape != (kg.grid.n_steps,):
        raise ValueError(
            f"hdot must have length {kg.grid.n_steps}, got {hdot.shape}"
        )
    path = np.empty(kg.grid.n_steps + 1)
    path[0] = 0.0
    path[1:] = kg.weights @ hdot
    return path
