"""Shared numerical machinery: panel quadrature, log-domain special
functions, lattice convolution powers and quantile inversion."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as L
from scipy.special import gammaln, poch

PLAIN, SQRT_LEFT, SQRT_RIGHT = 0, 1, 2


class AliasingError(RuntimeError):
    """Raised when a circular convolution buffer is too short."""


class MassDriftError(RuntimeError):
    pass


# ---------------------------------------------------------------- log domain

@dataclass(frozen=True)
class LogScaled:
    """A real number stored as sign * exp(log_magnitude)."""
    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.log_magnitude != -np.inf:
            object.__setattr__(self, "log_magnitude", -np.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogScaled":
        if x == 0:
            return cls(-np.inf, 0)
        return cls(float(np.log(abs(x))), 1 if x > 0 else -1)

    def __mul__(self, other: "LogScaled") -> "LogScaled":
        s = self.sign * other.sign
        return LogScaled(self.log_magnitude + other.log_magnitude if s else -np.inf, s)

    def __truediv__(self, other: "LogScaled") -> "LogScaled":
        if other.sign == 0:
            raise ZeroDivisionError
        s = self.sign * other.sign
        return LogScaled(self.log_magnitude - other.log_magnitude if s else -np.inf, s)

    def __float__(self) -> float:
        return 0.0 if self.sign == 0 else self.sign * float(np.exp(self.log_magnitude))


def log_sphere_area(n: int) -> float:
    """log |S^{n-1}| = log(2 pi^{n/2} / Gamma(n/2))."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return float(np.log(2.0) + 0.5 * n * np.log(np.pi) - gammaln(0.5 * n))


def gamma_ratio_factor(N: int, k: float) -> float:
    """(2/N)^{k/2} Gamma((N+k)/2) / Gamma(N/2).  The Gamma ratio is the
    Pochhammer symbol (N/2)_{k/2}; differencing gammaln loses ~1e-12 at N ~ 1e3."""
    if N < 1:
        raise ValueError("N must be >= 1")
    with np.errstate(over="ignore"):
        v = (2.0 / N) ** (0.5 * k) * poch(0.5 * N, 0.5 * k)
    if np.isfinite(v) and v > 0:
        return float(v)
    return float(np.exp(0.5 * k * np.log(2.0 / N) + gammaln(0.5 * (N + k)) - gammaln(0.5 * N)))


def gamma_ratio_product(N: int, l: int) -> float:
    """Product form of gamma_ratio_factor(N, 2l); note it ascends, (1+2i/N)."""
    return float(np.prod([1.0 + 2.0 * i / N for i in range(l)]))


# ---------------------------------------------------------------- panels

@lru_cache(maxsize=64)
def _gl(order: int):
    s, w = L.leggauss(order)
    P = L.legvander(s, order - 1)                       # P[i, k] = P_k(s_i)
    T = (P * w[:, None]).T * ((2 * np.arange(order) + 1) / 2.0)[:, None]
    return s, w, T


def _map(kind, a, b, s):
    """Panel map s in [-1,1] -> v, and dv/ds."""
    t = (1.0 + s) / 2.0
    if kind == SQRT_LEFT:
        return a + (b - a) * t * t, (b - a) * t
    if kind == SQRT_RIGHT:
        r = 1.0 - t
        return b - (b - a) * r * r, (b - a) * r
    return a + (b - a) * t, (b - a) / 2.0 + 0.0 * s


def _unmap(kind, a, b, v):
    x = np.clip((v - a) / (b - a), 0.0, 1.0)
    if kind == SQRT_LEFT:
        return 2.0 * np.sqrt(x) - 1.0
    if kind == SQRT_RIGHT:
        return 1.0 - 2.0 * np.sqrt(1.0 - x)
    return 2.0 * x - 1.0


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Composite Gauss-Legendre grid.  Panel p holds nodes
    points[p*order:(p+1)*order]; `kinds` marks square-root panels."""
    points: np.ndarray
    weights: np.ndarray
    support: tuple
    edges: np.ndarray = field(repr=False)
    order: int = 16
    kinds: np.ndarray = field(default=None, repr=False)
    dvds: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def panel_of(self, v):
        return np.clip(np.searchsorted(self.edges, v, side="right") - 1, 0, self.n_panels - 1)

    def local(self, v, p):
        s = np.empty_like(np.asarray(v, dtype=float))
        for kind in (PLAIN, SQRT_LEFT, SQRT_RIGHT):
            m = self.kinds[p] == kind
            if np.any(m):
                s[m] = _unmap(kind, self.edges[p[m]], self.edges[p[m] + 1], v[m])
        return s

    def coefficients(self, values):
        """Per-panel Legendre coefficients, shape (order, n_panels)."""
        _, _, T = _gl(self.order)
        return T @ np.asarray(values, dtype=float).reshape(self.n_panels, self.order).T

    def interpolate(self, values, v, coeffs=None):
        """Panel-wise polynomial interpolation; zero outside the support."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        c = self.coefficients(values) if coeffs is None else coeffs
        out = np.zeros_like(v)
        inside = (v >= self.support[0]) & (v <= self.support[1])
        if np.any(inside):
            vi = v[inside]
            p = self.panel_of(vi)
            out[inside] = L.legval(self.local(vi, p), c[:, p], tensor=False)
        return out


def panel_grid(edges, order: int = 16, kinds=None) -> Grid1D:
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly increasing")
    n = len(edges) - 1
    kinds = np.zeros(n, dtype=int) if kinds is None else np.asarray(kinds, dtype=int)
    s, w, _ = _gl(order)
    pts, dv = np.empty((n, order)), np.empty((n, order))
    for kind in (PLAIN, SQRT_LEFT, SQRT_RIGHT):
        m = kinds == kind
        if np.any(m):
            pts[m], dv[m] = _map(kind, edges[:-1][m][:, None], edges[1:][m][:, None], s[None, :])
    return Grid1D(points=pts.ravel(), weights=(dv * w[None, :]).ravel(),
                  support=(float(edges[0]), float(edges[-1])), edges=edges,
                  order=order, kinds=kinds, dvds=dv.ravel())


def graded_edges(a: float, b: float, n_uniform: int, grade_left=0, grade_right=0,
                 ratio: float = 0.2) -> np.ndarray:
    """Uniform panels on [a,b] with geometric refinement of the end panels
    (grade_* = number of extra levels toward that endpoint)."""
    e = list(np.linspace(a, b, n_uniform + 1))
    h = (b - a) / n_uniform
    left = [a + h * ratio ** j for j in range(1, grade_left + 1)]
    right = [b - h * ratio ** j for j in range(1, grade_right + 1)]
    return np.unique(np.array(e + left + right))


# ---------------------------------------------------------------- CDF / quantiles

@dataclass(frozen=True, eq=False)
class PanelCDF:
    """Exact CDF of the panel-wise polynomial interpolant of a density."""
    grid: Grid1D
    anti: np.ndarray          # antiderivative coefficients in s, per panel
    base: np.ndarray          # mass before each panel
    total: float

    @classmethod
    def build(cls, grid: Grid1D, values) -> "PanelCDF":
        m = np.asarray(values, dtype=float) * grid.dvds
        c = grid.coefficients(m)
        anti = L.legint(c, lbnd=-1.0, axis=0)
        masses = L.legval(1.0, anti)
        base = np.concatenate([[0.0], np.cumsum(masses)])
        return cls(grid, anti, base, float(base[-1]))

    def __call__(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        g = self.grid
        out = np.where(v < g.support[0], 0.0, self.total)
        inside = (v >= g.support[0]) & (v <= g.support[1])
        if np.any(inside):
            p = g.panel_of(v[inside])
            s = g.local(v[inside], p)
            out[inside] = self.base[p] + L.legval(s, self.anti[:, p], tensor=False)
        return out / self.total

    def quantile(self, t, iters: int = 60):
        """Left-continuous inverse inside the located panel: bracketed
        Newton, falling back to bisection when a step leaves the bracket.
        Stops once the bracket (or the Newton step) is below 1e-14."""
        t = np.atleast_1d(np.asarray(t, dtype=float)) * self.total
        g = self.grid
        p = np.clip(np.searchsorted(self.base, t, side="left") - 1, 0, g.n_panels - 1)
        target = t - self.base[p]
        lo, hi = -np.ones_like(t), np.ones_like(t)
        A = self.anti[:, p]
        D = L.legder(self.anti, axis=0)[:, p]
        s = np.zeros_like(t)
        for _ in range(iters):
            r = L.legval(s, A, tensor=False) - target
            below = r < 0
            lo, hi = np.where(below, s, lo), np.where(below, hi, s)
            d = L.legval(s, D, tensor=False)
            with np.errstate(divide="ignore", invalid="ignore"):
                nxt = s - r / d
            bad = ~np.isfinite(nxt) | (nxt < lo) | (nxt > hi) | (d <= 0)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            step = np.abs(nxt - s)
            s = nxt
            if np.all((step < 1e-14) | (hi - lo < 1e-14)):
                break
        v = np.empty_like(t)
        for kind in (PLAIN, SQRT_LEFT, SQRT_RIGHT):
            m = g.kinds[p] == kind
            if np.any(m):
                v[m] = _map(kind, g.edges[p[m]], g.edges[p[m] + 1], s[m])[0]
        return v


def graded_unit_edges(levels: int = 22, ratio: float = 0.35, n_mid: int = 8):
    """Panel edges on [0,1], geometrically graded toward both ends where
    quantile functions blow up."""
    inner = [ratio ** j * 0.5 for j in range(levels, 0, -1)]
    e = np.array([0.0] + inner + list(np.linspace(0.5 * ratio, 0.5, n_mid + 1)[1:]))
    return np.unique(np.concatenate([e, 1.0 - e]))


def graded_unit_nodes(order: int = 16, levels: int = 22, ratio: float = 0.35, n_mid: int = 8):
    g = panel_grid(graded_unit_edges(levels, ratio, n_mid), order)
    return g.points, g.weights


def quantile_table(f, resolution: int = 4097):
    """Piecewise-linear quantile table (t, F^{-1}(t)) on a uniform t grid
    clipped to (0,1); monotone by construction of the inverse."""
    t = np.linspace(0.0, 1.0, resolution)
    t[0], t[-1] = 1e-12, 1.0 - 1e-12
    q = np.maximum.accumulate(f.quantile(t))
    return t, q


# ---------------------------------------------------------------- lattices

@dataclass(frozen=True, eq=False)
class LatticeLaw:
    """Masses on nodes u_j = j*h of a (possibly tilted) law.  The density of
    the untilted law near u_j is masses[j]/h * exp(log_scale - theta*u_j)."""
    h: float
    masses: np.ndarray
    theta: float = 0.0
    log_scale: float = 0.0
    drift: float = 0.0

    @property
    def nodes(self):
        return np.arange(len(self.masses)) * self.h

    def log_density(self):
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(self.masses, 0.0) / self.h) + self.log_scale - self.theta * self.nodes

    def tilt(self, theta: float) -> "LatticeLaw":
        if self.theta != 0.0:
            raise ValueError("tilt an untilted law")
        with np.errstate(divide="ignore"):
            lw = np.log(np.maximum(self.masses, 0.0)) + theta * self.nodes
        mx = lw.max()
        m = np.exp(lw - mx)
        s = m.sum()
        return LatticeLaw(self.h, m / s, theta, float(mx + np.log(s)))

    def mean_var(self):
        x = self.nodes
        mu = float(np.dot(self.masses, x))
        return mu, float(np.dot(self.masses, (x - mu) ** 2))


def hat_masses_of_square(pdf, vmax: float, h: float, order: int = 8) -> LatticeLaw:
    """Project the law of W = V^2 (V with density pdf on [-vmax, vmax]) onto
    the hat basis of the lattice h*Z.  Mean is preserved exactly."""
    n = int(np.ceil(vmax * vmax / h)) + 1
    x = np.arange(n + 1) * h
    s, w = L.leggauss(order)
    lo, hi = x[:-1], np.minimum(x[1:], vmax * vmax)
    ok = lo < hi
    lo, hi, j = lo[ok], hi[ok], np.nonzero(ok)[0]
    a, b = np.sqrt(lo), np.sqrt(hi)
    v = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * s[None, :]
    fw = (pdf(v) + pdf(-v)) * (0.5 * (b - a))[:, None] * w[None, :]
    t = (v * v - x[j][:, None]) / h
    P = np.zeros(n + 1)
    np.add.at(P, j, (fw * (1.0 - t)).sum(1))
    np.add.at(P, j + 1, (fw * t).sum(1))
    P = np.maximum(P, 0.0)
    tot = P.sum()
    return LatticeLaw(h, P / tot, drift=float(abs(tot - 1.0)))


def fft_convolve_power(base: LatticeLaw, N: int, nfft: int | None = None,
                       mass_tol: float = 1e-6) -> LatticeLaw:
    """N-fold self-convolution by binary powering of the FFT-domain factor.

    Each stage is renormalized by its zero frequency and the log factor is
    accumulated, so that stage masses stay O(1).  With a short circular
    buffer (nfft) the top 1% of the buffer is checked for wrapped mass."""
    if N < 1:
        raise ValueError("N must be >= 1")
    P = np.asarray(base.masses, dtype=float)
    if abs(P.sum() - 1.0) > 1e-8 or np.any(P < 0):
        raise ValueError("base masses must be nonnegative and sum to 1")
    if N == 1:
        return base
    full = N * (len(P) - 1) + 1
    if nfft is None:
        nfft = 1 << int(np.ceil(np.log2(full)))
    if len(P) > nfft:                                   # fold into the period
        P = np.bincount(np.arange(len(P)) % nfft, weights=P, minlength=nfft)
    F = np.fft.rfft(P, nfft)
    acc, log_acc, e = None, LogScaled(0.0), N
    while e:
        if e & 1:
            acc = F if acc is None else acc * F
            z = acc[0].real
            if abs(z - 1.0) > mass_tol:
                raise MassDriftError(f"mass drift {abs(z - 1.0):.2e} at convolution stage")
            log_acc = log_acc * LogScaled.from_float(z)
            acc = acc / z
        e >>= 1
        if e:
            F = F * F
            F = F / F[0].real
    out = np.fft.irfft(acc, nfft)
    if nfft < full:
        top = out[int(0.99 * nfft):]
        if np.abs(top).sum() > 1e-10:
            raise AliasingError("convolution buffer too short: wrapped mass in top 1% exceeds 1e-10")
    else:
        out = out[:full]
    out = np.maximum(out, 0.0)
    tot = out.sum()
    return LatticeLaw(base.h, out / tot, base.theta, N * base.log_scale + log_acc.log_magnitude,
                      drift=float(abs(tot - 1.0)))
