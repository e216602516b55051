"""Densities on Kac's sphere S^{N-1}(sqrt N): marginals, spherical entropy,
spherical Fisher information and normalization curves.

Bridge used throughout.  Integrating f^{(x)N} over R^N in spherical shells
gives, for the density h_N of W_1+...+W_N with W_i = V_i^2 i.i.d.,

    h_N(u) = (|S^{N-1}|/2) u^{(N-2)/2} Z_N(f, sqrt u),

and consequently Pi_1(F_N)(v) = f(v) h_{N-1}(N - v^2) / h_N(N).
For f standard Gaussian h_N is the chi-square density, which is how the
identity is checked in the tests.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .density1d import (ATOM_FLOOR, Density1D, fisher_information, from_log_callable,
                        gaussian_log, moment, pole_control, relative_entropy)
from .numerics import (PLAIN, SQRT_LEFT, SQRT_RIGHT, LatticeLaw, fft_convolve_power,
                       hat_masses_of_square, log_sphere_area, panel_grid)

LOG_2PI = float(np.log(2 * np.pi))


def log_marginal_constant(N: int) -> float:
    """log(|S^{N-2}| / (|S^{N-1}| sqrt N))."""
    return log_sphere_area(N - 1) - log_sphere_area(N) - 0.5 * np.log(N)


# ---------------------------------------------------------------- Z curves

@dataclass(frozen=True, eq=False)
class NormalizationCurve:
    N: int
    u_grid: np.ndarray
    log_z: np.ndarray
    sigma_sq: float
    lam: np.ndarray
    log_h: np.ndarray = field(repr=False)
    h: float = 0.005
    drift: float = 0.0

    @cached_property
    def _spline(self):
        ok = np.isfinite(self.log_h)
        return CubicSpline(self.u_grid[ok], self.log_h[ok])

    def covers(self, u) -> bool:
        u = np.asarray(u)
        return bool(np.all((u >= self.u_grid[0] - 1e-12) & (u <= self.u_grid[-1] + 1e-12)))

    @cached_property
    def _head(self):
        """Near u = 0 the lattice has an O(h) boundary layer.  When the window
        reaches down there, log Z is continued linearly from u0 = 40h inside
        the window (Z_N(f, sqrt u) -> f(0)^N smoothly), so h_N ~ u^{(N-2)/2}."""
        if self.u_grid[0] > 50 * self.h:
            return None
        u0 = float(self.u_grid[0] + 40 * self.h)
        lh0, d0 = float(self._spline(u0)), float(self._spline(u0, 1))
        return u0, lh0, d0 - 0.5 * (self.N - 2) / u0

    def _check(self, u):
        lo = 0.0 if self._head is not None else self.u_grid[0]
        if np.any(u > self.u_grid[-1] + 1e-12) or np.any(u < lo - 1e-12):
            raise ValueError(f"u outside curve window [{self.u_grid[0]}, {self.u_grid[-1]}]")

    def log_h_at(self, u):
        u = np.asarray(u, dtype=float)
        self._check(u)
        if self._head is None:
            return self._spline(u)
        u0, lh0, s = self._head
        low = u < u0
        with np.errstate(divide="ignore"):
            ext = lh0 + s * (u - u0) + 0.5 * (self.N - 2) * np.log(np.maximum(u, 0.0) / u0)
        return np.where(low, ext, self._spline(np.maximum(u, u0)))

    def dlog_h_at(self, u):
        u = np.asarray(u, dtype=float)
        if self._head is None:
            return self._spline(u, 1)
        u0, _, s = self._head
        with np.errstate(divide="ignore"):
            ext = s + 0.5 * (self.N - 2) / u
        return np.where(u < u0, ext, self._spline(np.maximum(u, u0), 1))

    def log_z_at(self, u):
        u = np.asarray(u, dtype=float)
        return self.log_h_at(u) - (log_sphere_area(self.N) - np.log(2.0)) - 0.5 * (self.N - 2) * np.log(u)

    @property
    def sup_abs_lambda(self) -> float:
        return float(np.nanmax(np.abs(self.lam)))

    def rows(self):
        return zip(self.u_grid, self.log_z, self.lam)


def _solve_tilt(law: LatticeLaw, target: float) -> float:
    """theta with tilted per-summand mean equal to target."""
    def g(th):
        return law.tilt(th).mean_var()[0] - target
    lo, hi = -1.0, 1.0
    for _ in range(60):
        if g(lo) < 0:
            break
        lo *= 2.0
    for _ in range(60):
        if g(hi) > 0:
            break
        hi *= 2.0
    return brentq(g, lo, hi, xtol=1e-12)


def _tilted_log_density(laws, theta, N, pad_sd=14.0):
    """Richardson-combined log h_N on the coarse lattice for one tilt."""
    out = []
    for law in laws:
        t = law.tilt(theta)
        mu, var = t.mean_var()
        reach = N * mu + pad_sd * np.sqrt(N * var) + 2 * law.h
        full = N * (len(t.masses) - 1) + 1
        need = int(np.ceil(reach / law.h)) + 1
        nfft = 1 << int(np.ceil(np.log2(min(full, max(need, 64)))))
        out.append(fft_convolve_power(t, N, nfft=nfft if nfft < full else None))
    coarse, fine = out
    n = min(len(coarse.masses), (len(fine.masses) + 1) // 2)
    lc = coarse.log_density()[:n]
    lf = fine.log_density()[: 2 * n : 2]
    with np.errstate(invalid="ignore", over="ignore"):
        r = (4.0 - np.exp(lc - lf)) / 3.0
        comb = np.where(np.isfinite(lf) & (r > 0), lf + np.log(np.where(r > 0, r, 1.0)), lf)
    return coarse.nodes[:n], comb, max(coarse.drift, fine.drift)


def build_zcurve(f: Density1D, N: int, u_lo: Optional[float] = None, u_hi: Optional[float] = None,
                 h: float = 0.005, n_sd: float = 8.0, tilt_step_sd: float = 2.0) -> NormalizationCurve:
    """Tabulate log Z_N(f, sqrt u) on the lattice u = j*h over a window that
    contains [u_lo, u_hi] and N*E[V^2] +- n_sd standard deviations."""
    if N < 1:
        raise ValueError("N must be >= 1")
    vmax = max(abs(f.support[0]), abs(f.support[1]))
    laws = [hat_masses_of_square(f, vmax, h), hat_masses_of_square(f, vmax, h / 2)]
    mu, var = laws[0].mean_var()
    m2, m4 = moment(f, 2), moment(f, 4)
    sigma_sq = m4 - m2 * m2
    sd = np.sqrt(N * var)
    lo = max(N * mu - n_sd * sd, 2 * h)
    hi = min(N * mu + n_sd * sd, N * vmax * vmax - 2 * h)
    if u_lo is not None:
        lo = max(min(lo, u_lo), 2 * h)
    if u_hi is not None:
        hi = max(hi, u_hi)
    lo = np.floor(lo / h) * h
    hi = np.ceil(hi / h) * h

    # tilts spaced ~tilt_step_sd tilted standard deviations apart
    tilts = []
    u = lo
    while True:
        target = min(max(u / N, 20 * h), 0.999 * vmax * vmax)
        th = 0.0 if abs(target - mu) < 1e-12 else _solve_tilt(laws[0], target)
        m, v = laws[0].tilt(th).mean_var()
        tilts.append((th, N * m, np.sqrt(N * v)))
        if N * m >= hi - h or u >= hi or target >= 0.999 * vmax * vmax:
            break
        u = min(N * m + tilt_step_sd * np.sqrt(N * v), hi)
    if N == 1:
        tilts = [(0.0, mu, np.sqrt(var))]

    u_grid = np.arange(int(round(lo / h)), int(round(hi / h)) + 1) * h
    best = np.full(u_grid.shape, np.inf)
    log_h = np.full(u_grid.shape, -np.inf)
    drift = 0.0
    for th, c, s in tilts:
        if N == 1:
            nodes, lh, d = laws[0].nodes, laws[0].log_density(), laws[0].drift
        else:
            nodes, lh, d = _tilted_log_density(laws, th, N)
        drift = max(drift, d)
        idx = np.clip(np.round(u_grid / h).astype(int), 0, len(lh) - 1)
        score = np.abs(u_grid - c) / s
        take = (score < best) & (idx < len(lh))
        log_h[take] = lh[idx[take]]
        best[take] = score[take]

    with np.errstate(divide="ignore"):
        log_z = log_h - (log_sphere_area(N) - np.log(2.0)) - 0.5 * (N - 2) * np.log(u_grid)
    s = np.sqrt(N * sigma_sq)
    lam = s * np.exp(log_h) - np.exp(-0.5 * ((u_grid - N * m2) / s) ** 2) / np.sqrt(2 * np.pi)
    return NormalizationCurve(N, u_grid, log_z, float(sigma_sq), lam, log_h, h, drift)


# ---------------------------------------------------------------- sphere densities

@dataclass(frozen=True, eq=False)
class SphereDensity:
    """Uniform (base is None) or the conditioned tensorization of `base`."""
    N: int
    base: Optional[Density1D] = None
    h: float = 0.005
    label: str = ""

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if self.base is not None:
            m2 = moment(self.base, 2)
            if abs(m2 - 1.0) > 1e-6:
                raise ValueError(f"base must have M_2 = 1 (got {m2:.8f})")
            if not np.isfinite(moment(self.base, 4)):
                raise ValueError("base must have a finite fourth moment")
        if not self.label:
            object.__setattr__(self, "label", "uniform" if self.base is None else self.base.label)

    @classmethod
    def uniform(cls, N: int) -> "SphereDensity":
        return cls(N)

    @classmethod
    def conditioned_tensorization(cls, f: Density1D, N: int, h: float = 0.005) -> "SphereDensity":
        return cls(N, f, h)

    @property
    def is_uniform(self) -> bool:
        return self.base is None

    @property
    def vmax(self) -> float:
        if self.base is None:
            return float(np.sqrt(self.N))
        return min(max(abs(self.base.support[0]), abs(self.base.support[1])), float(np.sqrt(self.N)))

    def curve(self, n: int) -> NormalizationCurve:
        """Z-curve for n summands covering every argument the marginals need."""
        cache = self.__dict__.setdefault("_curves", {})
        if n not in cache:
            depth = self.N - n
            w = depth * self.vmax ** 2
            cache[n] = build_zcurve(self.base, n, u_lo=max(self.N - w, 0.0), u_hi=self.N, h=self.h)
        return cache[n]

    @property
    def zcurve(self) -> NormalizationCurve:
        return self.curve(self.N)

    @cached_property
    def log_Z(self) -> float:
        return float(self.zcurve.log_z_at(self.N))

    @cached_property
    def marginal1(self) -> Density1D:
        return marginal1(self)

    @cached_property
    def marginal2(self) -> "SphereMarginal":
        return marginal2(self)


def _line_edges(a, b, knots=(), width=0.5):
    """Panel edges on [a,b]: knots plus uniform subdivision of width <= width."""
    pts = sorted({a, b, *[k for k in knots if a < k < b]})
    e = [pts[0]]
    for x0, x1 in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil((x1 - x0) / width)))
        e.extend(np.linspace(x0, x1, n + 1)[1:])
    return np.array(e)


def _pole_grid_edges(N, knots=(), width=0.5, core=12.0):
    rN = np.sqrt(N)
    c = min(core, rN)
    inner = _line_edges(-c, c, knots, width)
    if c < rN:
        outer = _line_edges(c, rN, (), max(width, (rN - c) / 8))
        inner = np.concatenate([-outer[::-1], inner[1:-1], outer])
    kinds = np.full(len(inner) - 1, PLAIN)
    kinds[0], kinds[-1] = SQRT_LEFT, SQRT_RIGHT
    return inner, kinds


def marginal1(F: SphereDensity, j: int = 1) -> Density1D:
    """First marginal Pi_1(F_N) on the line; identical for every j."""
    N = F.N
    if N < 3:
        raise ValueError("marginal1 needs N >= 3")
    lc = log_marginal_constant(N)
    a = 0.5 * (N - 3)
    if F.is_uniform:
        edges, kinds = _pole_grid_edges(N)

        def lp(v):
            with np.errstate(divide="ignore"):
                return lc + a * np.log1p(-v * v / N)

        return from_log_callable(lp, edges, score=lambda v: -(N - 3) * v / (N - v * v),
                                 kinds=kinds, label=f"Pi1[uniform,N={N}]")

    f = F.base
    prev, cur = F.curve(N - 1), F.zcurve
    lhN = float(cur.log_h_at(N))
    s = F.vmax
    if s >= np.sqrt(N) - 1e-12:
        edges, kinds = _pole_grid_edges(N, knots=tuple(f.grid.edges))
    else:
        edges = f.grid.edges[(f.grid.edges >= -s) & (f.grid.edges <= s)]
        kinds = None

    def lp(v):
        return f.logpdf(v) + prev.log_h_at(np.maximum(N - v * v, 0.0)) - lhN

    def sc(v):
        u = np.maximum(N - v * v, 0.0)
        return f.score(v) - 2.0 * v * prev.dlog_h_at(u)

    d = from_log_callable(lp, edges, score=sc, kinds=kinds, order=f.grid.order,
                          label=f"Pi1[{f.label},N={N}]")
    if d.drift > 1e-5:
        warnings.warn(f"marginal1 mass drift {d.drift:.2e} exceeds 1e-5")
    return d


def sphere_marginal_from_line(p: Density1D, N: int, floor: float = 1e-12):
    """F_j on the sphere from the line marginal, as values on p's grid.
    Returns (values, ok) where ok flags nodes with weight above `floor`."""
    rN = np.sqrt(N)
    if p.support[0] < -rN - 1e-12 or p.support[1] > rN + 1e-12:
        raise ValueError("p must be supported in [-sqrt N, sqrt N]")
    with np.errstate(divide="ignore"):
        lw = log_marginal_constant(N) + 0.5 * (N - 3) * np.log1p(-p.points ** 2 / N)
    ok = lw > np.log(floor)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(ok, np.exp(p.log_values() - lw), np.nan)
    return out, ok


def line_from_sphere_marginal(values, points, N: int):
    """Inverse of sphere_marginal_from_line: Pi_1 values from F_j values."""
    with np.errstate(divide="ignore"):
        lw = log_marginal_constant(N) + 0.5 * (N - 3) * np.log1p(-np.asarray(points) ** 2 / N)
    return np.asarray(values) * np.exp(lw)


# ---------------------------------------------------------------- two-marginals

@dataclass(frozen=True, eq=False)
class SphereMarginal:
    """Order-2 marginal as an iterated quadrature table: for each outer node
    v1[i] an inner grid v2[i, :] with weights w2[i, :]."""
    order: int
    v1: np.ndarray
    w1: np.ndarray
    v2: np.ndarray
    w2: np.ndarray
    values: np.ndarray
    parent: SphereDensity = field(repr=False)
    drift: float = 0.0

    def integrate(self, g) -> float:
        """int int g(v1, v2) Pi_2 with g a vectorized callable."""
        V1 = np.broadcast_to(self.v1[:, None], self.v2.shape)
        return float(np.sum(self.w1[:, None] * self.w2 * self.values * g(V1, self.v2)))

    def inner_marginal(self):
        return np.sum(self.w2 * self.values, axis=1)

    @property
    def mass(self) -> float:
        return float(np.dot(self.w1, self.inner_marginal()))


def marginal2(F: SphereDensity) -> SphereMarginal:
    N = F.N
    if N < 4:
        raise ValueError("marginal2 needs N >= 4")
    outer = F.marginal1.grid
    v1 = outer.points
    order = outer.order
    rows_v, rows_w, rows_f = [], [], []
    if F.is_uniform:
        lc = log_sphere_area(N - 2) - log_sphere_area(N) - np.log(N)
        for x in v1:
            r = np.sqrt(max(N - x * x, 0.0))
            e = np.linspace(-r, r, 5)
            g = panel_grid(e, order, [SQRT_LEFT, PLAIN, PLAIN, SQRT_RIGHT])
            with np.errstate(divide="ignore"):
                lv = lc + 0.5 * (N - 4) * np.log(np.maximum(1.0 - (x * x + g.points ** 2) / N, 0.0))
            rows_v.append(g.points), rows_w.append(g.weights), rows_f.append(np.exp(lv))
    else:
        f = F.base
        cur, pp = F.zcurve, F.curve(N - 2)
        lhN = float(cur.log_h_at(N))
        fe = f.grid.edges
        fmax = max(abs(fe[0]), abs(fe[-1]))
        lf1 = f.logpdf(v1)
        width = len(fe) - 1 + 8
        for x, l1 in zip(v1, lf1):
            r = np.sqrt(max(N - x * x, 0.0))
            if r < fmax:
                e = np.concatenate([[-r], fe[(fe > -r) & (fe < r)], [r]])
                e = e[np.concatenate([[True], np.diff(e) > 1e-12 * max(r, 1)])]
                kinds = np.full(len(e) - 1, PLAIN)
                kinds[0], kinds[-1] = SQRT_LEFT, SQRT_RIGHT
                if len(e) == 2:
                    e, kinds = np.array([-r, 0.0, r]), np.array([SQRT_LEFT, SQRT_RIGHT])
            else:
                e, kinds = fe, None
            g = panel_grid(e, order, kinds)
            u = np.maximum(N - x * x - g.points ** 2, 0.0)
            lv = l1 + f.logpdf(g.points) + pp.log_h_at(u) - lhN
            with np.errstate(under="ignore"):
                val = np.exp(lv)
            rows_v.append(g.points), rows_w.append(g.weights), rows_f.append(val)
    n2 = max(len(r) for r in rows_v)
    V2, W2, P2 = (np.zeros((len(v1), n2)) for _ in range(3))
    for i, (a, b, c) in enumerate(zip(rows_v, rows_w, rows_f)):
        V2[i, : len(a)], W2[i, : len(a)], P2[i, : len(a)] = a, b, c
    m = SphereMarginal(2, v1, outer.weights, V2, W2, P2, F)
    mass = m.mass
    drift = abs(mass - 1.0)
    if drift > 1e-5:
        warnings.warn(f"marginal2 mass drift {drift:.2e} exceeds 1e-5")
    return SphereMarginal(2, v1, outer.weights, V2, W2, P2 / mass, F, drift)


# ---------------------------------------------------------------- entropy

def spherical_entropy(F: SphereDensity) -> float:
    """H_N(F_N) = N int log f dPi_1 - log Z_N(f, sqrt N)."""
    if F.is_uniform:
        return 0.0
    p = F.marginal1
    live = p.values > ATOM_FLOOR
    lf = F.base.logpdf(p.points[live])
    if np.any(~np.isfinite(lf)):
        return float("inf")
    return float(F.N * np.dot(p.grid.weights[live] * p.values[live], lf) - F.log_Z)


@dataclass(frozen=True)
class MarginalEntropy:
    """int F_1 log F_1 dsigma along two routes, with the line-side terms."""
    direct: float
    via_line: float
    h_line: float              # H(Pi_1 | gamma)
    log_const: float           # log(|S^{N-2}| sqrt(2 pi) / (|S^{N-1}| sqrt N))
    half_m2: float
    pole_log: float            # ((N-3)/2) int Pi_1 log(1 - v^2/N)

    @property
    def gap(self) -> float:
        return abs(self.direct - self.via_line)


def marginal_entropy(F: SphereDensity) -> MarginalEntropy:
    N = F.N
    p = F.marginal1
    x = p.points
    w = p.grid.weights
    lw = 0.5 * (N - 3) * np.log1p(-x * x / N)
    lc = log_marginal_constant(N)
    # (a) sphere-side F_1 straight from the Z-curves, against the uniform weight
    if F.is_uniform:
        direct = 0.0
    else:
        u = np.maximum(N - x * x, 0.0)
        logF1 = (F.base.logpdf(x) + F.curve(N - 1).log_z_at(u) - F.log_Z)
        wt = np.exp(lc + lw)
        direct = float(np.dot(w * wt, np.exp(logF1) * logF1))
    # (b) the exact line identity
    h_line = relative_entropy(p, gaussian_log)
    log_const = lc + 0.5 * LOG_2PI
    half_m2 = 0.5 * moment(p, 2)
    pole_log = float(np.dot(w * p.values, lw))
    via = h_line - log_const - half_m2 - pole_log
    return MarginalEntropy(direct, via, h_line, log_const, half_m2, pole_log)


def partial_entropy_sum(F: SphereDensity, tol: float = 1e-6) -> float:
    """sum_j int F_j log F_j dsigma = N * (single marginal term)."""
    me = marginal_entropy(F)
    if me.gap > tol:
        warnings.warn(f"partial entropy paths disagree by {me.gap:.2e}")
    return F.N * me.via_line


# ---------------------------------------------------------------- Fisher

@dataclass(frozen=True)
class SphereFisherTerms:
    bracket: float             # int (1 - v^2/N) |(log Pi_1)'|^2 Pi_1
    cross: float               # 2 (N-3)/N
    pole: float                # ((N-3)/N)^2 int v^2 Pi_1 / (1 - v^2/N)

    @property
    def value(self) -> float:
        return self.bracket - self.cross + self.pole


def spherical_fisher_terms(F: SphereDensity) -> SphereFisherTerms:
    N = F.N
    p = F.marginal1
    x, w = p.points, p.grid.weights
    d = 1.0 - x * x / N
    live = p.values > ATOM_FLOOR
    s = p.score_values()
    bracket = float(np.dot((w * p.values * d * s * s)[live], np.ones(live.sum())))
    pole_int = pole_control_v2(p, N)
    c = (N - 3) / N
    return SphereFisherTerms(bracket, 2 * c, c * c * pole_int)


def pole_control_v2(p: Density1D, N: int) -> float:
    """int v^2 Pi_1 / (1 - v^2/N), inf if the pole behaviour diverges."""
    x = p.points
    d = 1.0 - x * x / N
    if p.support[1] >= np.sqrt(N) - 1e-9:
        v = p.values
        if v[-1] > 0 and v[-2] > 0 and d[-1] < 1e-2:
            slope = np.log(v[-1] / v[-2]) / np.log(d[-1] / d[-2])
            if slope <= 1e-3:
                return float("inf")
    return p.grid.integrate(x * x * p.values / d)


def spherical_fisher_marginal(F: SphereDensity) -> float:
    """I_N(F_1) through the line marginal (three-term decomposition)."""
    return spherical_fisher_terms(F).value


def spherical_fisher_full(F: SphereDensity) -> float:
    """I_N(F_N) = (N-1)[E v1^2 g(v2)^2 - E v1 g(v1) v2 g(v2)], g = (log f)'."""
    if F.is_uniform:
        return 0.0
    g = F.base.score
    m = F.marginal2
    return (F.N - 1) * m.integrate(lambda a, b: a * a * g(b) ** 2 - a * g(a) * b * g(b))


# ---------------------------------------------------------------- conditions

@dataclass(frozen=True)
class ConditionRow:
    N: int
    moment_k: float
    fisher_line: float
    pole_q: float
    entropy_per_N: float
    fisher_per_N: float
    moment_bound: float        # prefactor * M_k(f) for tensorizations (nan otherwise)


@dataclass(frozen=True)
class ConditionReport:
    label: str
    k: float
    q: float
    rows: tuple

    @property
    def A_k(self):
        return max(r.moment_k for r in self.rows)

    @property
    def A_I(self):
        return max(r.fisher_line for r in self.rows)

    @property
    def A_P(self):
        return max(r.pole_q for r in self.rows)

    @property
    def C_H(self):
        return min(r.entropy_per_N for r in self.rows)

    @property
    def C_I(self):
        return max(r.fisher_per_N for r in self.rows)

    @property
    def entropy_condition_fails(self) -> bool:
        return self.C_H <= 1e-9

    @property
    def all_finite(self) -> bool:
        return all(np.isfinite([self.A_k, self.A_I, self.A_P, self.C_H, self.C_I]))


def moment_prefactor(F: SphereDensity) -> float:
    """sqrt(N/(N-1)) (1 + sqrt(2pi) sup|lambda_{N-1}|) / (1 + sqrt(2pi) lambda_N(N))."""
    N = F.N
    prev, cur = F.curve(N - 1), F.zcurve
    u = prev.u_grid
    m = (u >= N - F.vmax ** 2 - 1e-12) & (u <= N + 1e-12)
    sup_prev = float(np.max(np.abs(prev.lam[m])))
    s = np.sqrt(N * cur.sigma_sq)
    lam_N = s * np.exp(float(cur.log_h_at(N))) - 1.0 / np.sqrt(2 * np.pi)
    r2 = np.sqrt(2 * np.pi)
    return float(np.sqrt(N / (N - 1)) * (1 + r2 * sup_prev) / (1 + r2 * lam_N))


def condition_row(F: SphereDensity, k: float, q: float) -> ConditionRow:
    p = F.marginal1
    mk = moment(p, k)
    bound = moment_prefactor(F) * moment(F.base, k) if not F.is_uniform else float("nan")
    return ConditionRow(F.N, mk, fisher_information(p), pole_control(p, F.N, q),
                        spherical_entropy(F) / F.N, spherical_fisher_full(F) / F.N, bound)


def condition_report(Fs, k: float, q: float) -> ConditionReport:
    """Per-N condition quantities for a list of sphere densities of one family."""
    Fs = list(Fs) if not isinstance(Fs, SphereDensity) else [Fs]
    rows = tuple(condition_row(F, k, q) for F in Fs)
    return ConditionReport(Fs[0].label, k, q, rows)


def export_zcurve_csv(curve: NormalizationCurve, path) -> None:
    with open(path, "w") as fh:
        fh.write("u,log_z,lambda\n")
        for u, lz, la in curve.rows():
            fh.write(f"{u:.6f},{lz:.12e},{la:.12e}\n")
