"""One-dimensional densities and line functionals (moments, entropy,
Fisher information, pole control)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erf

from .numerics import Grid1D, PanelCDF, graded_edges, panel_grid, quantile_table

ATOM_FLOOR = 1e-300
LOG_2PI = float(np.log(2 * np.pi))


@dataclass(frozen=True, eq=False)
class Density1D:
    """Density on a panel quadrature grid.

    `logpdf` and `score` (= (log f)') are optional exact callables; when
    absent, off-grid values come from panel interpolation of `values`."""
    grid: Grid1D
    values: np.ndarray
    derivative_values: Optional[np.ndarray] = None
    label: str = ""
    logpdf: Optional[Callable] = field(default=None, repr=False)
    score: Optional[Callable] = field(default=None, repr=False)
    drift: float = 0.0          # |mass - 1| before renormalization

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError(f"{self.label}: negative density values")

    @property
    def points(self):
        return self.grid.points

    @property
    def support(self):
        return self.grid.support

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self.logpdf is None:
            return self.grid.interpolate(self.values, v.ravel()).reshape(v.shape)
        a, b = self.support
        inside = (v >= a) & (v <= b)
        out = np.zeros(v.shape)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out[inside] = np.exp(self.logpdf(v[inside]))
        return out

    def log_values(self):
        if self.logpdf is not None:
            return self.logpdf(self.points)
        with np.errstate(divide="ignore"):
            return np.log(self.values)

    def score_values(self):
        if self.score is not None:
            return self.score(self.points)
        if self.derivative_values is None:
            raise ValueError(f"{self.label}: no derivative table")
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.values > ATOM_FLOOR, self.derivative_values / self.values, 0.0)

    @cached_property
    def _cdf(self) -> PanelCDF:
        return PanelCDF.build(self.grid, self.values)

    def cdf(self, v):
        return self._cdf(v)

    def quantile(self, t):
        return self._cdf.quantile(t)

    def quantile_table(self, resolution: int = 4097):
        return quantile_table(self, resolution)


def from_log_callable(logpdf, edges, score=None, kinds=None, order=16, label="",
                      renormalize=True) -> Density1D:
    """Tabulate a density given by its log on a panel grid and renormalize."""
    g = panel_grid(edges, order, kinds)
    with np.errstate(divide="ignore", under="ignore"):
        vals = np.exp(logpdf(g.points))
    mass = g.integrate(vals)
    c = float(np.log(mass)) if renormalize else 0.0
    lp = (lambda v, _f=logpdf, _c=c: _f(v) - _c)
    vals = vals / (mass if renormalize else 1.0)
    deriv = vals * score(g.points) if score is not None else None
    return Density1D(g, vals, deriv, label, lp, score, float(abs(mass - 1.0)))


# ---------------------------------------------------------------- families

def gaussian(var: float = 1.0, cut: float = 12.0, panel_width: float = 0.5, order: int = 16) -> Density1D:
    """Centered Gaussian truncated at +-cut standard deviations."""
    sd = float(np.sqrt(var))
    a = cut * sd
    tail = erf(cut / np.sqrt(2.0))
    lz = 0.5 * np.log(2 * np.pi * var) + np.log(tail)
    n = int(np.ceil(2 * a / (panel_width * sd)))
    return from_log_callable(lambda v: -0.5 * v * v / var - lz, np.linspace(-a, a, n + 1),
                             score=lambda v: -v / var, order=order, label=f"gaussian(var={var:g})",
                             renormalize=True)


def uniform(a: float, b: float, n_panels: int = 4, order: int = 16) -> Density1D:
    lc = -np.log(b - a)
    return from_log_callable(lambda v: lc + 0.0 * v, np.linspace(a, b, n_panels + 1),
                             score=lambda v: 0.0 * v, order=order, label=f"uniform[{a:g},{b:g}]")


# quadratic B-spline on knots -3,-1,1,3: M_2 = 1, M_4 = 13/5
BUMP_HALF_WIDTH = 3.0


def _bump_log(v):
    a = np.abs(v)
    with np.errstate(divide="ignore"):
        return np.where(a <= 1.0, np.log(np.maximum(3.0 - a * a, 0.0) / 8.0),
                        2.0 * np.log(np.maximum(3.0 - a, 0.0)) - np.log(16.0))


def _bump_score(v):
    a = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a <= 1.0, -2.0 * v / (3.0 - v * v), -2.0 * np.sign(v) / (3.0 - a))


def bump(R: float = 3.0, panels_per_unit: int = 2, grade: int = 10, order: int = 16) -> Density1D:
    """C^1 compactly supported quadratic spline, rescaled to unit second
    moment.  `R` is the half-width before rescaling; after rescaling the
    support is always [-3, 3], so R only enters the label."""
    if R <= 0:
        raise ValueError("R must be positive")
    e = np.concatenate([graded_edges(-3.0, -1.0, 2 * panels_per_unit, grade_left=grade),
                        np.linspace(-1.0, 1.0, 2 * panels_per_unit + 1),
                        graded_edges(1.0, 3.0, 2 * panels_per_unit, grade_right=grade)])
    return from_log_callable(_bump_log, np.unique(e), score=_bump_score, order=order,
                             label=f"bump(R={R:g})")


BUMP_KNOTS = (-3.0, -1.0, 1.0, 3.0)


def from_csv(path, order: int = 4) -> Density1D:
    """Two-column `v,f` file.  The tabulated points are joined by a monotone
    cubic; the derivative uses 4th-order central differences on uniform
    spacing (2nd order otherwise)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("density file must have two columns v,f")
    v, f = data[:, 0], data[:, 1]
    if np.any(np.diff(v) <= 0):
        raise ValueError("v column must be strictly increasing")
    if np.any(f < 0):
        raise ValueError("density values must be nonnegative")
    h = np.diff(v)
    if len(v) >= 5 and np.allclose(h, h[0], rtol=1e-9):
        d = np.gradient(f, v, edge_order=2)
        d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h[0])
    else:
        d = np.gradient(f, v, edge_order=2)
    pf, pd = PchipInterpolator(v, f), PchipInterpolator(v, d)
    g = panel_grid(v, order)
    vals = np.maximum(pf(g.points), 0.0)
    mass = g.integrate(vals)
    if not mass > 0:
        raise ValueError("density has zero mass")
    return Density1D(g, vals / mass, pd(g.points) / mass, label=f"file({path})",
                     drift=float(abs(mass - 1.0)))


# ---------------------------------------------------------------- functionals

@dataclass(frozen=True)
class MomentReport:
    k: float
    value: float
    label: str


def moment(f: Density1D, k: float) -> float:
    return f.grid.integrate(np.abs(f.points) ** k * f.values)


def moment_report(f: Density1D, k: float) -> MomentReport:
    return MomentReport(k, moment(f, k), f.label)


def _log_of(g, v):
    if isinstance(g, Density1D):
        if g.logpdf is not None:
            a, b = g.support
            with np.errstate(divide="ignore"):
                return np.where((v >= a) & (v <= b), g.logpdf(v), -np.inf)
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(g(v), 0.0))
    return g(v)          # a bare log-density callable


def gaussian_log(v):
    return -0.5 * v * v - 0.5 * LOG_2PI


def relative_entropy(f: Density1D, g, atom_floor: float = ATOM_FLOOR) -> float:
    """H(f|g) = int f log(f/g).  `g` may be a Density1D or a log-density
    callable (e.g. gaussian_log)."""
    live = f.values > atom_floor
    lf = f.log_values()[live]
    lg = _log_of(g, f.points[live])
    outside = 0.0
    if isinstance(g, Density1D):
        # f mass beyond the support of g may sit between quadrature nodes
        (a, b), (ga, gb) = f.support, g.support
        if a < ga:
            outside += float(f.cdf(np.array([ga]))[0])
        if b > gb:
            outside += 1.0 - float(f.cdf(np.array([gb]))[0])
    if outside > atom_floor or np.any(~np.isfinite(lg) | (lg < np.log(atom_floor))):
        warnings.warn(f"relative_entropy: {f.label} has mass where the reference vanishes")
        return float("inf")
    return float(np.dot(f.grid.weights[live] * f.values[live], lf - lg))


def fisher_information(f: Density1D, atom_floor: float = ATOM_FLOOR) -> float:
    """I(f) = int ((log f)')^2 f."""
    if f.score is None and f.derivative_values is None:
        raise ValueError(f"{f.label}: fisher information needs derivative values")
    live = f.values > atom_floor
    s = f.score_values()
    return float(np.dot(f.grid.weights[live] * f.values[live], s[live] ** 2))


def relative_fisher_gaussian(f: Density1D, check: bool = True) -> float:
    """I(f|gamma) = I(f) + M_2(f) - 2, cross-checked by direct quadrature."""
    val = fisher_information(f) + moment(f, 2) - 2.0
    if check:
        live = f.values > ATOM_FLOOR
        s = f.score_values()[live] + f.points[live]
        direct = float(np.dot(f.grid.weights[live] * f.values[live], s * s))
        if abs(direct - val) > 1e-6 * max(1.0, abs(val)):
            warnings.warn(f"relative Fisher paths disagree: {val} vs {direct}")
    return val


def pole_control(f: Density1D, N: int, q: float) -> float:
    """P_q = int f(v) (1 - v^2/N)^{-q/(q-2)}; inf when the local power of f
    at a pole does not beat the weight."""
    if q <= 2:
        raise ValueError("pole control needs q > 2")
    a, b = f.support
    rN = np.sqrt(N)
    if a < -rN - 1e-12 or b > rN + 1e-12:
        raise ValueError("support must lie in [-sqrt(N), sqrt(N)]")
    e = q / (q - 2.0)
    x = 1.0 - f.points ** 2 / N
    if b > rN - 1e-9 or a < -rN + 1e-9:
        # local exponent of f in the distance to the pole, from the last nodes
        for idx in ((-1, -2), (0, 1)):
            i, j = idx
            if f.values[i] > 0 and f.values[j] > 0 and x[i] < 1e-2:
                slope = np.log(f.values[i] / f.values[j]) / np.log(x[i] / x[j])
                if slope - e <= -1.0 + 1e-3:
                    return float("inf")
    return f.grid.integrate(f.values * x ** (-e))


def supnorm_via_fisher(f: Density1D) -> float:
    val = float(np.sqrt(fisher_information(f)))
    if f.values.max() > val + 1e-6:
        raise AssertionError(f"{f.label}: sup norm exceeds I^(1/2)")
    return val
