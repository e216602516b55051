"""Euclidean extension F~_N(v) = F_N(sqrt N v/|v|) gamma_N(v) and the
identities relating its marginal to the sphere marginal.

Under F~_N the radius |V| is chi_N distributed and independent of the
direction, so V_1 = Y X / sqrt N with Y ~ chi_N and X ~ Pi_1(F_N).  The
first marginal is therefore

    Pi_1(F~)(v) = int p_Y(y) (sqrt N / y) Pi_1(F)(sqrt N v / y) dy,

which is the x-integral of the extension lemma after y = sqrt N v / x.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .density1d import Density1D, gaussian_log, moment, relative_entropy
from .numerics import PLAIN, SQRT_LEFT, SQRT_RIGHT, gamma_ratio_factor, log_sphere_area, panel_grid
from .sphere import SphereDensity, spherical_entropy

LOG_2PI = float(np.log(2 * np.pi))


def log_chi_pdf(y, N: int):
    with np.errstate(divide="ignore"):
        return log_sphere_area(N) - 0.5 * N * LOG_2PI + (N - 1) * np.log(y) - 0.5 * y * y


@lru_cache(maxsize=256)
def chi_window(N: int, depth: float = 75.0):
    """[y_lo, y_hi] outside which log p_Y is `depth` below its maximum."""
    mode = np.sqrt(N - 1.0)
    top = float(log_chi_pdf(mode, N))
    g = lambda y: float(log_chi_pdf(y, N)) - top + depth
    lo = brentq(g, 1e-300 if g(1e-300) < 0 else mode * 1e-12, mode) if g(1e-300) < 0 else 0.0
    hi = brentq(g, mode, mode + 2 * np.sqrt(2 * depth) + 10)
    return lo, hi


def _subdivide(breaks, width):
    e = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(np.ceil((b - a) / width)))
        e.extend(np.linspace(a, b, n + 1)[1:])
    return np.array(e)


@dataclass(frozen=True, eq=False)
class ExtensionMarginal:
    density: Density1D
    parent: SphereDensity = field(repr=False)
    route: str = "y"
    drift: float = 0.0


def _structure(F: SphereDensity):
    p = F.marginal1
    x_max = p.support[1]
    e = p.grid.edges
    knots = np.unique(np.abs(e[np.abs(e) > 0]))
    pole = p.grid.kinds[-1] == SQRT_RIGHT
    return p, x_max, knots, pole


def _route_y(F, v, order=16, width=0.5):
    p, x_max, knots, pole = _structure(F)
    N = F.N
    rN = np.sqrt(N)
    y_lo, y_hi = chi_window(N)
    out = np.zeros(len(v))
    for i, vi in enumerate(v):
        a = abs(vi)
        y_min = max(y_lo, rN * a / x_max)
        if y_min >= y_hi:
            continue
        br = rN * a / knots if a > 0 else np.array([])
        br = np.unique(np.concatenate([[y_min, y_hi], br[(br > y_min) & (br < y_hi)]]))
        e = _subdivide(br, width)
        kinds = np.full(len(e) - 1, PLAIN)
        if pole and rN * a / x_max >= y_lo:
            kinds[0] = SQRT_LEFT
        g = panel_grid(e, order, kinds)
        y = g.points
        with np.errstate(under="ignore"):
            val = np.exp(log_chi_pdf(y, N)) * (rN / y) * p(rN * vi / y)
        out[i] = np.dot(g.weights, val)
    return out


def _route_x(F, v, order=16, width=0.5):
    p, x_max, knots, pole = _structure(F)
    N = F.N
    rN = np.sqrt(N)
    y_lo, y_hi = chi_window(N)
    logC = log_sphere_area(N) + 0.5 * N * np.log(N) - 0.5 * N * LOG_2PI
    out = np.zeros(len(v))
    for i, vi in enumerate(v):
        a = abs(vi)
        if a == 0:
            out[i] = _route_y(F, [0.0], order, width)[0]
            continue
        x0 = rN * a / y_hi
        x1 = min(rN * a / y_lo, x_max) if y_lo > 0 else x_max
        if x0 >= x1:
            continue
        br = np.unique(np.concatenate([[x0, x1], knots[(knots > x0) & (knots < x1)]]))
        # subdivide so each panel spans at most `width` in the y variable
        e = [br[0]]
        for s0, s1 in zip(br[:-1], br[1:]):
            n = max(1, int(np.ceil(rN * a * (1 / s0 - 1 / s1) / width)))
            e.extend(np.linspace(s0, s1, n + 1)[1:])
        e = np.array(e)
        kinds = np.full(len(e) - 1, PLAIN)
        if pole and x1 >= x_max:
            kinds[-1] = SQRT_RIGHT
        g = panel_grid(e, order, kinds)
        x = g.points
        lk = logC + (N - 1) * np.log(a) - N * np.log(x) - N * a * a / (2 * x * x)
        with np.errstate(under="ignore"):
            out[i] = np.dot(g.weights, p(np.sign(vi) * x) * np.exp(lk))
    return out


def extension_grid(F: SphereDensity, width: float = 0.2, order: int = 16):
    p, x_max, _, _ = _structure(F)
    _, y_hi = chi_window(F.N)
    c = min(np.sqrt(F.N) + 12.0, x_max * y_hi / np.sqrt(F.N))
    core = min(c, 10.0)
    e = np.linspace(-core, core, int(np.ceil(2 * core / width)) + 1)
    if c > core:
        tail = np.linspace(core, c, int(np.ceil((c - core) / 1.0)) + 1)[1:]
        e = np.concatenate([-tail[::-1], e, tail])
    return panel_grid(e, order)


def extension_marginal1(F: SphereDensity, route: str = "y", grid=None) -> ExtensionMarginal:
    """Pi_1(F~_N) tabulated on a panel grid; route 'y' or 'x'."""
    g = extension_grid(F) if grid is None else grid
    vals = (_route_y if route == "y" else _route_x)(F, g.points)
    vals = np.maximum(vals, 0.0)
    mass = g.integrate(vals)
    d = Density1D(g, vals / mass, label=f"ext[{F.label},N={F.N}]", drift=float(abs(mass - 1)))
    return ExtensionMarginal(d, F, route, float(abs(mass - 1)))


def route_agreement(F: SphereDensity, v=None) -> float:
    """Max |route y - route x| over v nodes."""
    if v is None:
        v = extension_grid(F).points[::7]
    return float(np.max(np.abs(_route_y(F, v) - _route_x(F, v))))


def extension_moment_identity_check(F: SphereDensity, k: float, ext: ExtensionMarginal | None = None) -> float:
    """|M_k(Pi_1 F~) - factor(N,k) M_k(Pi_1 F)| / M_k(Pi_1 F)."""
    ext = ext or F.__dict__.get("_ext") or _cache_ext(F)
    mk = moment(F.marginal1, k)
    return abs(moment(ext.density, k) - gamma_ratio_factor(F.N, k) * mk) / mk


def _cache_ext(F):
    e = extension_marginal1(F)
    F.__dict__["_ext"] = e
    return e


def get_extension(F: SphereDensity) -> ExtensionMarginal:
    return F.__dict__.get("_ext") or _cache_ext(F)


def radial_mass(N: int, order: int = 16) -> float:
    """int |S^{N-1}| r^{N-1} e^{-r^2/2} (2 pi)^{-N/2} dr by quadrature."""
    lo, hi = chi_window(N)
    g = panel_grid(_subdivide(np.array([lo, hi]), 0.5), order)
    return g.integrate(np.exp(log_chi_pdf(g.points, N)))


def extension_entropy(F: SphereDensity) -> float:
    """H(F~_N | gamma_N) by the radial-angular split: radial mass (by
    quadrature) times the angular entropy, the latter from the two-marginal
    table as N E[log f(w_1)] - log Z_N."""
    if F.is_uniform:
        return 0.0
    m = F.marginal2
    lf = F.base.logpdf
    ang = F.N * 0.5 * m.integrate(lambda a, b: lf(a) + lf(b)) - F.log_Z
    return radial_mass(F.N) * ang


def extension_entropy_consistency(F: SphereDensity) -> float:
    return abs(extension_entropy(F) - spherical_entropy(F))


def euclidean_superadditivity_check(F: SphereDensity, ext: ExtensionMarginal | None = None) -> float:
    """H_N - N H(Pi_1(F~)|gamma); nonnegative by the superadditivity lemma."""
    ext = ext or get_extension(F)
    return spherical_entropy(F) - F.N * relative_entropy(ext.density, gaussian_log)
