"""Batch front end.

    python -m kaclab verify --family bump --N 16,32,64
    python -m kaclab zcurve --family gaussian --N 8,32
    python -m kaclab transport --family bump --N 64
    python -m kaclab proptest --seed 42

Settings come from, in decreasing priority: command-line flags, the
KACLAB_OUT environment variable (output directory only), a `[run]` section of
the file given by --config, and built-in defaults.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import density1d as d1
from .harness import (ParameterError, check_parameters, holder_type_check, verify_chain,
                      write_chain_csv)
from .sphere import SphereDensity
from .transport import (distorted_hwi_check, hm_lift_bound, hwi_check, pointwise_wq_inequality_check,
                        w1_sphere_bound, wasserstein_exact)

ENV_OUT = "KACLAB_OUT"
FAMILIES = ("uniform", "bump", "gaussian", "file")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    family: str = "bump"
    R: float = 3.0
    var: float = 1.0
    path: str = ""
    Ns: tuple = (16, 32, 64)
    k: float = 4.0
    q: float = 3.0
    p: float = 1.5
    beta: float = 0.5
    h: float = 0.005
    tol: float = 1e-8
    out: str = "out"
    seed: int = 42
    jobs: int = 1

    def validate(self, need_params: bool = True, min_N: int = 3) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.family == "file" and not self.path:
            raise ConfigError("family 'file' needs --path")
        if not self.Ns:
            raise ConfigError("empty N list")
        bad = [n for n in self.Ns if n < min_N]
        if bad:
            raise ConfigError(f"N={bad[0]} rejected: minimum N is {min_N}")
        if need_params:
            try:
                check_parameters(self.k, self.q, self.p, self.beta)
            except ParameterError as exc:
                raise ConfigError(str(exc)) from exc


def _parse_Ns(s):
    try:
        return tuple(int(x) for x in str(s).replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"bad N list {s!r}") from exc


_CASTS = {"family": str, "R": float, "var": float, "path": str, "Ns": _parse_Ns, "k": float,
          "q": float, "p": float, "beta": float, "h": float, "tol": float, "out": str,
          "seed": int, "jobs": int}


def load_config(path) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "run" not in cp:
        raise ConfigError(f"config {path} has no [run] section")
    out = {}
    for key, raw in cp["run"].items():
        key = "Ns" if key == "N" else key
        if key not in _CASTS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _CASTS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    vals = {}
    if args.config:
        vals.update(load_config(args.config))
    if environ.get(ENV_OUT):
        vals["out"] = environ[ENV_OUT]
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            vals[f.name] = _CASTS[f.name](v) if f.name == "Ns" else v
    return replace(RunConfig(), **vals)


# ---------------------------------------------------------------- families

def base_density(cfg: RunConfig):
    if cfg.family == "bump":
        return d1.bump(cfg.R)
    if cfg.family == "gaussian":
        return d1.gaussian(cfg.var)
    if cfg.family == "file":
        return d1.from_csv(cfg.path)
    return None


def sphere_density(cfg: RunConfig, N: int) -> SphereDensity:
    f = base_density(cfg)
    if f is None:
        return SphereDensity.uniform(N)
    return SphereDensity.conditioned_tensorization(f, N, h=cfg.h)


def _fmt(x):
    if x is None or not np.isfinite(x):
        return "undefined" if x is None else f"{x}"
    return f"{x:.12e}"


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _svg(fig, path):
    import matplotlib
    matplotlib.rcParams["svg.hashsalt"] = "kaclab"
    fig.savefig(path, format="svg", metadata={"Date": None})


def _figure():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


# ---------------------------------------------------------------- commands

def _verify_one(task):
    cfg, N = task
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return verify_chain(sphere_density(cfg, N), cfg.k, cfg.q, cfg.p, cfg.beta, tol=cfg.tol)


def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = _map(_verify_one, [(cfg, N) for N in cfg.Ns], cfg.jobs)
    write_chain_csv(reports, out / "chain.csv")
    with open(out / "epsilon.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "H_N", "partial", "ratio", "epsilon_hat"])
        for r in reports:
            w.writerow([r.N, _fmt(r.H_N), _fmt(r.partial), _fmt(r.ratio), _fmt(r.epsilon_hat)])
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    pts = [(r.N, r.epsilon_hat) for r in reports if r.epsilon_hat is not None and r.epsilon_hat > 0]
    if pts:
        ax.loglog(*zip(*pts), "o-")
    else:
        ax.text(0.5, 0.5, "epsilon_hat undefined", ha="center", transform=ax.transAxes)
    ax.set_xlabel("N")
    ax.set_ylabel("epsilon_hat")
    ax.set_title(cfg.family)
    fig.tight_layout()
    _svg(fig, out / "epsilon.svg")
    plt.close(fig)
    rc = 0
    for r in reports:
        ratio = "undefined (H_N below resolution)" if r.ratio is None else f"{r.ratio:.6f}"
        print(f"N={r.N} H_N={r.H_N:.6e} ratio={ratio}")
        for s in r.steps:
            if s.skipped:
                print(f"  skipped {s.name}: {s.note}")
            elif not s.passed:
                print(f"  FAILED {s.name}: lhs={s.lhs:.6e} rhs={s.rhs:.6e}", file=sys.stderr)
                rc = 1
    return rc


def _zcurve_one(task):
    cfg, N = task
    F = sphere_density(cfg, N)
    if F.is_uniform:
        raise ConfigError("zcurve needs a base density (uniform has no normalization curve)")
    return F.zcurve


def cmd_zcurve(cfg: RunConfig) -> int:
    cfg.validate(need_params=False, min_N=3)
    if cfg.family == "uniform":
        raise ConfigError("zcurve needs a base density; family 'uniform' has none")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    curves = _map(_zcurve_one, [(cfg, N) for N in cfg.Ns], cfg.jobs)
    gauss = cfg.family == "gaussian"
    for c in curves:
        with open(out / f"zcurve_N{c.N}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "log_z", "lambda"] + (["log_z_minus_closed_form"] if gauss else []))
            for u, lz, la in c.rows():
                row = [f"{u:.6f}", _fmt(lz), _fmt(la)]
                if gauss:
                    cf = -0.5 * c.N * np.log(2 * np.pi * cfg.var) - u / (2 * cfg.var)
                    row.append(_fmt(lz - cf))
                w.writerow(row)
    with open(out / "zcurve_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "sigma_sq", "sup_abs_lambda", "drift"])
        for c in curves:
            w.writerow([c.N, _fmt(c.sigma_sq), _fmt(c.sup_abs_lambda), _fmt(c.drift)])
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for c in curves:
        x = (c.u_grid - c.N) / np.sqrt(c.N * c.sigma_sq)
        ax.plot(x, c.lam, label=f"N={c.N}")
    ax.set_xlabel("(u - N) / sqrt(N Sigma^2)")
    ax.set_ylabel("lambda_N")
    ax.legend()
    fig.tight_layout()
    _svg(fig, out / "zcurve.svg")
    plt.close(fig)
    for c in curves:
        print(f"N={c.N} sup|lambda|={c.sup_abs_lambda:.6e}")
    return 0


TRANSPORT_COLUMNS = ["family", "N", "k", "check", "q", "exact", "bound", "slack", "pass"]


def _transport_one(task):
    cfg, N = task
    from .extension import get_extension
    F = sphere_density(cfg, N)
    pi1, ext = F.marginal1, get_extension(F).density
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        w1r = w1_sphere_bound(F, pi1, ext)
        rows.append(("w1_sphere_bound", 1.0, w1r.exact, w1r.bounds[0][1]))
        w1 = w1r.exact
        for q in sorted({2.0, float(cfg.q)}):
            r = hm_lift_bound(pi1, ext, q, cfg.k, w1=w1)
            rows.append((f"hm_lift_k{cfg.k:g}", q, r.exact, r.bounds[0][1]))
        try:
            h = hwi_check(pi1, ext, w2=wasserstein_exact(pi1, ext, 2))
            rows.append(("hwi", 2.0, h.lhs, h.rhs))
        except ValueError:
            pass
        try:
            h = distorted_hwi_check(F, cfg.q, pi1, ext)
            rows.append(("distorted_hwi", cfg.q, h.lhs, h.rhs))
        except ValueError:
            pass
    return N, rows


def cmd_transport(cfg: RunConfig) -> int:
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = _map(_transport_one, [(cfg, N) for N in cfg.Ns], cfg.jobs)
    rc = 0
    with open(out / "transport.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRANSPORT_COLUMNS)
        for N, rows in results:
            for name, q, exact, bound in rows:
                ok = bound - exact >= -cfg.tol
                rc |= 0 if ok else 1
                w.writerow([cfg.family, N, f"{cfg.k:g}", name, f"{q:g}", _fmt(exact), _fmt(bound),
                            _fmt(bound - exact), "true" if ok else "false"])
                print(f"N={N} {name} q={q:g} exact={exact:.6e} bound={bound:.6e}")
    return rc


def proptest(seed: int = 42, n_holder: int = 1000, n_pointwise: int = 100000, tol: float = 1e-12):
    """Randomized Hölder-type lemma and pointwise W_q inequality; returns
    (worst holder slack, worst pointwise slack, violations)."""
    rng = np.random.default_rng(seed)
    worst_h = np.inf
    viol = 0
    for _ in range(n_holder):
        m = int(rng.integers(1, 5))
        N = int(rng.integers(1, 51))
        p = 1.0 / rng.dirichlet(np.ones(m + 1))[:m]
        a = rng.exponential(size=(m, N)) ** rng.uniform(0.2, 3.0)
        s = holder_type_check(a, p)
        scale = max(1.0, float(np.sum(np.prod(a ** (1 / p)[:, None], axis=0))))
        worst_h = min(worst_h, s / scale)
        viol += s < -tol * scale
    n = n_pointwise
    x = rng.standard_normal(n) * rng.uniform(0.1, 10.0, n)
    y = rng.standard_normal(n) * rng.uniform(0.1, 10.0, n)
    k = rng.uniform(2.0, 8.0, n)
    q = 1.0 + (k - 1.0) * rng.uniform(0.0, 1.0, n)
    R = 1.0 + rng.exponential(3.0, n)
    s = pointwise_wq_inequality_check(x, y, R, q, k)
    scale = np.maximum(1.0, np.abs(x - y) ** q)
    viol += int(np.sum(s < -tol * scale))
    return float(worst_h), float(np.min(s / scale)), int(viol)


def cmd_proptest(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    h, pw, viol = proptest(cfg.seed)
    with open(out / "proptest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "holder_min_rel_slack", "pointwise_min_rel_slack", "violations"])
        w.writerow([cfg.seed, _fmt(h), _fmt(pw), viol])
    print(f"seed={cfg.seed} holder={h:.3e} pointwise={pw:.3e} violations={viol}")
    return 0 if viol == 0 else 1


COMMANDS = {"verify": cmd_verify, "zcurve": cmd_zcurve, "transport": cmd_transport,
            "proptest": cmd_proptest}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kaclab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--family", choices=FAMILIES)
        sp.add_argument("--R", type=float)
        sp.add_argument("--var", type=float)
        sp.add_argument("--path")
        sp.add_argument("--N", dest="Ns")
        sp.add_argument("--k", type=float)
        sp.add_argument("--q", type=float)
        sp.add_argument("--p", type=float)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--h", type=float)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--jobs", type=int)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
