import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bump_F, chain, gauss_F, uniform_F
from kaclab.harness import (ParameterError, c_p, check_parameters, correction_bound_check,
                            correction_constants, entropy_identity, holder_type_check, l_N,
                            write_chain_csv)

mpmath = pytest.importorskip("mpmath")


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0])
def test_c_p_against_mpmath(p):
    r = mpmath.mpf(p) / (p - 1)
    ref = mpmath.quad(lambda x: abs(mpmath.log(1 - x * x)) ** r, [-1, 0, 1]) ** (1 / r)
    assert c_p(p) == pytest.approx(float(ref), rel=1e-10)


def test_l_N_closed_forms():
    assert l_N(100, 1.0) ** 2 == pytest.approx(0.01 * np.log(100) ** 2, rel=1e-14)
    assert l_N(100, 1.0) == pytest.approx(0.4605, abs=2e-4)
    assert l_N(100, 1e-3) ** 2 == pytest.approx(4 * np.exp(-2), rel=1e-14)
    # brute force sup of x log(x)^2 on [0, eps]
    for N, b in [(50, 0.5), (7, 0.3), (1000, 0.9)]:
        e = N ** -b
        x = np.linspace(1e-12, e, 200001)
        assert l_N(N, b) ** 2 == pytest.approx(np.max(x * np.log(x) ** 2), rel=1e-6)
    c = correction_constants(1.5, 100, 1.0)
    assert c.eps == pytest.approx(0.01) and np.isfinite(c.C_p)


def test_parameter_ranges():
    check_parameters(4, 3, 1.5, 0.5)
    with pytest.raises(ParameterError, match="2<q<k"):
        check_parameters(4, 5, 1.5, 0.5)
    with pytest.raises(ParameterError, match="0<beta<k/2-1"):
        check_parameters(4, 3, 1.5, 1.0)
    with pytest.raises(ParameterError, match=r"1<p<min\(\(k\+1\)/3, k/2\)"):
        check_parameters(4, 3, 1.7, 0.5)


@pytest.mark.parametrize("F", [uniform_F(16), gauss_F(16), bump_F(64)], ids=["U16", "G16", "B64"])
def test_entropy_identity(F):
    r = entropy_identity(F)
    assert r.gap < 1e-6
    if F.is_uniform or F.label.startswith("gaussian"):
        assert abs(r.direct) < 1e-6 and abs(r.via_line) < 1e-6


def test_correction_bounds():
    assert correction_bound_check(gauss_F(64), 4, 0.5, 1.5, "i").slack >= -1e-8
    assert correction_bound_check(uniform_F(32), 4, 0.5, 1.5, "ii").slack >= -1e-8
    slacks = []
    for N in (16, 32, 64, 128, 256, 512):
        s = correction_bound_check(bump_F(N), 4, 0.5, 1.5, "i").slack
        assert s >= -1e-8
        slacks.append(s)
    assert slacks[-1] < slacks[0]


def test_holder_examples():
    rng = np.random.default_rng(1)
    a = rng.exponential(size=(1, 20))
    assert holder_type_check(a, [2.0]) >= -1e-12
    a = np.tile(rng.exponential(size=(3, 1)), (1, 9))
    assert holder_type_check(a, [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        holder_type_check(a, [2.0, 2.0, 2.0])


@given(st.integers(1, 4), st.integers(1, 50), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=200, deadline=None)
def test_holder_random(m, N, seed):
    rng = np.random.default_rng(seed)
    p = 1.0 / rng.dirichlet(np.ones(m + 1))[:m]
    a = rng.exponential(size=(m, N))
    scale = max(1.0, np.sum(np.prod(a ** (1 / p)[:, None], axis=0)))
    assert holder_type_check(a, p) >= -1e-12 * scale


def test_chain_gaussian_ratio_undefined():
    r = chain("gaussian", 32)
    assert r.passed and r.ratio is None and r.epsilon_hat is None


def test_chain_bump_64_all_pass():
    r = chain("bump", 64)
    assert r.passed and not any(s.skipped for s in r.steps)
    assert 0 < r.epsilon_hat < 1
    names = [s.name for s in r.steps]
    assert names[0] == "cll_factor2" and "end_to_end_i" in names and "end_to_end_ii" in names


def test_chain_invariants():
    for fam, N in [("bump", 16), ("bump", 64), ("uniform", 16), ("gaussian", 32)]:
        r = chain(fam, N)
        assert 0 <= r.partial + 1e-12 <= 2 * r.H_N + 1e-8 + 1e-12
        assert all(s.slack >= -s.tol for s in r.steps if not s.skipped)


def test_chain_csv(tmp_path):
    p = tmp_path / "c.csv"
    write_chain_csv([chain("bump", 16), chain("uniform", 16)], p)
    rows = list(csv.DictReader(open(p)))
    assert list(rows[0]) == ["family", "N", "k", "q", "p", "beta", "step", "lhs", "rhs", "slack", "pass"]
    assert {r["pass"] for r in rows} <= {"true", "skip"}
