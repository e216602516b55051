import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kaclab.density1d import (bump, fisher_information, from_csv, gaussian, gaussian_log, moment,
                              pole_control, relative_entropy, relative_fisher_gaussian,
                              supnorm_via_fisher, uniform)

mpmath = pytest.importorskip("mpmath")
S3 = np.sqrt(3.0)


def _bump_mp(v):
    a = abs(v)
    if a <= 1:
        return (3 - a * a) / 8
    return (3 - a) ** 2 / 16 if a < 3 else mpmath.mpf(0)


def _bump_quad(fn):
    return float(mpmath.quad(fn, [-3, -1, 0, 1, 3]))


def test_gaussian_moments():
    g = gaussian()
    assert g.mass == pytest.approx(1.0, abs=1e-12)
    assert moment(g, 2) == pytest.approx(1.0, abs=1e-10)
    assert moment(g, 4) == pytest.approx(3.0, abs=1e-8)
    assert moment(uniform(-S3, S3), 2) == pytest.approx(1.0, abs=1e-10)


def test_relative_entropy_closed_forms():
    g = gaussian()
    assert relative_entropy(g, g) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(gaussian(2.0), gaussian_log) == pytest.approx((1 - np.log(2)) / 2, abs=1e-7)
    ref = -np.log(2 * S3) + 0.5 * np.log(2 * np.pi) + 0.5
    assert relative_entropy(uniform(-S3, S3), gaussian_log) == pytest.approx(ref, abs=1e-7)
    # Density1D reference: N(0, 1/2) against N(0, 1)
    assert relative_entropy(gaussian(0.5), g) == pytest.approx((0.5 - 1 + np.log(2)) / 2, abs=1e-7)
    # the truncated reference vanishes where a wider truncated Gaussian lives
    with pytest.warns(UserWarning):
        assert relative_entropy(gaussian(2.0), g) == np.inf


def test_fisher_closed_forms():
    assert fisher_information(gaussian()) == pytest.approx(1.0, abs=1e-7)
    assert fisher_information(gaussian(4.0)) == pytest.approx(0.25, abs=1e-7)
    assert relative_fisher_gaussian(gaussian()) == pytest.approx(0.0, abs=1e-7)
    assert relative_fisher_gaussian(gaussian(2.0)) == pytest.approx(0.5, abs=1e-6)


def test_supnorm_via_fisher():
    assert supnorm_via_fisher(gaussian()) == pytest.approx(1.0, abs=1e-7)
    assert supnorm_via_fisher(gaussian(4.0)) == pytest.approx(0.5, abs=1e-7)
    b = bump()
    assert b.values.max() <= supnorm_via_fisher(b)


def test_bump_against_mpmath():
    b = bump()
    assert b.mass == pytest.approx(1.0, abs=1e-12)
    assert moment(b, 2) == pytest.approx(1.0, abs=1e-12)
    assert moment(b, 4) == pytest.approx(2.6, abs=1e-12)
    ent = _bump_quad(lambda v: _bump_mp(v) * (mpmath.log(_bump_mp(v)) + v * v / 2 + mpmath.log(2 * mpmath.pi) / 2)
                     if _bump_mp(v) > 0 else 0)
    assert relative_entropy(b, gaussian_log) == pytest.approx(ent, abs=1e-10)
    fi = _bump_quad(lambda v: mpmath.diff(_bump_mp, v) ** 2 / _bump_mp(v) if abs(v) < 3 else 0)
    assert fisher_information(b) == pytest.approx(fi, rel=1e-9)


def test_pole_control_examples():
    u = uniform(-1, 1)
    ref = float(mpmath.quad(lambda v: 0.5 * (1 - v * v / 4) ** -2, [-1, 1]))
    assert pole_control(u, 4, 4.0) == pytest.approx(ref, rel=1e-12)
    assert pole_control(u, 10 ** 6, 3.0) == pytest.approx(1.0, abs=1e-5)
    b = bump()
    for N, q in [(16, 3.0), (64, 3.5)]:
        assert pole_control(b, N, q) <= (1 - 9 / N) ** (-q / (q - 2))
    with pytest.raises(ValueError):
        pole_control(u, 4, 2.0)


def test_from_csv_roundtrip(tmp_path):
    v = np.linspace(-8, 8, 1601)
    f = np.exp(-v * v / 2) / np.sqrt(2 * np.pi)
    p = tmp_path / "g.csv"
    np.savetxt(p, np.column_stack([v, f]), delimiter=",", header="v,f", comments="")
    d = from_csv(p)
    assert d.mass == pytest.approx(1.0, abs=1e-8)
    assert moment(d, 2) == pytest.approx(1.0, abs=1e-4)
    assert fisher_information(d) == pytest.approx(1.0, abs=1e-3)


def test_from_csv_rejects_bad(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("v,f\n0,1\n-1,1\n")
    with pytest.raises(ValueError):
        from_csv(p)


_family = st.one_of(
    st.floats(0.3, 4.0).map(gaussian),
    st.floats(0.2, 3.0).map(lambda a: uniform(-a, a)),
    st.just(bump()),
)


@given(_family, _family)
@settings(max_examples=25, deadline=None)
def test_gibbs(f, g):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = relative_entropy(f, g)
    assert h >= -1e-10


@given(_family)
@settings(max_examples=25, deadline=None)
def test_cauchy_schwarz_and_relative_fisher(f):
    assert moment(f, 1) <= np.sqrt(moment(f, 2)) + 1e-12
    if f.score is not None and "uniform" not in f.label:
        assert relative_fisher_gaussian(f) >= -1e-10
