import numpy as np
import pytest

from conftest import bump_F, ext, gauss_F, uniform_F
from kaclab.density1d import gaussian_log, moment
from kaclab.extension import (chi_window, euclidean_superadditivity_check, extension_entropy,
                              extension_entropy_consistency, extension_moment_identity_check,
                              radial_mass, route_agreement)
from kaclab.numerics import gamma_ratio_factor
from kaclab.sphere import spherical_entropy


@pytest.mark.parametrize("F", [uniform_F(8), uniform_F(64), gauss_F(32)], ids=["U8", "U64", "G32"])
def test_extension_of_uniform_is_gaussian(F):
    d = ext(F).density
    x = np.linspace(-8, 8, 321)
    assert np.max(np.abs(d(x) - np.exp(gaussian_log(x)))) < 1e-6


@pytest.mark.parametrize("N", [8, 32, 128, 512])
def test_extension_kernel_normalization(N):
    assert ext(bump_F(N)).drift < 1e-6


def test_moment_identity_examples():
    F = bump_F(32)
    assert moment(ext(F).density, 2) == pytest.approx(moment(F.marginal1, 2), abs=1e-8)
    assert extension_moment_identity_check(F, 2) < 1e-8
    assert gamma_ratio_factor(32, 4) == pytest.approx(1.0625, rel=1e-14)
    assert extension_moment_identity_check(F, 4) < 1e-6
    # Uniform N=8: M_4(gamma) = 3 = 1.25 * M_4(Pi_1), M_4(Pi_1) by quadrature
    U = uniform_F(8)
    m4 = moment(U.marginal1, 4)
    assert m4 == pytest.approx(3 * 8 / 10, rel=1e-10)
    assert moment(ext(U).density, 4) == pytest.approx(gamma_ratio_factor(8, 4) * m4, rel=1e-8)


def test_two_routes_agree():
    assert route_agreement(bump_F(8)) < 1e-6
    assert route_agreement(uniform_F(8)) < 1e-6


def test_chi_window_and_radial_mass():
    lo, hi = chi_window(64)
    assert lo < np.sqrt(63) < hi
    assert radial_mass(64) == pytest.approx(1.0, abs=1e-12)


def test_entropy_consistency():
    assert extension_entropy(uniform_F(16)) == 0.0
    assert extension_entropy_consistency(gauss_F(16)) < 1e-6
    assert extension_entropy_consistency(bump_F(64)) < 1e-6


def test_superadditivity():
    assert euclidean_superadditivity_check(uniform_F(16)) == pytest.approx(0.0, abs=1e-9)
    slacks = [euclidean_superadditivity_check(bump_F(N)) for N in (16, 64, 256)]
    assert min(slacks) >= 0
    # recorded sweep observation: slack per particle stays bounded
    assert max(s / N for s, N in zip(slacks, (16, 64, 256))) < 0.01
    assert spherical_entropy(bump_F(16)) > slacks[0]
