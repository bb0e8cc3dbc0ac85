import math

import numpy as np
import pytest
from scipy import integrate as si

from pfnelson.dispersion import (
    CutoffProfile,
    d_of_z,
    d_plus,
    h_rho,
    h_rho_sharp,
    negative_mass_data,
    running_mass_sharp,
    weighted_norm,
)
from pfnelson.errors import DivergentIntegral, InvalidInput, NoRoot, OnBranchCut

BAND = CutoffProfile.sharp(1.0, 2.0)


def test_weighted_norms_elementary():
    assert weighted_norm(BAND, 2) == pytest.approx(4 * math.pi, rel=1e-12)
    assert weighted_norm(BAND, 0) == pytest.approx(28 * math.pi / 3, rel=1e-12)


def test_weighted_norm_normalization_squared():
    cut = CutoffProfile.sharp(1.0, 2.0, normalization=(2 * math.pi) ** -1.5)
    assert weighted_norm(cut, 2) == pytest.approx(4 * math.pi / (2 * math.pi) ** 3, rel=1e-12)


def test_infrared_divergence():
    with pytest.raises(DivergentIntegral):
        weighted_norm(CutoffProfile.sharp(0.0, 2.0), 3)


def test_cutoff_validation():
    with pytest.raises(InvalidInput):
        CutoffProfile.sharp(2.0, 1.0)
    with pytest.raises(InvalidInput):
        CutoffProfile.sharp(1.0, 2.0, d=2)


def test_tabulated_matches_sharp_interior():
    grid = np.linspace(1.0, 2.0, 11)
    tab = CutoffProfile.tabulated(grid, np.ones_like(grid))
    assert weighted_norm(tab, 2) == pytest.approx(4 * math.pi, rel=1e-10)


def test_d_of_z_free_and_far():
    assert d_of_z(BAND, 1.0, 0.0, -3.0) == 1.0
    assert abs(d_of_z(BAND, 1.0, 1.0, -1e6) - 1.0) <= 1e-3


def test_d_of_z_branch_cut():
    with pytest.raises(OnBranchCut):
        d_of_z(BAND, 1.0, 1.0, 2.0)


def test_d_of_z_approaches_boundary_value():
    s = 2.0
    dp = d_plus(BAND, 1.0, 1.0, s).D_plus
    near = d_of_z(BAND, 1.0, 1.0, complex(s, 1e-3))
    assert abs(near - dp) <= 1e-2 * abs(dp)


def test_d_plus_at_zero_is_effective_mass():
    res = d_plus(BAND, 1.0, 1.0, 0.0)
    assert res.D_plus == pytest.approx(1 + 8 * math.pi / 3, rel=1e-10)
    assert res.D_plus.imag == 0.0


def test_d_plus_conjugate_pair_and_jump():
    s = 2.5
    res = d_plus(BAND, 1.0, 1.0, s)
    assert res.D_minus == res.D_plus.conjugate()
    # D₊ - D₋ = iπ α² c_d |S²| φ̂² √s
    jump = 1j * math.pi * (2 / 3) * 4 * math.pi * math.sqrt(s)
    assert abs((res.D_plus - res.D_minus) - jump) <= 1e-10


def test_d_plus_far_field():
    assert abs(d_plus(BAND, 1.0, 1.0, 1e6).D_plus.real - 1.0) <= 1e-3


def test_h_rho_closed_form_values():
    assert h_rho_sharp(1.0, 2.0, 0.0) == -2.0
    assert h_rho_sharp(1.0, 1.0, 3.0) == 0.0
    assert h_rho_sharp(1.0, 2.0, 1.0) == -math.inf
    assert h_rho_sharp(1.0, 2.0, 4.0) == math.inf


@pytest.mark.parametrize("s", [0.2, 2.0, 3.1, 6.0])
def test_h_rho_quadrature_matches_closed_form(s):
    assert h_rho(BAND, s) == pytest.approx(h_rho_sharp(1.0, 2.0, s), rel=1e-6)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.5, 3.0])
def test_running_mass_consistent_with_d_plus(k):
    rm = running_mass_sharp(1.0, 1.0, 1.0, 2.0, k)
    dp = d_plus(BAND, 1.0, 1.0, k * k).D_plus
    assert abs(rm - dp) <= 1e-6 * abs(dp)


def test_running_mass_limits():
    assert running_mass_sharp(1.0, 1.0, 1.0, 2.0, 0.0) == pytest.approx(1 + 8 * math.pi / 3)
    assert running_mass_sharp(2.5, 0.0, 1.0, 2.0, 1.3) == 2.5
    # imaginary part linear in |k| inside the band
    assert running_mass_sharp(1.0, 1.0, 1.0, 2.0, 1.5).imag == pytest.approx(4 * math.pi ** 2 / 3 * 1.5)


def test_effective_mass_monotone_in_alpha():
    vals = [d_plus(BAND, 1.0, a, 0.0).D_plus.real for a in (0.0, 0.5, 1.0, 2.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_dispersion_bounded_away_from_zero_on_band():
    s = np.linspace(1.05, 3.95, 40)
    assert min(abs(d_plus(BAND, 1.0, 1.0, x).D_plus) for x in s) > 0


def test_negative_mass_root_and_gamma():
    m = -5.0
    E, gamma = negative_mass_data(BAND, m, 1.0)
    assert abs(d_of_z(BAND, m, 1.0, -E * E)) <= 1e-8
    # independent quadrature of α² c_d ∫ φ̂²/(E² + ω²)² dk
    val, _ = si.quad(lambda r: 4 * math.pi * r * r / (E * E + r * r) ** 2, 1.0, 2.0,
                     epsabs=1e-14, epsrel=1e-13)
    assert 1 / gamma ** 2 == pytest.approx((2 / 3) * val, rel=1e-9)


def test_negative_mass_outside_interval():
    with pytest.raises(NoRoot):
        negative_mass_data(BAND, -9.0, 1.0)  # below -(2/3)·4π
    with pytest.raises(NoRoot):
        negative_mass_data(BAND, 0.5, 1.0)


def test_negative_mass_root_grows_as_m_tends_to_zero():
    E = [negative_mass_data(BAND, m, 1.0)[0] for m in (-6.0, -2.0, -0.5, -0.05)]
    assert all(b > a for a, b in zip(E, E[1:]))
