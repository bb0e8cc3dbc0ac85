import math

import pytest

from pfnelson.dispersion import CutoffProfile
from pfnelson.errors import DenominatorVanishes, MassTooSmall, OverlappingSupports
from pfnelson.gse import (
    ModelParams,
    asymptotic_band,
    effective_mass,
    energy_breakdown,
    epsilon_family,
    g_asymptotics,
    gaussian_smear,
    ground_energy,
    ground_energy_multi,
    ground_energy_sharp,
    ir_criterion,
    scl_constant,
)

BAND = CutoffProfile.sharp(1.0, 2.0)


def test_effective_mass_values():
    assert effective_mass(BAND, ModelParams(m=1, alpha=1)) == pytest.approx(1 + 8 * math.pi / 3)
    assert effective_mass(BAND, ModelParams(m=2.5, alpha=0)) == 2.5
    assert effective_mass(BAND, ModelParams(m=2.5, alpha=1, eps_self=0)) == 2.5


def test_ground_energy_free():
    assert ground_energy(BAND, ModelParams(m=1, alpha=0)) == 0.0


def test_single_integral_form_matches_nested_quadrature():
    # the single-integral arctan form reproduces the unit-normalized band
    g_nested = ground_energy(BAND, ModelParams(m=9, alpha=1))
    g_single = ground_energy_sharp(1.0, 2.0, 9.0)
    assert g_single == pytest.approx(g_nested, rel=1e-6)


def test_sharp_form_empty_band_and_mass_guard():
    assert ground_energy_sharp(1.5, 1.5, 9.0) == 0.0
    with pytest.raises(DenominatorVanishes):
        ground_energy_sharp(1.0, 2.0, -1.0)
    with pytest.raises(DenominatorVanishes):
        ground_energy(BAND, ModelParams(m=-1.0, alpha=1))


def test_ground_energy_monotone_in_cutoff_and_mass():
    prm = ModelParams(m=9, alpha=1)
    g_L = [ground_energy(BAND.with_band(1.0, L), prm) for L in (1.5, 2.0, 3.0, 5.0)]
    assert all(b > a for a, b in zip(g_L, g_L[1:]))
    g_m = [ground_energy(BAND, ModelParams(m=m, alpha=1)) for m in (1.0, 3.0, 9.0)]
    assert all(b < a for a, b in zip(g_m, g_m[1:]))
    assert min(g_L + g_m) > 0


def test_energy_breakdown_identity():
    prm = ModelParams(m=2, alpha=0.7, p=(0.3, -1.0, 0.5))
    eb = energy_breakdown(BAND, prm)
    assert eb.E_p - eb.g == pytest.approx(prm.p2 / (2 * eb.m_eff), abs=1e-12)
    assert eb.m_eff >= prm.m


def test_asymptotic_band_constants():
    lo, hi = asymptotic_band(9.0)
    assert lo == pytest.approx((8 / 3) * math.sqrt(3 / (72 * math.pi)) * math.pi / 2)
    assert hi == pytest.approx(math.sqrt(3) * lo)
    assert round(lo, 4) == 0.4824 and round(hi, 4) == 0.8355


def test_g_asymptotics_guard():
    with pytest.raises(MassTooSmall):
        g_asymptotics(1.0, 8.0, [4.0, 8.0])


def test_g_asymptotics_enters_band_and_trends_up():
    res = g_asymptotics(1.0, 9.0, [4.0, 16.0, 64.0, 256.0])
    r = res["ratios"]
    assert all(b > a for a, b in zip(r, r[1:]))
    assert res["within_band"]


def test_multi_particle_single_particle_limit():
    g1 = ground_energy(BAND, ModelParams(m=3, alpha=1))
    assert ground_energy_multi(1, "shared_cutoff", [BAND], 3.0) == pytest.approx(g1, rel=1e-10)
    assert ground_energy_multi(1, "disjoint_cutoffs", [BAND], 3.0) == pytest.approx(g1, rel=1e-10)


def test_multi_particle_disjoint_additive():
    cuts = [CutoffProfile.sharp(1.0, 2.0), CutoffProfile.sharp(2.0, 3.0)]
    parts = [ground_energy(c, ModelParams(m=3, alpha=1)) for c in cuts]
    assert ground_energy_multi(2, "disjoint_cutoffs", cuts, 3.0) == pytest.approx(sum(parts))
    with pytest.raises(OverlappingSupports):
        ground_energy_multi(2, "disjoint_cutoffs", [BAND, CutoffProfile.sharp(1.5, 3.0)], 3.0)


def test_multi_particle_shared_matches_single_form():
    N = 4
    shared = ground_energy_multi(N, "shared_cutoff", [BAND], 9.0)
    assert shared == pytest.approx(ground_energy_sharp(1.0, 2.0, 9.0, N=N), rel=1e-6)


def test_epsilon_family_endpoints():
    prm = ModelParams(m=2.0, alpha=0.8, eps_self=1.0)
    fam = epsilon_family(BAND, prm)
    assert fam["m_eps_inv"] == pytest.approx(1 / effective_mass(BAND, prm))
    assert fam["g_eps"] == pytest.approx(ground_energy(BAND, prm))
    assert fam["alpha_star"] == math.inf
    zero = epsilon_family(BAND, ModelParams(m=2.0, alpha=0.8, eps_self=0.0))
    assert zero["g_eps"] == 0.0


def test_epsilon_family_zero_crossing_at_alpha_star():
    m, n = 2.0, 4 * math.pi
    a_star = math.sqrt(m / ((2 / 3) * n))
    fam = epsilon_family(BAND, ModelParams(m=m, alpha=a_star, eps_self=0.0))
    assert fam["alpha_star"] == pytest.approx(a_star)
    assert abs(fam["m_eps_inv"]) <= 1e-12
    below = epsilon_family(BAND, ModelParams(m=m, alpha=0.9 * a_star, eps_self=0.0))
    above = epsilon_family(BAND, ModelParams(m=m, alpha=1.1 * a_star, eps_self=0.0))
    assert below["bounded_below"] and not above["bounded_below"]


def test_ir_criterion():
    res = ir_criterion(BAND)
    assert res["regular"] and res["value"] == pytest.approx(4 * math.pi * math.log(2))
    tab = CutoffProfile.tabulated([0.0, 1.0, 2.0], [1.0, 1.0, 0.0])
    assert not ir_criterion(tab)["regular"]


def test_scl_constant_without_self_energy():
    C, smear = scl_constant(BAND, ModelParams(m=1, alpha=1, eps_self=0.0))
    assert C == pytest.approx(0.5 * (2 / 3) * 4 * math.pi * math.log(2), rel=1e-9)
    assert smear(lambda r: -0.7, 0.4) == pytest.approx(-0.7, rel=1e-9)


def test_scl_constant_vanishes_with_coupling():
    C, _ = scl_constant(BAND, ModelParams(m=1, alpha=1e-4, eps_self=0.0))
    assert C < 1e-7


def test_gaussian_smear_of_gaussian():
    # e^{-r²/2} * P_C at the origin = (1 + C)^{-3/2}
    C = 0.3
    val = gaussian_smear(lambda r: math.exp(-r * r / 2), C, 0.0)
    assert val == pytest.approx((1 + C) ** -1.5, rel=1e-9)
    off = gaussian_smear(lambda r: math.exp(-r * r / 2), C, 0.8)
    assert off == pytest.approx((1 + C) ** -1.5 * math.exp(-0.64 / (2 * (1 + C))), rel=1e-8)
