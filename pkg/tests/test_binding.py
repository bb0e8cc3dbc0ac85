import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfnelson.binding import (
    LIEB_CONSTANT,
    PotentialSpec,
    bs_kernel,
    bs_kernel_3d,
    count_bs_eigenvalues,
    coupling_window,
    critical_mass,
    lieb_bound,
    uv_window,
)
from pfnelson.dispersion import CutoffProfile
from pfnelson.errors import InvalidInput, MassAboveCritical

WELL = PotentialSpec.well(1.0, 1.0)
MC_WELL = math.pi ** 2 / 8


def well_levels(V0, R, m, n=200001):
    """s-wave levels of -Δ/(2m) - V0 1_{r<R} by matching sin(qr) to e^{-κr}."""
    e = np.linspace(-V0, 0.0, n)[1:-1]
    q = np.sqrt(2 * m * (V0 + e))
    k = np.sqrt(-2 * m * e)
    g = q * np.cos(q * R) + k * np.sin(q * R)
    idx = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    return e[idx]


def test_potential_validation():
    with pytest.raises(InvalidInput):
        PotentialSpec.well(-1.0, 1.0)
    with pytest.raises(InvalidInput):
        PotentialSpec.tabulated([0.0, 1.0], [-1.0, 0.5])


def test_zero_potential():
    K = bs_kernel(PotentialSpec.well(0.0, 1.0), 0.0, 50)
    assert K.norm() == 0.0


def test_kernel_symmetric_nonnegative():
    K = bs_kernel(WELL, -0.3, 100).kernel
    assert np.allclose(K, K.T) and np.all(K >= 0)


def test_positive_energy_rejected():
    with pytest.raises(InvalidInput):
        bs_kernel(WELL, 0.1)


def test_critical_mass_well():
    mc = critical_mass(WELL, grid_size=400)["m_c"]
    assert abs(mc - MC_WELL) <= 0.02 * MC_WELL
    assert abs(mc - MC_WELL) <= 1e-5


def test_grid_refinement_order():
    m = [1.0 / bs_kernel(WELL, 0.0, n).norm() for n in (50, 100, 200)]
    order = math.log2(abs(m[1] - m[0]) / abs(m[2] - m[1]))
    assert order >= 1.0


def test_full_3d_cross_check():
    top3 = np.linalg.eigvalsh(bs_kernel_3d(WELL, 0.0))[-1]
    top1 = bs_kernel(WELL, 0.0, 400).norm()
    assert abs(top3 - top1) <= 0.02 * top1


def test_norm_monotone_and_limits():
    E = -np.geomspace(10, 1e-2, 10)
    n = [bs_kernel(WELL, e, 200).norm() for e in E]
    assert all(b >= a for a, b in zip(n, n[1:]))
    n0 = bs_kernel(WELL, 0.0, 200).norm()
    assert n[-1] <= n0
    assert bs_kernel(WELL, -1e3, 200).norm() <= 0.05 * n0


def test_m_eps_exceeds_m_c():
    out = critical_mass(WELL, eps=0.1, grid_size=200)
    assert out["m_eps"] > out["m_c"]


def test_scaling_covariance():
    m1 = critical_mass(WELL, grid_size=200)["m_c"]
    m2 = critical_mass(WELL.scaled(2.0), grid_size=200)["m_c"]
    assert m2 == pytest.approx(m1, rel=1e-6)


def test_lieb_bound_well():
    assert WELL.norm_3_2() == pytest.approx((4 * math.pi / 3) ** (2 / 3), rel=1e-12)
    b = lieb_bound(WELL)
    assert b == pytest.approx(0.0145, abs=1e-4)
    assert 0 < b <= MC_WELL


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0))
def test_lieb_bound_homogeneity(c):
    b1 = lieb_bound(WELL)
    bc = lieb_bound(PotentialSpec.well(c, 1.0))
    assert bc == pytest.approx(b1 * c ** -2, rel=1e-10)


def test_lieb_constant():
    assert LIEB_CONSTANT == pytest.approx(3 / (math.sqrt(2) * math.pi ** (2 / 3) * 4 ** (5 / 3)))


@pytest.mark.parametrize("m,E", [(2.0, -0.2), (15.0, -1.0), (15.0, -6.0)])
def test_counting_matches_shooting(m, E):
    levels = well_levels(1.0, 1.0, m)
    expected = int(np.sum(levels <= E / m))
    assert count_bs_eigenvalues(WELL, m, E, 300) == expected


def test_counting_sampled_cases_nontrivial():
    assert len(well_levels(1.0, 1.0, 15.0)) == 2


CUT = CutoffProfile.sharp(0.0, 1.0)


def test_coupling_window_zero_alpha():
    rep = coupling_window(CUT, WELL, 1.0, 0.1, alpha=0.0, grid_size=200)
    assert rep.verdict == "no_ground_state"
    assert rep.alpha0 < rep.alpha_eps
    assert rep.m_eff == 1.0


def test_alpha0_boundary_identity():
    rep = coupling_window(CUT, WELL, 1.0, 0.1, grid_size=200)
    at = coupling_window(CUT, WELL, 1.0, 0.1, alpha=rep.alpha0, grid_size=200)
    assert abs(at.m_eff - at.m_c) <= 1e-10


def test_alpha_eps_decreases_to_alpha0():
    reps = [coupling_window(CUT, WELL, 1.0, e, grid_size=200) for e in (1.0, 0.1, 0.01, 1e-4)]
    ae = [r.alpha_eps for r in reps]
    assert all(b < a for a, b in zip(ae, ae[1:]))
    assert ae[-1] - reps[-1].alpha0 < 0.05 * (ae[0] - reps[0].alpha0)


def test_verdict_monotone():
    order = {"no_ground_state": 0, "undecided": 1, "ground_state_large_scale": 2}
    v = [order[coupling_window(CUT, WELL, 1.0, 0.5, alpha=a, grid_size=100).verdict]
         for a in np.linspace(0, 1.0, 11)]
    assert v == sorted(v) and v[0] == 0 and v[-1] == 2


def test_mass_above_critical():
    with pytest.raises(MassAboveCritical):
        coupling_window(CUT, WELL, 2.0, 0.1, grid_size=100)
    with pytest.raises(MassAboveCritical):
        uv_window(1.0, 1.5, 1.0, 1.0)


def test_uv_window():
    mc, m, lam = MC_WELL, 1.0, 0.5
    for alpha in (0.3, 1.0):
        L = uv_window(mc, m, alpha, lam)["lam_no_gs"]
        assert m + 8 * math.pi / 3 * alpha ** 2 * (L - lam) == pytest.approx(mc, abs=1e-12)
    assert uv_window(mc, m, 1e6, lam)["lam_no_gs"] == pytest.approx(lam, abs=1e-12)
