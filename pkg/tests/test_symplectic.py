import math

import numpy as np
import pytest

from pfnelson.errors import (
    DimensionMismatch,
    GeneratorNotInSp2,
    InvalidInput,
    NormKOneExceedsOne,
    SeriesNonConvergent,
)
from pfnelson.fock import FockSpace, ladder
from pfnelson.symplectic import (
    BogoliubovData,
    SymplecticPair,
    b_operators,
    bogoliubov_coeffs,
    det_series,
    displacement,
    gamma_check,
    intertwine_check,
    intertwiner,
    local_exponent,
    random_sp_pair,
    vacuum_overlaps,
    verify_symplectic,
)


def test_identity_pair_in_sp():
    res = verify_symplectic(SymplecticPair(np.eye(2), np.zeros((2, 2))))
    assert res["residuals"] == [0.0, 0.0, 0.0, 0.0] and res["in_sp"]


@pytest.mark.parametrize("theta", [0.1, 0.7, 2.0])
def test_squeeze_in_sp(theta):
    assert verify_symplectic(SymplecticPair.squeeze(theta))["in_sp"]


def test_non_sp_pair_first_residual():
    res = verify_symplectic(SymplecticPair(np.eye(2), 0.1 * np.eye(2)))
    assert res["residuals"][0] == pytest.approx(np.linalg.norm(0.01 * np.eye(2)))
    assert not res["in_sp"]


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        SymplecticPair(np.eye(2), np.eye(3))


def test_coeffs_squeeze():
    th = 0.4
    co = bogoliubov_coeffs(SymplecticPair.squeeze(th))
    assert co["K1"][0, 0] == pytest.approx(math.tanh(th))
    assert co["det_factor"] == pytest.approx((1 / math.cosh(th) ** 2) ** 0.25)


def test_coeffs_trivial():
    co = bogoliubov_coeffs(SymplecticPair(np.eye(3), np.zeros((3, 3))))
    assert np.allclose(co["K1"], 0) and np.allclose(co["K3"], 0) and co["det_factor"] == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_random_elements_have_symmetric_K1(seed):
    pair = random_sp_pair(3, 0.3, seed=seed)
    assert verify_symplectic(pair)["in_sp"]
    assert bogoliubov_coeffs(pair)["K1_symmetry"] <= 1e-10


def test_large_squeeze_still_below_one():
    # tanh θ < 1 for all θ; exactly 1 only in the limit
    assert bogoliubov_coeffs(SymplecticPair.squeeze(5.0))["norm_K1"] < 1


def test_norm_K1_guard():
    S = np.eye(1)
    T = 1.5 * np.eye(1)
    with pytest.raises(NormKOneExceedsOne):
        bogoliubov_coeffs(SymplecticPair(S, T))


def test_intertwiner_identity():
    sp = FockSpace(2, 5)
    U = intertwiner(sp, SymplecticPair(np.eye(2), np.zeros((2, 2))))["U"]
    assert np.allclose(U.matrix, np.eye(sp.dim))


def test_vacuum_expectation_equals_det_factor():
    sp = FockSpace(1, 14)
    it = intertwiner(sp, SymplecticPair.squeeze(0.2))
    assert abs(it["U"].matrix[0, 0] - it["det_factor"]) <= 1e-10


def test_unitary_on_low_sector():
    pair = random_sp_pair(2, 0.1, seed=2)
    sp = FockSpace(2, 14)
    U = intertwiner(sp, pair)["U"].matrix
    idx = sp.sector(2)
    UU = (U.conj().T @ U)[np.ix_(idx, idx)]
    assert np.abs(UU - np.eye(idx.size)).max() <= 1e-8


def test_pure_rotation_intertwines_exactly():
    th = 0.3
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], complex)
    pair = SymplecticPair(R, np.zeros((2, 2)))
    sp = FockSpace(2, 6)
    assert intertwine_check(sp, pair, [0.5, 1j]) <= 1e-12


def test_intertwining_exact_below_cap_and_decays_at_top():
    pair = SymplecticPair.squeeze(0.2)
    full, sub = [], []
    for cap in (8, 10, 12, 14):
        sp = FockSpace(1, cap)
        U = intertwiner(sp, pair)["U"]
        full.append(intertwine_check(sp, pair, [1.0], U=U))
        sub.append(intertwine_check(sp, pair, [1.0], U=U, sector="subcap"))
    assert max(sub) <= 1e-12
    assert all(b < a for a, b in zip(full, full[1:]))


def test_intertwine_residual_grows_toward_cap():
    pair = SymplecticPair.squeeze(0.2)
    sp = FockSpace(1, 12)
    U = intertwiner(sp, pair)["U"]
    r = [intertwine_check(sp, pair, [1.0], probe_particles=k, U=U) for k in (2, 6, 10)]
    assert r[0] < r[1] < r[2]


def test_random_two_mode_intertwining_subcap():
    pair = random_sp_pair(2, 0.2, seed=3)
    sp = FockSpace(2, 10)
    f = np.array([0.3 + 0.2j, -0.5 + 0.1j])
    assert intertwine_check(sp, pair, f, sector="subcap") <= 1e-12


def test_series_tail_guard():
    with pytest.raises(SeriesNonConvergent):
        intertwiner(FockSpace(1, 6), SymplecticPair.squeeze(1.0), series_tol=1e-6)


def test_b_operators_satisfy_ccr():
    pair = random_sp_pair(2, 0.3, seed=5)
    sp = FockSpace(2, 8)
    f = np.array([0.2, 0.7 - 0.1j])
    g = np.array([-0.4j, 0.5])
    b, _ = b_operators(sp, pair, f)
    _, bs = b_operators(sp, pair, g)
    idx = sp.sector(sp.cap - 2)
    C = b.commutator(bs).matrix[np.ix_(idx, idx)]
    assert np.abs(C - np.sum(f * g) * np.eye(idx.size)).max() <= 1e-10


def test_ladder_recovered_from_b():
    # a(f) = b(S*f) - b*(T^T f): invert the transformation
    pair = random_sp_pair(2, 0.3, seed=6)
    sp = FockSpace(2, 6)
    f = np.array([0.6 + 0.2j, -0.3])
    S, T = pair.S, pair.T
    b1, _ = b_operators(sp, pair, S.conj().T @ f)
    _, bs2 = b_operators(sp, pair, T.T @ f)
    rec = b1.matrix - bs2.matrix
    assert np.abs(rec - ladder(sp, f, "annihilate").matrix).max() <= 1e-10


def test_displacement_trivial_and_coherent_overlap():
    sp = FockSpace(1, 30)
    ident = SymplecticPair(np.eye(1), np.zeros((1, 1)))
    assert np.allclose(displacement(sp, ident, [0.0]).matrix, np.eye(sp.dim))
    ell = 0.8
    D = displacement(sp, ident, [ell]).matrix
    assert abs(D[0, 0] - math.exp(-ell ** 2 / 2)) <= 1e-10


def test_displacement_shifts_b():
    pair = random_sp_pair(1, 0.2, seed=1)
    sp = FockSpace(1, 40)
    L = np.array([0.3 - 0.2j])
    f = np.array([0.7 + 0.1j])
    D = displacement(sp, pair, L).matrix
    b, _ = b_operators(sp, pair, f)
    lhs = D @ b.matrix @ np.linalg.inv(D)
    shift = np.vdot(L, f)
    idx = sp.sector(4)
    diff = lhs - b.matrix - shift * np.eye(sp.dim)
    assert np.abs(diff[np.ix_(idx, idx)]).max() <= 1e-10


def test_vacuum_overlaps_trivial():
    data = BogoliubovData(SymplecticPair(np.eye(2), np.zeros((2, 2))), np.zeros(2))
    res = vacuum_overlaps(FockSpace(2, 6), data, [1.0, 0.5], [0.2, 0.1])
    assert abs(res["r1"]) <= 1e-14


def test_vacuum_overlap_pure_shift():
    # K = 0 and real ξ = f: r₁ = ||f||²; ξ = -L for the identity pair
    f = np.array([0.3, -0.4])
    data = BogoliubovData(SymplecticPair(np.eye(2), np.zeros((2, 2))), -f)
    res = vacuum_overlaps(FockSpace(2, 20), data, f, f)
    assert abs(res["r1"] - np.dot(f, f)) <= 1e-10


def test_vacuum_overlaps_random():
    pair = random_sp_pair(2, 0.2, seed=3)
    data = BogoliubovData(pair, np.array([0.2 - 0.1j, 0.1 + 0.3j]))
    res = vacuum_overlaps(FockSpace(2, 16), data, [0.3 + 0.2j, -0.5 + 0.1j], [0.1, 0.4j])
    assert res["residual1"] <= 1e-10 and res["residual2"] <= 1e-10


def test_gamma_formula():
    pair = random_sp_pair(2, 0.2, seed=4, real=True)
    data = BogoliubovData(pair, np.array([0.2, -0.3]))
    res = gamma_check(FockSpace(2, 16), data, np.array([0.4, 0.2]), 0.7)
    assert res["residual"] <= 1e-10


def test_gamma_needs_real_xi():
    data = BogoliubovData(SymplecticPair(np.eye(1), np.zeros((1, 1))), np.array([0.1j]))
    with pytest.raises(InvalidInput):
        gamma_check(FockSpace(1, 6), data, np.array([1.0]), 0.0)


def test_det_series_rank_one():
    res = det_series(np.array([[0.5]]), 1.0, 20)
    assert abs(res["target"] - 2 / math.sqrt(3)) <= 1e-14
    assert res["residuals"][-1] <= 1e-8
    assert all(b <= a for a, b in zip(res["residuals"], res["residuals"][1:]))


def test_det_series_two_modes_complex_z():
    K = np.array([[0.3, 0.1], [0.1, -0.2j]])
    res = det_series(K, 0.5j, 14)
    assert res["residuals"][-1] <= 1e-10


def test_local_exponent_trivial():
    le = local_exponent(np.zeros((2, 2)), np.zeros((2, 2)), 1.0)
    assert max(abs(t) for t in le["tau"]) == 0.0 and le["rho"](0.3, 0.4) == 0.0


def test_local_exponent_rejects_non_generator():
    with pytest.raises(GeneratorNotInSp2):
        local_exponent(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(GeneratorNotInSp2):
        local_exponent(np.zeros((2, 2)), np.array([[0, 1], [0, 0]]))


def test_local_exponent_complex_cocycle():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Sg = (X - X.conj().T) / 2
    Tg = (Y + Y.T) / 2
    le = local_exponent(Sg / np.linalg.norm(Sg, 2), Tg / np.linalg.norm(Tg, 2), 1.0)
    rho = le["rho"]
    assert abs(rho(0.5, 0.3)) > 1e-4
    t, s, r = 0.2, 0.3, 0.4
    assert abs(rho(t, s) + rho(t + s, r) - rho(s, r) - rho(t, s + r)) <= 1e-9
