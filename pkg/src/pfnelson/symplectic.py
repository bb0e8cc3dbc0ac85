"""Bogoliubov transformations on truncated Fock spaces.

A pair ``(S, T)`` defines ``A = [[S, T̄], [T, S̄]]`` and the transformed
operators ``b(f) = a*(Tf) + a(Sf)``, ``b*(f) = a*(S̄f) + a(T̄f)``; conjugation is
entrywise. For ``A`` in the symplectic group the intertwiner

    U = det(1 - K₁*K₁)^{1/4} exp(-½Δ_{K₁}) Γ(1 - K₂) exp(-½Δᵃ_{K₃}),
    K₁ = T S⁻¹,  K₂ = 1 - ((S⁻¹)*)‾,  K₃ = -S⁻¹ T̄,

satisfies ``U⁻¹ b^♯(f) U = a^♯(f)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla
from scipy.integrate import trapezoid

from .errors import (
    DimensionMismatch,
    GeneratorNotInSp2,
    InvalidInput,
    NormKOneExceedsOne,
    SeriesNonConvergent,
    SingularS,
    VacuumOverlapZero,
)
from .fock import (
    FockOperator,
    FockSpace,
    ladder,
    quadratic_annihilation,
    quadratic_creation,
    second_quantize,
)

__all__ = [
    "SymplecticPair",
    "BogoliubovData",
    "verify_symplectic",
    "bogoliubov_coeffs",
    "b_operators",
    "intertwiner",
    "intertwine_check",
    "displacement",
    "vacuum_overlaps",
    "gamma_check",
    "det_series",
    "local_exponent",
    "random_sp_pair",
]


def _sq(X, name):
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"{name} must be square")
    return X


@dataclass(frozen=True)
class SymplecticPair:
    S: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        S = _sq(self.S, "S")
        T = _sq(self.T, "T")
        if S.shape != T.shape:
            raise DimensionMismatch("S and T must have equal order")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "T", T)

    @property
    def order(self) -> int:
        return self.S.shape[0]

    @classmethod
    def squeeze(cls, theta: float) -> "SymplecticPair":
        """Single-mode squeeze ``S = cosh θ``, ``T = sinh θ``."""
        return cls(np.array([[math.cosh(theta)]]), np.array([[math.sinh(theta)]]))

    def block(self) -> np.ndarray:
        return np.block([[self.S, self.T.conj()], [self.T, self.S.conj()]])


def verify_symplectic(pair: SymplecticPair, tol: float = 1e-10) -> dict:
    """Frobenius residuals of the four group relations.

    ``S*S - T*T - 1``, ``(S̄)*T - (T̄)*S``, ``SS* - (TT*)‾ - 1``,
    ``TS* - (ST*)‾``.
    """
    S, T = pair.S, pair.T
    H = lambda X: X.conj().T
    I = np.eye(pair.order)
    res = [
        np.linalg.norm(H(S) @ S - H(T) @ T - I),
        np.linalg.norm(H(S.conj()) @ T - H(T.conj()) @ S),
        np.linalg.norm(S @ H(S) - (T @ H(T)).conj() - I),
        np.linalg.norm(T @ H(S) - (S @ H(T)).conj()),
    ]
    res = [float(r) for r in res]
    return {"residuals": res, "in_sp": all(r <= tol for r in res)}


def bogoliubov_coeffs(pair: SymplecticPair) -> dict:
    """``K₁``, ``K₂``, ``K₃``, ``||K₁||`` and ``det(1 - K₁*K₁)^{1/4}``."""
    S, T = pair.S, pair.T
    if np.linalg.cond(S) > 1e14:
        raise SingularS("S is not invertible")
    Si = np.linalg.inv(S)
    K1 = T @ Si
    K2 = np.eye(pair.order) - Si.T
    K3 = -Si @ T.conj()
    nk = float(np.linalg.norm(K1, 2))
    if nk >= 1.0:
        raise NormKOneExceedsOne(f"||K1|| = {nk} >= 1")
    det = np.linalg.det(np.eye(pair.order) - K1.conj().T @ K1)
    return {"K1": K1, "K2": K2, "K3": K3, "norm_K1": nk,
            "det_factor": float(det.real) ** 0.25,
            "K1_symmetry": float(np.linalg.norm(K1 - K1.T))}


def b_operators(space: FockSpace, pair: SymplecticPair, f) -> Tuple[FockOperator, FockOperator]:
    """``b(f) = a*(Tf) + a(Sf)`` and ``b*(f) = a*(S̄f) + a(T̄f)``."""
    f = np.asarray(f, complex)
    S, T = pair.S, pair.T
    b = ladder(space, T @ f, "create") + ladder(space, S @ f, "annihilate")
    bs = ladder(space, S.conj() @ f, "create") + ladder(space, T.conj() @ f, "annihilate")
    return b, bs


def _series_exp(X: np.ndarray, c: complex, max_terms: int) -> Tuple[np.ndarray, float]:
    """``exp(cX)`` for nilpotent-on-the-cap ``X`` by its finite series.

    Returns the sum and the vacuum-column norm of the last nonzero term.
    """
    out = np.eye(X.shape[0], dtype=complex)
    term = np.eye(X.shape[0], dtype=complex)
    tail = 0.0
    for k in range(1, max_terms + 1):
        term = (c / k) * (X @ term)
        if not np.any(term):
            break
        tail = float(np.linalg.norm(term[:, 0]))
        out += term
    return out, tail


def intertwiner(space: FockSpace, pair: SymplecticPair, series_tol: Optional[float] = None) -> dict:
    """Matrix of ``U`` on the truncated space.

    Returns ``{"U": FockOperator, "tail": float, "det_factor": float}``, where
    ``tail`` is the vacuum-column norm of the last term of the ``Δ_{K₁}``
    series (the first omitted contribution lives above the cap).

    Raises
    ------
    SeriesNonConvergent
        If ``series_tol`` is given and ``tail`` exceeds it.
    """
    if pair.order != space.modes:
        raise DimensionMismatch("pair order must equal the number of modes")
    co = bogoliubov_coeffs(pair)
    depth = space.cap // 2 + 1
    D1 = quadratic_creation(space, co["K1"]).matrix
    D3 = quadratic_annihilation(space, co["K3"]).matrix
    E1, tail = _series_exp(D1, -0.5, depth)
    E3, _ = _series_exp(D3, -0.5, depth)
    G = second_quantize(space, np.eye(space.modes) - co["K2"]).matrix
    if series_tol is not None and tail > series_tol:
        raise SeriesNonConvergent(f"Δ-series tail {tail:.3e} above {series_tol:.3e}")
    U = co["det_factor"] * (E1 @ G @ E3)
    return {"U": FockOperator(space, U), "tail": tail, "det_factor": co["det_factor"]}


def intertwine_check(space: FockSpace, pair: SymplecticPair, f,
                     probe_particles: int = 4, U: Optional[FockOperator] = None,
                     sector: str = "full") -> float:
    """``max ||(U a*(f) - b*(f) U) Ψ||`` over basis probes with few particles.

    ``sector="full"`` measures the residual on the whole truncated space; its
    only nonzero part is the top layer, where ``a(T̄f)`` would need the
    missing ``N_max + 1`` layer, so it decays with the cap. ``sector="subcap"``
    projects onto states with at most ``N_max - 1`` particles, where the
    identity is exact up to rounding.
    """
    if sector not in ("full", "subcap"):
        raise InvalidInput(f"unknown sector {sector!r}")
    if U is None:
        U = intertwiner(space, pair)["U"]
    f = np.asarray(f, complex)
    _, bs = b_operators(space, pair, f)
    cr = ladder(space, f, "create")
    R = U.matrix @ cr.matrix - bs.matrix @ U.matrix
    R = R[:, space.sector(probe_particles)]
    if sector == "subcap":
        R = R[space.sector(space.cap - 1)]
    return float(np.max(np.linalg.norm(R, axis=0)))


def displacement(space: FockSpace, pair: SymplecticPair, L) -> FockOperator:
    """``S_{A,L} = exp(b(L) - b*(L̄)) = exp(a*(ξ) - a(ξ̄))``, ``ξ = TL - S̄L̄``."""
    L = np.asarray(L, complex)
    if L.size != space.modes:
        raise DimensionMismatch("L must have M components")
    xi = pair.T @ L - pair.S.conj() @ L.conj()
    G = ladder(space, xi, "create").matrix - ladder(space, xi.conj(), "annihilate").matrix
    return FockOperator(space, sla.expm(G))


@dataclass(frozen=True)
class BogoliubovData:
    pair: SymplecticPair
    L: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        L = np.asarray(self.L, complex)
        return self.pair.T @ L - self.pair.S.conj() @ L.conj()

    @property
    def K(self) -> np.ndarray:
        return self.pair.T @ np.linalg.inv(self.pair.S)


def _ip(u, v) -> complex:
    """``(u, v) = Σ ūᵢ vᵢ``."""
    return complex(np.vdot(u, v))


def _state(space: FockSpace, data: BogoliubovData) -> np.ndarray:
    U = intertwiner(space, data.pair)["U"]
    Sd = displacement(space, data.pair, data.L)
    return Sd.matrix @ (U.matrix @ space.vacuum())


def vacuum_overlaps(space: FockSpace, data: BogoliubovData, f, g) -> dict:
    """One- and two-particle overlaps of ``Φ = U_{A,L}Ω`` against closed forms.

    ``r₁ = <a*(f)Ω, Φ>/<Ω, Φ>`` vs ``(f, ξ) + (K̄f, ξ̄)`` and
    ``r₂ = <a*(f)a*(g)Ω, Φ>/<Ω, Φ>`` vs the two-point formula.
    """
    f = np.asarray(f, complex)
    g = np.asarray(g, complex)
    phi = _state(space, data)
    J = phi[0]
    if abs(J) < 1e-300:
        raise VacuumOverlapZero("<Ω, Φ> = 0")
    af = ladder(space, f, "create").matrix
    ag = ladder(space, g, "create").matrix
    om = space.vacuum()
    r1 = _ip(af @ om, phi) / J
    r2 = _ip(af @ (ag @ om), phi) / J
    xi, K = data.xi, data.K
    Kb = K.conj()
    fx, gx = _ip(f, xi), _ip(g, xi)
    kf, kg = _ip(Kb @ f, xi.conj()), _ip(Kb @ g, xi.conj())
    c1 = fx + kf
    c2 = fx * gx + gx * kf + fx * kg + kg * kf - _ip(f, K @ g.conj())
    return {"r1": r1, "r2": r2, "closed1": c1, "closed2": c2,
            "residual1": abs(r1 - c1), "residual2": abs(r2 - c2)}


def gamma_check(space: FockSpace, data: BogoliubovData, f, p: float) -> dict:
    """``<(p + a(f̄) + a*(f))²Ω, Φ>/<Ω, Φ>`` vs ``(p+γ)² + (f, (1-K)f)``.

    Requires real ``ξ`` and real ``f``; ``γ = (ξ, (1+K)f)``.
    """
    f = np.asarray(f, complex)
    xi, K = data.xi, data.K
    if np.max(np.abs(xi.imag), initial=0.0) > 1e-12 or np.max(np.abs(f.imag), initial=0.0) > 0:
        raise InvalidInput("ξ and f must be real")
    phi = _state(space, data)
    J = phi[0]
    if abs(J) < 1e-300:
        raise VacuumOverlapZero("<Ω, Φ> = 0")
    X = p * np.eye(space.dim) + ladder(space, f.conj(), "annihilate").matrix \
        + ladder(space, f, "create").matrix
    om = space.vacuum()
    lhs = _ip(X @ (X @ om), phi) / J
    gam = _ip(xi, (np.eye(space.modes) + K) @ f)
    rhs = (p + gam) ** 2 + _ip(f, (np.eye(space.modes) - K) @ f)
    return {"lhs": lhs, "rhs": rhs, "gamma": gam, "residual": abs(lhs - rhs)}


def det_series(K, z: complex = 1.0, terms: int = 20) -> dict:
    """Partial sums of ``Σ a_n zⁿ`` with ``a_n = ||Δ_Kⁿ Ω||² / (2ⁿ n!)²``.

    The limit is ``det(1 - z K*K)^{-1/2}`` for symmetric ``K`` with
    ``|z| ||K||² < 1``. The norms are computed in a Fock space with cap
    ``2·terms``, where ``Δ_Kⁿ Ω`` is exact.
    """
    K = _sq(K, "K")
    if np.linalg.norm(K - K.T) > 1e-12 * max(1.0, np.linalg.norm(K)):
        raise InvalidInput("K must be symmetric")
    space = FockSpace(K.shape[0], 2 * terms)
    D = quadratic_creation(space, K).matrix
    v = space.vacuum()
    coeffs = [1.0]
    for n in range(1, terms + 1):
        v = D @ v
        coeffs.append(float(np.vdot(v, v).real) / (2.0 ** n * math.factorial(n)) ** 2)
    partial = np.cumsum([c * z ** n for n, c in enumerate(coeffs)])
    target = np.linalg.det(np.eye(K.shape[0]) - z * K.conj().T @ K) ** -0.5
    return {"coefficients": coeffs, "partial_sums": partial.tolist(), "target": complex(target),
            "residuals": [float(abs(s - target)) for s in partial]}


def _flow(S_gen: np.ndarray, T_gen: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
    A = np.block([[S_gen, T_gen.conj()], [T_gen, S_gen.conj()]])
    E = sla.expm(t * A)
    M = S_gen.shape[0]
    return E[:M, :M], E[M:, :M]


def local_exponent(S_gen, T_gen, t: float = 1.0, grid: int = 64) -> dict:
    """Local exponent of the one-parameter group ``e^{tA}``.

    ``τ_r = ½ Im tr(T* T_r S_r⁻¹)``, ``θ(t) = ∫_0^t τ_r dr`` and
    ``ρ(t, s) = θ(t) + θ(s) - θ(t+s)``. ``θ`` is integrated by the trapezoid
    rule on ``grid`` and ``2·grid`` intervals followed by one Richardson step.

    Returns
    -------
    dict
        ``r`` and ``tau`` samples on ``[0, t]``, ``theta`` at ``t``, the
        callable ``theta_fn`` and ``rho(t, s)``, plus ``richardson_gap`` (the
        difference between the two trapezoid estimates).
    """
    S_gen = _sq(S_gen, "S_gen")
    T_gen = _sq(T_gen, "T_gen")
    if S_gen.shape != T_gen.shape:
        raise DimensionMismatch("generator blocks differ in order")
    if np.linalg.norm(S_gen.conj().T + S_gen) > 1e-12 or np.linalg.norm(T_gen.T - T_gen) > 1e-12:
        raise GeneratorNotInSp2("need S_gen* = -S_gen and T_gen symmetric")
    if grid < 2:
        raise InvalidInput("grid must be >= 2")
    Tstar = T_gen.conj().T

    def tau(r: float) -> float:
        S_r, T_r = _flow(S_gen, T_gen, r)
        return 0.5 * float(np.trace(Tstar @ T_r @ np.linalg.inv(S_r)).imag)

    def trap(x: float, n: int) -> float:
        if x == 0.0:
            return 0.0
        rs = np.linspace(0.0, x, n + 1)
        vals = np.array([tau(float(r)) for r in rs])
        return float(trapezoid(vals, rs))

    cache = {}

    def theta_fn(x: float) -> float:
        x = float(x)
        if x not in cache:
            sign = 1.0 if x >= 0 else -1.0
            t1 = trap(abs(x), grid)
            t2 = trap(abs(x), 2 * grid)
            cache[x] = sign * (4.0 * t2 - t1) / 3.0
        return cache[x]

    def rho(a: float, b: float) -> float:
        return theta_fn(a) + theta_fn(b) - theta_fn(a + b)

    rs = np.linspace(0.0, t, grid + 1)
    taus = [tau(float(r)) for r in rs]
    gap = abs(trap(t, 2 * grid) - trap(t, grid))
    return {"r": rs.tolist(), "tau": taus, "theta": theta_fn(t), "theta_fn": theta_fn,
            "rho": rho, "richardson_gap": gap}


def random_sp_pair(M: int, scale: float = 0.3, seed: int = 0, real: bool = False) -> SymplecticPair:
    """Group element ``e^{A}`` from a random generator (seeded)."""
    rng = np.random.default_rng(seed)
    if real:
        X = rng.normal(size=(M, M))
        S_gen = scale * (X - X.T) / 2
        Y = rng.normal(size=(M, M))
        T_gen = scale * (Y + Y.T) / 2
    else:
        X = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
        S_gen = scale * (X - X.conj().T) / 2
        Y = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
        T_gen = scale * (Y + Y.T) / 2
    S, T = _flow(S_gen, T_gen, 1.0)
    return SymplecticPair(S, T)
