"""Effective mass and ground-state energy of the dipole model.

With ``c_d = (d-1)/d`` and radial norms

    N₁(t) = ||t φ̂/(t² + ω²)||²,     N₂(t) = ||φ̂/√(t² + ω²)||²,

the dressed mass is ``m_eff = m + α² c_d ||φ̂/ω||²`` and the ground energy
shift is

    g = (d/2π) ∫ α² c_d N₁(t) / (m + α² c_d N₂(t)) dt,

so that ``E_p = p²/(2 m_eff) + g``. The self-energy interpolation replaces
``α²`` by ``ε α²`` in the field-dressing terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from .dispersion import (
    CutoffProfile,
    h_rho,
    h_rho_sharp,
    polarization_factor,
    sphere_area,
    weighted_norm,
)
from .errors import (
    DenominatorVanishes,
    DispersionVanishesOnSupport,
    DivergentIntegral,
    InvalidInput,
    MassTooSmall,
    OverlappingSupports,
)
from .numerics import DEFAULT_QUAD, Quadrature, integrate

__all__ = [
    "ModelParams",
    "EnergyBreakdown",
    "effective_mass",
    "ground_energy",
    "energy_breakdown",
    "ground_energy_sharp",
    "asymptotic_band",
    "g_asymptotics",
    "ground_energy_multi",
    "epsilon_family",
    "ir_criterion",
    "scl_constant",
    "gaussian_smear",
]


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    Attributes
    ----------
    m : float
        Bare mass.
    alpha : float
        Coupling constant.
    d : int
        Space dimension (>= 3).
    p : tuple of float
        Total momentum.
    eps_self : float
        Self-energy interpolation in ``[0, 1]``; 1 is the physical model.
    eps_ph : float
        Photon mass shift, ``ω → ω + eps_ph``.
    """

    m: float = 1.0
    alpha: float = 1.0
    d: int = 3
    p: Tuple[float, ...] = (0.0, 0.0, 0.0)
    eps_self: float = 1.0
    eps_ph: float = 0.0

    def __post_init__(self):
        if self.d < 3:
            raise InvalidInput("d must be >= 3")
        if not (0.0 <= self.eps_self <= 1.0):
            raise InvalidInput("eps_self must lie in [0, 1]")
        if self.eps_ph < 0:
            raise InvalidInput("eps_ph must be >= 0")
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.p) != self.d:
            raise InvalidInput("p must have d components")

    @property
    def p2(self) -> float:
        return float(sum(x * x for x in self.p))


@dataclass(frozen=True)
class EnergyBreakdown:
    m_eff: float
    g: float
    E_p: float
    ir_integral: float  # inf when infrared singular


def _check_dim(cut: CutoffProfile, prm: ModelParams):
    if cut.d != prm.d:
        raise InvalidInput("cutoff and model dimensions differ")


def _mass_norm(cut: CutoffProfile, eps_ph: float, q: Quadrature) -> float:
    """``||φ̂/ω_ε||²``."""
    if eps_ph == 0.0:
        return weighted_norm(cut, 2, q)
    return cut.radial_integral(lambda r: 1.0 / (r + eps_ph) ** 2, q)


def effective_mass(cut: CutoffProfile, prm: ModelParams, q: Quadrature = DEFAULT_QUAD) -> float:
    """``m + ε α² c_d ||φ̂/ω||²``."""
    _check_dim(cut, prm)
    a2 = prm.eps_self * prm.alpha ** 2
    if a2 == 0.0:
        return float(prm.m)
    return prm.m + a2 * polarization_factor(prm.d) * _mass_norm(cut, prm.eps_ph, q)


def _g_integral(cut: CutoffProfile, m: float, a2c: float, d: int, eps_ph: float,
                q: Quadrature) -> float:
    if a2c == 0.0:
        return 0.0
    if m <= 0:
        raise DenominatorVanishes("ground energy formula needs m > 0")

    def n1(t):
        return cut.radial_integral(lambda r: t * t / (t * t + (r + eps_ph) ** 2) ** 2, q)

    def n2(t):
        return cut.radial_integral(lambda r: 1.0 / (t * t + (r + eps_ph) ** 2), q)

    def integrand(theta):
        # t = tan θ maps (0, ∞) onto (0, π/2)
        if theta <= 0.0 or theta >= 0.5 * math.pi:
            return 0.0
        t = math.tan(theta)
        den = m + a2c * n2(t)
        if den <= 0:
            raise DenominatorVanishes("m + α² c_d N₂(t) <= 0")
        return a2c * n1(t) / den / math.cos(theta) ** 2

    lo, hi = cut.support
    pts = [math.atan(lo), math.atan(hi)] if hi > 0 else None
    outer = integrate(integrand, 0.0, 0.5 * math.pi, q, pts)
    return (d / (2.0 * math.pi)) * 2.0 * outer


def ground_energy(cut: CutoffProfile, prm: ModelParams, q: Quadrature = DEFAULT_QUAD) -> float:
    """Ground energy shift ``g`` (``g_ε`` when ``eps_self < 1``) by nested quadrature."""
    _check_dim(cut, prm)
    a2c = prm.eps_self * prm.alpha ** 2 * polarization_factor(prm.d)
    return _g_integral(cut, prm.m, a2c, prm.d, prm.eps_ph, q)


def ir_criterion(cut: CutoffProfile, q: Quadrature = DEFAULT_QUAD) -> dict:
    """Infrared regularity: finiteness of ``∫ φ̂²/ω³ dk``.

    Returns ``{"regular": bool, "value": float}`` with ``value = inf`` in the
    singular case. Dressed states exist for all ``p`` when regular and only at
    ``p = 0`` when singular.
    """
    try:
        val = weighted_norm(cut, 3, q)
    except DivergentIntegral:
        return {"regular": False, "value": math.inf}
    return {"regular": True, "value": float(val)}


def energy_breakdown(cut: CutoffProfile, prm: ModelParams,
                     q: Quadrature = DEFAULT_QUAD) -> EnergyBreakdown:
    """``m_eff``, ``g`` and ``E_p = p²/(2 m_eff) + g``."""
    meff = effective_mass(cut, prm, q)
    g = ground_energy(cut, prm, q)
    ir = ir_criterion(cut, q)["value"]
    return EnergyBreakdown(meff, g, prm.p2 / (2.0 * meff) + g, ir)


# -- sharp band, d = 3 ------------------------------------------------------

def _atan_minus_rat(x: float) -> float:
    """``arctan x - x/(1+x²)`` without cancellation at small ``x``."""
    if x < 1e-3:
        x2 = x * x
        return x * x2 * (2.0 / 3.0 - x2 * (4.0 / 5.0 - x2 * 6.0 / 7.0))
    return math.atan(x) - x / (1.0 + x * x)


def _x_minus_atan(x: float) -> float:
    """``x - arctan x`` without cancellation at small ``x``."""
    if x < 1e-3:
        x2 = x * x
        return x * x2 * (1.0 / 3.0 - x2 * (1.0 / 5.0 - x2 / 7.0))
    return x - math.atan(x)


def _sharp_integrand(r: float, kappa: float, mass_term: float, lam_max: float) -> float:
    if r <= 0.0:
        return 0.0
    num = _atan_minus_rat(r) - _atan_minus_rat(r * kappa)
    den = mass_term * r + (8.0 * math.pi / 3.0) * lam_max * (_x_minus_atan(r) - _x_minus_atan(r * kappa))
    return num / (den * r * r)


def ground_energy_sharp(lam: float, lam_max: float, m: float,
                        q: Quadrature = DEFAULT_QUAD, N: int = 1) -> float:
    """Single-integral form of ``g`` for the unit sharp band, ``α = 1``, d = 3.

    ``g = 4Λ² ∫_0^∞ [h₁(r) - h₁(rκ)] / (m r/N + (8π/3)Λ[h₂(r) - h₂(rκ)]) dr/r²``
    with ``κ = λ/Λ``, ``h₁(x) = arctan x - x/(1+x²)``, ``h₂(x) = x - arctan x``.
    ``N > 1`` gives the shared-cutoff ``N``-particle energy.
    """
    if not (0 <= lam <= lam_max):
        raise InvalidInput("need 0 <= lam <= lam_max")
    if m <= 0:
        raise DenominatorVanishes("m must be positive")
    if lam_max == lam:
        return 0.0
    kappa = lam / lam_max
    mass_term = m / N
    val = integrate(lambda r: _sharp_integrand(r, kappa, mass_term, lam_max),
                    0.0, math.inf, q, points=[1.0, 1.0 / kappa] if kappa > 0 else [1.0])
    return 4.0 * lam_max ** 2 * val


def asymptotic_band(m: float) -> Tuple[float, float]:
    """Bounds on ``lim g(Λ)/Λ^{3/2}``: ``(8/3)(3/(8πm))^{1/2}(π/2)`` and ``√3`` times it."""
    lower = (8.0 / 3.0) * math.sqrt(3.0 / (8.0 * math.pi * m)) * (math.pi / 2.0)
    upper = (8.0 / 3.0) * math.sqrt(9.0 / (8.0 * math.pi * m)) * (math.pi / 2.0)
    return lower, upper


def g_asymptotics(lam: float, m: float, lam_grid: Sequence[float],
                  slack: float = 0.05, q: Quadrature = DEFAULT_QUAD, N: int = 1) -> dict:
    """Samples of ``g(Λ)/(√N Λ^{3/2})`` with the asymptotic band.

    Raises
    ------
    MassTooSmall
        When ``m <= 8πλ/3``.
    """
    if m <= 8.0 * math.pi * lam / 3.0:
        raise MassTooSmall("need m > 8πλ/3")
    grid = [float(x) for x in lam_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInput("Λ grid must be ascending")
    g = [ground_energy_sharp(lam, L, m, q, N) for L in grid]
    ratios = [gi / (math.sqrt(N) * L ** 1.5) for gi, L in zip(g, grid)]
    lower, upper = asymptotic_band(m)
    within = bool(ratios) and lower * (1 - slack) <= ratios[-1] <= upper * (1 + slack)
    return {"lam_max": grid, "g": g, "ratios": ratios, "lower": lower,
            "upper": upper, "within_band": within}


def ground_energy_multi(N: int, case: str, cuts: Sequence[CutoffProfile], m: float,
                        q: Quadrature = DEFAULT_QUAD) -> float:
    """``N``-particle ground energy at ``α = 1``, d = 3.

    ``shared_cutoff``: ``(N/π) ∫ N₁ / (m + (2/3) N N₂) dt`` for one profile.
    ``disjoint_cutoffs``: sum of single-particle energies for ``N`` profiles
    with pairwise disjoint supports.
    """
    if N < 1:
        raise InvalidInput("N must be >= 1")
    if case == "shared_cutoff":
        if len(cuts) != 1:
            raise InvalidInput("shared case takes exactly one profile")
        cut = cuts[0]
        if cut.d != 3:
            raise InvalidInput("d = 3 only")
        # (N/π)∫N₁/(m + (2/3)N N₂) is the single-particle g at mass m/N
        return _g_integral(cut, m / N, polarization_factor(3), 3, 0.0, q)
    if case == "disjoint_cutoffs":
        if len(cuts) != N:
            raise InvalidInput("disjoint case takes N profiles")
        ivs = []
        for c in cuts:
            if c.d != 3:
                raise InvalidInput("d = 3 only")
            if c.kind != "sharp":
                raise InvalidInput("disjointness is validated for sharp bands only")
            ivs.append(c.support)
        ivs_sorted = sorted(ivs)
        for (a0, b0), (a1, b1) in zip(ivs_sorted, ivs_sorted[1:]):
            if a1 < b0:
                raise OverlappingSupports(f"bands [{a0},{b0}] and [{a1},{b1}] overlap")
        return float(sum(_g_integral(c, m, polarization_factor(3), 3, 0.0, q) for c in cuts))
    raise InvalidInput(f"unknown case {case!r}")


def epsilon_family(cut: CutoffProfile, prm: ModelParams, q: Quadrature = DEFAULT_QUAD) -> dict:
    """Interpolated family: ``m_eff^ε``, ``1/m_ε``, ``g_ε`` and ``α*``.

    ``1/m_ε = (1/m)(1 - α² c n/(m + ε α² c n))`` with ``n = ||φ̂/ω||²``;
    ``α*² = m/((1-ε) c n)`` separates bounded (``α² < α*²``) from unbounded
    below. ``α* = inf`` at ``ε = 1``.
    """
    _check_dim(cut, prm)
    c = polarization_factor(prm.d)
    n = _mass_norm(cut, prm.eps_ph, q)
    eps, a2, m = prm.eps_self, prm.alpha ** 2, prm.m
    meff_eps = m + eps * a2 * c * n
    inv_m_eps = (1.0 / m) * (1.0 - a2 * c * n / meff_eps)
    g_eps = ground_energy(cut, prm, q)
    if eps >= 1.0 or n == 0.0:
        alpha_star = math.inf
    else:
        alpha_star = math.sqrt(m / ((1.0 - eps) * c * n))
    return {
        "m_eff_eps": meff_eps,
        "m_eps_inv": inv_m_eps,
        "g_eps": g_eps,
        "alpha_star": alpha_star,
        "bounded_below": inv_m_eps > 0 or (eps >= 1.0),
    }


def _d_plus_eps_factory(cut: CutoffProfile, m: float, a2eps: float, q: Quadrature):
    """``r ↦ D₊^ε(r²)`` with ``α²`` replaced by ``ε α²``."""
    pref = 0.5 * a2eps * polarization_factor(cut.d) * sphere_area(cut.d)
    closed = cut.kind == "sharp" and cut.power == 0.0 and cut.d == 3

    def dplus(r):
        s = r * r
        if a2eps == 0.0:
            return complex(m)
        if closed:
            h = cut.normalization ** 2 * h_rho_sharp(cut.lam, cut.lam_max, s)
        else:
            h = h_rho(cut, s, q)
        ph = cut(r)
        rho = ph * ph * s ** ((cut.d - 2) / 2.0)
        return complex(m - pref * h, pref * math.pi * rho)

    return dplus


def scl_constant(cut: CutoffProfile, prm: ModelParams, q: Quadrature = DEFAULT_QUAD,
                 check_points: int = 200) -> Tuple[float, Callable]:
    """Strong-coupling constant ``C = ½ c_d ∫ |Q_ε|²/ω³ dk``, ``Q_ε = α φ̂ / D₊^ε(ω²)``.

    Returns ``C`` and ``smear(V, x)`` evaluating ``(V * P_C)(x)`` for a radial
    potential ``V`` with the Gaussian ``P_C(y) = (2πC)^{-d/2} e^{-|y|²/2C}``
    (d = 3).
    """
    _check_dim(cut, prm)
    a2eps = prm.eps_self * prm.alpha ** 2
    dplus = _d_plus_eps_factory(cut, prm.m, a2eps, q)
    lo, hi = cut.support
    rs = np.linspace(lo, hi, check_points + 2)[1:-1]
    mins = min(abs(dplus(float(r))) for r in rs) if rs.size else math.inf
    if not mins > 0:
        raise DispersionVanishesOnSupport("D₊^ε vanishes on supp φ̂")

    def w(r):
        dp = dplus(r)
        if not np.isfinite(dp.real):
            return 0.0
        return prm.alpha ** 2 / abs(dp) ** 2 / r ** 3

    C = 0.5 * polarization_factor(prm.d) * cut.radial_integral(w, q, extra_power=-3.0)

    def smear(V: Callable[[float], float], x: float) -> float:
        return gaussian_smear(V, C, x, q)

    return float(C), smear


def gaussian_smear(V: Callable[[float], float], C: float, x: float,
                   q: Quadrature = DEFAULT_QUAD) -> float:
    """``(V * P_C)(x)`` for radial ``V`` in three dimensions."""
    if C < 0:
        raise InvalidInput("C must be >= 0")
    if C == 0.0:
        return float(V(abs(x)))
    x = abs(x)
    sd = math.sqrt(C)
    if x < 1e-8 * sd:
        norm = (2.0 * math.pi * C) ** -1.5
        return 4.0 * math.pi * norm * integrate(
            lambda r: V(r) * r * r * math.exp(-r * r / (2 * C)), 0.0, math.inf, q)
    pref = 1.0 / (x * math.sqrt(2.0 * math.pi * C))

    def g(r):
        return r * V(r) * (math.exp(-(x - r) ** 2 / (2 * C)) - math.exp(-(x + r) ** 2 / (2 * C)))

    hi = x + 40.0 * sd
    return pref * integrate(g, 0.0, hi, q, points=[x])
