"""Dispersion function analytics.

Radial cutoff profiles, the dispersion function ``D(z)``, its boundary
values ``D±(s)`` on the positive axis, the sharp-band closed forms and the
zero of ``D`` on the negative axis used in the negative-mass regime.

Throughout ``ω(k) = |k|`` and ``c_d = (d-1)/d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DivergentIntegral, InvalidInput, NoRoot, OnBranchCut
from .numerics import DEFAULT_QUAD, Quadrature, integrate, integrate_pv

__all__ = [
    "CutoffProfile",
    "DispersionResult",
    "sphere_area",
    "polarization_factor",
    "weighted_norm",
    "d_of_z",
    "d_prime_of_z",
    "h_rho",
    "d_plus",
    "h_rho_sharp",
    "running_mass_sharp",
    "negative_mass_data",
]

EDGE_EPS = 1e-8


def sphere_area(d: int) -> float:
    """Area of the unit sphere ``S^{d-1}`` in ``R^d``."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def polarization_factor(d: int) -> float:
    """``(d-1)/d``, the transverse fraction of an isotropic sum."""
    return (d - 1.0) / d


@dataclass(frozen=True)
class CutoffProfile:
    """Rotation-invariant UV cutoff ``φ̂(k) = φ̂(|k|)``.

    ``kind="sharp"`` gives ``normalization * 1_[lam, lam_max](r) * r**power``.
    ``kind="tabulated"`` interpolates ``values`` linearly on ``grid`` and
    vanishes outside it.

    Parameters
    ----------
    kind : {"sharp", "tabulated"}
    lam, lam_max : float
        Band edges for sharp profiles (``0 <= lam < lam_max``).
    d : int
        Space dimension, at least 3.
    normalization : float
        Positive multiplier.
    power : float
        Radial power of a sharp profile; ``-0.5`` turns a band indicator ``ρ``
        into the Nelson form ``ρ/√ω``.
    grid, values : array_like, optional
        Tabulated radial samples (``values >= 0``).
    """

    kind: str = "sharp"
    lam: float = 1.0
    lam_max: float = 2.0
    d: int = 3
    normalization: float = 1.0
    power: float = 0.0
    grid: Optional[Tuple[float, ...]] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.d < 3:
            raise InvalidInput("dimension must be >= 3")
        if not self.normalization > 0:
            raise InvalidInput("normalization must be positive")
        if self.kind == "sharp":
            if not (0 <= self.lam < self.lam_max) or not math.isfinite(self.lam_max):
                raise InvalidInput("sharp cutoff needs 0 <= lam < lam_max < inf")
        elif self.kind == "tabulated":
            if self.grid is None or self.values is None:
                raise InvalidInput("tabulated cutoff needs grid and values")
            g = np.asarray(self.grid, float)
            v = np.asarray(self.values, float)
            if g.ndim != 1 or g.shape != v.shape or g.size < 2:
                raise InvalidInput("grid and values must be 1-D of equal length >= 2")
            if np.any(np.diff(g) <= 0) or g[0] < 0:
                raise InvalidInput("grid must be increasing and nonnegative")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise InvalidInput("tabulated values must be finite and >= 0")
            object.__setattr__(self, "grid", tuple(float(x) for x in g))
            object.__setattr__(self, "values", tuple(float(x) for x in v))
        else:
            raise InvalidInput(f"unknown cutoff kind {self.kind!r}")

    @classmethod
    def sharp(cls, lam, lam_max, d=3, normalization=1.0, power=0.0):
        return cls("sharp", float(lam), float(lam_max), int(d), float(normalization), float(power))

    @classmethod
    def tabulated(cls, grid, values, d=3, normalization=1.0):
        g = np.asarray(grid, float)
        return cls("tabulated", float(g[0]), float(g[-1]), int(d), float(normalization),
                   0.0, tuple(g), tuple(np.asarray(values, float)))

    # -- evaluation ---------------------------------------------------------
    @property
    def support(self) -> Tuple[float, float]:
        return (self.lam, self.lam_max)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        if self.kind == "sharp":
            return (self.lam, self.lam_max)
        return self.grid

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "sharp":
            inside = (r >= self.lam) & (r <= self.lam_max)
            if self.power == 0.0:
                base = np.ones_like(r)
            else:
                with np.errstate(divide="ignore"):
                    base = np.where(r > 0, np.abs(r) ** self.power, 0.0)
            out = np.where(inside, self.normalization * base, 0.0)
        else:
            out = self.normalization * np.interp(r, self.grid, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def value_at_zero_nonzero(self) -> bool:
        """True when ``φ̂²`` does not vanish at the origin (IR singular side)."""
        if self.lam > 0:
            return False
        if self.kind == "sharp":
            return self.power <= 0
        return self.values[0] > 0

    def small_r_exponent(self) -> float:
        """Exponent ``q`` with ``φ̂(r) ~ r^q`` near the origin (support at 0)."""
        if self.kind == "sharp":
            return self.power
        return 0.0 if self.values[0] > 0 else 1.0

    def with_normalization(self, normalization: float) -> "CutoffProfile":
        return CutoffProfile(self.kind, self.lam, self.lam_max, self.d, normalization,
                             self.power, self.grid, self.values)

    def with_band(self, lam: float, lam_max: float) -> "CutoffProfile":
        if self.kind != "sharp":
            raise InvalidInput("band edges only adjustable for sharp profiles")
        return CutoffProfile.sharp(lam, lam_max, self.d, self.normalization, self.power)

    # -- radial integrals ---------------------------------------------------
    def radial_integral(
        self,
        weight: Callable[[float], float],
        q: Quadrature = DEFAULT_QUAD,
        extra_power: float = 0.0,
    ) -> float:
        """``∫_{R^d} φ̂(k)² w(|k|) dk`` where ``w(r) = weight(r) * r**extra_power``.

        ``extra_power`` only feeds the divergence check at the origin.
        """
        d = self.d
        if self.lam == 0.0:
            q0 = self.small_r_exponent()
            if 2 * q0 + d - 1 + extra_power <= -1 and self.value_at_zero_nonzero():
                raise DivergentIntegral("radial integral diverges at the origin")
        area = sphere_area(d)

        def g(r):
            if r <= 0.0:
                return 0.0
            ph = self(r)
            if ph == 0.0:
                return 0.0
            return ph * ph * weight(r) * r ** (d - 1)

        lo, hi = self.support
        pts = self.breakpoints if self.kind == "tabulated" else None
        if pts is not None and len(pts) > 100:
            # quad accepts limited breakpoints; integrate cell by cell
            total = 0.0
            for a, b in zip(pts[:-1], pts[1:]):
                total += integrate(g, a, b, q)
            return area * total
        return area * integrate(g, lo, hi, q, pts)


def weighted_norm(cut: CutoffProfile, n: int, q: Quadrature = DEFAULT_QUAD) -> float:
    """``∫ φ̂(k)² / |k|^n dk`` by radial reduction."""
    if not (-1 <= n <= 5):
        raise InvalidInput("n must lie in -1..5")
    return cut.radial_integral(lambda r: r ** (-n), q, extra_power=-n)


@dataclass(frozen=True)
class DispersionResult:
    s: float
    D_plus: complex
    D_minus: complex
    m_eff_k: complex


def _check_z(z: complex):
    z = complex(z)
    if z.imag == 0.0 and z.real >= 0.0:
        raise OnBranchCut(f"z={z!r} lies on [0, inf)")
    return z


def d_of_z(cut: CutoffProfile, m: float, alpha: float, z: complex,
           q: Quadrature = DEFAULT_QUAD) -> complex:
    """``D(z) = m - α² c_d ∫ φ̂²/(z - ω²) dk`` for ``z`` off ``[0, ∞)``."""
    z = _check_z(z)
    if alpha == 0.0:
        return complex(m)
    c = polarization_factor(cut.d)
    re = cut.radial_integral(lambda r: (1.0 / (z - r * r)).real, q, extra_power=0.0)
    im = cut.radial_integral(lambda r: (1.0 / (z - r * r)).imag, q) if z.imag != 0 else 0.0
    return complex(m) - alpha * alpha * c * complex(re, im)


def d_prime_of_z(cut: CutoffProfile, alpha: float, z: complex,
                 q: Quadrature = DEFAULT_QUAD) -> complex:
    """``D'(z) = α² c_d ∫ φ̂²/(z - ω²)² dk``."""
    z = _check_z(z)
    c = polarization_factor(cut.d)
    re = cut.radial_integral(lambda r: (1.0 / (z - r * r) ** 2).real, q)
    im = cut.radial_integral(lambda r: (1.0 / (z - r * r) ** 2).imag, q) if z.imag != 0 else 0.0
    return alpha * alpha * c * complex(re, im)


def _rho(cut: CutoffProfile):
    e = (cut.d - 2) / 2.0

    def rho(x):
        if x <= 0.0:
            return 0.0
        ph = cut(math.sqrt(x))
        return ph * ph * x ** e

    return rho


def h_rho(cut: CutoffProfile, s: float, q: Quadrature = DEFAULT_QUAD) -> float:
    """Hilbert transform ``PV ∫ ρ(x)/(s - x) dx`` of ``ρ(x) = φ̂(√x)² x^{(d-2)/2}``.

    At a jump of ``ρ`` (sharp band edges) the transform has a log
    singularity; points within ``1e-8`` of such an edge return ``∓inf``.
    """
    if s < 0:
        raise InvalidInput("s must be >= 0")
    rho = _rho(cut)
    lo, hi = cut.lam ** 2, cut.lam_max ** 2
    xpts = [b * b for b in cut.breakpoints]
    if cut.kind == "sharp":
        for edge, sign in ((lo, -1.0), (hi, 1.0)):
            if edge > 0 and abs(s - edge) <= EDGE_EPS * max(1.0, edge):
                return sign * math.inf
    if lo < s < hi:
        return integrate_pv(rho, lo, hi, s, q, xpts)
    return integrate(lambda x: rho(x) / (s - x), lo, hi, q, xpts)


def d_plus(cut: CutoffProfile, m: float, alpha: float, s: float,
           q: Quadrature = DEFAULT_QUAD) -> DispersionResult:
    """Boundary values ``D±(s) = m - (α²/2) c_d |S^{d-1}| (Hρ(s) ∓ iπ ρ(s))``."""
    if s < 0:
        raise InvalidInput("s must be >= 0")
    pref = 0.5 * alpha * alpha * polarization_factor(cut.d) * sphere_area(cut.d)
    if alpha == 0.0:
        dp = complex(m)
    else:
        h = h_rho(cut, s, q)
        r = _rho(cut)(s)
        dp = complex(m - pref * h, pref * math.pi * r)
    return DispersionResult(float(s), dp, dp.conjugate(), dp)


def h_rho_sharp(lam: float, lam_max: float, s: float) -> float:
    """Closed form of ``Hρ`` for ``ρ = 1_[lam², lam_max²](x) √x`` (d = 3)."""
    if s < 0:
        raise InvalidInput("s must be >= 0")
    if lam_max == lam:
        return 0.0
    k = math.sqrt(s)
    if abs(k - lam) <= EDGE_EPS * max(1.0, lam) and lam > 0:
        return -math.inf
    if abs(k - lam_max) <= EDGE_EPS * max(1.0, lam_max):
        return math.inf
    if k == 0.0:
        return -2.0 * (lam_max - lam)
    ratio = ((k + lam_max) * (k - lam)) / ((k + lam) * (k - lam_max))
    return -2.0 * (lam_max - lam) + k * math.log(abs(ratio))


def running_mass_sharp(m: float, alpha: float, lam: float, lam_max: float, k: float) -> complex:
    """Running effective mass ``D₊(|k|²)`` for the unit sharp band, d = 3."""
    k = abs(k)
    a2 = alpha * alpha
    if a2 == 0.0:
        return complex(m)
    h = h_rho_sharp(lam, lam_max, k * k)
    inside = 1.0 if lam <= k <= lam_max else 0.0
    return complex(m - (4.0 * math.pi * a2 / 3.0) * h,
                   (4.0 * math.pi ** 2 * a2 / 3.0) * inside * k)


def negative_mass_data(cut: CutoffProfile, m: float, alpha: float,
                       q: Quadrature = DEFAULT_QUAD, tol: float = 1e-12,
                       max_iter: int = 200) -> Tuple[float, float]:
    """Zero ``-E²`` of ``D`` on the negative axis and ``γ = D'(-E²)^{-1/2}``.

    Requires ``-c_d α² ||φ̂/ω||² < m < 0``.
    """
    c = polarization_factor(cut.d)
    n2 = weighted_norm(cut, 2, q)
    if not (m < 0 and m > -c * alpha * alpha * n2):
        raise NoRoot("mass outside (-c_d α² ||φ̂/ω||², 0)")

    def D(x):
        return d_of_z(cut, m, alpha, -x, q).real

    lo, hi = 0.0, 1.0
    while D(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise NoRoot("no sign change found")
    # D decreases from m_eff > 0 at x = 0 to m < 0 at infinity
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if D(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    E2 = 0.5 * (lo + hi)
    dp = d_prime_of_z(cut, alpha, -E2, q).real
    return math.sqrt(E2), 1.0 / math.sqrt(dp)
