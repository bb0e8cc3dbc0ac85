"""Birman-Schwinger analysis of binding for ``-Δ/(2m) + V`` in three dimensions.

``K_E = |V|^{1/2} (h₀ - E)^{-1} |V|^{1/2}`` with ``h₀ = -½Δ``. The resolvent
``2(-Δ + κ²)^{-1}``, ``κ = √(2|E|)``, has kernel ``e^{-κ|x-y|}/(2π|x-y|)``;
on radial functions ``ψ = u(r)/(√(4π) r)`` it becomes the continuous kernel

    k_E(r, r') = 2 sinh(κ r_<) e^{-κ r_>} / κ        (2 min(r, r') at E = 0)

which is discretized by Gauss-Legendre Nyström with ``√w`` symmetrization.
The critical mass is ``m_c = ||K_0||^{-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .dispersion import CutoffProfile, polarization_factor, weighted_norm
from .errors import InvalidInput, MassAboveCritical
from .numerics import DEFAULT_QUAD, Quadrature, integrate, op_norm, sym_eigen

__all__ = [
    "PotentialSpec",
    "BSOperator",
    "BindingReport",
    "bs_kernel",
    "bs_kernel_3d",
    "critical_mass",
    "lieb_bound",
    "coupling_window",
    "uv_window",
    "count_bs_eigenvalues",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Radial attractive potential ``V <= 0`` in three dimensions.

    ``spherical_well``: ``V = -V0 1_{r < R}``. ``tabulated_radial``: linear
    interpolation of samples ``(r_i, V_i)``, zero beyond the last node.
    """

    kind: str = "spherical_well"
    V0: float = 1.0
    R: float = 1.0
    r: Optional[Tuple[float, ...]] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind == "spherical_well":
            if not (self.V0 >= 0 and self.R > 0):
                raise InvalidInput("well needs V0 >= 0 and R > 0")
        elif self.kind == "tabulated_radial":
            if self.r is None or self.values is None:
                raise InvalidInput("tabulated potential needs r and values")
            r = np.asarray(self.r, float)
            v = np.asarray(self.values, float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2 or np.any(np.diff(r) <= 0) or r[0] < 0:
                raise InvalidInput("r must be increasing, nonnegative, same length as values")
            if np.any(v > 0):
                raise InvalidInput("potential must satisfy V <= 0")
            object.__setattr__(self, "r", tuple(float(x) for x in r))
            object.__setattr__(self, "values", tuple(float(x) for x in v))
        else:
            raise InvalidInput(f"unknown potential kind {self.kind!r}")

    @classmethod
    def well(cls, V0: float, R: float) -> "PotentialSpec":
        return cls("spherical_well", float(V0), float(R))

    @classmethod
    def tabulated(cls, r, values) -> "PotentialSpec":
        return cls("tabulated_radial", 0.0, float(np.asarray(r)[-1]), tuple(r), tuple(values))

    @property
    def r_max(self) -> float:
        return self.R if self.kind == "spherical_well" else self.r[-1]

    def __call__(self, r):
        r = np.asarray(r, float)
        if self.kind == "spherical_well":
            out = np.where(r < self.R, -self.V0, 0.0)
        else:
            out = np.interp(r, self.r, self.values, left=self.values[0], right=0.0)
        return out if out.ndim else float(out)

    def cell_average(self, lo, hi) -> np.ndarray:
        """Mean of ``V`` over ``[lo, hi]`` (exact for the well, midpoint otherwise)."""
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        if self.kind == "spherical_well":
            frac = np.clip((self.R - lo) / (hi - lo), 0.0, 1.0)
            return -self.V0 * frac
        return np.asarray(self(0.5 * (lo + hi)), float)

    def scaled(self, kappa: float) -> "PotentialSpec":
        """``V_κ(x) = V(x/κ)/κ²``."""
        if self.kind == "spherical_well":
            return PotentialSpec.well(self.V0 / kappa ** 2, self.R * kappa)
        return PotentialSpec.tabulated(np.asarray(self.r) * kappa,
                                       np.asarray(self.values) / kappa ** 2)

    def norm_3_2(self, q: Quadrature = DEFAULT_QUAD) -> float:
        """``||V||_{3/2}``."""
        if self.kind == "spherical_well":
            return (4.0 * math.pi / 3.0 * self.R ** 3 * self.V0 ** 1.5) ** (2.0 / 3.0)
        val = integrate(lambda r: 4 * math.pi * r * r * abs(self(r)) ** 1.5,
                        0.0, self.r_max, q, points=self.r[:100])
        return val ** (2.0 / 3.0)


@dataclass
class BSOperator:
    E: float
    nodes: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size

    def norm(self, tol: float = 1e-12) -> float:
        if not np.any(self.kernel):
            return 0.0
        K = self.kernel
        return op_norm(lambda x: K @ x, self.size, tol)

    def eigenvalues(self) -> np.ndarray:
        return sym_eigen(self.kernel)[0]


def _gauss_nodes(V: PotentialSpec, n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    R = V.r_max
    return 0.5 * R * (x + 1.0), 0.5 * R * w


def radial_kernel(r: np.ndarray, s: np.ndarray, E: float) -> np.ndarray:
    """s-wave resolvent kernel ``2 sinh(κ r_<) e^{-κ r_>}/κ``."""
    lo = np.minimum(r[:, None], s[None, :])
    hi = np.maximum(r[:, None], s[None, :])
    if E == 0.0:
        return 2.0 * lo
    kap = math.sqrt(2.0 * abs(E))
    return (np.exp(-kap * (hi - lo)) - np.exp(-kap * (hi + lo))) / kap


def bs_kernel(V: PotentialSpec, E: float, grid_size: int = 400) -> BSOperator:
    """Nyström matrix of ``K_E`` restricted to the s-wave sector."""
    if E > 0:
        raise InvalidInput("E must be <= 0")
    if grid_size < 2:
        raise InvalidInput("grid_size must be >= 2")
    r, w = _gauss_nodes(V, grid_size)
    sv = np.sqrt(np.abs(V(r))) * np.sqrt(w)
    K = sv[:, None] * radial_kernel(r, r, E) * sv[None, :]
    K = 0.5 * (K + K.T)
    return BSOperator(float(E), r, w, K)


@lru_cache(maxsize=1)
def _cube_self_constant() -> float:
    """Mean of ``1/|x-y|`` for ``x, y`` uniform in the unit cube."""
    from scipy.integrate import nquad

    def f(a, b, c):
        r = math.sqrt(a * a + b * b + c * c)
        return 0.0 if r == 0 else (1 - a) * (1 - b) * (1 - c) / r

    val, _ = nquad(f, [[0, 1]] * 3, opts={"epsabs": 1e-11, "epsrel": 1e-11})
    return 8.0 * val


def bs_kernel_3d(V: PotentialSpec, E: float, cells: int = 12, sub: int = 8) -> np.ndarray:
    """Coarse full three-dimensional Galerkin matrix of ``K_E`` on cubic cells.

    Cells of side ``h`` cover ``[-R, R]³``; each carries the fraction of its
    volume where ``V ≠ 0``. The diagonal uses the exact cell self-average of
    ``1/|x-y|``.
    """
    R = V.r_max
    h = 2.0 * R / cells
    c = -R + h * (np.arange(cells) + 0.5)
    X = np.stack(np.meshgrid(c, c, c, indexing="ij"), axis=-1).reshape(-1, 3)
    t = (np.arange(sub) + 0.5) / sub - 0.5
    U = h * np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
    avgV = np.array([np.mean(np.abs(V(np.linalg.norm(x + U, axis=1)))) for x in X])
    keep = avgV > 0
    X, avgV = X[keep], avgV[keep]
    kap = math.sqrt(2.0 * abs(E))
    dist = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)
    G = np.exp(-kap * dist) / (2.0 * math.pi * dist) * h ** 3
    np.fill_diagonal(G, _cube_self_constant() * h ** 2 / (2.0 * math.pi))
    sv = np.sqrt(avgV)
    return sv[:, None] * G * sv[None, :]


def critical_mass(V: PotentialSpec, eps: float = 0.0, grid_size: int = 400,
                  tol: float = 1e-12) -> dict:
    """``m_c = ||K_0||^{-1}`` and ``m_ε = ||K_{-ε}||^{-1}``.

    Also reports the estimate at ``grid_size // 2`` and a Richardson
    extrapolation of ``m_c`` assuming an ``O(n^{-2})`` error (the kernel has
    a kink on the diagonal).
    """
    if eps < 0:
        raise InvalidInput("eps must be >= 0")
    n0 = bs_kernel(V, 0.0, grid_size).norm(tol)
    if n0 == 0.0:
        return {"m_c": math.inf, "m_eps": math.inf, "m_c_coarse": math.inf,
                "m_c_extrapolated": math.inf, "grid_size": grid_size}
    ne = bs_kernel(V, -eps, grid_size).norm(tol) if eps > 0 else n0
    half = max(2, grid_size // 2)
    mc_coarse = 1.0 / bs_kernel(V, 0.0, half).norm(tol)
    mc = 1.0 / n0
    ratio = (grid_size / half) ** 2
    extrap = (ratio * mc - mc_coarse) / (ratio - 1.0)
    return {"m_c": mc, "m_eps": 1.0 / ne, "m_c_coarse": mc_coarse,
            "m_c_extrapolated": extrap, "grid_size": grid_size}


LIEB_CONSTANT = 3.0 / (math.sqrt(2.0) * math.pi ** (2.0 / 3.0) * 4.0 ** (5.0 / 3.0))


def lieb_bound(V: PotentialSpec, q: Quadrature = DEFAULT_QUAD) -> float:
    """Lower bound ``m_c >= 3/(√2 π^{2/3} 4^{5/3}) ||V||_{3/2}^{-2}``."""
    n = V.norm_3_2(q)
    if n == 0.0:
        return math.inf
    return LIEB_CONSTANT / n ** 2


def count_bs_eigenvalues(V: PotentialSpec, m: float, E: float, grid_size: int = 400) -> int:
    """Number of eigenvalues of ``K_E`` that are ``>= 1/m``.

    Equals the number of s-wave eigenvalues of ``-Δ/(2m) + V`` at or below
    ``E/m``.
    """
    if m <= 0:
        raise InvalidInput("m must be positive")
    if E >= 0:
        raise InvalidInput("counting needs E < 0")
    ev = bs_kernel(V, E, grid_size).eigenvalues()
    return int(np.sum(ev >= 1.0 / m))


@dataclass(frozen=True)
class BindingReport:
    m_eff: float
    m_c: float
    m_eps: float
    alpha0: float
    alpha_eps: float
    lam_bound: float
    verdict: str

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("m_eff", "m_c", "m_eps", "alpha0", "alpha_eps", "lam_bound", "verdict")}


def _verdict(alpha: float, a0: float, ae: float) -> str:
    a = abs(alpha)
    if a < a0:
        return "no_ground_state"
    if a > ae:
        return "ground_state_large_scale"
    return "undecided"


def coupling_window(cut: CutoffProfile, V: PotentialSpec, m: float, eps: float,
                    alpha: float = 0.0, grid_size: int = 400,
                    q: Quadrature = DEFAULT_QUAD, lam_family: Optional[float] = None) -> BindingReport:
    """Coupling thresholds ``α₀ < α_ε`` and the verdict for ``alpha``.

    ``α₀ = (c n)^{-1/2} √(m_c - m)`` and ``α_ε = (c n)^{-1/2} √(m_ε - m)`` with
    ``n = ||φ̂/ω||²``. ``|α| < α₀`` is equivalent to ``m_eff < m_c`` (no ground
    state); ``|α| > α_ε`` gives a ground state once the potential is scaled
    out far enough.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    cm = critical_mass(V, eps, grid_size)
    mc, me = cm["m_c"], cm["m_eps"]
    if m >= mc:
        raise MassAboveCritical(f"m = {m} >= m_c = {mc}")
    cn = polarization_factor(cut.d) * weighted_norm(cut, 2, q)
    a0 = math.sqrt((mc - m) / cn)
    ae = math.sqrt((me - m) / cn)
    meff = m + alpha * alpha * cn
    lam_bound = math.nan
    if cut.kind == "sharp" and cut.d == 3 and cut.power == 0.0 and alpha != 0.0:
        lam_bound = uv_window(mc, m, alpha, cut.lam, cut.normalization)["lam_no_gs"]
    return BindingReport(meff, mc, me, a0, ae, lam_bound, _verdict(alpha, a0, ae))


def uv_window(m_c: float, m: float, alpha: float, lam: float,
              normalization: float = 1.0) -> dict:
    """UV threshold below which no ground state exists (sharp band, d = 3).

    From ``m_eff = m + (8π/3) n² α² (Λ - λ) < m_c``:
    ``Λ_no_gs = (3/(8π n²)) α^{-2} (m_c - m) + λ``. The existence side only
    guarantees some finite ``Λ_*`` and is not computable here.
    """
    if m >= m_c:
        raise MassAboveCritical(f"m = {m} >= m_c = {m_c}")
    if alpha == 0.0:
        return {"lam_no_gs": math.inf, "note": "no coupling: never bound"}
    lam_no = 3.0 / (8.0 * math.pi * normalization ** 2) * (m_c - m) / alpha ** 2 + lam
    return {"lam_no_gs": lam_no,
            "note": "ground state exists for some finite larger cutoff; threshold not computable"}
