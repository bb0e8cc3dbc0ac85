"""Effective potentials, cluster energies and enhanced binding in the Nelson model.

Particles interact with a scalar field through cutoffs ``λ̂_j`` (functions of
``|k|``, real). Integrating out the field at weak coupling produces the pair
potentials

    V_eff_ij(x) = -¼ α_i α_j ∫ λ̂_i(k) λ̂_j(k) / ω(k) e^{-ik·x} dk,   ω(k) = |k|,

and the constant ``G = -¼ Σ_j α_j² ∫ λ̂_j² / ω``. For two identical particles
the binding question reduces to radial problems in Jacobi coordinates; all
eigenproblems here are ``ℓ``-wave finite differences on ``(0, r_max)``.
Energies of the two-body system are measured relative to ``G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as si
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eigh_tridiagonal
from scipy.special import sici

from .binding import PotentialSpec
from .dispersion import CutoffProfile
from .errors import (
    DimensionMismatch,
    DivergentIntegral,
    GridTooCoarse,
    InvalidInput,
    NonConvergence,
    UnsupportedN,
)
from .numerics import DEFAULT_QUAD, Quadrature, integrate

__all__ = [
    "NelsonConfig",
    "RadialProblem",
    "RadialGrid",
    "lambda_norm_sq",
    "shell_average",
    "veff_pair",
    "veff_sharp3d",
    "pair_potential",
    "constant_G",
    "radial_ground_energy",
    "radial_solve",
    "stability_check",
    "alpha_sweep",
    "heuristic_mass_lump",
    "nelson_cutoff",
]

NELSON_NORM = (2.0 * math.pi) ** -1.5


def nelson_cutoff(kappa: float, lam_max: float, normalization: float = NELSON_NORM) -> CutoffProfile:
    """``λ̂ = ρ/√ω`` with ``ρ = normalization · 1_[κ, Λ]``."""
    return CutoffProfile.sharp(kappa, lam_max, 3, normalization, -0.5)


def _check3(*cuts: CutoffProfile):
    for c in cuts:
        if c.d != 3:
            raise InvalidInput("Nelson cutoffs live in three dimensions")


# -- effective potentials --------------------------------------------------


def _common_support(ci: CutoffProfile, cj: CutoffProfile) -> Tuple[float, float]:
    return max(ci.lam, cj.lam), min(ci.lam_max, cj.lam_max)


def veff_pair(ci: CutoffProfile, cj: CutoffProfile, alpha_i: float, alpha_j: float,
              x: float, q: Quadrature = DEFAULT_QUAD) -> float:
    """Radial form ``-π α_i α_j ∫ λ̂_i λ̂_j r sinc(rx) dr`` of the pair potential."""
    _check3(ci, cj)
    x = float(x)
    if x < 0:
        raise InvalidInput("x must be >= 0")
    lo, hi = _common_support(ci, cj)
    if lo >= hi or alpha_i * alpha_j == 0.0:
        return 0.0
    pts = sorted({p for p in ci.breakpoints + cj.breakpoints if lo < p < hi})
    pref = -math.pi * alpha_i * alpha_j

    def g(r):
        return float(ci(r)) * float(cj(r)) * r if r > 0 else 0.0

    if x == 0.0:
        return pref * integrate(g, lo, hi, q, pts or None)
    # oscillatory weight sin(xr); the 1/(xr) goes into the amplitude
    edges = [lo] + pts + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = si.quad(lambda r: g(r) / (x * r) if r > 0 else 0.0, a, b,
                           weight="sin", wvar=x, epsabs=q.abs_tol, epsrel=q.rel_tol,
                           limit=q.max_subdivisions)
        if err > q.bound(val):
            raise NonConvergence(f"pair potential quadrature error {err:.2e}")
        total += val
    return pref * total


def veff_sharp3d(alpha_i: float, alpha_j: float, kappa_ir: float, lam_max: float, x) -> np.ndarray:
    """Closed form ``-(α_iα_j/(8π²x)) [Si(Λx) - Si(κx)]`` for ``ρ = (2π)^{-3/2}1_[κ,Λ]``."""
    x = np.asarray(x, float)
    if np.any(x < 0):
        raise InvalidInput("x must be >= 0")
    c = -alpha_i * alpha_j / (8.0 * math.pi ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (sici(lam_max * x)[0] - sici(kappa_ir * x)[0]) / x
    out = np.where(x > 0, val, lam_max - kappa_ir) * c
    return out if out.ndim else float(out)


def pair_potential(cut: CutoffProfile, x, q: Quadrature = DEFAULT_QUAD) -> np.ndarray:
    """Pair potential per unit coupling, ``W(x) = V_eff(x)`` at ``α_i = α_j = 1``.

    Sharp ``ρ/√ω`` profiles use the sine-integral closed form (rescaled to
    the profile's normalization); anything else goes through
    :func:`veff_pair` pointwise.
    """
    x = np.asarray(x, float)
    if cut.kind == "sharp" and cut.power == -0.5:
        scale = (cut.normalization / NELSON_NORM) ** 2
        return scale * np.asarray(veff_sharp3d(1.0, 1.0, cut.lam, cut.lam_max, x))
    flat = np.array([veff_pair(cut, cut, 1.0, 1.0, float(v), q) for v in x.ravel()])
    return flat.reshape(x.shape)


# -- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class NelsonConfig:
    """``N`` particles with masses, couplings, cutoffs and external potentials."""

    N: int
    masses: Tuple[float, ...]
    couplings: Tuple[float, ...]
    cutoffs: Tuple[CutoffProfile, ...]
    external: Tuple[PotentialSpec, ...]

    def __post_init__(self):
        if self.N < 1:
            raise InvalidInput("N must be >= 1")
        for name in ("masses", "couplings", "cutoffs", "external"):
            seq = tuple(getattr(self, name))
            if len(seq) != self.N:
                raise DimensionMismatch(f"{name} must have N = {self.N} entries")
            object.__setattr__(self, name, seq)
        if any(not m > 0 for m in self.masses):
            raise InvalidInput("masses must be positive")
        _check3(*self.cutoffs)
        for c in self.cutoffs:
            # λ and λ/√ω square integrable
            c.radial_integral(lambda r: 1.0)
            c.radial_integral(lambda r: 1.0 / r, extra_power=-1.0)

    @classmethod
    def identical(cls, N: int, m: float, alpha: float, cut: CutoffProfile,
                  V: PotentialSpec) -> "NelsonConfig":
        return cls(N, (float(m),) * N, (float(alpha),) * N, (cut,) * N, (V,) * N)

    def with_alpha(self, alpha: float) -> "NelsonConfig":
        return NelsonConfig(self.N, self.masses, (float(alpha),) * self.N, self.cutoffs,
                            self.external)


def lambda_norm_sq(cut: CutoffProfile, q: Quadrature = DEFAULT_QUAD) -> float:
    """``||λ̂||² = ∫ λ̂(k)² dk``."""
    return cut.radial_integral(lambda r: 1.0, q)


def constant_G(cfg: NelsonConfig, q: Quadrature = DEFAULT_QUAD) -> float:
    """``G = -¼ Σ_j α_j² ∫ λ̂_j²/ω``; each term equals ``V_eff_jj(0)``."""
    total = 0.0
    for a, c in zip(cfg.couplings, cfg.cutoffs):
        if a == 0.0:
            continue
        if c.lam == 0.0 and c.small_r_exponent() * 2 + 1 <= -1:
            raise DivergentIntegral("λ²/ω not integrable at the origin")
        total += -0.25 * a * a * c.radial_integral(lambda r: 1.0 / r, q, extra_power=-1.0)
    return total


# -- radial eigenproblems --------------------------------------------------


@dataclass(frozen=True)
class RadialProblem:
    """``-(1/2μ) u'' + V(r) u = E u`` on ``(0, r_max)`` with Dirichlet ends.

    ``potential`` is a vectorized callable of ``r``. ``edge_tol`` bounds
    ``|V(r_max)|`` relative to ``max |V|`` on the grid.
    """

    mu: float
    potential: Callable[[np.ndarray], np.ndarray]
    r_max: float
    nodes: int = 2000
    edge_tol: float = 1e-2

    def __post_init__(self):
        if not self.mu > 0 or not self.r_max > 0:
            raise InvalidInput("mu and r_max must be positive")
        if self.nodes < 200:
            raise InvalidInput("nodes must be >= 200")


def _fd_lowest(prob: RadialProblem, n: int, ell: int) -> Tuple[float, np.ndarray, np.ndarray]:
    h = prob.r_max / (n + 1)
    r = h * np.arange(1, n + 1)
    avg = getattr(prob.potential, "cell_average", None)
    # exact cell averages keep jumps (square wells) from spoiling the order
    V = np.asarray(avg(r - 0.5 * h, r + 0.5 * h) if avg else prob.potential(r), float)
    if not np.all(np.isfinite(V)):
        raise InvalidInput("potential not finite on the grid")
    kin = 1.0 / (2.0 * prob.mu * h * h)
    diag = 2.0 * kin + V + ell * (ell + 1) / (2.0 * prob.mu * r * r)
    off = np.full(n - 1, -kin)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    u = v[:, 0] / math.sqrt(h)
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return float(w[0]), r, u


def radial_solve(prob: RadialProblem, ell: int = 0, tol: Optional[float] = None) -> dict:
    """Lowest ``ℓ``-wave level with a grid-refinement check.

    Solves on ``nodes`` and ``2·nodes + 1`` interior points (the coarse grid
    is a subset of the fine one). A lowest level ``>= -3·shift`` is reported
    as the continuum edge ``0``.

    Returns
    -------
    dict
        ``energy`` (with the edge convention), ``raw`` (fine-grid eigenvalue),
        ``coarse``, ``shift``, ``extrapolated`` (one Richardson step, order 2),
        ``bound`` and the fine-grid ``r``, ``u`` (``∫u² dr = 1``).

    Raises
    ------
    GridTooCoarse
        If ``shift`` exceeds ``tol`` (default ``1e-3·max(1, |E|)``).
    """
    if ell < 0:
        raise InvalidInput("ell must be >= 0")
    edge = abs(float(prob.potential(np.array([prob.r_max]))[0]))
    h = prob.r_max / (prob.nodes + 1)
    peak = float(np.max(np.abs(prob.potential(h * np.arange(1, prob.nodes + 1)))))
    if peak > 0 and edge > prob.edge_tol * peak:
        raise InvalidInput("potential does not decay at r_max")
    E1, _, _ = _fd_lowest(prob, prob.nodes, ell)
    E2, r, u = _fd_lowest(prob, 2 * prob.nodes + 1, ell)
    shift = abs(E2 - E1)
    lim = 1e-3 * max(1.0, abs(E2)) if tol is None else tol
    if shift > lim:
        raise GridTooCoarse(f"eigenvalue moved by {shift:.3e} under refinement")
    bound = E2 < -3.0 * shift
    return {"energy": E2 if bound else 0.0, "raw": E2, "coarse": E1, "shift": shift,
            "extrapolated": (4.0 * E2 - E1) / 3.0, "bound": bool(bound), "r": r, "u": u}


def radial_ground_energy(prob: RadialProblem, ell: int = 0, tol: Optional[float] = None) -> float:
    """Lowest level of :class:`RadialProblem` (``0`` when unbound)."""
    return radial_solve(prob, ell, tol)["energy"]


# -- two-body stability ----------------------------------------------------


def _antiderivative(V: PotentialSpec, s_max: float, n: int = 40001) -> Callable:
    """``P(b) = ∫_0^b V(s) s ds`` as a vectorized callable."""
    if V.kind == "spherical_well":
        V0, R = V.V0, V.R
        return lambda b: -0.5 * V0 * np.minimum(np.asarray(b, float), R) ** 2
    s = np.linspace(0.0, s_max, n)
    P = cumulative_trapezoid(np.asarray(V(s)) * s, s, initial=0.0)
    return lambda b: np.interp(b, s, P)


def shell_average(V: PotentialSpec, X: np.ndarray, a: np.ndarray, s_max: float) -> np.ndarray:
    """Mean of ``V`` over the sphere of radius ``a`` centred at distance ``X``."""
    P = _antiderivative(V, s_max)
    X, a = np.broadcast_arrays(np.asarray(X, float), np.asarray(a, float))
    tiny = 1e-12
    num = P(X + a) - P(np.abs(X - a))
    den = 2.0 * np.maximum(X * a, tiny)
    centre = np.asarray(V(np.maximum(X, a)), float)
    return np.where(X * a > tiny, num / den, centre)


@dataclass(frozen=True)
class RadialGrid:
    r_max: float = 20.0
    nodes: int = 2000


def stability_check(cfg: NelsonConfig, kappa_scale: float = 1.0,
                    rel: RadialGrid = RadialGrid(), cm: RadialGrid = RadialGrid(),
                    q: Quadrature = DEFAULT_QUAD) -> dict:
    """Two-cluster threshold, two-body energy and the stability margin for ``N = 2``.

    With ``μ = m/2`` and ``W`` the pair potential per unit coupling:

    * ``E_rel``: ground level of ``-Δ/(2μ) + 2α²W`` (the free pair, centre of
      mass at rest),
    * ``E_single``: ground level of ``-Δ/2m + V``,
    * ``Ξ_V = min(E_rel, E_single)``,
    * ``E_V = min(Ξ_V, E_rel + E_cm)``, where ``E_cm`` is the ground level of
      ``-Δ/(4m) + U`` and ``U`` averages ``V(X + r/2) + V(X - r/2)`` over the
      pair density (product trial state, an upper bound on the true level),
    * ``Δ_p = Ξ_V - E_V`` and ``kappa_ok = Δ_p > Σ α²||λ̂||²/(4mκ²)``.

    ``variational_gap = Ξ_V - (E_rel + E_cm)`` is signed; it crosses zero at
    the coupling where the trial state first beats the threshold.
    """
    if cfg.N != 2:
        raise UnsupportedN("stability analysis implemented for N = 2 only")
    m, alpha, cut, V = cfg.masses[0], cfg.couplings[0], cfg.cutoffs[0], cfg.external[0]
    if len(set(cfg.masses)) != 1 or len(set(cfg.couplings)) != 1 \
            or cfg.cutoffs[1] != cut or cfg.external[1] != V:
        raise InvalidInput("N = 2 analysis needs identical particles")
    if not kappa_scale > 0:
        raise InvalidInput("kappa_scale must be positive")
    mu = m / 2.0
    a2 = alpha * alpha

    def W2(r):
        return 2.0 * a2 * pair_potential(cut, r, q)

    pair = radial_solve(RadialProblem(mu, W2, rel.r_max, rel.nodes))
    single = radial_solve(RadialProblem(m, V, cm.r_max, cm.nodes))
    E_rel, E_single = pair["energy"], single["energy"]
    xi = min(E_rel, E_single)
    E_cm = 0.0
    trial = math.inf
    if pair["bound"]:
        r, u = pair["r"], pair["u"]
        h = r[1] - r[0]
        dens = u * u * h
        s_max = cm.r_max + 0.5 * r[-1] + 1.0

        # tabulate the folded potential once, interpolate onto the solver grids
        Xt = np.linspace(0.0, cm.r_max, 801)
        Ut = 2.0 * (shell_average(V, Xt[:, None], 0.5 * r[None, :], s_max) @ dens)

        def U(X):
            return np.interp(X, Xt, Ut)

        E_cm = radial_solve(RadialProblem(2.0 * m, U, cm.r_max, cm.nodes))["energy"]
        trial = E_rel + E_cm
    E_V = min(xi, trial)
    delta = xi - E_V
    margin = 2.0 * a2 * lambda_norm_sq(cut, q) / (4.0 * m * kappa_scale ** 2)
    return {"Xi_V": xi, "E_V": E_V, "delta_p": delta, "kappa_ok": bool(delta > margin),
            "margin": margin, "E_rel": E_rel, "E_single": E_single, "E_cm": E_cm,
            "variational_gap": xi - trial if math.isfinite(trial) else None, "W0": float(pair_potential(cut, 0.0, q)),
            "G": constant_G(cfg, q)}


def alpha_sweep(cfg: NelsonConfig, alphas: Sequence[float], kappa_scale: float = 1.0,
                rel: RadialGrid = RadialGrid(), cm: RadialGrid = RadialGrid(),
                bisect_steps: int = 0, q: Quadrature = DEFAULT_QUAD) -> dict:
    """``Δ_p`` over a coupling grid and the onset ``α_c`` of enhanced binding.

    ``α_c`` is bracketed by the last grid point with ``Δ_p = 0`` and the first
    with ``Δ_p > 0``; ``bisect_steps`` halvings shrink the bracket.
    """
    alphas = [float(a) for a in alphas]
    if sorted(alphas) != alphas or len(alphas) < 2:
        raise InvalidInput("alphas must be increasing, at least two values")
    rows = [stability_check(cfg.with_alpha(a), kappa_scale, rel, cm, q) for a in alphas]
    deltas = [r["delta_p"] for r in rows]
    bracket = None
    for i in range(1, len(alphas)):
        if deltas[i - 1] <= 0.0 < deltas[i]:
            bracket = [alphas[i - 1], alphas[i]]
            break
    if bracket is not None:
        for _ in range(bisect_steps):
            mid = 0.5 * (bracket[0] + bracket[1])
            if stability_check(cfg.with_alpha(mid), kappa_scale, rel, cm, q)["delta_p"] > 0:
                bracket[1] = mid
            else:
                bracket[0] = mid
    return {"alpha": alphas, "rows": rows, "delta_p": deltas,
            "alpha_c": None if bracket is None else 0.5 * (bracket[0] + bracket[1]),
            "bracket": bracket,
            "ratio_E_rel": [r["E_rel"] / a ** 2 if a else 0.0 for r, a in zip(rows, alphas)]}


def heuristic_mass_lump(cfg: NelsonConfig, grid: RadialGrid = RadialGrid()) -> float:
    """Ground level of ``-Δ/(2Σm_j) + Σ V_j`` (diagnostic only)."""
    M = float(sum(cfg.masses))
    return radial_ground_energy(RadialProblem(M, _SumPotential(cfg.external), grid.r_max, grid.nodes))


class _SumPotential:
    def __init__(self, parts):
        self.parts = tuple(parts)

    def __call__(self, r):
        return np.sum([np.asarray(v(r), float) for v in self.parts], axis=0)

    def cell_average(self, lo, hi):
        return np.sum([np.asarray(v.cell_average(lo, hi), float) for v in self.parts], axis=0)
