"""Shared numerical kernels.

Adaptive quadrature (with a principal-value variant), the sine integral,
a few Bessel orders, dense symmetric eigendecomposition, PSD square roots
and a power-iteration operator norm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import linalg as _sla
from scipy import special as _sps

from .errors import (
    InvalidInput,
    NegativeEigenvalue,
    NonConvergence,
    SingularityAtEndpoint,
    UnsupportedOrder,
)

__all__ = [
    "Quadrature",
    "integrate",
    "integrate_pv",
    "sine_integral",
    "bessel_j",
    "sym_eigen",
    "jacobi_eigen",
    "psd_sqrt",
    "op_norm",
]


@dataclass(frozen=True)
class Quadrature:
    """Tolerances for adaptive quadrature.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Target absolute and relative error. At least one must be positive.
    max_subdivisions : int
        Cap on the number of adaptive subintervals.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 500

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or self.abs_tol + self.rel_tol <= 0:
            raise InvalidInput("quadrature tolerances must be >= 0 with a positive sum")
        if self.max_subdivisions <= 0:
            raise InvalidInput("max_subdivisions must be positive")

    def bound(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_QUAD = Quadrature()


def _quad_finite(g, a, b, q: Quadrature, points=None):
    pts = None
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if not pts:
            pts = None
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            val, err = _spi.quad(
                g, a, b, epsabs=q.abs_tol, epsrel=q.rel_tol,
                limit=q.max_subdivisions, points=pts,
            )
        except _spi.IntegrationWarning as exc:
            # quad warns on roundoff even when the estimate is fine; re-run
            # silently and judge by the returned error estimate.
            warnings.simplefilter("ignore", _spi.IntegrationWarning)
            val, err = _spi.quad(
                g, a, b, epsabs=q.abs_tol, epsrel=q.rel_tol,
                limit=q.max_subdivisions, points=pts,
            )
            if not np.isfinite(val):
                raise InvalidInput("integrand produced a non-finite value") from exc
            if err > q.bound(val):
                raise NonConvergence(
                    f"quadrature error estimate {err:.3e} above tolerance: {exc}"
                ) from exc
    if not np.isfinite(val):
        raise InvalidInput("integrand produced a non-finite value")
    if err > q.bound(val):
        raise NonConvergence(f"quadrature error estimate {err:.3e} above tolerance")
    return float(val), float(err)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    q: Quadrature = DEFAULT_QUAD,
    points: Optional[Sequence[float]] = None,
    return_error: bool = False,
):
    """Integrate ``f`` over ``(a, b)``; ``b`` may be ``inf``.

    A semi-infinite range is mapped onto ``(0, 1)`` by ``x = a + t/(1-t)``.
    ``points`` lists interior breakpoints (in ``x``).

    Raises
    ------
    InvalidInput
        NaN bounds or a non-finite integrand value.
    NonConvergence
        Error estimate above the requested tolerance.
    """
    if any(isinstance(v, float) and math.isnan(v) for v in (a, b)):
        raise InvalidInput("NaN integration bound")
    if a == b:
        return (0.0, 0.0) if return_error else 0.0
    if a > b:
        res = integrate(f, b, a, q, points, return_error=True)
        return (-res[0], res[1]) if return_error else -res[0]

    def checked(x):
        y = f(x)
        if y != y:
            raise InvalidInput(f"integrand is NaN at x={x!r}")
        return y

    if math.isinf(a):
        if math.isinf(b):
            left = integrate(f, -math.inf, 0.0, q, None, True)
            right = integrate(f, 0.0, math.inf, q, None, True)
            out = (left[0] + right[0], left[1] + right[1])
            return out if return_error else out[0]
        res = integrate(lambda y: f(-y), -b, math.inf, q, None, True)
        return res if return_error else res[0]

    if math.isinf(b):
        def g(t):
            if t >= 1.0:
                return 0.0
            u = 1.0 - t
            return checked(a + t / u) / (u * u)

        tpts = None
        if points is not None:
            tpts = [(p - a) / (1.0 + p - a) for p in points if p > a]
        val, err = _quad_finite(g, 0.0, 1.0, q, tpts)
    else:
        val, err = _quad_finite(checked, a, b, q, points)
    return (val, err) if return_error else val


def integrate_pv(
    f: Callable[[float], float],
    a: float,
    b: float,
    s: float,
    q: Quadrature = DEFAULT_QUAD,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Principal value of ``∫_a^b f(x)/(s - x) dx``.

    The symmetric part ``∫_0^h [f(s-u) - f(s+u)]/u du`` with
    ``h = min(s-a, b-s)`` is integrated directly; the remaining one-sided
    piece is an ordinary integral.

    Raises
    ------
    SingularityAtEndpoint
        If ``s`` is not strictly inside ``(a, b)``.
    """
    if not (a < s < b):
        raise SingularityAtEndpoint(f"singular point {s!r} not inside ({a!r}, {b!r})")
    h = min(s - a, b - s)
    upts = None
    if points is not None:
        upts = [abs(p - s) for p in points if 0 < abs(p - s) < h]

    def sym(u):
        return (f(s - u) - f(s + u)) / u

    total = integrate(sym, 0.0, h, q, upts)
    if s - a > h:
        total += integrate(lambda x: f(x) / (s - x), a, s - h, q, points)
    if b - s > h:
        total += integrate(lambda x: f(x) / (s - x), s + h, b, q, points)
    return total


def sine_integral(x: float) -> float:
    """Si(x) = ∫_0^x sin t / t dt."""
    if not np.isfinite(x):
        raise InvalidInput("Si requires a finite argument")
    return float(_sps.sici(x)[0])


_BESSEL_ORDERS = (0.5, 1.0, 1.5, 2.0)


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind for orders 1/2, 1, 3/2, 2.

    These are the orders (d-2)/2 for d = 3..6.
    """
    if not any(abs(nu - o) < 1e-14 for o in _BESSEL_ORDERS):
        raise UnsupportedOrder(f"order {nu!r} not in {_BESSEL_ORDERS}")
    if x < 0 or not np.isfinite(x):
        raise InvalidInput("x must be finite and >= 0")
    return float(_sps.jv(nu, x))


def _as_sym(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidInput("expected a nonempty square matrix")
    if not np.array_equal(A, A.T):
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise InvalidInput("matrix is not symmetric")
        A = 0.5 * (A + A.T)
    return A


def jacobi_eigen(A, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors (columns).
    """
    A = _as_sym(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    prev = math.inf
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol * scale:
            break
        if off >= prev and off <= 1e-12 * scale:
            # stalled at roundoff level
            break
        prev = off
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = A[p, r]
                if abs(apr) <= 1e-300:
                    continue
                theta = (A[r, r] - A[p, p]) / (2.0 * apr)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                ap = A[:, p].copy()
                ar = A[:, r].copy()
                A[:, p] = c * ap - sn * ar
                A[:, r] = sn * ap + c * ar
                ap = A[p, :].copy()
                ar = A[r, :].copy()
                A[p, :] = c * ap - sn * ar
                A[r, :] = sn * ap + c * ar
                A[p, r] = A[r, p] = 0.0
                vp = V[:, p].copy()
                vr = V[:, r].copy()
                V[:, p] = c * vp - sn * vr
                V[:, r] = sn * vp + c * vr
    else:
        raise NonConvergence("Jacobi sweeps did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


JACOBI_MAX_ORDER = 48


def sym_eigen(A, method: str = "auto"):
    """Eigendecomposition ``A = Q diag(w) Q^T`` with ascending ``w``.

    Parameters
    ----------
    method : {"auto", "jacobi", "lapack"}
        ``auto`` uses cyclic Jacobi up to order 48 and LAPACK beyond.
    """
    A = _as_sym(A)
    if method == "auto":
        method = "jacobi" if A.shape[0] <= JACOBI_MAX_ORDER else "lapack"
    if method == "jacobi":
        return jacobi_eigen(A)
    if method == "lapack":
        try:
            w, Q = _sla.eigh(A)
        except _sla.LinAlgError as exc:
            raise NonConvergence(str(exc)) from exc
        return w, Q
    raise InvalidInput(f"unknown method {method!r}")


def psd_sqrt(A, method: str = "auto") -> np.ndarray:
    """Square root of a symmetric positive semidefinite matrix.

    Eigenvalues down to ``-1e-12 * ||A||`` are clamped to zero.
    """
    A = _as_sym(A)
    w, Q = sym_eigen(A, method)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w[0] < -1e-12 * scale:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3e} below clamp threshold")
    r = np.sqrt(np.clip(w, 0.0, None))
    out = (Q * r) @ Q.T
    return 0.5 * (out + out.T)


def psd_sqrt_trace(A, method: str = "auto") -> float:
    """``tr √A`` from the clamped spectrum."""
    A = _as_sym(A)
    w, _ = sym_eigen(A, method)
    scale = float(np.max(np.abs(w)))
    if w[0] < -1e-12 * scale:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3e} below clamp threshold")
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def op_norm(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = 1e-10,
    max_iter: int = 100000,
) -> float:
    """Largest eigenvalue of a symmetric positive map by power iteration.

    The start vector is the normalized all-ones vector, so results are
    reproducible.
    """
    if dim <= 0:
        raise InvalidInput("dim must be positive")
    x = np.full(dim, 1.0 / math.sqrt(dim))
    lam_old = None
    for _ in range(max_iter):
        y = np.asarray(apply(x), dtype=float)
        lam = float(x @ y)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0
        x = y / ny
        if lam_old is not None and abs(lam - lam_old) <= tol * abs(lam):
            return lam
        lam_old = lam
    raise NonConvergence("power iteration hit the iteration cap")
