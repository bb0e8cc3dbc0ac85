"""Truncated bosonic Fock space over ``M`` modes.

States are occupation tuples ``(n₁, …, n_M)`` with ``Σ nᵢ <= N_max`` in
graded-lexicographic order (total number first). Ladder operators follow
``a(f) = Σ fᵢ aᵢ`` (linear in ``f``) and ``a*(f) = Σ fᵢ aᵢ*``, so that
``[a(f), a*(g)] = Σ fᵢ gᵢ = (f̄, g)`` and ``a(f)* = a*(f̄)``. Creation out of
the top layer is dropped; identities are exact on the sub-cap sector.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidInput, NotSelfAdjoint

__all__ = [
    "FockSpace",
    "FockOperator",
    "ladder",
    "dgamma",
    "segal_field",
    "vacuum_moment",
    "wick_power",
    "second_quantize",
    "quadratic_creation",
    "quadratic_annihilation",
]


class FockSpace:
    """Truncated symmetric Fock space.

    Parameters
    ----------
    modes : int
        Number of one-particle modes ``M``.
    cap : int
        Maximal total particle number ``N_max``.
    """

    def __init__(self, modes: int, cap: int):
        if modes < 1 or cap < 1:
            raise InvalidInput("modes and cap must be >= 1")
        self.modes = int(modes)
        self.cap = int(cap)
        basis: List[Tuple[int, ...]] = []
        for n in range(self.cap + 1):
            layer = [t for t in itertools.product(range(n + 1), repeat=self.modes) if sum(t) == n]
            layer.sort(reverse=True)
            basis.extend(layer)
        self.basis = tuple(basis)
        self.index: Dict[Tuple[int, ...], int] = {b: i for i, b in enumerate(self.basis)}
        self.number = np.array([sum(b) for b in self.basis], dtype=int)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def vacuum_index(self) -> int:
        return 0

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        v[0] = 1.0
        return v

    def basis_vector(self, occ: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        v[self.index[tuple(occ)]] = 1.0
        return v

    def sector(self, n_max: int) -> np.ndarray:
        """Indices of states with at most ``n_max`` particles."""
        return np.nonzero(self.number <= n_max)[0]

    @cached_property
    def _creators(self) -> Tuple[np.ndarray, ...]:
        out = []
        for i in range(self.modes):
            A = np.zeros((self.dim, self.dim))
            for col, occ in enumerate(self.basis):
                if sum(occ) >= self.cap:
                    continue
                new = list(occ)
                new[i] += 1
                A[self.index[tuple(new)], col] = math.sqrt(occ[i] + 1)
            out.append(A)
        return tuple(out)

    def creator(self, i: int) -> np.ndarray:
        """Matrix of ``aᵢ*`` (real)."""
        return self._creators[i]

    def annihilator(self, i: int) -> np.ndarray:
        return self._creators[i].T

    def __repr__(self):
        return f"FockSpace(modes={self.modes}, cap={self.cap}, dim={self.dim})"


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on a :class:`FockSpace`."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        d = self.space.dim
        if self.matrix.shape != (d, d):
            raise DimensionMismatch("matrix shape does not match the space")

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T)

    def _other(self, other):
        if isinstance(other, FockOperator):
            if other.space is not self.space:
                raise DimensionMismatch("operators live on different spaces")
            return other.matrix
        return other

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.space, self.matrix @ self._other(other))
        return self.matrix @ other

    def __add__(self, other):
        if np.isscalar(other):
            return FockOperator(self.space, self.matrix + other * np.eye(self.space.dim))
        return FockOperator(self.space, self.matrix + self._other(other))

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, c):
        return FockOperator(self.space, c * self.matrix)

    __mul__ = __rmul__

    def __neg__(self):
        return FockOperator(self.space, -self.matrix)

    def commutator(self, other: "FockOperator") -> "FockOperator":
        B = self._other(other)
        return FockOperator(self.space, self.matrix @ B - B @ self.matrix)

    def restricted(self, n_max: int) -> np.ndarray:
        """Block acting on (and into) the ``<= n_max`` particle sector."""
        idx = self.space.sector(n_max)
        return self.matrix[np.ix_(idx, idx)]


def _vec(space: FockSpace, f) -> np.ndarray:
    f = np.asarray(f, dtype=complex).reshape(-1)
    if f.size != space.modes:
        raise DimensionMismatch(f"vector of length {f.size} for {space.modes} modes")
    return f


def ladder(space: FockSpace, f, kind: str) -> FockOperator:
    """``a*(f)`` (``kind="create"``) or ``a(f)`` (``kind="annihilate"``)."""
    f = _vec(space, f)
    M = np.zeros((space.dim, space.dim), complex)
    for i, fi in enumerate(f):
        if fi != 0:
            M += fi * space.creator(i)
    if kind == "create":
        return FockOperator(space, M)
    if kind == "annihilate":
        return FockOperator(space, M.T.copy())
    raise InvalidInput(f"unknown ladder kind {kind!r}")


def dgamma(space: FockSpace, h) -> FockOperator:
    """Second quantization ``dΓ(h) = Σ hᵢⱼ aᵢ* aⱼ`` of a self-adjoint ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (space.modes, space.modes):
        raise DimensionMismatch("h must be M x M")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-12:
        raise NotSelfAdjoint("h is not self-adjoint")
    return _bilinear(space, h)


def _bilinear(space: FockSpace, h) -> FockOperator:
    M = np.zeros((space.dim, space.dim), complex)
    for i in range(space.modes):
        for j in range(space.modes):
            if h[i, j] != 0:
                M += h[i, j] * (space.creator(i) @ space.annihilator(j))
    return FockOperator(space, M)


def segal_field(space: FockSpace, f) -> Tuple[FockOperator, FockOperator]:
    """``Φ(f) = (a*(f̄) + a(f))/√2`` and ``Π(f) = i(a*(f̄) - a(f))/√2``."""
    f = _vec(space, f)
    cr = ladder(space, f.conj(), "create").matrix
    an = ladder(space, f, "annihilate").matrix
    s = 1.0 / math.sqrt(2.0)
    return FockOperator(space, s * (cr + an)), FockOperator(space, 1j * s * (cr - an))


def vacuum_moment(space: FockSpace, f, z: complex, terms: int = None) -> complex:
    """Partial sum of ``<Ω, e^{zΦ(f)} Ω>``; tends to ``e^{z²||f||²/4}``.

    ``terms`` defaults to ``2 N_max``, the largest order for which every
    vacuum-to-vacuum path stays inside the truncation.
    """
    if terms is None:
        terms = 2 * space.cap
    if terms > 2 * space.cap:
        raise InvalidInput("terms must be <= 2 N_max")
    phi = segal_field(space, f)[0].matrix
    v = space.vacuum()
    total = complex(v[0])
    coef = 1.0 + 0j
    for k in range(1, terms + 1):
        v = phi @ v
        coef *= z / k
        total += coef * v[0]
    return total


def wick_power(space: FockSpace, f, n: int) -> FockOperator:
    """Wick power ``:Φ(f)ⁿ: = Σ_k n!/(k!(n-2k)!) Φ^{n-2k} (-||f||²/4)^k``."""
    if n < 0 or n > space.cap:
        raise InvalidInput("need 0 <= n <= N_max")
    f = _vec(space, f)
    phi = segal_field(space, f)[0].matrix
    c = -float(np.vdot(f, f).real) / 4.0
    powers = [np.eye(space.dim, dtype=complex)]
    for _ in range(n):
        powers.append(phi @ powers[-1])
    out = np.zeros((space.dim, space.dim), complex)
    for k in range(n // 2 + 1):
        coef = math.factorial(n) / (math.factorial(k) * math.factorial(n - 2 * k))
        out += coef * c ** k * powers[n - 2 * k]
    return FockOperator(space, out)


def second_quantize(space: FockSpace, B) -> FockOperator:
    """Multiplicative second quantization ``Γ(B)``.

    ``Γ(B) a*(f₁)…a*(f_n)Ω = a*(Bf₁)…a*(Bf_n)Ω``; number preserving, so exact
    on the truncated space.
    """
    B = np.asarray(B, dtype=complex)
    if B.shape != (space.modes, space.modes):
        raise DimensionMismatch("B must be M x M")
    cr = [ladder(space, B[:, i], "create").matrix for i in range(space.modes)]
    out = np.zeros((space.dim, space.dim), complex)
    for col, occ in enumerate(space.basis):
        v = space.vacuum()
        norm = 1.0
        for i, ni in enumerate(occ):
            for _ in range(ni):
                v = cr[i] @ v
            norm *= math.factorial(ni)
        out[:, col] = v / math.sqrt(norm)
    return FockOperator(space, out)


def quadratic_creation(space: FockSpace, K) -> FockOperator:
    """``Δ_K = Σ Kᵢⱼ aᵢ* aⱼ*``."""
    K = np.asarray(K, dtype=complex)
    if K.shape != (space.modes, space.modes):
        raise DimensionMismatch("K must be M x M")
    M = np.zeros((space.dim, space.dim), complex)
    for i in range(space.modes):
        for j in range(space.modes):
            if K[i, j] != 0:
                M += K[i, j] * (space.creator(i) @ space.creator(j))
    return FockOperator(space, M)


def quadratic_annihilation(space: FockSpace, K) -> FockOperator:
    """``Δᵃ_K = Σ Kᵢⱼ aᵢ aⱼ``."""
    K = np.asarray(K, dtype=complex)
    if K.shape != (space.modes, space.modes):
        raise DimensionMismatch("K must be M x M")
    M = np.zeros((space.dim, space.dim), complex)
    for i in range(space.modes):
        for j in range(space.modes):
            if K[i, j] != 0:
                M += K[i, j] * (space.annihilator(i) @ space.annihilator(j))
    return FockOperator(space, M)
