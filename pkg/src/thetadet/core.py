"""Polarization types, period matrices, characteristics and the forms H, B, E.

Conventions used throughout the package:

* ``Z`` acts on column vectors; the lattice of ``X_Z`` is spanned by the
  columns of ``(Z, D)``, i.e. ``lambda = Z n1 + n2`` with ``n1`` integral and
  ``n2`` in ``D Z^g``.
* ``e(x)`` in the literature is ``exp(x)``; code writes ``np.exp`` directly.
* Elements of ``Z_D = Z/d_1 + ... + Z/d_g`` are enumerated lexicographically
  with the last coordinate running fastest (:func:`zd_elements`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetryError,
    DegenerateBasisError,
    DivisibilityError,
    InputError,
    NotPositiveDefiniteError,
    PositivityError,
    SingularSystemError,
)


@dataclass(frozen=True)
class Tolerances:
    sym: float = 1e-9
    lin: float = 1e-9


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class PolarizationType:
    diag: tuple[int, ...]

    @property
    def g(self) -> int:
        return len(self.diag)

    @property
    def d(self) -> int:
        return prod(self.diag)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.diag, dtype=float))

    @property
    def is_even(self) -> bool:
        return all(x % 2 == 0 for x in self.diag)

    @property
    def exceptional(self) -> bool:
        """``3 | d_g`` and ``gcd(3, d_{g-1}) = 1``, reading ``d_0`` as 1."""
        dg = self.diag[-1]
        prev = self.diag[-2] if self.g > 1 else 1
        return dg % 3 == 0 and gcd(3, prev) == 1

    def __str__(self):
        return "(" + ",".join(map(str, self.diag)) + ")"


def validate_polarization(diag: Sequence[int]) -> PolarizationType:
    vals = [int(x) for x in diag]
    if not vals:
        raise InputError("polarization type must have at least one entry")
    if any(int(x) != x for x in diag):
        raise InputError(f"polarization entries must be integers, got {list(diag)}")
    for x in vals:
        if x <= 0:
            raise PositivityError(f"polarization entry {x} is not positive")
    for a, b in zip(vals, vals[1:]):
        if b % a:
            raise DivisibilityError(f"{a} does not divide {b}")
    return PolarizationType(tuple(vals))


def zd_elements(D: PolarizationType) -> np.ndarray:
    """All ``m`` in ``Z_D`` as a ``(d, g)`` integer array, last coordinate fastest."""
    return np.array(list(itertools.product(*(range(x) for x in D.diag))), dtype=np.int64).reshape(-1, D.g)


def zd_index(D: PolarizationType, m) -> int:
    idx = 0
    for x, di in zip(m, D.diag):
        idx = idx * di + int(x) % di
    return idx


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    Z: np.ndarray
    D: PolarizationType

    @property
    def g(self) -> int:
        return self.D.g

    @property
    def X(self) -> np.ndarray:
        return self.Z.real

    @property
    def Y(self) -> np.ndarray:
        return self.Z.imag

    @property
    def Yinv(self) -> np.ndarray:
        return np.linalg.inv(self.Z.imag)

    @property
    def y_min(self) -> float:
        return float(np.linalg.eigvalsh(self.Z.imag)[0])

    def j(self, n) -> np.ndarray:
        """The real-linear map ``R^{2g} -> C^g``, ``x -> (Z, 1) x``."""
        n = np.asarray(n)
        g = self.g
        return self.Z @ n[:g] + n[g:]

    def lattice_generators(self) -> np.ndarray:
        """Columns of ``(Z, D)`` as a ``g x 2g`` complex matrix."""
        return np.hstack([self.Z, self.D.matrix.astype(complex)])


def validate_period_matrix(Z, D: PolarizationType, tol: Tolerances = DEFAULT_TOL) -> PeriodMatrix:
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    g = D.g
    if Z.shape != (g, g):
        raise InputError(f"period matrix has shape {Z.shape}, expected {(g, g)}")
    scale = max(1.0, float(np.max(np.abs(Z))))
    if np.max(np.abs(Z - Z.T)) > tol.sym * scale:
        raise AsymmetryError("period matrix is not symmetric")
    Z = (Z + Z.T) / 2
    eig = np.linalg.eigvalsh(Z.imag)
    if eig[0] <= 0:
        raise NotPositiveDefiniteError(f"Im Z is not positive definite (least eigenvalue {eig[0]:.3g})")
    return PeriodMatrix(Z, D)


@dataclass(frozen=True)
class Characteristic:
    """A characteristic ``c = Z c1 + c2`` given by its real coordinates.

    Entries may be floats or :class:`fractions.Fraction`; exact values are kept
    so that half-characteristic and lattice membership tests are exact.
    """

    c1: tuple
    c2: tuple

    @classmethod
    def from_arrays(cls, c1, c2) -> "Characteristic":
        return cls(tuple(_exact(x) for x in np.ravel(c1)), tuple(_exact(x) for x in np.ravel(c2)))

    @classmethod
    def zero(cls, g: int) -> "Characteristic":
        return cls((Fraction(0),) * g, (Fraction(0),) * g)

    @property
    def g(self) -> int:
        return len(self.c1)

    @property
    def a1(self) -> np.ndarray:
        return np.array([float(x) for x in self.c1])

    @property
    def a2(self) -> np.ndarray:
        return np.array([float(x) for x in self.c2])

    def value(self, Z: PeriodMatrix) -> np.ndarray:
        return Z.Z @ self.a1 + self.a2

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.c1 + self.c2)

    def is_half(self, D: PolarizationType) -> bool:
        """True iff ``2 D c1`` and ``2 c2`` are integral, i.e. ``c`` lies in ``1/2 Lambda(H)``."""
        return all(_is_int(2 * di * x) for di, x in zip(D.diag, self.c1)) and all(_is_int(2 * x) for x in self.c2)

    def in_lattice_dual(self, D: PolarizationType) -> bool:
        """Membership of ``c`` in ``Lambda(H) = D^{-1} Z^g (+) Z^g`` (in ``(c1, c2)`` coordinates)."""
        return all(_is_int(di * x) for di, x in zip(D.diag, self.c1)) and all(_is_int(x) for x in self.c2)

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(
            tuple(a + b for a, b in zip(self.c1, other.c1)),
            tuple(a + b for a, b in zip(self.c2, other.c2)),
        )

    def __sub__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(
            tuple(a - b for a, b in zip(self.c1, other.c1)),
            tuple(a - b for a, b in zip(self.c2, other.c2)),
        )


def _exact(x):
    if isinstance(x, (Fraction, int, np.integer)):
        return Fraction(int(x)) if not isinstance(x, Fraction) else x
    if isinstance(x, str):
        return Fraction(x)
    f = float(x)
    fr = Fraction(f).limit_denominator(10**6)
    return fr if abs(float(fr) - f) < 1e-12 else f


def _is_int(x) -> bool:
    if isinstance(x, Fraction):
        return x.denominator == 1
    return abs(x - round(x)) < 1e-9


@dataclass(frozen=True, eq=False)
class LatticeVector:
    """``lambda = Z n1 + n2`` with ``n1`` in ``Z^g`` and ``n2`` in ``D Z^g``."""

    n1: tuple[int, ...]
    n2: tuple[int, ...]
    D: PolarizationType = field(repr=False)

    def __post_init__(self):
        for x, di in zip(self.n2, self.D.diag):
            if int(x) % di:
                raise InputError(f"second lattice coordinate {x} is not divisible by {di}")

    def value(self, Z: PeriodMatrix) -> np.ndarray:
        return Z.Z @ np.array(self.n1, dtype=float) + np.array(self.n2, dtype=float)

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(
            tuple(a + b for a, b in zip(self.n1, other.n1)),
            tuple(a + b for a, b in zip(self.n2, other.n2)),
            self.D,
        )


def decompose_vector(Z: PeriodMatrix, v) -> tuple[np.ndarray, np.ndarray]:
    """Real coordinates ``(v1, v2)`` with ``v = Z v1 + v2``."""
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    try:
        v1 = np.linalg.solve(Z.Y, v.imag)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    v2 = v.real - Z.X @ v1
    return v1, v2


@dataclass(frozen=True)
class Forms:
    H: complex
    B: complex
    HmB: complex
    E: float


def forms(Z: PeriodMatrix, v, w) -> Forms:
    """The hermitian form ``H_Z``, its symmetric companion ``B``, ``H - B`` and ``E = Im H``."""
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    w = np.asarray(w, dtype=complex).reshape(Z.g)
    Yinv = Z.Yinv
    H = complex(v @ Yinv @ np.conj(w))
    B = complex(v @ Yinv @ w)
    v1, v2 = decompose_vector(Z, v)
    w1, w2 = decompose_vector(Z, w)
    E = float(v1 @ w2 - v2 @ w1)
    return Forms(H=H, B=B, HmB=complex(-2j * (v @ w1)), E=E)


def period_from_basis(basis, D: PolarizationType, tol: Tolerances = DEFAULT_TOL) -> PeriodMatrix:
    """Normalized period matrix of a symplectic lattice basis.

    ``basis`` holds ``2g`` vectors of ``C^g`` (rows, or a ``g x 2g`` matrix of
    columns).  With ``Lambda_1``/``Lambda_2`` the matrices whose columns are the
    first/last ``g`` vectors, the columns of ``(Z, D)`` are the coordinates of the
    basis in the frame ``e_i = lambda_{g+i} / d_i``, so ``Z = D Lambda_2^{-1} Lambda_1``.
    """
    g = D.g
    arr = np.asarray(basis, dtype=complex)
    if arr.ndim == 1 and g == 1:
        arr = arr.reshape(1, 2)
    if arr.shape == (2 * g, g):
        arr = arr.T
    if arr.shape != (g, 2 * g):
        raise InputError(f"expected 2g={2 * g} vectors of length {g}, got array of shape {arr.shape}")
    L1, L2 = arr[:, :g], arr[:, g:]
    if abs(np.linalg.det(L2)) < 1e-12 * max(1.0, float(np.max(np.abs(L2)))) ** g:
        raise DegenerateBasisError("last g basis vectors are not a complex basis")
    Z = D.matrix @ np.linalg.solve(L2, L1)
    return validate_period_matrix(Z, D, tol)


def random_siegel(rng: np.random.Generator, g: int, y_range=(0.8, 1.6), x_half_width=0.5) -> np.ndarray:
    """A random, reasonably reduced point of Siegel space."""
    Q, _ = np.linalg.qr(rng.normal(size=(g, g)))
    Y = Q @ np.diag(rng.uniform(*y_range, size=g)) @ Q.T
    X = rng.uniform(-x_half_width, x_half_width, size=(g, g))
    X = (X + X.T) / 2
    return X + 1j * (Y + Y.T) / 2


def admissible_types(max_d: int, max_g: int, min_g: int = 1, even: bool = False) -> list[PolarizationType]:
    """Every type ``d_1 | ... | d_g`` with ``min_g <= g <= max_g`` and ``d <= max_d``."""
    out = []

    def extend(chain: tuple[int, ...], d: int):
        if len(chain) >= min_g:
            out.append(PolarizationType(chain))
        if len(chain) == max_g:
            return
        start = chain[-1] if chain else 1
        k = start
        while d * k <= max_d:
            if not even or k % 2 == 0:
                extend(chain + (k,), d * k)
            k += start

    extend((), 1)
    return out


def random_polarization(rng: np.random.Generator, g: int, max_last: int) -> PolarizationType:
    """A uniformly chosen type of dimension ``g`` with ``d_g <= max_last``."""
    chains = [D for D in admissible_types(max_last**g, g, g) if D.diag[-1] <= max_last]
    return chains[int(rng.integers(len(chains)))]
