"""Classical and canonical theta functions with characteristics.

The classical theta function is the lattice sum

    theta[c1; c2](v, Z) = sum_{n in Z^g} exp(pi i (n+c1)' Z (n+c1) + 2 pi i (v+c2)'(n+c1)).

Truncation
----------
With ``y0 = Y^{-1} Im v`` every term has modulus ``S exp(-pi q(n))`` where
``q(n) = (n + c1 + y0)' Y (n + c1 + y0)`` and ``S = exp(pi Im(v)' Y^{-1} Im(v))``.
For ``0 < t < 1`` the terms with ``q > R^2`` sum to at most

    S exp(-pi t R^2) (1 + ((1 - t) y_min)^{-1/2})^g

(bound ``exp(-pi (1-t) q) <= prod_i exp(-pi (1-t) y_min x_i^2)`` and compare each
one-dimensional Gaussian sum with its integral).  ``R`` is the smallest radius,
over a grid of ``t``, that pushes this below ``eps * S``.  All lattice points of the
bounding box of the ellipsoid are summed, which only adds accuracy.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .core import Characteristic, LatticeVector, PeriodMatrix, PolarizationType, zd_elements
from .errors import ConvergenceError, InputError, MembershipError


@dataclass(frozen=True)
class ThetaConfig:
    eps: float = 1e-10
    radius_cap: float = 60.0
    max_points: int = 4_000_000
    precision: str = "double"  # or "extended"
    dps: int = 40


DEFAULT_CONFIG = ThetaConfig()


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    radius: float
    error_bound: float
    log_scale: float
    npoints: int

    def __complex__(self):
        return complex(self.value)


def truncation_radius(eps: float, g: int, y_min: float) -> float:
    """Radius ``R`` (in the ``Im Z`` metric) with relative tail below ``eps``."""
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    best = math.inf
    for t in np.linspace(0.05, 0.99, 95):
        r2 = (-math.log(eps) + g * math.log1p(1.0 / math.sqrt((1 - t) * y_min))) / (math.pi * t)
        best = min(best, r2)
    return math.sqrt(best)


def _box_points(Z: PeriodMatrix, centers: np.ndarray, R: float, cfg: ThetaConfig) -> np.ndarray:
    """Integer points of the box containing every ellipsoid ``q(n + center) <= R^2``."""
    half = R * np.sqrt(np.diag(Z.Yinv))
    if np.any(half > cfg.radius_cap):
        raise ConvergenceError(
            f"truncation half-width {half.max():.1f} exceeds cap {cfg.radius_cap} (least eigenvalue of Im Z too small)"
        )
    lo = np.ceil(np.min(-centers, axis=0) - half).astype(np.int64)
    hi = np.floor(np.max(-centers, axis=0) + half).astype(np.int64)
    sizes = hi - lo + 1
    total = int(np.prod(sizes))
    if total > cfg.max_points:
        raise ConvergenceError(f"{total} lattice points needed, cap is {cfg.max_points}")
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([x.ravel() for x in grid], axis=-1)


def _fsum_complex(terms: np.ndarray) -> complex:
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def theta_sums(
    shifts: np.ndarray,
    c2: np.ndarray,
    v: np.ndarray,
    Z: PeriodMatrix,
    cfg: ThetaConfig = DEFAULT_CONFIG,
    scaled: bool = False,
) -> tuple[np.ndarray, float, float, int]:
    """``theta[s; c2](v, Z)`` for every row ``s`` of ``shifts``.

    Returns ``(values, log_scale, radius, npoints)``; the absolute truncation error
    of each value is at most ``eps * exp(log_scale)``.  With ``scaled=True`` the
    values are returned divided by ``exp(log_scale)``, which avoids overflow for
    large ``Im v``.
    """
    shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    c2 = np.asarray(c2, dtype=float).reshape(Z.g)
    Yinv = Z.Yinv
    y0 = Yinv @ v.imag
    log_scale = float(math.pi * v.imag @ y0)
    R = truncation_radius(cfg.eps, Z.g, Z.y_min)
    pts = _box_points(Z, shifts + y0, R, cfg)
    if cfg.precision == "extended":
        vals = _theta_sums_mp(shifts, c2, v, Z, pts, log_scale, cfg.dps)
        if scaled:
            vals = np.array([complex(x * mpmath.exp(-log_scale)) for x in vals])
        return vals, log_scale, R, len(pts)
    X = pts[None, :, :] + shifts[:, None, :]
    quad = np.einsum("spi,ij,spj->sp", X, Z.Z, X)
    lin = X @ (v + c2)
    phase = math.pi * 1j * quad + 2j * math.pi * lin - log_scale
    terms = np.exp(phase)
    vals = np.array([_fsum_complex(row) for row in terms])
    if not scaled:
        vals = vals * math.exp(log_scale)
    return vals, log_scale, R, len(pts)


def _theta_sums_mp(shifts, c2, v, Z, pts, log_scale, dps):
    with mpmath.workdps(dps):
        Zm = mpmath.matrix(Z.Z.tolist())
        g = Z.g
        ipi = mpmath.mpc(0, 1) * mpmath.pi
        out = []
        for s in shifts:
            acc = []
            for n in pts:
                x = [mpmath.mpf(int(n[i])) + mpmath.mpf(s[i]) for i in range(g)]
                quad = mpmath.fsum(x[i] * Zm[i, j] * x[j] for i in range(g) for j in range(g))
                lin = mpmath.fsum((mpmath.mpc(v[i]) + mpmath.mpf(c2[i])) * x[i] for i in range(g))
                acc.append(mpmath.exp(ipi * quad + 2 * ipi * lin))
            out.append(mpmath.fsum(acc))
        return np.array(out, dtype=object)


def theta_char(
    c: Characteristic,
    v,
    Z: PeriodMatrix,
    eps: float | None = None,
    cfg: ThetaConfig = DEFAULT_CONFIG,
) -> ThetaValue:
    """``theta[c1; c2](v, Z)`` truncated so the omitted tail is below ``eps * scale``."""
    if eps is not None:
        cfg = ThetaConfig(**{**cfg.__dict__, "eps": eps})
    vals, log_scale, R, npts = theta_sums(c.a1[None, :], c.a2, v, Z, cfg)
    return ThetaValue(vals[0], R, cfg.eps * math.exp(log_scale), log_scale, npts)


@dataclass(frozen=True)
class ThetaBasis:
    c: Characteristic
    Z: PeriodMatrix
    v: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    eps: float
    radius: float
    error_bound: float

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(x) for x in m): complex(val) for m, val in zip(self.indices, self.values)}

    def __len__(self):
        return len(self.values)


def basis_shifts(c1: np.ndarray, D: PolarizationType) -> np.ndarray:
    ms = zd_elements(D)
    return np.asarray(c1, dtype=float)[None, :] + ms / np.array(D.diag, dtype=float)[None, :]


def theta_basis(
    c: Characteristic,
    Z: PeriodMatrix,
    v,
    eps: float | None = None,
    cfg: ThetaConfig = DEFAULT_CONFIG,
) -> ThetaBasis:
    """The ``d`` functions ``theta[c1 + D^{-1} m; c2](v, Z)``, ``m`` in ``Z_D``."""
    if eps is not None:
        cfg = ThetaConfig(**{**cfg.__dict__, "eps": eps})
    D = Z.D
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    vals, log_scale, R, _ = theta_sums(basis_shifts(c.a1, D), c.a2, v, Z, cfg)
    return ThetaBasis(c, Z, v, zd_elements(D), vals, cfg.eps, R, cfg.eps * math.exp(log_scale))


# ----------------------------------------------------------------------------
# factors of automorphy


class FactorKind(str, Enum):
    canonical = "canonical"
    classical = "classical"


@dataclass(frozen=True)
class AutomorphyFactorSpec:
    kind: FactorKind
    Z: PeriodMatrix
    c: Characteristic = field(default=None)

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", Characteristic.zero(self.Z.g))
        object.__setattr__(self, "kind", FactorKind(self.kind))


def _coords(lam, g):
    if isinstance(lam, LatticeVector):
        return np.array(lam.n1, dtype=float), np.array(lam.n2, dtype=float)
    l1, l2 = lam
    return np.asarray(l1, dtype=float).reshape(g), np.asarray(l2, dtype=float).reshape(g)


def semicharacter(c: Characteristic, l1, l2) -> complex:
    """``chi(l) = chi_0(l) exp(2 pi i E(c, l))`` with ``chi_0(l) = exp(pi i l1'l2)``."""
    E = c.a1 @ l2 - c.a2 @ l1
    return complex(np.exp(1j * math.pi * (l1 @ l2) + 2j * math.pi * E))


def automorphy_factor(fac: AutomorphyFactorSpec, lam, v) -> complex:
    """Canonical ``a_(H,chi)`` or classical ``e_(H,chi)`` factor at ``(lam, v)``.

    ``lam`` is a :class:`LatticeVector` or a pair ``(l1, l2)`` of real coordinates
    (``lam = Z l1 + l2``); the latter also allows points of ``Lambda(H)``.
    """
    Z = fac.Z
    l1, l2 = _coords(lam, Z.g)
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    lam_c = Z.Z @ l1 + l2
    chi = semicharacter(fac.c, l1, l2)
    if fac.kind is FactorKind.classical:
        # (H - B)(x, lam) = -2i x' l1
        expo = math.pi * (-2j * (v @ l1)) + math.pi / 2 * (-2j * (lam_c @ l1))
    else:
        Yinv = Z.Yinv
        expo = math.pi * (v @ Yinv @ np.conj(lam_c)) + math.pi / 2 * (lam_c @ Yinv @ np.conj(lam_c))
    return chi * complex(np.exp(expo))


def equivalence_h(Z: PeriodMatrix, v) -> complex:
    """``h(v) = exp(pi/2 v' (Im Z)^{-1} v)``; classical = canonical * h(v) / h(v + lam)."""
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    return complex(np.exp(math.pi / 2 * (v @ Z.Yinv @ v)))


# ----------------------------------------------------------------------------
# canonical theta functions


def canonical_theta_zero(c: Characteristic, v, Z: PeriodMatrix, eps: float | None = None) -> complex:
    """``theta^c_0(v) = exp(pi/2 B(v, v) - pi i c1'c2) theta[c1; c2](v, Z)``."""
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    B = v @ Z.Yinv @ v
    th = theta_char(c, v, Z, eps).value
    return complex(np.exp(math.pi / 2 * B - 1j * math.pi * (c.a1 @ c.a2))) * th


def canonical_theta(
    c: Characteristic,
    w1,
    v,
    Z: PeriodMatrix,
    eps: float | None = None,
    w2=None,
) -> complex:
    """``theta^c_w(v) = a_(H,chi)(w, v)^{-1} theta^c_0(v + w)`` for ``w = Z w1 + w2`` in ``Lambda(H)``."""
    D = Z.D
    w1 = np.asarray(w1, dtype=float).reshape(Z.g)
    w2 = np.zeros(Z.g) if w2 is None else np.asarray(w2, dtype=float).reshape(Z.g)
    Dw1 = np.array(D.diag) * w1
    if np.max(np.abs(Dw1 - np.round(Dw1))) > 1e-9 or np.max(np.abs(w2 - np.round(w2))) > 1e-9:
        raise MembershipError(f"w = Z {w1.tolist()} + {w2.tolist()} is not in Lambda(H)")
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    w = Z.Z @ w1 + w2
    a = automorphy_factor(AutomorphyFactorSpec(FactorKind.canonical, Z, c), (w1, w2), v)
    return canonical_theta_zero(c, v + w, Z, eps) / a


def naive_theta(c: Characteristic, v, Z: PeriodMatrix, radius: int) -> complex:
    """Plain summation over the cube ``|n_i + round(c1_i)| <= radius`` (reference oracle)."""
    g = Z.g
    v = np.asarray(v, dtype=complex).reshape(g)
    total = []
    base = -np.round(c.a1 + Z.Yinv @ v.imag).astype(int)
    ranges = [range(b - radius, b + radius + 1) for b in base]
    for n in itertools.product(*ranges):
        x = np.array(n, dtype=float) + c.a1
        total.append(np.exp(1j * math.pi * (x @ Z.Z @ x) + 2j * math.pi * ((v + c.a2) @ x)))
    return _fsum_complex(np.array(total))


def random_characteristic(rng: np.random.Generator, D: PolarizationType, half: bool = True) -> Characteristic:
    if half:
        c1 = tuple(Fraction(int(rng.integers(0, 2 * di)), 2 * di) for di in D.diag)
        c2 = tuple(Fraction(int(rng.integers(0, 2)), 2) for _ in D.diag)
        return Characteristic(c1, c2)
    return Characteristic(tuple(rng.uniform(-1, 1, D.g)), tuple(rng.uniform(-1, 1, D.g)))


def as_vector(values: Sequence[complex]) -> np.ndarray:
    return np.array([complex(x) for x in values])
