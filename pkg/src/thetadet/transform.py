"""Theta transformation matrices and their root-of-unity determinants.

For ``M`` in G_D, ``Z' = M(Z)``, ``v' = (gamma Z + delta)'^{-1} v`` and a
half-characteristic ``c`` the classical bases are related by

    theta[c1 + D^{-1}m; c2](v, Z) = h(v) C_cl theta[M[c]1 + D^{-1}n; M[c]2](v', Z'),
    h(v) = exp(-pi i v' (gamma Z + delta)^{-1} gamma v),
    C_cl = exp(-pi i M[c]1'M[c]2 + pi i c1'c2) det(gamma Z + delta)^{-1/2} C_M.

:func:`transformation_matrix` samples both sides at random points and solves for
``C_cl`` by least squares; nothing about ``C_M`` is assumed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import mpmath
import numpy as np

from .core import Characteristic, PeriodMatrix, PolarizationType, zd_elements
from .errors import CapExceededError, ClassificationError, IllConditionedError, InputError, NotBijectiveError
from .symplectic import (
    SymplecticElement,
    act_on_siegel,
    automorphy_matrix,
    transform_characteristic,
)
from .theta import DEFAULT_CONFIG, ThetaConfig, basis_shifts, theta_sums

DFT_CAP = 64
EXTENDED_DET_THRESHOLD = 12


def h_psi(M: SymplecticElement, Z: PeriodMatrix, v) -> complex:
    """``exp(pi i v' (gamma Z + delta)^{-1} gamma v)``."""
    v = np.asarray(v, dtype=complex).reshape(Z.g)
    _, _, gam, _ = M.float_blocks()
    A = automorphy_matrix(M, Z)
    return complex(np.exp(1j * math.pi * (v @ np.linalg.solve(A, gam @ v))))


def principal_sqrt(z: complex) -> complex:
    """Square root with argument in (-pi/2, pi/2]."""
    r = cmath.sqrt(z)
    if r.real == 0 and r.imag < 0:
        r = -r
    return r


def det_extended(C: np.ndarray, dps: int = 40) -> complex:
    """Determinant by mpmath LU with partial pivoting at ``dps`` digits."""
    with mpmath.workdps(dps):
        m = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in C])
        return complex(mpmath.det(m))


def matrix_det(C: np.ndarray, extended: bool | None = None) -> complex:
    if extended is None:
        extended = C.shape[0] > EXTENDED_DET_THRESHOLD
    return det_extended(C) if extended else complex(np.linalg.det(C))


@dataclass(frozen=True, eq=False)
class TransformationResult:
    M: SymplecticElement
    Z: PeriodMatrix
    Zp: PeriodMatrix
    c: Characteristic
    Mc: Characteristic
    C_classical: np.ndarray
    C: np.ndarray
    C_M: np.ndarray
    detCM: complex
    sqrt_det: complex
    order: int | None
    conditioning: float
    variant: str

    def to_json(self) -> dict:
        return {
            "detCM": [self.detCM.real, self.detCM.imag],
            "order": self.order,
            "conditioning": self.conditioning,
            "variant": self.variant,
            "d": int(self.C.shape[0]),
        }


def sample_points(rng: np.random.Generator, Zp: PeriodMatrix, n: int, scheme: str = "period") -> np.ndarray:
    """Sample points ``v'`` for the extraction.

    ``"box"``: ``([0,1)^g + Z'[0,1)^g) / 2``.  ``"period"``: real parts spread over
    ``[0, d_i)`` and imaginary parts over ``Z'[-1/2, 1/2)^g``; the basis functions are
    eigenfunctions of unit real translations with distinct eigenvalues, so spreading the
    real part over a full period keeps the sample matrix well conditioned.
    """
    g = Zp.g
    if scheme == "box":
        x = rng.uniform(0, 1, size=(n, g))
        y = rng.uniform(0, 1, size=(n, g))
        return 0.5 * (x + y @ Zp.Z.T)
    if scheme == "period":
        x = rng.uniform(0, 1, size=(n, g)) * np.array(Zp.D.diag, dtype=float)
        y = rng.uniform(-0.5, 0.5, size=(n, g))
        return x + y @ Zp.Z.T
    raise InputError(f"unknown sampling scheme {scheme!r}")


def _basis_values(c: Characteristic, Z: PeriodMatrix, v, cfg: ThetaConfig) -> tuple[np.ndarray, float]:
    """Basis values divided by ``exp(log_scale)``, together with ``log_scale``."""
    vals, log_scale, _, _ = theta_sums(basis_shifts(c.a1, Z.D), c.a2, v, Z, cfg, scaled=True)
    return np.array([complex(x) for x in vals]), log_scale


def transformation_matrix(
    M: SymplecticElement,
    Z: PeriodMatrix,
    c: Characteristic,
    eps: float = 1e-10,
    nsamples: int | None = None,
    rng: np.random.Generator | None = None,
    c_target: Characteristic | None = None,
    scheme: str = "period",
    cfg: ThetaConfig = DEFAULT_CONFIG,
    max_order: int = 48,
    order_tol: float = 1e-5,
    require_half: bool = True,
    flip_branch: bool = False,
    attempts: int = 3,
) -> TransformationResult:
    """Numerically extract ``C`` with ``psi^* B^Z = C B^{Z'}`` and ``C_M = det(gamma Z + delta)^{1/2} C``.

    ``flip_branch`` uses the other square root of ``det(gamma Z + delta)``.  When the
    least-squares residual exceeds ``100 eps`` the sample points are redrawn, up to
    ``attempts`` times in total.
    """
    D = Z.D
    d = D.d
    if require_half and not c.is_half(D):
        raise InputError("transformation formula needs a half-characteristic")
    nsamples = nsamples or max(2 * d, d + 4)
    if nsamples < d + 4:
        raise InputError(f"need at least d + 4 = {d + 4} samples")
    rng = rng if rng is not None else np.random.default_rng(0)
    cfg = ThetaConfig(**{**cfg.__dict__, "eps": eps})
    Zp, variant = act_on_siegel(M, Z, return_variant=True)
    Mc = c_target if c_target is not None else transform_characteristic(M, c)
    A = automorphy_matrix(M, Z)
    _, _, gam, _ = M.float_blocks()
    for _ in range(max(1, attempts)):
        vps = sample_points(rng, Zp, nsamples, scheme)
        L = np.empty((d, nsamples), dtype=complex)
        Rm = np.empty((d, nsamples), dtype=complex)
        for k, vp in enumerate(vps):
            v = A.T @ vp
            r, lr = _basis_values(Mc, Zp, vp, cfg)
            l, ll = _basis_values(c, Z, v, cfg)
            # h_psi(v) exp(ll) / exp(lr) is moderate even when each factor is not
            logh = 1j * math.pi * (v @ np.linalg.solve(A, gam @ v)) + ll - lr
            norm = np.linalg.norm(r)
            Rm[:, k] = r / norm
            L[:, k] = l * np.exp(logh) / norm
        sol, *_ = np.linalg.lstsq(Rm.T, L.T, rcond=None)
        C_cl = sol.T
        resid = float(np.linalg.norm(L - C_cl @ Rm) / np.linalg.norm(L))
        if resid <= 100 * eps:
            break
    else:
        raise IllConditionedError(f"least-squares residual {resid:.3g} exceeds {100 * eps:.3g} after {attempts} attempts")
    phase = np.exp(-1j * math.pi * (Mc.a1 @ Mc.a2) + 1j * math.pi * (c.a1 @ c.a2))
    C = C_cl / phase
    sd = principal_sqrt(complex(np.linalg.det(A)))
    if flip_branch:
        sd = -sd
    C_M = sd * C
    detCM = matrix_det(C_M)
    order = root_of_unity_order(detCM, max_order, order_tol)
    return TransformationResult(M, Z, Zp, c, Mc, C_cl, C, C_M, detCM, sd, order, resid, variant)


# ----------------------------------------------------------------------------
# the Fourier generator


def fourier_kernel(D: PolarizationType) -> np.ndarray:
    """``A_{mn} = exp(2 pi i m' D^{-1} n)``, rows and columns in Z_D order."""
    ms = zd_elements(D).astype(float)
    Dinv = 1.0 / np.array(D.diag, dtype=float)
    return np.exp(2j * math.pi * (ms * Dinv) @ ms.T)


def cm_fourier_generator(D: PolarizationType) -> np.ndarray:
    """Explicit ``C_M = (d / i^g)^{-1/2} A`` for ``M = [[0, -D], [D^{-1}, 0]]``."""
    w = D.d / (1j**D.g)
    return fourier_kernel(D) / principal_sqrt(w)


@dataclass(frozen=True)
class DftDeterminant:
    det: complex
    zeta4: complex
    log_abs: float


def dft_determinant(D: PolarizationType, cap: int = DFT_CAP) -> DftDeterminant:
    if D.d > cap:
        raise CapExceededError(f"d = {D.d} exceeds cap {cap}")
    A = fourier_kernel(D)
    sign, logabs = np.linalg.slogdet(A)
    expected = 0.5 * D.d * math.log(D.d) if D.d > 1 else 0.0
    if abs(logabs - expected) > 1e-8 * max(1.0, expected):
        raise ClassificationError(f"|det A| = exp({logabs}) differs from d^(d/2)")
    zeta4 = complex(sign) * math.exp(logabs - expected)
    if abs(zeta4**4 - 1) > 1e-8:
        raise ClassificationError(f"det A / d^(d/2) = {zeta4} is not a 4th root of unity", det=zeta4)
    return DftDeterminant(complex(sign) * math.exp(logabs), zeta4, logabs)


def dft_determinant_tensor(D: PolarizationType) -> complex:
    """``det A`` via ``A = C_1 (x) ... (x) C_g``: ``det A = prod det(C_i)^(d / d_i)``."""
    out = 1.0 + 0j
    for di in D.diag:
        Ci = fourier_kernel(PolarizationType((di,)))
        out *= complex(np.linalg.det(Ci)) ** (D.d // di)
    return out


# ----------------------------------------------------------------------------
# permutation signs


def delta_permutation(M: SymplecticElement) -> list[int]:
    """The permutation ``m -> Delta m mod D`` of Z_D as an index list."""
    if not M.integral:
        raise InputError("Delta permutes Z_D only for integral M")
    D = M.D
    Delta = M.R.Delta
    ms = zd_elements(D)
    index = {tuple(m): k for k, m in enumerate(ms.tolist())}
    perm = []
    for m in ms.tolist():
        img = Delta.dot(np.array(m, dtype=object))
        perm.append(index[tuple(int(x) % di for x, di in zip(img, D.diag))])
    if len(set(perm)) != len(perm):
        raise NotBijectiveError("Delta does not act bijectively on Z_D")
    return perm


def permutation_sign(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def permutation_sign_delta(M: SymplecticElement) -> int:
    return permutation_sign(delta_permutation(M))


# ----------------------------------------------------------------------------
# classification


def root_of_unity_order(z: complex, max_order: int = 48, tol: float = 1e-6) -> int | None:
    if max_order > 48:
        raise InputError("max_order must be at most 48")
    z = complex(z)
    if abs(abs(z) - 1) >= tol:
        return None
    w = 1.0 + 0j
    for n in range(1, max_order + 1):
        w *= z
        if abs(w - 1) < tol:
            return n
    return None


class Mode(str, Enum):
    symmetric = "symmetric"
    totally_symmetric = "totally_symmetric"


def allowed_orders(D: PolarizationType, mode: Mode | str) -> set[int]:
    mode = Mode(mode)
    if mode is Mode.symmetric:
        bound = 24 if D.exceptional else 8
        return {n for n in range(1, bound + 1) if bound % n == 0}
    return {1, 3} if D.exceptional else {1}


def check_totally_symmetric(D: PolarizationType, c: Characteristic):
    if not c.is_zero():
        raise InputError("totally symmetric mode requires c = 0")
    if not D.is_even:
        raise InputError(f"totally symmetric mode requires even D, got {D}")
    if D.g < 3:
        raise InputError("totally symmetric mode requires g >= 3")


@dataclass(frozen=True)
class Classification:
    order: int | None
    detCM: complex
    allowed: tuple[int, ...]
    conditioning: float

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "detCM": [self.detCM.real, self.detCM.imag],
            "allowed": list(self.allowed),
            "conditioning": self.conditioning,
        }


def classify(
    M: SymplecticElement,
    Z: PeriodMatrix,
    c: Characteristic,
    mode: Mode | str = Mode.symmetric,
    eps: float = 1e-10,
    rng: np.random.Generator | None = None,
    tol: float = 1e-5,
    **kwargs,
) -> Classification:
    """Extract ``det C_M`` and check it against the asserted root-of-unity group."""
    mode = Mode(mode)
    D = Z.D
    if mode is Mode.totally_symmetric:
        check_totally_symmetric(D, c)
    res = transformation_matrix(M, Z, c, eps=eps, rng=rng, order_tol=tol, **kwargs)
    allowed = allowed_orders(D, mode)
    out = Classification(res.order, res.detCM, tuple(sorted(allowed)), res.conditioning)
    if res.order not in allowed:
        raise ClassificationError(
            f"det C_M = {res.detCM:.8f} has order {res.order}, expected one of {sorted(allowed)} (D={D}, mode={mode.value})",
            det=res.detCM,
            order=res.order,
        )
    return out
