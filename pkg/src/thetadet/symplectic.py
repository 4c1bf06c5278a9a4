"""Exact machinery for Gamma_D, G_D, the action on Siegel space and Sp(D).

Integer and rational matrices are numpy ``object`` arrays holding Python ``int``
and :class:`fractions.Fraction`, so every group-theoretic predicate is exact.

Notation: ``R = [[A, B], [Gamma, Delta]]`` in ``Gamma_D`` satisfies
``R J_D R' = J_D`` with ``J_D = [[0, D], [-D, 0]]``; the corresponding
``M = diag(I, D)^{-1} R diag(I, D) = [[alpha, beta], [gamma, delta]]`` lies in
``Sp_2g(Q)`` with ``alpha = A, beta = B D, gamma = D^{-1} Gamma, delta = D^{-1} Delta D``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import DEFAULT_TOL, Characteristic, PeriodMatrix, PolarizationType, Tolerances, validate_period_matrix
from .errors import (
    DiagramMismatchError,
    InputError,
    NonIntegralError,
    NotFoundError,
    NotPositiveDefiniteError,
    NotSymplecticError,
)


def int_matrix(a) -> np.ndarray:
    arr = np.asarray(a)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise NonIntegralError(f"entry {x} is not an integer")
            x = x.numerator
        if int(x) != x:
            raise NonIntegralError(f"entry {x} is not an integer")
        out[idx] = int(x)
    return out


def frac_matrix(a) -> np.ndarray:
    arr = np.asarray(a)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = x if isinstance(x, Fraction) else Fraction(x)
    return out


def eye(n: int) -> np.ndarray:
    return int_matrix(np.eye(n, dtype=int))


def _diagD(D: PolarizationType) -> np.ndarray:
    return int_matrix(np.diag(D.diag))


def _diagDinv(D: PolarizationType) -> np.ndarray:
    out = frac_matrix(np.zeros((D.g, D.g), dtype=int))
    for i, di in enumerate(D.diag):
        out[i, i] = Fraction(1, di)
    return out


def J_D(D: PolarizationType) -> np.ndarray:
    g = D.g
    out = int_matrix(np.zeros((2 * g, 2 * g), dtype=int))
    for i, di in enumerate(D.diag):
        out[i, g + i] = di
        out[g + i, i] = -di
    return out


def J1(g: int) -> np.ndarray:
    return J_D(PolarizationType((1,) * g))


def _key(a: np.ndarray) -> tuple:
    return tuple(a.ravel().tolist())


def _is_integral(a: np.ndarray) -> bool:
    return all(not isinstance(x, Fraction) or x.denominator == 1 for x in a.ravel())


def _to_float(a: np.ndarray) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a], dtype=float)


@dataclass(frozen=True, eq=False)
class GammaDElement:
    R: np.ndarray
    D: PolarizationType

    @property
    def g(self) -> int:
        return self.D.g

    @property
    def A(self):
        return self.R[: self.g, : self.g]

    @property
    def B(self):
        return self.R[: self.g, self.g :]

    @property
    def Gamma(self):
        return self.R[self.g :, : self.g]

    @property
    def Delta(self):
        return self.R[self.g :, self.g :]

    @property
    def is_int(self) -> bool:
        """Gamma_D^int membership: ``Gamma = D Gamma_1`` with ``Gamma_1`` integral."""
        return all(x % di == 0 for di, row in zip(self.D.diag, self.Gamma) for x in row)

    def __matmul__(self, other: "GammaDElement") -> "GammaDElement":
        return GammaDElement(self.R.dot(other.R), self.D)

    def inverse(self) -> "GammaDElement":
        # R J_D R' = J_D  =>  R^{-1} = J_D R' J_D^{-1}
        JD = J_D(self.D)
        JDinv = frac_matrix(np.zeros_like(JD))
        g = self.g
        for i, di in enumerate(self.D.diag):
            JDinv[i, g + i] = Fraction(-1, di)
            JDinv[g + i, i] = Fraction(1, di)
        return GammaDElement(int_matrix(JD.dot(self.R.T).dot(JDinv)), self.D)

    def __eq__(self, other):
        return isinstance(other, GammaDElement) and self.D == other.D and _key(self.R) == _key(other.R)

    def __hash__(self):
        return hash((self.D, _key(self.R)))

    def key(self) -> tuple:
        return _key(self.R)


def gamma_membership(R, D: PolarizationType) -> GammaDElement:
    R = int_matrix(R)
    g = D.g
    if R.shape != (2 * g, 2 * g):
        raise InputError(f"R has shape {R.shape}, expected {(2 * g, 2 * g)}")
    JD = J_D(D)
    residual = R.dot(JD).dot(R.T) - JD
    if any(x != 0 for x in residual.ravel()):
        raise NotSymplecticError(f"R J_D R' != J_D for D={D}", residual=residual)
    return GammaDElement(R, D)


@dataclass(frozen=True, eq=False)
class SymplecticElement:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    D: PolarizationType
    source: GammaDElement | None = field(default=None, repr=False)
    name: str = ""

    @property
    def g(self) -> int:
        return self.D.g

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.alpha, self.beta], [self.gamma, self.delta]])

    @property
    def integral(self) -> bool:
        return _is_integral(self.matrix)

    @property
    def R(self) -> GammaDElement:
        return self.source if self.source is not None else from_gd(self)

    def float_blocks(self):
        return tuple(_to_float(x) for x in (self.alpha, self.beta, self.gamma, self.delta))

    def __matmul__(self, other: "SymplecticElement") -> "SymplecticElement":
        return to_gd(self.R @ other.R)

    def inverse(self) -> "SymplecticElement":
        return to_gd(self.R.inverse())

    def __eq__(self, other):
        return isinstance(other, SymplecticElement) and self.D == other.D and _key(self.matrix) == _key(other.matrix)

    def __hash__(self):
        return hash((self.D, _key(self.matrix)))

    def is_symplectic(self) -> bool:
        M = self.matrix
        J = J1(self.g)
        return all(x == 0 for x in (M.dot(J).dot(M.T) - J).ravel())


def to_gd(R: GammaDElement, name: str = "") -> SymplecticElement:
    D, g = R.D, R.g
    Dm, Dinv = _diagD(D), _diagDinv(D)
    alpha = frac_matrix(R.A)
    beta = frac_matrix(R.B.dot(Dm))
    gamma = Dinv.dot(R.Gamma)
    delta = Dinv.dot(R.Delta).dot(Dm)
    return SymplecticElement(alpha, beta, gamma, delta, D, source=R, name=name)


def from_gd(M: SymplecticElement) -> GammaDElement:
    D = M.D
    Dm, Dinv = _diagD(D), _diagDinv(D)
    A = M.alpha
    B = M.beta.dot(Dinv)
    Gamma = Dm.dot(M.gamma)
    Delta = Dm.dot(M.delta).dot(Dinv)
    try:
        R = int_matrix(np.block([[A, B], [Gamma, Delta]]))
    except NonIntegralError as exc:
        raise NonIntegralError(f"M does not come from an integral R: {exc}") from exc
    return gamma_membership(R, D)


# ----------------------------------------------------------------------------
# action on Siegel space


def automorphy_matrix(M: SymplecticElement, Z: PeriodMatrix) -> np.ndarray:
    """``gamma Z + delta``."""
    _, _, c, d = M.float_blocks()
    return c @ Z.Z + d


def _diagram_residual(M: SymplecticElement, Z: PeriodMatrix, Zp: np.ndarray) -> float:
    """Max deviation of ``(gamma Z + delta)'^{-1} j_Z(n) = j_Z'(M'^{-1} n)`` over generators of Lambda_D."""
    g = M.g
    Mf = _to_float(M.matrix)
    Minv_t = np.linalg.inv(Mf).T
    Ainv = np.linalg.inv(automorphy_matrix(M, Z).T)
    gens = np.diag(np.concatenate([np.ones(g), np.array(M.D.diag, dtype=float)]))
    worst = 0.0
    for n in gens.T:
        lhs = Ainv @ (Z.Z @ n[:g] + n[g:])
        m = Minv_t @ n
        rhs = Zp @ m[:g] + m[g:]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(lhs)))))
    return worst


def act_on_siegel(
    M: SymplecticElement,
    Z: PeriodMatrix,
    tol: Tolerances = DEFAULT_TOL,
    return_variant: bool = False,
):
    """``M(Z)``, pinned by the lattice identity of the commuting diagram.

    Two candidate formulas appear in the literature, ``(alpha Z + beta)(gamma Z + delta)^{-1}``
    ("standard") and ``(alpha Z + beta D)(gamma Z + delta)^{-1}`` ("scaled"); the first one
    that satisfies the diagram identity and lands in Siegel space is returned.
    """
    a, b, c, d = M.float_blocks()
    Dm = np.diag(np.array(M.D.diag, dtype=float))
    Ginv = np.linalg.inv(c @ Z.Z + d)
    candidates = [("standard", (a @ Z.Z + b) @ Ginv), ("scaled", (a @ Z.Z + b @ Dm) @ Ginv)]
    for variant, Zp in candidates:
        if _diagram_residual(M, Z, Zp) > 1e3 * tol.lin:
            continue
        try:
            out = validate_period_matrix(Zp, Z.D, Tolerances(sym=1e3 * tol.sym, lin=tol.lin))
        except (NotPositiveDefiniteError, InputError):
            continue
        return (out, variant) if return_variant else out
    raise DiagramMismatchError("no variant of the action satisfies the lattice identity")


def analytic_rep(M: SymplecticElement, Z: PeriodMatrix) -> np.ndarray:
    """Matrix of the analytic representation ``(gamma Z + delta)'^{-1}``."""
    return np.linalg.inv(automorphy_matrix(M, Z).T)


def rational_rep(M: SymplecticElement) -> np.ndarray:
    """Matrix ``M'^{-1}`` of the rational representation (exact)."""
    return M.inverse().matrix.T


def transform_characteristic(M: SymplecticElement, c: Characteristic) -> Characteristic:
    """``M[c] = (delta c1 - gamma c2 + 1/2 (D gamma delta')_0, -beta c1 + alpha c2 + 1/2 (alpha beta')_0)``."""
    Dm = _diagD(M.D)
    exact = all(isinstance(x, Fraction) for x in c.c1 + c.c2)
    if exact:
        c1 = np.array(c.c1, dtype=object)
        c2 = np.array(c.c2, dtype=object)
        half = Fraction(1, 2)
        n1 = M.delta.dot(c1) - M.gamma.dot(c2) + half * np.diag(Dm.dot(M.gamma).dot(M.delta.T))
        n2 = -M.beta.dot(c1) + M.alpha.dot(c2) + half * np.diag(M.alpha.dot(M.beta.T))
        return Characteristic(tuple(Fraction(x) for x in n1), tuple(Fraction(x) for x in n2))
    a, b, g_, d = M.float_blocks()
    Df = np.diag(np.array(M.D.diag, dtype=float))
    n1 = d @ c.a1 - g_ @ c.a2 + 0.5 * np.diag(Df @ g_ @ d.T)
    n2 = -b @ c.a1 + a @ c.a2 + 0.5 * np.diag(a @ b.T)
    return Characteristic(tuple(n1), tuple(n2))


# ----------------------------------------------------------------------------
# generators


def _block_R(A, B, C, Dd) -> np.ndarray:
    return int_matrix(np.block([[A, B], [C, Dd]]))


def j_type(D: PolarizationType) -> SymplecticElement:
    """The element ``[[0, -D], [D^{-1}, 0]]`` of G_D (image of ``J = [[0, -I], [I, 0]]``)."""
    g = D.g
    Jm = np.block([[np.zeros((g, g), int), -np.eye(g, dtype=int)], [np.eye(g, dtype=int), np.zeros((g, g), int)]])
    return to_gd(gamma_membership(Jm, D), name="J")


def int_generators(D: PolarizationType) -> list[SymplecticElement]:
    """A finite family in Gamma_D^int: block unipotents and Lambda_D-preserving GL-type elements."""
    g = D.g
    d = D.diag
    I = np.eye(g, dtype=int)
    Z0 = np.zeros((g, g), dtype=int)
    cands: list[tuple[str, np.ndarray]] = []
    for i in range(g):
        for j in range(i, g):
            B = np.zeros((g, g), dtype=int)
            if i == j:
                B[i, i] = 1
            else:
                B[i, j] = 1
                B[j, i] = d[j] // d[i]
            cands.append((f"U{i}{j}", _block_R(I, B, Z0, I)))
    for i in range(g):
        for j in range(i, g):
            G1 = np.zeros((g, g), dtype=int)
            G1[i, j] = G1[j, i] = 1
            cands.append((f"L{i}{j}", _block_R(I, Z0, np.diag(d) @ G1, I)))
    for i in range(g):
        for j in range(g):
            if i == j:
                continue
            U = np.eye(g, dtype=int)
            U[i, j] = 1 if i < j else d[i] // d[j]
            Uinv_t = np.linalg.inv(U).T
            V = np.diag(d) @ Uinv_t @ np.diag(1.0 / np.array(d))
            cands.append((f"G{i}{j}", _block_R(U, Z0, Z0, np.rint(V).astype(int))))
    for i in range(g):
        U = np.eye(g, dtype=int)
        U[i, i] = -1
        cands.append((f"S{i}", _block_R(U, Z0, Z0, U)))
    out = []
    for name, R in cands:
        try:
            el = gamma_membership(R, D)
        except NotSymplecticError:
            continue
        if el.is_int:
            out.append(to_gd(el, name=name))
    return out


def generators(D: PolarizationType) -> list[SymplecticElement]:
    """The J-type element followed by the Gamma_D^int family."""
    return [j_type(D)] + int_generators(D)


def identity(D: PolarizationType) -> SymplecticElement:
    return to_gd(GammaDElement(eye(2 * D.g), D), name="I")


def word_product(word: Sequence[tuple[int, int]], gens: Sequence[SymplecticElement]) -> SymplecticElement:
    """Product of ``gens[i] ** e`` over ``(i, e)`` in ``word``, left to right."""
    D = gens[0].D
    R = GammaDElement(eye(2 * D.g), D)
    for i, e in word:
        G = gens[i].R
        R = R @ (G if e > 0 else G.inverse())
    return to_gd(R)


def random_word(
    rng: np.random.Generator,
    gens: Sequence[SymplecticElement],
    max_len: int = 8,
    min_len: int = 1,
) -> list[tuple[int, int]]:
    n = int(rng.integers(min_len, max_len + 1))
    return [(int(rng.integers(len(gens))), int(rng.choice([-1, 1]))) for _ in range(n)]


def random_gd(rng: np.random.Generator, D: PolarizationType, max_len: int = 8, integral: bool = False) -> SymplecticElement:
    """A random element of G_D (or G_D^int) as a random generator word."""
    gens = int_generators(D) if integral else generators(D)
    word = random_word(rng, gens, max_len)
    M = word_product(word, gens)
    return SymplecticElement(M.alpha, M.beta, M.gamma, M.delta, D, source=M.source, name=words_to_str(word, gens))


# ----------------------------------------------------------------------------
# Sp(D)


@dataclass(frozen=True, eq=False)
class SpDElement:
    """Action on ``K(D) = Z_D + Z_D``; row ``i`` is reduced modulo ``(D, D)_i``."""

    matrix: np.ndarray
    D: PolarizationType

    @property
    def moduli(self) -> tuple[int, ...]:
        return self.D.diag + self.D.diag

    def reduced(self) -> "SpDElement":
        m = self.matrix.copy()
        for i, q in enumerate(self.moduli):
            for j in range(m.shape[1]):
                m[i, j] = int(m[i, j]) % q
        return SpDElement(m, self.D)

    def __matmul__(self, other: "SpDElement") -> "SpDElement":
        return SpDElement(self.matrix.dot(other.matrix), self.D).reduced()

    def __eq__(self, other):
        return isinstance(other, SpDElement) and _key(self.reduced().matrix) == _key(other.reduced().matrix)

    def __hash__(self):
        return hash(_key(self.reduced().matrix))

    def apply(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self.matrix.dot(np.array([int(t) for t in x], dtype=object))
        return tuple(int(t) % q for t, q in zip(y, self.moduli))

    def is_identity(self) -> bool:
        return self == SpDElement(eye(2 * self.D.g), self.D)


def weil_pairing(D: PolarizationType, x, y) -> Fraction:
    """``e^D(x, y) = x1' D^{-1} y2 - y1' D^{-1} x2`` modulo 1, as a Fraction in [0, 1)."""
    g = D.g
    s = Fraction(0)
    for i, di in enumerate(D.diag):
        s += Fraction(int(x[i]) * int(y[g + i]) - int(y[i]) * int(x[g + i]), di)
    return s - (s.numerator // s.denominator)


def spd_projection(R: GammaDElement) -> SpDElement:
    """``pi(R) = Dbar R' Dbar^{-1}`` reduced modulo ``Dbar = diag(D, D)``."""
    D = R.D
    dbar = D.diag + D.diag
    n = 2 * D.g
    m = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            q = Fraction(dbar[i] * int(R.R[j, i]), dbar[j])
            if q.denominator != 1:
                raise NonIntegralError(f"Dbar R' Dbar^-1 has non-integral entry {q}")
            m[i, j] = int(q)
    return SpDElement(m, D).reduced()


def preserves_pairing(P: SpDElement) -> bool:
    n = 2 * P.D.g
    basis = [tuple(int(i == k) for i in range(n)) for k in range(n)]
    for x, y in itertools.product(basis, repeat=2):
        if weil_pairing(P.D, P.apply(x), P.apply(y)) != weil_pairing(P.D, x, y):
            return False
    return True


def in_level_subgroup(R: GammaDElement) -> bool:
    """``R = I + Dbar A`` with ``A`` integral (kernel Gamma_D(D) of the projection)."""
    dbar = R.D.diag + R.D.diag
    diff = R.R - eye(2 * R.g)
    return all(int(diff[i, j]) % dbar[i] == 0 for i in range(diff.shape[0]) for j in range(diff.shape[1]))


# ----------------------------------------------------------------------------
# bounded word search


DEFAULT_SEARCH_CAP = 1_000_000


def decompose_into_generators(
    R: GammaDElement,
    budget: int = 100_000,
    gens: Sequence[SymplecticElement] | None = None,
    cap: int = DEFAULT_SEARCH_CAP,
) -> list[tuple[int, int]]:
    """Shortest word over ``gens`` (and inverses) whose product is ``R``.

    Bidirectional breadth-first search with matrices hashed as integer tuples; at most
    ``budget`` states are stored.  Raises :class:`NotFoundError` when the budget runs out.
    """
    if budget > cap:
        raise InputError(f"budget {budget} exceeds cap {cap}")
    D = R.D
    gens = list(gens) if gens is not None else generators(D)
    steps = []
    for i, G in enumerate(gens):
        steps.append(((i, 1), G.R))
        steps.append(((i, -1), G.R.inverse()))
    inv_steps = {s: (G.inverse()) for s, G in steps}
    start = GammaDElement(eye(2 * D.g), D)
    if start == R:
        return []
    fwd = {start.key(): []}
    bwd = {R.key(): []}
    fwd_frontier = [start]
    bwd_frontier = [R]
    stored = 2
    while fwd_frontier or bwd_frontier:
        # grow the smaller side
        grow_fwd = len(fwd_frontier) <= len(bwd_frontier) if fwd_frontier and bwd_frontier else bool(fwd_frontier)
        nxt = []
        if grow_fwd:
            for P in fwd_frontier:
                w = fwd[P.key()]
                for s, G in steps:
                    Q = P @ G
                    k = Q.key()
                    if k in fwd:
                        continue
                    fwd[k] = w + [s]
                    if k in bwd:
                        return fwd[k] + bwd[k]
                    stored += 1
                    if stored > budget:
                        raise NotFoundError(f"no word found within {budget} states")
                    nxt.append(Q)
            fwd_frontier = nxt
        else:
            for P in bwd_frontier:
                w = bwd[P.key()]
                for s, G in steps:
                    # P = Q * G  =>  Q = P * G^{-1}
                    Q = P @ inv_steps[s]
                    k = Q.key()
                    if k in bwd:
                        continue
                    bwd[k] = [s] + w
                    if k in fwd:
                        return fwd[k] + bwd[k]
                    stored += 1
                    if stored > budget:
                        raise NotFoundError(f"no word found within {budget} states")
                    nxt.append(Q)
            bwd_frontier = nxt
    raise NotFoundError("search space exhausted")


def words_to_str(word: Iterable[tuple[int, int]], gens: Sequence[SymplecticElement]) -> str:
    return " ".join(gens[i].name + ("" if e > 0 else "^-1") for i, e in word) or "I"
