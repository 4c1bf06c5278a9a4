"""Synthetic abelian-fibration harness.

A base is modelled by a segment ``Z(t) = Z0 + t (Z1 - Z0)`` in Siegel space for a
root chart; every other chart is reached through gluing matrices ``M^{ab}`` so
that ``Z^b(t) = M^{ab}(Z^a(t))``.  On each overlap two transition functions are
evaluated:

* ``g_L = det C~^{ab}``, the determinant of the matrix expressing the theta basis
  of chart ``b`` through the one of chart ``a`` (computed, never assumed);
* ``g_mu = det(gamma Z^a + delta)^{-1}``.

The torsion relations then become identities between these numbers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial

import numpy as np

from .core import Characteristic, PeriodMatrix, PolarizationType, validate_period_matrix
from .errors import HypothesisError, IdentityViolation, InputError
from .symplectic import (
    SymplecticElement,
    act_on_siegel,
    automorphy_matrix,
    gamma_membership,
    identity,
    to_gd,
    transform_characteristic,
)
from .transform import matrix_det, transformation_matrix

TAU_TOR = 1e-6
TAU_COC = 1e-7


@dataclass(frozen=True)
class Overlap:
    a: str
    b: str
    M: SymplecticElement


@dataclass(frozen=True, eq=False)
class CoverSpec:
    """Charts, gluing matrices and the root chart's period segment.

    Period matrices and characteristics of non-root charts are propagated along a
    spanning tree of the overlap graph rooted at ``charts[0]``.
    """

    D: PolarizationType
    charts: tuple[str, ...]
    overlaps: tuple[Overlap, ...]
    Z0: np.ndarray
    Z1: np.ndarray
    samples: int
    c: Characteristic
    tol: float = 1e-9
    _tree: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.charts:
            raise InputError("cover needs at least one chart")
        if len(set(self.charts)) != len(self.charts):
            raise InputError("chart ids must be distinct")
        if self.samples < 1:
            raise InputError("need at least one base sample")
        for ov in self.overlaps:
            if ov.a not in self.charts or ov.b not in self.charts:
                raise InputError(f"overlap ({ov.a}, {ov.b}) names an unknown chart")
            if ov.M.D != self.D:
                raise InputError("gluing matrix has the wrong polarization type")
        for Z in (self.Z0, self.Z1):
            validate_period_matrix(Z, self.D)
        for t in np.linspace(0, 1, 4 * self.samples + 1):
            validate_period_matrix(self.Z0 + t * (self.Z1 - self.Z0), self.D)
        self._tree.update(self._spanning_tree())
        self.check_consistency()

    @property
    def root(self) -> str:
        return self.charts[0]

    def base_points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.samples) if self.samples > 1 else np.array([0.5])

    def _spanning_tree(self) -> dict[str, tuple[str | None, SymplecticElement, SymplecticElement]]:
        """BFS tree from the root: chart -> (parent, edge matrix, root-to-chart matrix)."""
        adj: dict[str, list[tuple[str, SymplecticElement]]] = {x: [] for x in self.charts}
        for ov in self.overlaps:
            adj[ov.a].append((ov.b, ov.M))
            adj[ov.b].append((ov.a, ov.M.inverse()))
        ident = identity(self.D)
        tree = {self.root: (None, ident, ident)}
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y, M in adj[x]:
                if y not in tree:
                    tree[y] = (x, M, M @ tree[x][2])
                    queue.append(y)
        missing = set(self.charts) - set(tree)
        if missing:
            raise InputError(f"charts {sorted(missing)} are not connected to the root chart")
        return tree

    def chart_matrix(self, chart: str) -> SymplecticElement:
        return self._tree[chart][2]

    def period(self, chart: str, t: float) -> PeriodMatrix:
        Z = validate_period_matrix(self.Z0 + t * (self.Z1 - self.Z0), self.D)
        return Z if chart == self.root else act_on_siegel(self.chart_matrix(chart), Z)

    def characteristic(self, chart: str) -> Characteristic:
        """Characteristic of a chart, transported from the root edge by edge along the tree.

        ``M -> M[c]`` composes only modulo ``Lambda(H)``, so the edge-wise transport
        is used rather than the composite matrix.
        """
        edges = []
        while self._tree[chart][0] is not None:
            parent, M, _ = self._tree[chart]
            edges.append(M)
            chart = parent
        c = self.c
        for M in reversed(edges):
            c = transform_characteristic(M, c)
        return c

    def triples(self) -> list[tuple[Overlap, Overlap, Overlap]]:
        """All ``((a,b), (b,c), (a,c))`` present among the overlaps."""
        by_pair = {(ov.a, ov.b): ov for ov in self.overlaps}
        out = []
        for (a, b), ab in by_pair.items():
            for (b2, c), bc in by_pair.items():
                if b2 == b and (a, c) in by_pair and len({a, b, c}) == 3:
                    out.append((ab, bc, by_pair[(a, c)]))
        return out

    def check_consistency(self):
        """Composition ``M^{ac} = M^{bc} M^{ab}`` on triples and agreement of period maps."""
        for ab, bc, ac in self.triples():
            if ac.M != bc.M @ ab.M:
                raise InputError(f"gluing data inconsistent on ({ab.a}, {ab.b}, {bc.b})")
        for ov in self.overlaps:
            for t in (0.0, 1.0):
                Zb = act_on_siegel(ov.M, self.period(ov.a, t)).Z
                if np.max(np.abs(Zb - self.period(ov.b, t).Z)) > self.tol * max(1.0, float(np.max(np.abs(Zb)))):
                    raise InputError(f"period maps disagree on overlap ({ov.a}, {ov.b})")


# ----------------------------------------------------------------------------
# transition functions


def transition_det_push(
    M: SymplecticElement,
    Z: PeriodMatrix,
    c: Characteristic,
    eps: float = 1e-10,
    c_target: Characteristic | None = None,
    rng: np.random.Generator | None = None,
) -> complex:
    """``det C~^{ab}`` where ``B^{Z'} = h C~ psi^* B^Z``; equals ``1 / det C_cl``."""
    res = transformation_matrix(M, Z, c, eps=eps, c_target=c_target, rng=rng)
    return 1.0 / matrix_det(res.C_classical)


def transition_hodge(M: SymplecticElement, Z: PeriodMatrix) -> complex:
    """``det(gamma Z + delta)^{-1}``."""
    return 1.0 / complex(np.linalg.det(automorphy_matrix(M, Z)))


class CocycleKind(str, Enum):
    det_push = "detPush"
    hodge = "hodge"


@dataclass(frozen=True, eq=False)
class TransitionCocycle:
    kind: CocycleKind
    t: np.ndarray
    values: dict[tuple[str, str], np.ndarray]

    def residual(self, cover: CoverSpec) -> float:
        """Max of ``|g^{ab} g^{bc} / g^{ac} - 1|`` over triples and samples (0 if there are none)."""
        worst = 0.0
        for ab, bc, ac in cover.triples():
            r = self.values[(ab.a, ab.b)] * self.values[(bc.a, bc.b)] / self.values[(ac.a, ac.b)]
            worst = max(worst, float(np.max(np.abs(r - 1))))
        return worst


def cocycle(
    cover: CoverSpec,
    kind: CocycleKind | str,
    eps: float = 1e-10,
    rng: np.random.Generator | None = None,
) -> TransitionCocycle:
    kind = CocycleKind(kind)
    rng = rng if rng is not None else np.random.default_rng(0)
    ts = cover.base_points()
    values = {}
    for ov in cover.overlaps:
        row = []
        ca, cb = cover.characteristic(ov.a), cover.characteristic(ov.b)
        for t in ts:
            Za = cover.period(ov.a, t)
            if kind is CocycleKind.hodge:
                row.append(transition_hodge(ov.M, Za))
            else:
                row.append(transition_det_push(ov.M, Za, ca, eps, c_target=cb, rng=rng))
        values[(ov.a, ov.b)] = np.array(row)
    return TransitionCocycle(kind, ts, values)


# ----------------------------------------------------------------------------
# torsion relations


class TorsionMode(str, Enum):
    A = "A"
    A_exceptional = "A-exceptional"
    B = "B"
    B_exceptional = "B-exceptional"


def torsion_exponents(D: PolarizationType, mode: TorsionMode | str) -> tuple[int, Fraction]:
    """Exponents ``(p, q)`` of the identity ``g_L^p g_mu^q = 1``."""
    mode = TorsionMode(mode)
    d = D.d
    return {
        TorsionMode.A: (8, Fraction(4 * d)),
        TorsionMode.A_exceptional: (24, Fraction(12 * d)),
        TorsionMode.B: (1, Fraction(d, 2)),
        TorsionMode.B_exceptional: (3, Fraction(3 * d, 2)),
    }[mode]


def check_hypotheses(D: PolarizationType, c: Characteristic, mode: TorsionMode | str):
    mode = TorsionMode(mode)
    if not c.is_half(D):
        raise HypothesisError("torsion relations need a half-characteristic")
    exceptional = mode in (TorsionMode.A_exceptional, TorsionMode.B_exceptional)
    if exceptional != D.exceptional:
        kind = "exceptional" if D.exceptional else "non-exceptional"
        raise HypothesisError(f"mode {mode.value} does not apply to the {kind} type {D}")
    if mode in (TorsionMode.B, TorsionMode.B_exceptional):
        if not D.is_even:
            raise HypothesisError(f"mode {mode.value} requires even type, got {D}")
        if D.g < 3:
            raise HypothesisError(f"mode {mode.value} requires g >= 3")
        if not c.is_zero():
            raise HypothesisError(f"mode {mode.value} requires c = 0")


@dataclass(frozen=True)
class TorsionRow:
    a: str
    b: str
    t: float
    g_L: complex
    g_mu: complex
    value: complex
    residual: float


@dataclass(frozen=True)
class TorsionReport:
    mode: TorsionMode
    exponents: tuple[int, Fraction]
    rows: tuple[TorsionRow, ...]
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "exponents": [self.exponents[0], str(self.exponents[1])],
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
            "rows": [
                {
                    "a": r.a,
                    "b": r.b,
                    "t": r.t,
                    "g_L": [r.g_L.real, r.g_L.imag],
                    "g_mu": [r.g_mu.real, r.g_mu.imag],
                    "value": [r.value.real, r.value.imag],
                    "residual": r.residual,
                }
                for r in self.rows
            ],
        }


def _power(z: complex, q: Fraction) -> complex:
    if q.denominator != 1:
        raise HypothesisError("non-integral exponent; d must be even")
    return z ** int(q)


def verify_torsion(
    cover: CoverSpec,
    mode: TorsionMode | str,
    eps: float = 1e-10,
    tol: float = TAU_TOR,
    rng: np.random.Generator | None = None,
) -> TorsionReport:
    """Evaluate ``g_L^p g_mu^q`` on every overlap and sample."""
    mode = TorsionMode(mode)
    D = cover.D
    check_hypotheses(D, cover.c, mode)
    p, q = torsion_exponents(D, mode)
    L = cocycle(cover, CocycleKind.det_push, eps, rng)
    H = cocycle(cover, CocycleKind.hodge, eps, rng)
    rows = []
    for ov in cover.overlaps:
        for k, t in enumerate(L.t):
            gl = complex(L.values[(ov.a, ov.b)][k])
            gm = complex(H.values[(ov.a, ov.b)][k])
            val = gl**p * _power(gm, q)
            rows.append(TorsionRow(ov.a, ov.b, float(t), gl, gm, val, abs(val - 1)))
    worst = max((r.residual for r in rows), default=0.0)
    return TorsionReport(mode, (p, q), tuple(rows), worst, tol)


# ----------------------------------------------------------------------------
# covers


def two_chart_cover(
    M: SymplecticElement,
    Z0,
    Z1,
    samples: int = 5,
    c: Characteristic | None = None,
) -> CoverSpec:
    D = M.D
    c = c if c is not None else Characteristic.zero(D.g)
    return CoverSpec(D, ("a", "b"), (Overlap("a", "b", M),), np.asarray(Z0), np.asarray(Z1), samples, c)


def triangle_cover(
    M_ab: SymplecticElement,
    M_bc: SymplecticElement,
    Z0,
    Z1,
    samples: int = 3,
    c: Characteristic | None = None,
) -> CoverSpec:
    D = M_ab.D
    c = c if c is not None else Characteristic.zero(D.g)
    ovs = (Overlap("a", "b", M_ab), Overlap("b", "c", M_bc), Overlap("a", "c", M_bc @ M_ab))
    return CoverSpec(D, ("a", "b", "c"), ovs, np.asarray(Z0), np.asarray(Z1), samples, c)


def cover_from_json(doc: dict) -> CoverSpec:
    from .jsonio import characteristic_from_json, matrix_from_json, polarization_from_json

    try:
        D = polarization_from_json(doc["D"])
        charts = tuple(str(x) for x in doc["charts"])
        overlaps = tuple(
            Overlap(str(o["a"]), str(o["b"]), to_gd(gamma_membership(np.array(o["R"], dtype=object), D)))
            for o in doc["overlaps"]
        )
        path = doc["path"]
        Z0 = matrix_from_json(path["Z0"], D.g)
        Z1 = matrix_from_json(path["Z1"], D.g)
        samples = int(path.get("samples", 5))
        ch = doc.get("characteristic") or {}
        c = characteristic_from_json(ch, D.g) if ch else Characteristic.zero(D.g)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed cover: {exc!r}") from exc
    return CoverSpec(D, charts, overlaps, Z0, Z1, samples, c)


def cover_to_json(cover: CoverSpec) -> dict:
    from .jsonio import characteristic_to_json, matrix_to_json

    return {
        "D": list(cover.D.diag),
        "charts": list(cover.charts),
        "overlaps": [
            {"a": o.a, "b": o.b, "R": [[int(x) for x in row] for row in o.M.R.R]} for o in cover.overlaps
        ],
        "path": {"Z0": matrix_to_json(cover.Z0), "Z1": matrix_to_json(cover.Z1), "samples": cover.samples},
        "characteristic": characteristic_to_json(cover.c),
    }


# ----------------------------------------------------------------------------
# closing arithmetic


def theorem_c_coefficient(g: int, n: int) -> Fraction:
    """``a(n) = n^{g+1} b / (g+1)! - n^g / 2`` with ``b = (g+1)!/2``, checked against ``n^g (n-1) / 2``."""
    if g < 1 or n < 1:
        raise InputError("need g >= 1 and n >= 1")
    b = Fraction(factorial(g + 1), 2)
    a = Fraction(n ** (g + 1), factorial(g + 1)) * b - Fraction(n**g, 2)
    closed = Fraction(n**g * (n - 1), 2)
    if a != closed:
        raise IdentityViolation(f"a({n}) = {a} but n^g(n-1)/2 = {closed} for g = {g}")
    return a
