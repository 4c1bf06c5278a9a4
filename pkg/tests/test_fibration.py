from fractions import Fraction

import numpy as np
import pytest

from thetadet.acceptance import draw_pair
from thetadet.core import Characteristic, validate_polarization
from thetadet.errors import HypothesisError, InputError
from thetadet.symplectic import generators, identity, int_generators, j_type, random_gd
from thetadet.fibration import (
    TAU_COC,
    CocycleKind,
    CoverSpec,
    Overlap,
    TorsionMode,
    check_hypotheses,
    cocycle,
    cover_from_json,
    cover_to_json,
    theorem_c_coefficient,
    torsion_exponents,
    transition_det_push,
    transition_hodge,
    triangle_cover,
    two_chart_cover,
    verify_torsion,
)
from thetadet.core import validate_period_matrix

D1 = validate_polarization([1])
Z0 = np.array([[1.0j]])
Z1 = np.array([[0.3 + 1.4j]])


def _segment(rng, D):
    """Endpoints of a short segment around a reduced point."""
    from thetadet.core import random_siegel

    A = random_siegel(rng, D.g)
    return A, A + 0.1 * (random_siegel(rng, D.g) - A)


def test_identity_cover_is_exact():
    cover = two_chart_cover(identity(D1), Z0, Z1, samples=3)
    rep = verify_torsion(cover, "A")
    assert rep.passed
    assert rep.max_residual < 1e-12
    assert all(r.g_mu == 1 for r in rep.rows)


def test_hodge_examples():
    D = validate_polarization([2])
    Z = validate_period_matrix([[1.5j]], D)
    assert transition_hodge(identity(D), Z) == 1
    U = next(M for M in int_generators(D) if M.name.startswith("U"))
    assert transition_hodge(U, Z) == pytest.approx(1)
    assert transition_hodge(j_type(D1), validate_period_matrix([[2j]], D1)) == pytest.approx(1 / 2j)


def test_det_push_modulus_law(rng):
    for diag in [(1,), (2,), (1, 2), (3,)]:
        D = validate_polarization(diag)
        M, Z = draw_pair(rng, D, 4, 0.1)[:2]
        c = Characteristic.zero(D.g)
        gl = transition_det_push(M, Z, c, rng=rng)
        gm = transition_hodge(M, Z)
        assert abs(gl) == pytest.approx(abs(gm) ** (-D.d / 2), rel=1e-8)


def test_two_chart_inversion_mode_a():
    cover = two_chart_cover(j_type(D1), Z0, Z1, samples=5)
    rep = verify_torsion(cover, TorsionMode.A)
    assert len(rep.rows) == 5
    assert rep.passed and rep.max_residual < 1e-6


def test_mode_b_222():
    D = validate_polarization([2, 2, 2])
    rng = np.random.default_rng(3)
    M, Z = draw_pair(rng, D, 4, 0.2)[:2]
    cover = two_chart_cover(M, Z.Z, Z.Z + 0.05j * np.eye(3), samples=2)
    rep = verify_torsion(cover, "B", rng=rng)
    assert rep.passed


def test_exceptional_modes():
    D = validate_polarization([3])
    Z = validate_period_matrix([[1.1j]], D)
    cover = two_chart_cover(j_type(D), Z.Z, Z.Z + 0.2, samples=3)
    assert verify_torsion(cover, "A-exceptional").passed
    with pytest.raises(HypothesisError):
        verify_torsion(cover, "A")
    with pytest.raises(HypothesisError):
        verify_torsion(two_chart_cover(j_type(D1), Z0, Z1), "A-exceptional")


def test_hypothesis_checks():
    c0 = Characteristic.zero(3)
    check_hypotheses(validate_polarization([2, 2, 2]), c0, "B")
    check_hypotheses(validate_polarization([2, 2, 6]), c0, "B-exceptional")
    with pytest.raises(HypothesisError):
        check_hypotheses(validate_polarization([1, 2, 2]), c0, "B")
    with pytest.raises(HypothesisError):
        check_hypotheses(validate_polarization([2, 2]), Characteristic.zero(2), "B")
    with pytest.raises(HypothesisError):
        check_hypotheses(validate_polarization([2, 2, 2]), Characteristic.from_arrays([0.5, 0, 0], [0, 0, 0]), "B")
    with pytest.raises(HypothesisError):
        check_hypotheses(validate_polarization([2]), Characteristic.from_arrays([0.3], [0]), "A")
    # hypothesis errors are input errors
    assert issubclass(HypothesisError, InputError)


def test_torsion_exponents():
    D = validate_polarization([2, 4])
    assert torsion_exponents(D, "A") == (8, Fraction(32))
    assert torsion_exponents(D, "B") == (1, Fraction(4))
    assert torsion_exponents(D, "A-exceptional") == (24, Fraction(96))
    assert torsion_exponents(D, "B-exceptional") == (3, Fraction(12))


@pytest.mark.parametrize("diag", [(1,), (2,), (1, 2)])
def test_cocycles_on_triangles(diag):
    D = validate_polarization(diag)
    rng = np.random.default_rng(11)
    for _ in range(20):
        M_ab, M_bc = random_gd(rng, D, 2), random_gd(rng, D, 2)
        Za, Zb = _segment(rng, D)
        try:
            cover = triangle_cover(M_ab, M_bc, Za, Zb, samples=2)
        except InputError:
            continue
        if min(cover.period(x, t).y_min for x in cover.charts for t in (0, 1)) < 0.15:
            continue
        break
    else:
        pytest.skip("no well-reduced triangle found")
    for kind in CocycleKind:
        coc = cocycle(cover, kind, rng=rng)
        assert coc.residual(cover) < TAU_COC


def test_two_chart_cover_has_no_triples():
    cover = two_chart_cover(j_type(D1), Z0, Z1, samples=2)
    assert cover.triples() == []
    assert cocycle(cover, "hodge").residual(cover) == 0.0


def test_sample_doubling_is_stable():
    cover5 = two_chart_cover(j_type(D1), Z0, Z1, samples=3)
    cover10 = two_chart_cover(j_type(D1), Z0, Z1, samples=6)
    r1 = verify_torsion(cover5, "A").max_residual
    r2 = verify_torsion(cover10, "A").max_residual
    assert abs(r1 - r2) < 10 * 1e-10


def test_cover_validation():
    M = j_type(D1)
    with pytest.raises(InputError):
        CoverSpec(D1, ("a", "a"), (), Z0, Z1, 2, Characteristic.zero(1))
    with pytest.raises(InputError):
        CoverSpec(D1, ("a", "b"), (Overlap("a", "x", M),), Z0, Z1, 2, Characteristic.zero(1))
    with pytest.raises(InputError):
        CoverSpec(D1, ("a", "b"), (), Z0, Z1, 2, Characteristic.zero(1))
    with pytest.raises(InputError):
        two_chart_cover(M, Z0, np.array([[-1j]]))
    g = generators(D1)
    bad = (Overlap("a", "b", g[0]), Overlap("b", "c", g[1]), Overlap("a", "c", g[1]))
    with pytest.raises(InputError):
        CoverSpec(D1, ("a", "b", "c"), bad, Z0, Z1, 2, Characteristic.zero(1))


def test_chart_characteristics_are_transported():
    D = validate_polarization([2])
    c = Characteristic.from_arrays([Fraction(1, 2)], [Fraction(1, 2)])
    cover = triangle_cover(j_type(D), j_type(D), Z0, Z1, samples=2, c=c)
    assert cover.characteristic("a") == c
    assert cover.characteristic("b").is_half(D)


def test_cover_json_roundtrip():
    D = validate_polarization([1, 2])
    rng = np.random.default_rng(2)
    M = random_gd(rng, D, 3)
    A, B = _segment(rng, D)
    cover = two_chart_cover(M, A, B, samples=4)
    doc = cover_to_json(cover)
    back = cover_from_json(doc)
    assert back.charts == cover.charts
    assert back.overlaps[0].M == M
    assert np.allclose(back.Z0, cover.Z0) and back.samples == 4
    with pytest.raises(InputError):
        cover_from_json({"D": [1]})


def test_closing_coefficient_examples():
    assert theorem_c_coefficient(3, 1) == 0
    assert theorem_c_coefficient(5, 1) == 0
    assert theorem_c_coefficient(3, 2) == 4
    assert theorem_c_coefficient(10, 7) == Fraction(7**10 * 6, 2)
    with pytest.raises(InputError):
        theorem_c_coefficient(0, 2)


def test_report_json():
    rep = verify_torsion(two_chart_cover(j_type(D1), Z0, Z1, samples=2), "A")
    doc = rep.to_json()
    assert doc["mode"] == "A" and doc["exponents"] == [8, "4"] and doc["passed"]
    assert len(doc["rows"]) == 2
