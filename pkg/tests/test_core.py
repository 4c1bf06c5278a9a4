from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetadet.core import (
    Characteristic,
    LatticeVector,
    admissible_types,
    decompose_vector,
    forms,
    period_from_basis,
    random_siegel,
    validate_period_matrix,
    validate_polarization,
    zd_elements,
    zd_index,
)
from thetadet.errors import (
    AsymmetryError,
    DegenerateBasisError,
    DivisibilityError,
    InputError,
    NotPositiveDefiniteError,
    PositivityError,
)

from conftest import period, polarizations, seeds


def test_polarization_examples():
    D = validate_polarization([1])
    assert D.diag == (1,) and D.d == 1
    D = validate_polarization([2, 4])
    assert D.d == 8 and D.g == 2
    with pytest.raises(DivisibilityError):
        validate_polarization([2, 3])
    with pytest.raises(PositivityError):
        validate_polarization([0, 2])
    with pytest.raises(InputError):
        validate_polarization([])


@pytest.mark.parametrize(
    "diag, exceptional",
    [((3,), True), ((1, 3), True), ((2, 6), True), ((3, 3), False), ((3, 6), False), ((2,), False), ((1, 2, 6), True)],
)
def test_exceptional_condition(diag, exceptional):
    assert validate_polarization(diag).exceptional is exceptional


def test_zd_order_last_coordinate_fastest():
    D = validate_polarization([2, 4])
    ms = zd_elements(D)
    assert ms.shape == (8, 2)
    assert ms[:5].tolist() == [[0, 0], [0, 1], [0, 2], [0, 3], [1, 0]]
    assert [zd_index(D, m) for m in ms] == list(range(8))


def test_admissible_types_enumeration():
    types = {D.diag for D in admissible_types(8, 2)}
    assert (2, 4) in types and (1, 8) in types and (2, 2) in types
    assert (2, 3) not in types and (4, 4) not in types
    assert all(D.is_even and D.g >= 3 for D in admissible_types(64, 6, min_g=3, even=True))


def test_period_matrix_validation():
    D1 = validate_polarization([1])
    assert validate_period_matrix([[1j]], D1).g == 1
    validate_period_matrix([[1j, 0], [0, 2j]], validate_polarization([1, 1]))
    with pytest.raises(NotPositiveDefiniteError):
        validate_period_matrix([[-1j]], D1)
    with pytest.raises(AsymmetryError):
        validate_period_matrix([[1j, 0.3], [0, 1j]], validate_polarization([1, 1]))
    with pytest.raises(InputError):
        validate_period_matrix([[1j, 0], [0, 1j]], D1)


def test_decompose_examples():
    D = validate_polarization([1])
    Z = validate_period_matrix([[1j]], D)
    assert np.allclose(decompose_vector(Z, [0]), 0)
    v1, v2 = decompose_vector(Z, [1j])
    assert np.allclose(v1, [1]) and np.allclose(v2, [0])
    Z = validate_period_matrix([[1 + 1j]], D)
    v1, v2 = decompose_vector(Z, [3 + 2j])
    assert np.allclose(v1, [2]) and np.allclose(v2, [1])


@given(polarizations(), seeds())
def test_decompose_roundtrip(D, seed):
    rng = np.random.default_rng(seed)
    Z = period(rng, D)
    v = rng.normal(size=D.g) + 1j * rng.normal(size=D.g)
    v1, v2 = decompose_vector(Z, v)
    assert np.allclose(Z.Z @ v1 + v2, v, atol=1e-9)


def test_forms_examples():
    D = validate_polarization([2])
    Z = validate_period_matrix([[1j]], D)
    f = forms(Z, [0], [0])
    assert f.H == 0 and f.B == 0 and f.HmB == 0 and f.E == 0
    assert forms(Z, Z.Z @ [1], [2]).E == pytest.approx(2)
    f = forms(Z, [1], [1])
    assert f.H == pytest.approx(1) and f.B == pytest.approx(1) and f.HmB == pytest.approx(0)


@given(polarizations(), seeds())
def test_forms_identities(D, seed):
    rng = np.random.default_rng(seed)
    Z = period(rng, D)
    v, w = (rng.normal(size=(2, D.g)) + 1j * rng.normal(size=(2, D.g)))
    f = forms(Z, v, w)
    assert f.HmB == pytest.approx(f.H - f.B, abs=1e-9)
    # E is the imaginary part of H, and alternating
    assert f.E == pytest.approx(f.H.imag, abs=1e-9)
    assert forms(Z, w, v).E == pytest.approx(-f.E, abs=1e-9)


def test_period_from_basis_examples():
    D1 = validate_polarization([1])
    assert np.allclose(period_from_basis([1j, 1], D1).Z, [[1j]])
    # the frame is e_i = lambda_{g+i} / d_i, so lambda_1 = 3i = (3i/2) * 2 gives Z = D (3i / 2)
    Z = period_from_basis([3j, 2], validate_polarization([2]))
    assert np.allclose(Z.Z, [[3j]])
    with pytest.raises(DegenerateBasisError):
        period_from_basis([1j, 0], D1)


@given(polarizations(max_g=3), seeds())
def test_period_from_basis_roundtrip(D, seed):
    rng = np.random.default_rng(seed)
    Z = random_siegel(rng, D.g)
    # basis vectors of the lattice in a random complex frame: columns of F (Z, D)
    F = rng.normal(size=(D.g, D.g)) + 1j * rng.normal(size=(D.g, D.g))
    basis = F @ np.hstack([Z, np.diag(np.array(D.diag, dtype=float))])
    assert np.allclose(period_from_basis(basis, D).Z, Z, atol=1e-8)


def test_characteristic_membership():
    D = validate_polarization([2])
    c = Characteristic((Fraction(1, 4),), (Fraction(1, 2),))
    assert c.is_half(D) and not c.in_lattice_dual(D)
    assert Characteristic((Fraction(1, 2),), (Fraction(1),)).in_lattice_dual(D)
    assert not Characteristic((Fraction(1, 8),), (Fraction(0),)).is_half(D)
    assert Characteristic.from_arrays([0.25], [0.5]) == c
    assert (c - c).is_zero()


def test_lattice_vector_requires_divisibility():
    D = validate_polarization([2])
    LatticeVector((1,), (4,), D)
    with pytest.raises(InputError):
        LatticeVector((1,), (3,), D)


@given(st.integers(1, 3), seeds())
def test_random_siegel_in_upper_half_space(g, seed):
    Z = random_siegel(np.random.default_rng(seed), g)
    assert np.allclose(Z, Z.T)
    assert np.linalg.eigvalsh(Z.imag)[0] > 0
