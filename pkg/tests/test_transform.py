import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetadet.acceptance import draw_pair
from thetadet.core import Characteristic, validate_period_matrix, validate_polarization
from thetadet.errors import (
    CapExceededError,
    ClassificationError,
    IllConditionedError,
    InputError,
    NotBijectiveError,
)
from thetadet.symplectic import act_on_siegel, generators, identity, int_generators, j_type, random_gd
from thetadet.theta import random_characteristic, theta_basis
from thetadet.transform import (
    Mode,
    allowed_orders,
    classify,
    cm_fourier_generator,
    delta_permutation,
    dft_determinant,
    dft_determinant_tensor,
    fourier_kernel,
    h_psi,
    matrix_det,
    permutation_sign,
    permutation_sign_delta,
    principal_sqrt,
    root_of_unity_order,
    sample_points,
    transformation_matrix,
)

from conftest import period

SMALL = [(1,), (2,), (3,), (1, 2), (2, 2), (1, 3), (2, 4)]


def test_h_psi_inversion_example():
    D = validate_polarization([1])
    Z = validate_period_matrix([[1j]], D)
    assert h_psi(j_type(D), Z, [1.0]) == pytest.approx(math.exp(math.pi), rel=1e-14)
    assert h_psi(identity(D), Z, [0.3 + 0.2j]) == 1


def test_principal_sqrt_branch():
    assert principal_sqrt(-1) == 1j
    assert principal_sqrt(-4 + 0j) == 2j
    assert principal_sqrt(1j) == pytest.approx(cmath.exp(1j * math.pi / 4))
    for z in (3 - 1j, -2 - 5j, 0.1 + 7j):
        r = principal_sqrt(z)
        assert r * r == pytest.approx(z)
        assert -math.pi / 2 < cmath.phase(r) <= math.pi / 2


def test_matrix_det_extended_agrees():
    C = np.random.default_rng(1).normal(size=(6, 6)) + 1j
    assert matrix_det(C, extended=True) == pytest.approx(matrix_det(C, extended=False), rel=1e-12)


def test_identity_gives_unit_matrix(rng):
    D = validate_polarization([2, 2])
    Z = period(rng, D)
    res = transformation_matrix(identity(D), Z, Characteristic.zero(2), rng=rng)
    assert np.allclose(res.C, np.eye(4), atol=1e-9)
    assert res.order == 1


def test_requires_half_characteristic_and_samples(rng):
    D = validate_polarization([2])
    Z = period(rng, D)
    c = Characteristic.from_arrays([0.3], [0])
    with pytest.raises(InputError):
        transformation_matrix(identity(D), Z, c)
    with pytest.raises(InputError):
        transformation_matrix(identity(D), Z, Characteristic.zero(1), nsamples=3)
    with pytest.raises(InputError):
        sample_points(rng, Z, 4, scheme="grid")


@pytest.mark.parametrize("diag", SMALL)
def test_extracted_matrix_intertwines_bases(diag):
    rng = np.random.default_rng(sum(diag))
    D = validate_polarization(diag)
    M, Z = draw_pair(rng, D, 4, 0.1)[:2]
    c = random_characteristic(rng, D)
    res = transformation_matrix(M, Z, c, rng=rng)
    # a fresh point, not used in the fit
    vp = sample_points(np.random.default_rng(99), res.Zp, 1)[0] * 0.3
    A = (np.array(M.float_blocks()[2]) @ Z.Z + M.float_blocks()[3])
    v = A.T @ vp
    lhs = theta_basis(c, Z, v).values * h_psi(M, Z, v)
    rhs = res.C_classical @ theta_basis(res.Mc, res.Zp, vp).values
    assert np.allclose(lhs, rhs, atol=1e-7 * np.abs(lhs).max())
    assert res.order in allowed_orders(D, "symmetric")
    assert abs(abs(res.detCM) - 1) < 1e-8


@pytest.mark.parametrize("diag", [(1,), (2,), (3,), (1, 2), (2, 2)])
def test_fourier_generator_matches_extraction(diag):
    D = validate_polarization(diag)
    Z = validate_period_matrix(1.3j * np.eye(D.g), D)
    res = transformation_matrix(j_type(D), Z, Characteristic.zero(D.g), rng=np.random.default_rng(0))
    F = cm_fourier_generator(D)
    k = res.C_M[0, 0] / F[0, 0]
    assert abs(abs(k) - 1) < 1e-9
    assert min(abs(k - 1), abs(k + 1)) < 1e-8
    assert np.allclose(res.C_M, k * F, atol=1e-8)


def test_fourier_small_cases():
    assert np.allclose(fourier_kernel(validate_polarization([1])), [[1]])
    assert np.allclose(fourier_kernel(validate_polarization([2])), [[1, 1], [1, -1]])
    F = cm_fourier_generator(validate_polarization([2]))
    assert np.allclose(F @ F.conj().T, np.eye(2))


def test_dft_determinant_examples():
    r = dft_determinant(validate_polarization([2]))
    assert r.det == pytest.approx(-2)
    assert r.zeta4 == pytest.approx(-1)
    assert dft_determinant(validate_polarization([1])).zeta4 == pytest.approx(1)
    for diag in [(3,), (4,), (2, 2), (1, 2, 4), (2, 6)]:
        D = validate_polarization(diag)
        r = dft_determinant(D)
        assert r.zeta4**4 == pytest.approx(1, abs=1e-9)
        assert r.det == pytest.approx(dft_determinant_tensor(D), rel=1e-8)
    with pytest.raises(CapExceededError):
        dft_determinant(validate_polarization([5, 15]))
    # cap exceeded is an input error
    with pytest.raises(InputError):
        dft_determinant(validate_polarization([100]))


def test_permutation_sign_examples():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([1, 2, 0]) == 1
    assert permutation_sign([]) == 1


def test_delta_permutation_examples():
    D = validate_polarization([2, 2, 2])
    swap = next(M for M in int_generators(D) if M.name.startswith("G"))
    assert sorted(delta_permutation(swap)) == list(range(8))
    assert permutation_sign_delta(identity(D)) == 1
    with pytest.raises(InputError):
        delta_permutation(j_type(D))


@settings(max_examples=20)
@given(st.sampled_from([(2, 2, 2), (2, 2, 4), (2, 4, 4), (2, 2, 2, 2)]), st.integers(0, 2**31))
def test_delta_sign_trivial_for_even_types(diag, seed):
    D = validate_polarization(diag)
    M = random_gd(np.random.default_rng(seed), D, 10, integral=True)
    assert permutation_sign_delta(M) == 1


def test_delta_sign_can_be_odd_in_genus_one():
    D = validate_polarization([4])
    signs = {permutation_sign_delta(random_gd(np.random.default_rng(s), D, 10, integral=True)) for s in range(20)}
    assert signs == {1, -1}


def test_not_bijective_is_reported():
    from types import SimpleNamespace

    D = validate_polarization([2, 2])
    # a singular Delta cannot come from a group element, so fake one
    fake = SimpleNamespace(integral=True, D=D, R=SimpleNamespace(Delta=np.array([[1, 1], [1, 1]], dtype=object)))
    with pytest.raises(NotBijectiveError):
        delta_permutation(fake)


def test_root_of_unity_order_examples():
    assert root_of_unity_order(1) == 1
    assert root_of_unity_order(-1) == 2
    assert root_of_unity_order(1j) == 4
    assert root_of_unity_order(cmath.exp(2j * math.pi / 24)) == 24
    assert root_of_unity_order(cmath.exp(2j * math.pi * 5 / 8)) == 8
    assert root_of_unity_order(2) is None
    assert root_of_unity_order(cmath.exp(2j * math.pi / 49)) is None
    with pytest.raises(InputError):
        root_of_unity_order(1, max_order=60)


def test_allowed_orders():
    assert allowed_orders(validate_polarization([2]), "symmetric") == {1, 2, 4, 8}
    assert allowed_orders(validate_polarization([3]), "symmetric") == {1, 2, 3, 4, 6, 8, 12, 24}
    assert allowed_orders(validate_polarization([2, 2, 6]), Mode.totally_symmetric) == {1, 3}


def test_classify_j_type():
    D = validate_polarization([1])
    Z = validate_period_matrix([[1j]], D)
    out = classify(j_type(D), Z, Characteristic.zero(1))
    assert out.detCM == pytest.approx(cmath.exp(1j * math.pi / 4), abs=1e-9)
    assert out.order == 8


def test_classify_totally_symmetric_hypotheses(rng):
    D = validate_polarization([2, 2])
    Z = period(rng, D)
    with pytest.raises(InputError):
        classify(identity(D), Z, Characteristic.zero(2), mode="totally_symmetric")
    D3 = validate_polarization([2, 2, 2])
    Z3 = period(rng, D3)
    c = Characteristic.from_arrays([0.5, 0, 0], [0, 0, 0])
    with pytest.raises(InputError):
        classify(identity(D3), Z3, c, mode="totally_symmetric")


def test_classify_totally_symmetric_222():
    rng = np.random.default_rng(5)
    D = validate_polarization([2, 2, 2])
    for _ in range(2):
        M, Z = draw_pair(rng, D, 4, 0.1)[:2]
        out = classify(M, Z, Characteristic.zero(3), mode="totally_symmetric", rng=rng)
        assert out.order == 1


def test_classification_error_carries_value(rng):
    D = validate_polarization([1])
    Z = validate_period_matrix([[1j]], D)
    with pytest.raises(ClassificationError) as info:
        classify(j_type(D), Z, Characteristic.zero(1), max_order=4)
    assert info.value.order is None


@pytest.mark.parametrize("diag", [(1,), (2,), (1, 2)])
def test_determinant_is_multiplicative_up_to_sign(diag):
    rng = np.random.default_rng(7)
    D = validate_polarization(diag)
    c = Characteristic.zero(D.g)
    M1, Z = draw_pair(rng, D, 3, 0.2)[:2]
    M2 = random_gd(rng, D, 3)
    Z1 = act_on_siegel(M1, Z)
    if min(Z1.y_min, act_on_siegel(M2, Z1).y_min) < 0.1:
        pytest.skip("poorly reduced draw")
    r1 = transformation_matrix(M1, Z, c, rng=rng)
    r2 = transformation_matrix(M2, Z1, r1.Mc, rng=rng)
    r12 = transformation_matrix(M2 @ M1, Z, c, rng=rng, c_target=r2.Mc)
    ratio = r12.detCM / (r1.detCM * r2.detCM)
    # characteristics only compose modulo the lattice and square roots carry a sign
    assert root_of_unity_order(ratio, tol=1e-6) in allowed_orders(D, "symmetric")


def test_branch_flip_changes_sign_of_det(rng):
    D = validate_polarization([2])
    Z = validate_period_matrix([[1.2j]], D)
    a = transformation_matrix(j_type(D), Z, Characteristic.zero(1), rng=np.random.default_rng(0))
    b = transformation_matrix(j_type(D), Z, Characteristic.zero(1), rng=np.random.default_rng(0), flip_branch=True)
    assert np.allclose(b.C_M, -a.C_M)
    assert b.detCM == pytest.approx(a.detCM * (-1) ** D.d)


def test_conditioning_gate_raises_when_unattainable(rng):
    D = validate_polarization([2])
    Z = period(rng, D)
    M = generators(D)[0]
    with pytest.raises(IllConditionedError):
        transformation_matrix(M, Z, Characteristic.zero(1), eps=1e-30, rng=rng, attempts=2)


def test_sampling_schemes_agree(rng):
    D = validate_polarization([1, 2])
    M, Z = draw_pair(rng, D, 3, 0.3)[:2]
    c = Characteristic.zero(2)
    a = transformation_matrix(M, Z, c, scheme="period", rng=np.random.default_rng(1))
    b = transformation_matrix(M, Z, c, scheme="box", rng=np.random.default_rng(1), eps=1e-8)
    assert np.allclose(a.C, b.C, atol=1e-5)


def test_result_json():
    D = validate_polarization([1])
    Z = validate_period_matrix([[1j]], D)
    doc = transformation_matrix(j_type(D), Z, Characteristic.zero(1)).to_json()
    assert doc["order"] == 8 and doc["d"] == 1
