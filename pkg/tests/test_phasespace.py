import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cvdg.phasespace import (SymplecticBasis, apply_J, is_orthogonal_symplectic,
                             is_symplectic, mode_projector, random_mode,
                             random_orthogonal_symplectic, symplectic_form,
                             symplectic_product)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize("v, expected", [
    ([1, 0], [0, 1]),
    ([0, 1], [-1, 0]),
    ([1, 0, 0, 0], [0, 0, 1, 0]),
    ([0, 1, 0, 0], [0, 0, 0, 1]),
])
def test_apply_J_convention(v, expected):
    np.testing.assert_array_equal(apply_J(v), expected)


def test_apply_J_matches_dense_form(rng):
    for m in range(1, 5):
        v = rng.normal(size=2 * m)
        np.testing.assert_allclose(apply_J(v), symplectic_form(m) @ v)
        J = symplectic_form(m)
        np.testing.assert_allclose(J @ J, -np.eye(2 * m))


def test_odd_dimension_rejected():
    with pytest.raises(ValueError):
        apply_J([1.0, 2.0, 3.0])


@given(arrays(float, st.sampled_from([2, 4, 6, 8]), elements=finite))
def test_J_squared_is_minus_one(v):
    np.testing.assert_allclose(apply_J(apply_J(v)), -v, atol=1e-14)


@pytest.mark.parametrize("f1, f2, expected", [
    ([1, 0], [0, 1], -1.0),
    ([0, 1], [1, 0], 1.0),
    ([1, 0], [1, 0], 0.0),
])
def test_symplectic_product_examples(f1, f2, expected):
    assert symplectic_product(f1, f2) == expected


def test_symplectic_product_antisymmetric(rng):
    for _ in range(1000):
        m = int(rng.integers(1, 5))
        f, g = rng.normal(size=(2, 2 * m))
        assert symplectic_product(f, g) == pytest.approx(-symplectic_product(g, f), abs=1e-12)
        assert abs(symplectic_product(f, f)) < 1e-12


def test_symplectic_product_dimension_mismatch():
    with pytest.raises(ValueError):
        symplectic_product([1, 0], [1, 0, 0, 0])


def test_mode_projector_single_mode_is_identity():
    np.testing.assert_allclose(mode_projector([1.0, 0.0]), np.eye(2))


def test_mode_projector_first_mode_of_two():
    np.testing.assert_allclose(mode_projector([1.0, 0, 0, 0]), np.diag([1.0, 0, 1, 0]))


def test_mode_projector_properties(rng):
    for m in range(1, 5):
        g = random_mode(m, rng)
        P = mode_projector(g)
        J = symplectic_form(m)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P @ J, J @ P, atol=1e-12)
        assert np.trace(P) == pytest.approx(2.0)
        np.testing.assert_allclose(mode_projector(apply_J(g)), P, atol=1e-14)


def test_mode_projector_rejects_unnormalised():
    with pytest.raises(ValueError, match="normalised"):
        mode_projector([1.0, 1.0])


@pytest.mark.parametrize("O, expected", [
    (np.eye(2), True),
    (symplectic_form(1), True),
    (symplectic_form(3), True),
    (np.diag([2.0, 0.5]), False),
    # orthogonal but not symplectic: reflection of x only
    (np.diag([-1.0, 1.0]), False),
])
def test_is_orthogonal_symplectic(O, expected):
    assert is_orthogonal_symplectic(O) is expected


def test_random_orthogonal_symplectic(rng):
    for m in range(1, 5):
        O = random_orthogonal_symplectic(m, rng)
        assert is_orthogonal_symplectic(O)
        assert is_symplectic(O)


def test_symplectic_basis_checks():
    basis = SymplecticBasis(np.eye(4))
    basis.check()
    np.testing.assert_array_equal(basis.modes, np.eye(4)[:2])
    with pytest.raises(ValueError, match="J applied"):
        SymplecticBasis(np.eye(4)[[0, 1, 3, 2]]).check()


def test_symplectic_basis_from_orthosymplectic(rng):
    O = random_orthogonal_symplectic(3, rng)
    # rows of O^t = columns of O form a symplectic basis
    basis = SymplecticBasis(O.T)
    basis.check()
    beta = rng.normal(size=6)
    np.testing.assert_allclose(basis.coordinates(beta), O.T @ beta)
