import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from qnp.errors import DegenerateInputError
from qnp.quaternion import (
    I,
    J,
    K,
    ONE,
    Quaternion,
    chi_embed,
    chi_unembed,
    imaginary_unit,
    left_op,
    mul_ops,
    qabs,
    qconj,
    qinv,
    qmul,
    qpow,
    random_quaternions,
    random_units,
    right_op,
    same_sphere,
)

components = st.floats(min_value=-3, max_value=3, allow_nan=False)
quats = st.tuples(components, components, components, components).map(np.array)

BASIS = {"1": ONE, "i": I, "j": J, "k": K}


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ("i", "j", K),
        ("j", "i", -K),
        ("j", "k", I),
        ("k", "j", -I),
        ("k", "i", J),
        ("i", "k", -J),
        ("i", "i", -ONE),
        ("j", "j", -ONE),
        ("k", "k", -ONE),
    ],
)
def test_multiplication_table(a, b, expected):
    np.testing.assert_array_equal(qmul(BASIS[a], BASIS[b]), expected)


@given(quats)
def test_one_is_identity(q):
    np.testing.assert_array_equal(qmul(ONE, q), q)
    np.testing.assert_array_equal(qmul(q, ONE), q)


@given(quats, quats)
def test_product_matches_complex_lift(p, q):
    # oracle: 2x2 complex matrix product, read back through the first row
    expected = chi_unembed(chi_embed(p) @ chi_embed(q))
    np.testing.assert_allclose(qmul(p, q), expected, atol=1e-12)


@given(quats, quats)
def test_norm_is_multiplicative(p, q):
    assert abs(qabs(qmul(p, q)) - qabs(p) * qabs(q)) <= 1e-12 * (1 + qabs(p) * qabs(q))


def test_chi_examples():
    np.testing.assert_array_equal(chi_embed(ONE), np.eye(2))
    np.testing.assert_array_equal(chi_embed(J), np.array([[0, 1], [-1, 0]]))


@given(seeds)
def test_chi_is_a_homomorphism(seed):
    rng = np.random.default_rng(seed)
    p, q = random_quaternions(rng, 2)
    np.testing.assert_allclose(chi_embed(p + q), chi_embed(p) + chi_embed(q), atol=1e-13)
    np.testing.assert_allclose(chi_embed(qmul(p, q)), chi_embed(p) @ chi_embed(q), atol=1e-13)
    np.testing.assert_allclose(chi_embed(qconj(p)), chi_embed(p).conj().T, atol=1e-15)
    assert np.linalg.det(chi_embed(p)) == pytest.approx(qabs(p) ** 2, rel=1e-13)


@given(seeds)
def test_lift_spectrum_of_unit(seed):
    p = random_units(np.random.default_rng(seed))
    eig = np.linalg.eigvals(chi_embed(p))
    eig = eig[np.argsort(eig.imag)]
    w = p[0]
    expected = np.array([w - 1j * np.sqrt(1 - w * w), w + 1j * np.sqrt(1 - w * w)])
    np.testing.assert_allclose(eig, expected, atol=1e-8)


@given(seeds)
def test_same_sphere(seed):
    rng = np.random.default_rng(seed)
    p, q = random_quaternions(rng, 2)
    assert same_sphere(I, J)
    assert same_sphere(p, qconj(p))
    assert same_sphere(p, qmul(qmul(q, p), qinv(q)))
    assert not same_sphere(p, p + ONE * 0.1)


def test_mul_ops_identity():
    np.testing.assert_array_equal(mul_ops(ONE, "left"), np.eye(4))
    np.testing.assert_array_equal(mul_ops(ONE, "right"), np.eye(4))
    with pytest.raises(ValueError):
        mul_ops(ONE, "up")


@pytest.mark.parametrize("a", list(BASIS))
@pytest.mark.parametrize("b", list(BASIS))
def test_mul_ops_exact_on_basis(a, b):
    p, q = BASIS[a], BASIS[b]
    np.testing.assert_array_equal(left_op(p) @ q, qmul(p, q))
    np.testing.assert_array_equal(right_op(q) @ p, qmul(p, q))


@given(seeds)
def test_mul_ops_match_product_and_commute(seed):
    rng = np.random.default_rng(seed)
    p, q = random_quaternions(rng, 2)
    np.testing.assert_allclose(left_op(p) @ q, qmul(p, q), atol=1e-13)
    np.testing.assert_allclose(right_op(q) @ p, qmul(p, q), atol=1e-13)
    np.testing.assert_allclose(left_op(p) @ right_op(q), right_op(q) @ left_op(p), atol=1e-13)


def test_batched_product_broadcasts():
    rng = np.random.default_rng(0)
    P = random_quaternions(rng, (5, 1))
    Q = random_quaternions(rng, (1, 3))
    out = qmul(P, Q)
    assert out.shape == (5, 3, 4)
    np.testing.assert_allclose(out[2, 1], qmul(P[2, 0], Q[0, 1]))


def test_inverse_and_powers():
    rng = np.random.default_rng(1)
    p = random_quaternions(rng)
    np.testing.assert_allclose(qmul(p, qinv(p)), ONE, atol=1e-14)
    np.testing.assert_allclose(qpow(p, 3), qmul(qmul(p, p), p), atol=1e-13)
    with pytest.raises(ZeroDivisionError):
        qinv(np.zeros(4))


def test_imaginary_unit():
    p = np.array([0.3, 0.0, 0.4, 0.0])
    np.testing.assert_allclose(imaginary_unit(p), J)
    with pytest.raises(DegenerateInputError):
        imaginary_unit(np.array([0.5, 0, 0, 0]))


def test_quaternion_wrapper():
    i, j = Quaternion(0, 1), Quaternion(0, 0, 1)
    assert (i * j).tolist() == [0, 0, 0, 1]
    assert (j * i).tolist() == [0, 0, 0, -1]
    q = Quaternion(1, 2, 3, 4)
    assert abs(q) == pytest.approx(np.sqrt(30))
    np.testing.assert_allclose((q * q.inverse()).array, ONE, atol=1e-15)
    assert (q / q).tolist() == pytest.approx([1, 0, 0, 0])
    assert (2 * q).tolist() == [2, 4, 6, 8]
    assert q.conj().tolist() == [1, -2, -3, -4]
    assert q.imaginary_unit().array == pytest.approx(np.array([0, 2, 3, 4]) / np.sqrt(29))
