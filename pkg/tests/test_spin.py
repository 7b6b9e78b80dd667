import numpy as np
import pytest

from affinebody.spin import (
    SpinLabel,
    build_spin_matrices,
    pauli_matrices,
    parity_factor,
    random_rotation_vectors,
    rotation_vector_from_su2,
    su2_from_rotation_vector,
    wigner_d,
)

TWO_PI = 2 * np.pi


def test_label_exactness():
    assert SpinLabel.from_spin("3/2").twice == 3
    assert SpinLabel.from_spin(2).twice == 4
    assert SpinLabel.from_spin(0.5).twice == 1
    assert SpinLabel(3).half_integer and not SpinLabel(4).half_integer
    assert SpinLabel(5).dim == 6
    with pytest.raises(ValueError):
        SpinLabel.from_spin(0.3)
    with pytest.raises(ValueError):
        SpinLabel(-1)


def test_spin_zero_is_trivial():
    stack = build_spin_matrices(SpinLabel(0)).stack
    assert stack.shape == (3, 1, 1)
    assert np.all(stack == 0)


def test_spin_half_is_pauli():
    sm = build_spin_matrices(SpinLabel(1))
    for got, sigma in zip(sm.stack, pauli_matrices()):
        assert np.allclose(got, 0.5 * sigma, atol=1e-15)


def test_spin_one_ladder_values():
    sm = build_spin_matrices(SpinLabel(2))
    assert np.allclose(sm.s3, np.diag([1.0, 0.0, -1.0]))
    casimir = sum(m @ m for m in sm.stack)
    assert np.allclose(casimir, 2.0 * np.eye(3), atol=1e-14)


@pytest.mark.parametrize("twice", range(0, 26))
def test_commutators_and_casimir(twice):
    label = SpinLabel(twice)
    s = build_spin_matrices(label).stack
    comm = (s[0] @ s[1] - s[1] @ s[0]) / 1j
    scale = max(np.linalg.norm(s[0]) * np.linalg.norm(s[1]), 1e-30)
    assert np.linalg.norm(comm - s[2]) <= 1e-10 * scale
    casimir = sum(m @ m for m in s)
    target = label.casimir() * np.eye(label.dim)
    if twice == 0:
        assert np.linalg.norm(casimir) == 0.0
    else:
        assert np.linalg.norm(casimir - target) <= 1e-10 * label.casimir()
    for m in s:
        assert np.allclose(m, m.conj().T, atol=1e-14)


def test_pauli_matrices_exact():
    s1, s2, s3 = pauli_matrices()
    assert np.array_equal(s3, np.array([[1, 0], [0, -1]], dtype=complex))
    assert np.array_equal(s1 @ s1, np.eye(2, dtype=complex))
    assert np.allclose(s1 @ s2, 1j * s3)


def test_su2_exponential_special_points():
    assert np.allclose(su2_from_rotation_vector([0, 0, 0]), np.eye(2))
    s3 = pauli_matrices()[2]
    assert np.allclose(su2_from_rotation_vector([0, 0, np.pi]), -1j * s3, atol=1e-15)
    for axis in ([1, 0, 0], [0, 1, 0], [0.6, 0.0, 0.8]):
        k = TWO_PI * np.asarray(axis, float)
        assert np.allclose(su2_from_rotation_vector(k), -np.eye(2), atol=1e-12)
    with pytest.raises(ValueError):
        su2_from_rotation_vector([0, 0, TWO_PI + 0.1])


def test_rotation_vector_inverse():
    assert np.allclose(rotation_vector_from_su2(np.eye(2)), 0.0)
    k = rotation_vector_from_su2(-1j * pauli_matrices()[2])
    assert np.allclose(k, [0, 0, np.pi], atol=1e-12)
    # -I maps to the conventional axis
    assert np.allclose(rotation_vector_from_su2(-np.eye(2)), [0, 0, TWO_PI])
    with pytest.raises(ValueError):
        rotation_vector_from_su2(np.diag([2.0, 0.5]))


def test_round_trip():
    rng = np.random.default_rng(7)
    for k in random_rotation_vectors(rng, 50, 0.05, TWO_PI - 0.05):
        u = su2_from_rotation_vector(k)
        assert np.linalg.norm(su2_from_rotation_vector(rotation_vector_from_su2(u)) - u) <= 1e-12


def test_wigner_identity_and_defining():
    rng = np.random.default_rng(8)
    for twice in range(0, 7):
        assert np.allclose(wigner_d(SpinLabel(twice), np.eye(2)), np.eye(twice + 1), atol=1e-14)
    for k in random_rotation_vectors(rng, 20):
        u = su2_from_rotation_vector(k)
        assert np.linalg.norm(wigner_d(SpinLabel(1), u) - u) <= 1e-12
    assert np.allclose(wigner_d(SpinLabel(1), -np.eye(2)), -np.eye(2), atol=1e-12)


def test_representation_property_and_unitarity():
    rng = np.random.default_rng(9)
    ks = random_rotation_vectors(rng, 60)
    for twice in range(0, 13, 3):
        label = SpinLabel(twice)
        for i in range(0, 60, 2):
            u = su2_from_rotation_vector(ks[i])
            v = su2_from_rotation_vector(ks[i + 1])
            du, dv = wigner_d(label, u), wigner_d(label, v)
            assert np.linalg.norm(wigner_d(label, u @ v) - du @ dv) <= 1e-9
            assert np.linalg.norm(du.conj().T @ du - np.eye(label.dim)) <= 1e-12


def test_parity():
    rng = np.random.default_rng(10)
    u = su2_from_rotation_vector(random_rotation_vectors(rng, 1)[0])
    assert parity_factor(SpinLabel(2), u) == 1
    assert parity_factor(SpinLabel(1), u) == -1
    assert parity_factor(SpinLabel(0), u) == 1
    for twice in range(0, 8):
        label = SpinLabel(twice)
        sign = -1 if label.half_integer else 1
        assert np.max(np.abs(wigner_d(label, -u) - sign * wigner_d(label, u))) <= 1e-12
