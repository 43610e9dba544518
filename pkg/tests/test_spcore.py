import numpy as np
import pytest
import scipy.linalg

from sympath import spcore
from sympath.policy import ValidationError


def test_standard_examples_symplectic():
    assert spcore.check_symplectic(spcore.standard_J(1))
    assert spcore.check_symplectic(np.eye(2))


def test_exponential_of_hamiltonian_is_symplectic(rng):
    # exp(J S) is symplectic by construction for symmetric S
    for _ in range(10):
        S = rng.standard_normal((4, 4))
        S = S + S.T
        M = scipy.linalg.expm(spcore.standard_J(2) @ S)
        assert spcore.check_symplectic(M, 1e-9)


def test_odd_dimension_rejected():
    with pytest.raises(ValidationError):
        spcore.check_symplectic(np.eye(3))


def test_diamond_identity_and_paper_base_point():
    assert np.allclose(spcore.diamond(np.eye(2), np.eye(2)), np.eye(4))
    # M_2^+ = D(2) diamond D(2)
    M2 = spcore.diamond(spcore.Dmat(2.0), spcore.Dmat(2.0))
    assert np.allclose(M2, spcore.Mplus(2))
    assert spcore.component_sign(M2, 1.0) == "plus"
    assert spcore.component_sign(M2, np.exp(0.4j)) == "plus"


def test_diamond_associative(rng):
    A = spcore.random_symplectic(1, rng)
    B = spcore.random_symplectic(2, rng)
    C = spcore.random_symplectic(1, rng)
    left = spcore.diamond(spcore.diamond(A, B), C)
    right = spcore.diamond(A, spcore.diamond(B, C))
    assert np.max(np.abs(left - right)) == 0.0


def test_diamond_stays_symplectic(rng):
    for _ in range(5):
        M1 = spcore.random_symplectic(1, rng)
        M2 = spcore.random_symplectic(2, rng)
        assert spcore.check_symplectic(spcore.diamond(M1, M2), 1e-10)


def test_polar_rotation_and_diagonal():
    theta0 = 0.83
    A, U, u = spcore.polar_unitary(spcore.Rmat(theta0))
    assert np.allclose(A, np.eye(2), atol=1e-12)
    assert abs(complex(u[0, 0]) - np.exp(1j * theta0)) < 1e-12

    A, U, u = spcore.polar_unitary(spcore.Dmat(2.0))
    assert np.allclose(A, spcore.Dmat(2.0), atol=1e-12)
    assert np.allclose(U, np.eye(2), atol=1e-12)
    assert abs(complex(u[0, 0]) - 1.0) < 1e-12


def test_polar_reconstruction(rng):
    M = spcore.random_symplectic(2, rng)
    A, U, u = spcore.polar_unitary(M)
    assert np.max(np.abs(A @ U - M)) < 1e-10
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-10


def test_nullity_examples():
    assert spcore.nullity(np.eye(2), 1.0) == 2
    theta0 = np.pi / 3
    assert spcore.nullity(spcore.Rmat(theta0), np.exp(1j * theta0)) == 1
    assert spcore.nullity(spcore.Dmat(2.0), 1.0) == 0


def test_krein_types_rotation():
    # eigenvalue exp(i theta) has type (0,1), its conjugate (1,0)
    for theta0 in (0.4, 2.0):
        by_value = {np.round(e.value, 6): e.krein_type
                    for e in spcore.krein_types(spcore.Rmat(theta0))}
        assert by_value[np.round(np.exp(1j * theta0), 6)] == (0, 1)
        assert by_value[np.round(np.exp(-1j * theta0), 6)] == (1, 0)


def test_krein_n1_direct_inertia():
    # 2x2 Gram of iJ on the full root space of N1(1,1): inertia (1,1)
    entries = spcore.krein_types(spcore.N1mat(1, 1))
    assert len(entries) == 1
    assert entries[0].krein_type == (1, 1)
    assert entries[0].algebraic_multiplicity == 2
    assert entries[0].geometric_multiplicity == 1
    # independent check: eigenvalues of i J on C^2 are +-1
    w = np.linalg.eigvalsh(1j * spcore.standard_J(1))
    assert sorted(np.round(w, 12)) == [-1.0, 1.0]


def test_eigenvalue_pm1_has_symmetric_type(rng):
    # any matrix with eigenvalue +1 gets a (p, p) type there
    M = spcore.diamond(spcore.N1mat(1, 1), spcore.random_symplectic(1, rng))
    for e in spcore.krein_types(M):
        if abs(e.value - 1.0) < 1e-9:
            p, q = e.krein_type
            assert p == q


def test_conjugation_switches_krein_type(rng):
    for _ in range(20):
        M = spcore.diamond(spcore.Rmat(rng.uniform(0.2, 3.0)),
                           spcore.random_symplectic(1, rng))
        types = {np.round(e.value, 8): e.krein_type for e in spcore.krein_types(M)}
        for lam, (p, q) in types.items():
            conj = np.round(np.conj(lam), 8)
            if conj in types:
                assert types[conj] == (q, p)


def test_krein_orthogonality(rng):
    M = spcore.diamond(spcore.Rmat(0.7), spcore.Rmat(1.9))
    G = 1j * spcore.standard_J(2)
    entries = spcore.krein_types(M)
    for i, a in enumerate(entries):
        Ba = spcore.root_space(M, a.value)
        for b in entries[i + 1:]:
            if abs(a.value * np.conj(b.value) - 1.0) < 1e-9:
                continue
            Bb = spcore.root_space(M, b.value)
            assert np.max(np.abs(Ba.conj().T @ G @ Bb)) < 1e-8


def test_component_sign_examples(rng):
    assert spcore.component_sign(np.eye(2), 1.0) == "singular"
    # (-1)^0 * det(D(2) - I) = -1/2 < 0: plus component
    assert spcore.component_quantity(spcore.Dmat(2.0), 1.0) < 0
    assert spcore.component_sign(spcore.Dmat(2.0), 1.0) == "plus"
    for n in (1, 2, 3):
        for omega in (1.0, -1.0, np.exp(1.1j)):
            assert spcore.component_sign(spcore.Mplus(n), omega) == "plus"
            assert spcore.component_sign(spcore.Mminus(n), omega) == "minus"


def test_component_sign_conjugation_invariant(rng):
    for _ in range(20):
        M = spcore.random_symplectic(2, rng)
        P = spcore.random_symplectic(2, rng, 0.6)
        w = np.exp(1j * rng.uniform(0, 2 * np.pi))
        conj = np.linalg.solve(P, M @ P)
        assert spcore.component_sign(M, w) == spcore.component_sign(conj, w)


def test_sp2_model_examples():
    c = spcore.sp2_model(np.eye(2))
    assert (c.r, c.theta, c.z) == (1.0, 0.0, 0.0)
    c = spcore.sp2_model(spcore.Rmat(0.9))
    assert abs(c.r - 1.0) < 1e-12 and abs(c.theta - 0.9) < 1e-12 and abs(c.z) < 1e-12


def test_sp2_roundtrip_1000(rng):
    worst = 0.0
    for _ in range(1000):
        M = spcore.random_symplectic(1, rng)
        c = spcore.sp2_model(M)
        worst = max(worst, np.max(np.abs(c.matrix() - M)))
    assert worst < 1e-10


def test_sp2_membership_matches_determinant_sign(rng):
    for _ in range(200):
        M = spcore.random_symplectic(1, rng)
        w = np.exp(1j * rng.uniform(0, 2 * np.pi))
        c = spcore.sp2_model(M)
        assert spcore.sp2_membership(c, w) == spcore.component_sign(M, w)
