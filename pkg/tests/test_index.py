import numpy as np
import pytest

from sympath import spcore
from sympath.index import (bott_check, endpoint_free_index, index1,
                           omega_index, rotation_number, sp2_crossing_oracle)
from sympath.paths import (append_rotation_tail, diagonal_path, make_path,
                           polar_path, rotation_path)
from sympath.policy import ValidationError
from conftest import random_path


def test_rotation_number_full_circle():
    p = rotation_path(2 * np.pi)
    assert abs(rotation_number(p) - 2 * np.pi) < 1e-12


def test_rotation_number_diagonal_is_zero():
    assert abs(rotation_number(diagonal_path(2.0))) < 1e-12


def test_rotation_number_additive_under_diamond(rng):
    p1, p2 = random_path(rng), random_path(rng, n=2)
    total = rotation_number(p1.diamond(p2))
    assert abs(total - rotation_number(p1) - rotation_number(p2)) < 1e-9


def test_normality():
    for n in (1, 2, 3):
        r = omega_index(diagonal_path(2.0, n=n), 1.0)
        assert r.pair() == (0, 0)


def test_half_turn_rotation_index():
    # explicit completion R(theta) -> R(pi) -> D(-2): total rotation pi
    r = omega_index(rotation_path(np.pi), 1.0)
    assert r.pair() == (1, 0)


def test_clockwise_half_turn():
    assert omega_index(rotation_path(-np.pi), 1.0).pair() == (-1, 0)


def test_degenerate_constant_path():
    ts = np.linspace(0, 1, 33)
    p = make_path(1, 1.0, ts, np.array([np.eye(2)] * 33))
    r = omega_index(p, 1.0)
    assert r.pair() == (-1, 2)


def test_degenerate_full_rotation():
    r = omega_index(rotation_path(2 * np.pi), 1.0)
    assert r.pair() == (1, 2)


def test_symplectic_additivity(rng):
    for _ in range(5):
        p1, p2 = random_path(rng), random_path(rng, n=2)
        assert index1(p1.diamond(p2)).index == index1(p1).index + index1(p2).index


def test_clockwise_continuity_axiom(rng):
    # gamma ending at N1(1, b): appending a short clockwise rotation keeps i1
    for b in (1.0, -1.0, 0.0):
        p = polar_path(spcore.N1mat(1, b))
        base = omega_index(p, 1.0).index
        for theta in (0.02, 0.005):
            tail = append_rotation_tail(p, -theta)
            assert omega_index(tail, 1.0).index == base


def test_counterclockwise_jumping_axiom():
    for b in (1.0, -1.0):
        p = polar_path(spcore.N1mat(1, b))
        base = omega_index(p, 1.0).index
        for theta in (0.02, 0.005):
            tail = append_rotation_tail(p, theta)
            assert omega_index(tail, 1.0).index == base + 1


def test_omega_index_coincides_at_one(rng):
    for _ in range(5):
        p = random_path(rng)
        assert omega_index(p, 1.0).index == index1(p).index


def test_omega_index_bott_pinned_values():
    # i_{-1} of the normality path and of R(pi t) are both 0
    assert omega_index(diagonal_path(2.0), -1.0).pair() == (0, 0)
    assert omega_index(rotation_path(np.pi), -1.0).pair() == (0, 2)


def test_reparametrization_invariance(rng):
    p = random_path(rng)
    base = index1(p).index
    for warp in (lambda s: s ** 2, lambda s: np.sin(np.pi * s / 2)):
        q = p.reparametrized(warp)
        assert index1(q).index == base


def test_degenerate_sandwich(rng):
    # degenerate gamma: every nearby nondegenerate perturbation lies in
    # [i1, i1 + nu]
    p = rotation_path(2 * np.pi)
    r = omega_index(p, 1.0)
    for theta in (0.01, -0.01, 0.003):
        tail = append_rotation_tail(p, theta)
        if spcore.nullity(tail.endpoint, 1.0) == 0:
            i_beta = omega_index(tail, 1.0).index
            assert r.index <= i_beta <= r.index + r.nullity


def test_inverse_homotopy_consistency(rng):
    # reparametrized copies have equal index and equal oracle count
    p = random_path(rng)
    q = p.reparametrized(lambda s: (s + s * s) / 2.0)
    assert index1(p).index == index1(q).index
    assert sp2_crossing_oracle(p, 1.0) == sp2_crossing_oracle(q, 1.0)


def test_bott_trivial_and_half():
    p = rotation_path(np.pi)
    b1 = bott_check(p, 1, 1.0)
    assert b1.index_ok and b1.nullity_ok
    b2 = bott_check(p, 2, 1.0)
    assert b2.lhs_index == 1 and b2.rhs_index == 1
    assert b2.lhs_nullity == 2 and b2.rhs_nullity == 2


def test_bott_random_sp4(rng):
    for _ in range(3):
        p = random_path(rng, n=2, scale=1.0)
        for m in (2, 3):
            bc = bott_check(p, m, 1.0)
            assert bc.index_ok and bc.nullity_ok


def test_oracle_normality_and_jump():
    assert sp2_crossing_oracle(diagonal_path(2.0), 1.0) == 0
    for b in (1.0, -1.0):
        p = polar_path(spcore.N1mat(1, b), samples=129)
        base = sp2_crossing_oracle(p, 1.0)
        tail = append_rotation_tail(p, 0.02)
        assert sp2_crossing_oracle(tail, 1.0) == base + 1


def test_oracle_engine_agreement(rng):
    for _ in range(15):
        p = random_path(rng, scale=1.5)
        for w in (1.0, np.exp(2j * np.pi / 3)):
            assert omega_index(p, w).index == sp2_crossing_oracle(p, w)


def test_oracle_rejects_sp4():
    with pytest.raises(ValidationError):
        sp2_crossing_oracle(diagonal_path(2.0, n=2), 1.0)


def test_endpoint_free_normalization():
    # i(N1(1,b) R(t/2)|[0,1]) = 2 - |b|
    for b in (-1.0, 0.0, 1.0):
        N = spcore.N1mat(1, b)
        ts = np.linspace(0.0, 1.0, 129)
        mats = np.array([N @ spcore.Rmat(t / 2.0) for t in ts])
        assert endpoint_free_index(mats) == 2 - int(abs(b))


def test_endpoint_free_concatenation(rng):
    # i(f over [0,1]) = i(f over [0,1/2]) + i(f over [1/2,1])
    M0 = spcore.random_symplectic(1, rng)
    ts = np.linspace(0.0, 1.0, 257)
    mats = np.array([M0 @ spcore.Rmat(2.6 * t) for t in ts])
    whole = endpoint_free_index(mats)
    first = endpoint_free_index(mats[:129])
    second = endpoint_free_index(mats[128:])
    assert whole == first + second
