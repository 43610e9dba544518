import numpy as np
import pytest

from sympath import spcore
from sympath.paths import (SymplecticPath, coefficient_path, diagonal_path,
                           polar_path, random_coefficient_generator,
                           rotation_path, make_path)
from sympath.policy import RefinementError, ValidationError
from conftest import random_path


def test_path_starts_at_identity():
    with pytest.raises(ValidationError):
        ts = np.linspace(0, 1, 9)
        mats = np.array([spcore.Dmat(2.0)] * 9)
        SymplecticPath(1, 1.0, ts, mats)


def test_trust_region_auto_refines():
    # 5 samples of a full rotation violate the trust region; the generator
    # lets the constructor refine until the contract holds
    p = rotation_path(2 * np.pi, samples=5)
    assert p.max_step() < 0.5
    assert len(p.times) > 5


def test_sample_only_trust_violation_raises():
    ts = np.linspace(0, 1, 3)
    mats = np.array([spcore.Rmat(np.pi * t) for t in ts])
    with pytest.raises(RefinementError):
        make_path(1, 1.0, ts, mats, None)


def test_iterate_m1_is_identity_and_endpoint_power(rng):
    p = random_path(rng)
    assert p.iterate(1) is p
    p2 = p.iterate(2)
    assert np.max(np.abs(p2.endpoint - p.endpoint @ p.endpoint)) < 1e-12


def test_iterate_rotation_is_longer_rotation():
    p = rotation_path(np.pi)
    p2 = p.iterate(2)
    q = rotation_path(2 * np.pi, tau=2.0, samples=len(p2.times))
    assert abs(p2.tau - 2.0) < 1e-12
    assert np.max(np.abs(p2.endpoint - spcore.Rmat(2 * np.pi))) < 1e-12
    # sample agreement on the common grid
    k = min(len(p2.times), len(q.times))
    assert np.max(np.abs(p2.mats[-1] - q.mats[-1])) < 1e-12


def test_polar_path_hits_target(rng):
    M = spcore.random_symplectic(2, rng)
    p = polar_path(M)
    assert np.max(np.abs(p.endpoint - M)) < 1e-10
    p.validate()


def test_diamond_path_block_structure(rng):
    p1 = random_path(rng, n=1)
    p2 = random_path(rng, n=1)
    pd = p1.diamond(p2)
    assert pd.n == 2
    assert np.max(np.abs(pd.endpoint - spcore.diamond(p1.endpoint, p2.endpoint))) < 1e-9


def test_coefficient_generator_is_deterministic(rng):
    gen = random_coefficient_generator(1, rng)
    a = coefficient_path(gen)
    b = coefficient_path(gen)
    assert np.array_equal(a.mats, b.mats)
