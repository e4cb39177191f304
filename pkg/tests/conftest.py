"""
Fallcat - Pytest Configuration and Fixtures
"""
import json

import factory.random
import numpy as np
import pytest
from faker import Faker
from hypothesis import HealthCheck, settings as hypothesis_settings

from apps.lie.models import LieStructure
from apps.systems.models import NBodySpec
from apps.systems.services import build, nbody_model
from tests.factories import BoardSpecFactory, DiscSpecFactory, NBodySpecFactory


# ===========================================
# Hypothesis Profiles
# ===========================================

hypothesis_settings.register_profile(
    'default', max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
hypothesis_settings.register_profile('ci', max_examples=200, deadline=None)
hypothesis_settings.load_profile('default')


# ===========================================
# Random Fixtures
# ===========================================

@pytest.fixture
def rng():
    """Seeded generator; every test sees the same stream."""
    return np.random.default_rng(12345)


# ===========================================
# Lie Structure Fixtures
# ===========================================

@pytest.fixture
def so3():
    return LieStructure.so3()


@pytest.fixture
def abelian3():
    return LieStructure.abelian(3)


@pytest.fixture
def se3_like():
    """Translations x rotations, the N-body symmetry group."""
    return LieStructure.product(LieStructure.abelian(3), LieStructure.so3())


# ===========================================
# System Fixtures
# ===========================================

@pytest.fixture
def board():
    return build(BoardSpecFactory(m1=3.0, m2=1.0))


@pytest.fixture
def disc():
    return build(DiscSpecFactory(I=1.0, m=1.0))


@pytest.fixture
def nbody():
    """Three unequal masses, translations and rotations."""
    return build(NBodySpecFactory(masses=(1.0, 2.0, 3.0)))


@pytest.fixture
def nbody_rotations():
    return build(NBodySpecFactory(masses=(1.0, 1.0, 1.0), group_parts=('rotations',)))


@pytest.fixture
def two_body_rotations():
    """Rotations about the origin: singular when both bodies line up with it."""
    return nbody_model(NBodySpec(masses=(1.0, 1.0), group_parts=('rotations',)))


@pytest.fixture
def centered_configuration(rng):
    """Factory for N-body configurations with centre of mass at the origin."""
    def make(masses):
        masses = np.asarray(masses, dtype=float)
        r = rng.standard_normal((len(masses), 3))
        r -= masses @ r / masses.sum()
        return r.reshape(-1)
    return make


# ===========================================
# Config Fixtures
# ===========================================

@pytest.fixture
def write_config(tmp_path):
    """Write a run config to a temporary JSON file and return its path."""
    def write(data, name='config.json'):
        path = tmp_path / name
        if isinstance(data, str):
            path.write_text(data, encoding='utf-8')
        else:
            path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return write


@pytest.fixture(autouse=True)
def reseed_factories():
    """Factory and Faker values are reproducible per test."""
    factory.random.reseed_random('fallcat')
    Faker.seed(0)
