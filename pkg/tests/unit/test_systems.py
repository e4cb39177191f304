"""
Fallcat - System Builder and Path Generator Tests
"""
import numpy as np
import pytest

from apps.core.exceptions import InvalidSpecError
from apps.core.finite_differences import scalar_derivative
from apps.geometry.services import gram, metric_tensor
from apps.lie.models import GroupElement, GroupKind
from apps.lie.services import compose, random_element
from apps.systems.models import BoardSpec, CatLoopParams, DiscSpec, NBodySpec
from apps.systems.paths import (
    board_sinusoid,
    cat_loop,
    disc_circle_loop,
    disc_wobble_loop,
    radial_excursion,
)
from apps.systems.services import (
    build,
    center_of_mass,
    disc_circle_holonomy,
    disc_curvature,
    inertia_tensor,
    nbody_lie,
)
from tests.factories import CatLoopParamsFactory

pytestmark = pytest.mark.unit


# ===========================================
# Specs
# ===========================================

class TestSpecs:
    """Parameter validation of the builtin specs."""

    @pytest.mark.parametrize('kwargs', [{'m1': 0.0}, {'m2': -1.0}, {'m1': float('nan')}])
    def test_board_masses_positive(self, kwargs):
        with pytest.raises(InvalidSpecError):
            BoardSpec(**kwargs)

    def test_disc_inertia_positive(self):
        with pytest.raises(InvalidSpecError):
            DiscSpec(I=0.0)

    def test_nbody_group_parts(self):
        with pytest.raises(InvalidSpecError):
            NBodySpec(group_parts=())
        with pytest.raises(InvalidSpecError):
            NBodySpec(group_parts=('boosts',))
        with pytest.raises(InvalidSpecError):
            NBodySpec(group_parts=('rotations', 'rotations'))

    def test_nbody_needs_masses(self):
        with pytest.raises(InvalidSpecError):
            NBodySpec(masses=())

    def test_cat_gait_must_stay_a_triangle(self):
        with pytest.raises(InvalidSpecError):
            CatLoopParams(base_angles=(1.5, 1.5), amplitude=0.1)
        with pytest.raises(InvalidSpecError):
            CatLoopParams(base_angles=(0.2, 1.0), amplitude=0.3)
        with pytest.raises(InvalidSpecError):
            CatLoopParams(masses=(1.0, 1.0))


# ===========================================
# Builders
# ===========================================

class TestBuild:
    """Tests for the SystemModel builders."""

    def test_board(self):
        model = build(BoardSpec(m1=3.0, m2=1.0))
        np.testing.assert_array_equal(metric_tensor(model, [0.0, 0.0]), [[4.0, 1.0], [1.0, 1.0]])
        assert model.coordinates == ('x', 'xi')
        np.testing.assert_allclose(model.action(GroupElement(model.lie, [2.0]), np.array([1.0, 5.0])), [3.0, 5.0])

    def test_disc(self):
        model = build(DiscSpec(I=2.0, m=3.0))
        g = metric_tensor(model, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(g, [[3.0, 0.0, 0.0], [0.0, 3.0, 3.0], [0.0, 3.0, 5.0]])
        assert model.periods == (None, 2.0 * np.pi, 2.0 * np.pi)

    def test_shape_potential(self):
        model = build(DiscSpec(potential='r^2 + cos(phi)'))
        assert model.potential(np.array([2.0, 0.0, 1.3])) == pytest.approx(5.0)

    def test_nbody_metric_is_mass_blocks(self, nbody):
        np.testing.assert_allclose(np.diag(metric_tensor(nbody, nbody.sample_point(np.random.default_rng(0)))),
                                   np.repeat([1.0, 2.0, 3.0], 3))

    def test_nbody_group_parts(self):
        assert nbody_lie(NBodySpec(group_parts=('translations',))).kind is GroupKind.ABELIAN
        assert nbody_lie(NBodySpec(group_parts=('rotations',))).kind is GroupKind.SO3
        assert nbody_lie(NBodySpec()).kind is GroupKind.PRODUCT

    def test_rotations_about_centre_of_mass_need_three_bodies(self):
        with pytest.raises(InvalidSpecError):
            build(NBodySpec(masses=(1.0, 1.0)))
        assert build(NBodySpec(masses=(1.0,), group_parts=('translations',))).n == 3

    def test_rotations_about_origin_need_two_bodies(self):
        with pytest.raises(InvalidSpecError):
            build(NBodySpec(masses=(1.0,), group_parts=('rotations',)))
        model = build(NBodySpec(masses=(1.0, 1.0), group_parts=('rotations',)))
        eigenvalues = np.linalg.eigvalsh(gram(model, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]))
        np.testing.assert_allclose(eigenvalues, [1.0, 1.0, 2.0], atol=1e-12)

    def test_combined_action_rotates_about_centre_of_mass(self, nbody, rng):
        x = nbody.sample_point(rng)
        g = random_element(nbody.lie, rng)
        moved = nbody.action(g, x).reshape(-1, 3)
        c0 = center_of_mass(nbody.spec.masses, x.reshape(-1, 3))
        np.testing.assert_allclose(center_of_mass(nbody.spec.masses, moved), c0 + g.data[0].data, atol=1e-12)

    def test_nbody_action_law(self, nbody, rng):
        x = nbody.sample_point(rng)
        g1, g2 = random_element(nbody.lie, rng), random_element(nbody.lie, rng)
        np.testing.assert_allclose(nbody.action(g2, nbody.action(g1, x)), nbody.action(compose(g1, g2), x),
                                   atol=1e-12)

    def test_unknown_spec(self):
        with pytest.raises(InvalidSpecError):
            build(object())


# ===========================================
# Closed Forms
# ===========================================

class TestClosedForms:
    """Tests for the disc and N-body closed forms."""

    @pytest.mark.parametrize('I, m, r0, expected', [
        (1.0, 1.0, 1.0, -np.pi),
        (2.0, 1.0, 1.0, -2.0 * np.pi / 3.0),
        (1.0, 3.0, 0.5, -2.0 * np.pi * 0.75 / 1.75),
    ])
    def test_disc_circle_holonomy(self, I, m, r0, expected):
        assert disc_circle_holonomy(DiscSpec(I=I, m=m), r0) == pytest.approx(expected)

    def test_disc_curvature_is_derivative(self):
        spec = DiscSpec(I=1.5, m=2.0)
        for r in (0.5, 1.0, 2.0):
            numeric = scalar_derivative(lambda s: spec.m * s * s / (spec.I + spec.m * s * s), r)
            assert disc_curvature(spec, r) == pytest.approx(float(numeric), rel=1e-8)

    def test_inertia_tensor(self):
        positions = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        np.testing.assert_allclose(inertia_tensor([1.0, 1.0], positions), np.diag([4.0, 1.0, 5.0]))


# ===========================================
# Path Generators
# ===========================================

class TestPaths:
    """Tests for the builtin shape paths."""

    def test_circle_loop(self):
        path = disc_circle_loop(0.5, turns=2)
        np.testing.assert_allclose(path.position(0.25), [0.5, np.pi, 0.0])
        np.testing.assert_allclose(path.rate(0.7), [0.0, 4.0 * np.pi, 0.0])

    def test_radial_excursion_retraces(self):
        path = radial_excursion(0.5, 2.0)
        np.testing.assert_allclose(path.position(0.5), [2.0, 0.0, 0.0])
        np.testing.assert_allclose(path.position(1.0), path.position(0.0), atol=1e-15)

    @pytest.mark.parametrize('factory_call', [
        lambda: disc_circle_loop(0.0),
        lambda: radial_excursion(1.0, -1.0),
        lambda: disc_wobble_loop(1.0, 1.0),
    ])
    def test_invalid_radii(self, factory_call):
        with pytest.raises(InvalidSpecError):
            factory_call()

    def test_analytic_rates_match_sections(self):
        for path in (disc_wobble_loop(1.0, 0.3), radial_excursion(0.5, 2.0), board_sinusoid(0.8, 1.0, 0.5)):
            for t in (0.1, 0.45, 0.9):
                np.testing.assert_allclose(path.rate(t), scalar_derivative(path.section, t), atol=1e-8)


class TestCatLoop:
    """Tests for the three-body gait."""

    def test_closed_and_centred(self):
        params = CatLoopParamsFactory()
        path = cat_loop(params)
        assert path.is_loop()
        masses = np.array(params.masses)
        for t in np.linspace(0.0, 1.0, 11):
            r = path.position(t).reshape(3, 3)
            np.testing.assert_allclose(masses @ r, 0.0, atol=1e-12)
            assert abs(r[0, 1]) < 1e-12 and r[0, 0] > 0.0
            np.testing.assert_allclose(r[:, 2], 0.0)

    def test_side_length_is_kept(self):
        path = cat_loop(CatLoopParams(side=2.0))
        for t in (0.0, 0.3, 0.8):
            r = path.position(t).reshape(3, 3)
            assert np.linalg.norm(r[1] - r[0]) == pytest.approx(2.0)

    def test_analytic_rate_matches_section(self):
        path = cat_loop(CatLoopParams(amplitude=0.2))
        for t in (0.05, 0.5, 0.77):
            np.testing.assert_allclose(path.rate(t), scalar_derivative(path.section, t), atol=1e-8)

    def test_zero_amplitude_is_constant(self):
        path = cat_loop(CatLoopParams(amplitude=0.0))
        np.testing.assert_allclose(path.position(0.3), path.position(0.0), atol=1e-15)
        np.testing.assert_allclose(path.rate(0.3), 0.0, atol=1e-15)

    def test_unequal_masses(self):
        path = cat_loop(CatLoopParams(masses=(1.0, 2.0, 4.0)))
        r = path.position(0.4).reshape(3, 3)
        np.testing.assert_allclose(np.array([1.0, 2.0, 4.0]) @ r, 0.0, atol=1e-12)
