"""
Fallcat - Geometry Tests
Metric, Gram matrix, momentum map, lift derivatives and system audits.
"""
import numpy as np
import pytest

from apps.core.exceptions import AuditFailedError, InvalidSpecError, SingularActionError, StructuralError
from apps.geometry.models import SystemModel, TangentSample
from apps.geometry.services import (
    complete_lift_derivative,
    generator_field,
    generator_matrix,
    gram,
    killing_check,
    lagrangian,
    metric_tensor,
    momentum,
    momentum_equivariance_residual,
    velocity_hessian,
    vertical_lift_derivative,
)
from apps.geometry.validators import require_audits, run_audits
from apps.lie.models import LieStructure
from apps.lie.services import random_element
from apps.systems.services import nbody_momenta

pytestmark = pytest.mark.unit


def translation_model(metric):
    """x0 -> x0 + b on R^2 with the given metric function."""
    def action(g, x):
        return np.array([x[0] + g.data[0], x[1]])

    return SystemModel(
        name='test', n=2, lie=LieStructure.abelian(1), metric=metric,
        potential=lambda x: 0.0, generators=lambda x: np.array([[1.0], [0.0]]),
        action=action,
    )


# ===========================================
# Metric
# ===========================================

class TestMetric:
    """Tests for metric evaluation and its checks."""

    def test_board_metric(self, board):
        np.testing.assert_array_equal(metric_tensor(board, [0.3, -1.0]), [[4.0, 1.0], [1.0, 1.0]])

    def test_disc_metric_couples_phi_and_alpha(self, disc):
        g = metric_tensor(disc, [2.0, 0.1, 0.2])
        assert g[1, 2] == pytest.approx(4.0)
        assert g[2, 2] == pytest.approx(5.0)
        assert g[0, 0] == pytest.approx(1.0)

    def test_indefinite_metric_rejected(self):
        model = translation_model(lambda x: np.diag([1.0, -1.0]))
        with pytest.raises(InvalidSpecError):
            metric_tensor(model, [0.0, 0.0])
        # unchecked evaluation still returns it
        assert metric_tensor(model, [0.0, 0.0], check=False)[1, 1] == -1.0

    def test_asymmetric_metric_rejected(self):
        model = translation_model(lambda x: np.array([[1.0, 0.5], [0.0, 1.0]]))
        with pytest.raises(InvalidSpecError):
            metric_tensor(model, [0.0, 0.0])

    def test_wrong_shape_rejected(self):
        model = translation_model(lambda x: np.eye(3))
        with pytest.raises(StructuralError):
            metric_tensor(model, [0.0, 0.0])

    def test_velocity_hessian_is_metric(self, disc, rng):
        for _ in range(10):
            x = disc.sample_point(rng)
            H, det = velocity_hessian(disc, x, rng.standard_normal(3))
            np.testing.assert_allclose(H, metric_tensor(disc, x), atol=1e-8)
            assert det == pytest.approx(np.linalg.det(metric_tensor(disc, x)), rel=1e-6)


# ===========================================
# Gram Matrix and Momentum
# ===========================================

class TestMomentum:
    """Tests for the Gram matrix and the momentum map."""

    def test_board_gram_is_total_mass(self, board):
        np.testing.assert_allclose(gram(board, [1.0, 2.0]), [[4.0]])

    def test_two_body_translation_gram(self):
        from apps.systems.models import NBodySpec
        from apps.systems.services import build

        model = build(NBodySpec(masses=(1.0, 1.0), group_parts=('translations',)))
        np.testing.assert_allclose(gram(model, [0, 0, 0, 1, 0, 0]), 2.0 * np.eye(3))

    def test_collinear_rotations_are_singular(self, two_body_rotations):
        with pytest.raises(SingularActionError) as excinfo:
            gram(two_body_rotations, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        assert excinfo.value.details['eigenvalues'][0] == pytest.approx(0.0, abs=1e-12)

    def test_board_momentum(self, board):
        P = momentum(board, TangentSample([0.0, 0.0], [2.0, 3.0]))
        assert P.components[0] == pytest.approx(4.0 * 2.0 + 1.0 * 3.0)

    def test_nbody_momentum_is_linear_and_angular(self, nbody, centered_configuration, rng):
        x = centered_configuration(nbody.spec.masses)
        v = rng.standard_normal(9)
        P = momentum(nbody, TangentSample(x, v)).components
        linear, angular = nbody_momenta(nbody.spec, x, v)
        np.testing.assert_allclose(P[:3], linear, atol=1e-12)
        # X_i = -e_i x r  =>  P_i = -(sum m r x v)_i
        np.testing.assert_allclose(P[3:], -angular, atol=1e-12)

    def test_vertical_lift_equals_momentum(self, nbody, rng):
        s = TangentSample(nbody.sample_point(rng), rng.standard_normal(9))
        P = momentum(nbody, s).components
        for alpha in range(nbody.k):
            value = vertical_lift_derivative(nbody, s, generator_field(nbody, alpha))
            assert value == pytest.approx(P[alpha], abs=1e-7 * max(1.0, abs(P[alpha])))

    def test_momentum_equivariance(self, nbody, rng):
        x, v = nbody.sample_point(rng), rng.standard_normal(9)
        for _ in range(5):
            assert momentum_equivariance_residual(nbody, x, v, random_element(nbody.lie, rng)) < 1e-8

    def test_generator_index_checked(self, disc):
        with pytest.raises(StructuralError):
            generator_field(disc, 1)


# ===========================================
# Lift Derivatives
# ===========================================

class TestLiftDerivatives:
    """Tests for the vertical/complete lift oracles and the Killing check."""

    def test_complete_lift_annihilates_symmetric_lagrangian(self, disc, nbody, rng):
        for model in (disc, nbody):
            s = TangentSample(model.sample_point(rng), rng.standard_normal(model.n))
            scale = max(1.0, abs(lagrangian(model, s)))
            for alpha in range(model.k):
                assert abs(complete_lift_derivative(model, s, generator_field(model, alpha))) < 1e-6 * scale

    def test_complete_lift_sees_broken_symmetry(self, rng):
        model = translation_model(lambda x: np.diag([1.0 + x[0] ** 2, 1.0]))
        s = TangentSample([0.5, 0.0], [1.0, 0.0])
        # d/dx0 of 1/2 (1 + x0^2) v0^2 = x0 v0^2
        assert complete_lift_derivative(model, s, generator_field(model, 0)) == pytest.approx(0.5, rel=1e-6)

    def test_killing_on_builtins(self, board, disc, nbody, rng):
        for model in (board, disc, nbody):
            x = model.sample_point(rng)
            for alpha in range(model.k):
                assert killing_check(model, x, alpha) < 1e-7

    def test_killing_detects_non_isometry(self):
        model = translation_model(lambda x: np.diag([1.0 + x[0] ** 2, 1.0]))
        assert killing_check(model, np.array([1.0, 0.0]), 0) == pytest.approx(2.0, rel=1e-6)

    def test_generator_matrix_shape(self, nbody, rng):
        assert generator_matrix(nbody, nbody.sample_point(rng)).shape == (9, 6)


# ===========================================
# Models
# ===========================================

class TestSystemModel:
    """Tests for SystemModel helpers."""

    def test_wrap_difference(self, disc):
        dx = disc.wrap_difference([0.25, 2.0 * np.pi, -2.0 * np.pi + 0.1])
        np.testing.assert_allclose(dx, [0.25, 0.0, 0.1], atol=1e-15)

    def test_default_coordinates(self):
        model = translation_model(lambda x: np.eye(2))
        assert model.coordinates == ('x0', 'x1')
        assert model.periods == (None, None)

    def test_tangent_sample_lengths_must_match(self):
        with pytest.raises(StructuralError):
            TangentSample([0.0, 1.0], [1.0])

    def test_tangent_sample_must_be_finite(self):
        with pytest.raises(StructuralError):
            TangentSample([0.0, np.inf], [1.0, 0.0])


# ===========================================
# Audits
# ===========================================

class TestAudits:
    """Tests for the sampled system audits."""

    def test_builtins_pass(self, board, disc, nbody, rng):
        for model in (board, disc, nbody):
            report = run_audits(model, rng, samples=50)
            assert report.passed, report.as_dict()
            assert all(r.max_residual < 1e-7 for r in report.results)

    def test_non_isometry_fails_killing(self, rng):
        model = translation_model(lambda x: np.diag([1.0 + x[0] ** 2, 1.0]))
        report = run_audits(model, rng, samples=10)
        assert not report.passed
        assert [r.name for r in report.failures()] == ['killing']

    def test_require_audits_raises(self, rng):
        model = translation_model(lambda x: np.diag([1.0 + x[0] ** 2, 1.0]))
        with pytest.raises(AuditFailedError) as excinfo:
            require_audits(model, rng, samples=5)
        assert 'killing' in excinfo.value.details['failed']

    def test_report_as_dict(self, disc, rng):
        record = run_audits(disc, rng, samples=3).as_dict()
        assert record['system'] == 'disc'
        assert {r['name'] for r in record['results']} == {
            'killing', 'action_law', 'potential_invariance', 'hessian_metric'}
