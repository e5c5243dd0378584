"""Normal and Student-t tail probabilities against closed forms and scipy."""

import math

import numpy as np
import pytest
import scipy.stats

from raimpact.stats import (
    normal_sf,
    normal_two_sided,
    regularized_incomplete_beta,
    student_t_sf,
    student_t_two_sided,
)


class TestNormalTails:
    def test_center_and_symmetry(self):
        assert normal_sf(0.0) == 0.5
        assert normal_two_sided(0.0) == 1.0
        for z in (0.1, 0.5, 1.0, 2.5, 6.0):
            assert normal_sf(-z) == pytest.approx(1.0 - normal_sf(z), abs=1e-15)
            assert normal_two_sided(z) == normal_two_sided(-z)

    def test_known_value_at_1_96(self):
        assert normal_two_sided(1.959963984540054) == pytest.approx(0.05, abs=1e-12)

    def test_against_scipy_over_a_grid(self):
        for z in np.linspace(-8, 8, 161):
            assert normal_sf(z) == pytest.approx(scipy.stats.norm.sf(z), rel=1e-13, abs=1e-300)

    def test_far_tail_stays_positive(self):
        assert 0.0 < normal_sf(30.0) < 1e-190


class TestIncompleteBeta:
    def test_boundaries(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_uniform_case_is_identity(self):
        for x in (0.1, 0.25, 0.5, 0.9):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-14)

    def test_symmetry(self):
        for a, b, x in ((2.0, 5.0, 0.3), (0.5, 0.5, 0.2), (10.0, 3.0, 0.7)):
            direct = regularized_incomplete_beta(a, b, x)
            mirrored = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
            assert direct == pytest.approx(mirrored, abs=1e-13)

    def test_arcsine_midpoint(self):
        assert regularized_incomplete_beta(0.5, 0.5, 0.5) == pytest.approx(0.5, abs=1e-13)

    def test_against_scipy_over_a_grid(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            a = float(rng.uniform(0.3, 50.0))
            b = float(rng.uniform(0.3, 50.0))
            x = float(rng.uniform(0.0, 1.0))
            ours = regularized_incomplete_beta(a, b, x)
            ref = float(scipy.stats.beta.cdf(x, a, b))
            assert ours == pytest.approx(ref, rel=1e-11, abs=1e-13)

    def test_nonpositive_shapes_rejected(self):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(-1.0, 2.0, 0.5)
        with pytest.raises(ValueError):
            regularized_incomplete_beta(1.0, 0.0, 0.5)

    def test_x_outside_unit_interval_saturates(self):
        assert regularized_incomplete_beta(2.0, 3.0, -0.5) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.5) == 1.0


class TestStudentT:
    def test_center(self):
        for df in (1, 2, 5, 30.5):
            assert student_t_sf(0.0, df) == 0.5
            assert student_t_two_sided(0.0, df) == 1.0

    def test_cauchy_closed_form(self):
        for t in (-3.0, -0.5, 0.7, 2.0, 10.0):
            expected = 0.5 - math.atan(t) / math.pi
            assert student_t_sf(t, 1.0) == pytest.approx(expected, rel=1e-13)

    def test_df2_closed_form(self):
        for t in (-2.0, 0.3, 1.0, 4.0):
            expected = 0.5 * (1.0 - t / math.sqrt(2.0 + t * t))
            assert student_t_sf(t, 2.0) == pytest.approx(expected, rel=1e-13)

    def test_symmetry_and_two_sided(self):
        for t, df in ((1.7, 3.0), (2.9, 11.0), (0.4, 100.0)):
            assert student_t_sf(-t, df) == pytest.approx(1.0 - student_t_sf(t, df), abs=1e-14)
            assert student_t_two_sided(t, df) == pytest.approx(2.0 * student_t_sf(abs(t), df), abs=1e-15)

    def test_against_scipy_over_a_grid(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            t = float(rng.uniform(-12, 12))
            df = float(rng.uniform(1, 200))
            assert student_t_sf(t, df) == pytest.approx(
                float(scipy.stats.t.sf(t, df)), rel=1e-11, abs=1e-14
            )

    def test_large_df_approaches_normal(self):
        assert student_t_sf(1.5, 1e6) == pytest.approx(normal_sf(1.5), abs=1e-6)
