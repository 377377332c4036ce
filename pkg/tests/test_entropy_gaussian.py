import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimbandit.entropy_gaussian import (
    EntropyState,
    delta_simplified,
    increment_closed_form,
    increments_kernel,
    s_app_components,
    s_body_exact,
    s_tail_exact,
    theta_eq,
    theta_eq_residual,
)
from aimbandit.oracle import expected_app_increment
from aimbandit.validate import random_states

LOG_2PIE = math.log(2 * math.pi * math.e)
FIG1 = EntropyState(0.65, 374, 0.29, 26, 1.0)
# -int_{0.832}^{inf} phi ln phi for phi = N(0.29, 1/26), 40-digit mpmath quadrature.
FIG1_TAIL_AT_0832 = 0.01150065542820268905105780682931944327467
# -int F_min phi_max ln phi_max for the same state, 40-digit mpmath quadrature.
FIG1_BODY = -1.489387860134578700076977064877262198885


def states(defined=True):
    counts = st.integers(1, 10**6)

    @st.composite
    def build(draw):
        a, b = draw(counts), draw(counts)
        if defined:
            if a == b:
                b += 1
            a, b = max(a, b), min(a, b)
        mean_min = draw(st.floats(-2, 2))
        gap = draw(st.floats(0, 3))
        sigma2 = draw(st.floats(0.05, 20))
        return EntropyState(mean_min + gap, a, mean_min, b, sigma2)

    return build()


class TestThetaEq:
    def test_equal_means(self):
        assert theta_eq(EntropyState(0.0, 2, 0.0, 1)).value == pytest.approx(
            math.sqrt(math.log(2)), rel=1e-15
        )

    def test_unit_gap(self):
        expected = 2.285458621736987339226268561347402056421
        assert theta_eq(EntropyState(1.0, 4, 0.0, 1)).value == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("n_max, n_min", [(1, 5), (3, 3)])
    def test_undefined_without_more_max_pulls(self, n_max, n_min):
        teq = theta_eq(EntropyState(1.0, n_max, 0.0, n_min))
        assert not teq.defined
        assert teq.value == math.inf

    def test_ordering_on_random_grid(self):
        rng = np.random.default_rng(20)
        for s in random_states(rng, 10_000):
            if s.gap > 0:
                assert theta_eq(s).value > s.mean_max

    @given(states())
    def test_residual_of_balance_equation(self, s):
        th = theta_eq(s).value
        assert abs(theta_eq_residual(s, th)) < 1e-9 * (1 + th * th)

    def test_state_rejects_misordered_means(self):
        with pytest.raises(ValueError):
            EntropyState(0.0, 2, 1.0, 1)


class TestExactParts:
    def test_tail_at_lesser_mean(self):
        assert s_tail_exact(EntropyState(0.0, 1, 0.0, 1), 0.0) == pytest.approx(
            0.25 * LOG_2PIE, rel=1e-15
        )

    def test_tail_vanishes_far_out(self):
        s = EntropyState(0.0, 1, 0.0, 1)
        assert s_tail_exact(s, 60.0) == 0.0
        assert s_tail_exact(s, math.inf) == 0.0

    def test_tail_reference_value(self):
        assert s_tail_exact(FIG1, 0.832) == pytest.approx(FIG1_TAIL_AT_0832, abs=1e-12)

    @pytest.mark.parametrize("n_max, sigma2", [(1, 1.0), (50, 0.3), (10**5, 4.0)])
    def test_body_equal_means(self, n_max, sigma2):
        s = EntropyState(0.2, n_max, 0.2, 3, sigma2)
        expected = 0.25 * math.log(2 * math.pi * math.e * sigma2 / n_max)
        assert s_body_exact(s) == pytest.approx(expected, rel=1e-14)

    def test_body_large_gap(self):
        s = EntropyState(100.0, 20, 0.0, 3)
        assert s_body_exact(s) == pytest.approx(0.5 * math.log(2 * math.pi * math.e / 20), rel=1e-14)

    def test_body_reference_value(self):
        assert s_body_exact(FIG1) == pytest.approx(FIG1_BODY, abs=1e-12)


class TestApproximateParts:
    def test_undefined_crossing_point(self):
        body, tail = s_app_components(EntropyState(0.5, 3, 0.1, 9, 2.0))
        assert body == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 2.0 / 3), rel=1e-15)
        assert tail == 0.0

    def test_far_crossing_point(self):
        body, tail = s_app_components(EntropyState(50.0, 1000, 0.0, 10))
        assert body == pytest.approx(0.5 * math.log(2 * math.pi * math.e / 1000), rel=1e-14)
        assert tail == 0.0

    def test_reference_state_close_to_exact(self):
        teq = theta_eq(FIG1).value
        approx = sum(s_app_components(FIG1))
        exact = s_body_exact(FIG1) + s_tail_exact(FIG1, teq)
        assert abs(approx - exact) <= 0.1 * abs(exact)

    def test_converges_to_exact(self):
        errors = []
        for k in range(4, 13):
            n_min = 2**k
            s = EntropyState(0.5, n_min * n_min, 0.0, n_min)
            teq = theta_eq(s).value
            exact = s_body_exact(s) + s_tail_exact(s, teq)
            errors.append(abs(sum(s_app_components(s)) - exact))
        # Strictly shrinking until both sides agree to rounding, then flat at zero.
        assert all(b < a or a < 1e-14 for a, b in zip(errors, errors[1:]))
        assert errors[-1] < 1e-14


class TestIncrements:
    @pytest.mark.parametrize(
        "state",
        [
            FIG1,
            EntropyState(0.3, 10**7, 0.0, 30),
            EntropyState(0.0, 5001, 0.0, 5000),
            EntropyState(1.0, 3, 0.5, 1, 0.3),
            EntropyState(0.2, 200, 0.1, 20, 4.0),
        ],
    )
    def test_match_gauss_hermite(self, state):
        x = theta_eq(state).value - state.mean_min
        d_max, d_min = increment_closed_form(state)
        args = (x, state.n_max, state.n_min, state.sigma2)
        assert d_max == pytest.approx(expected_app_increment(*args, "max"), abs=1e-6)
        assert d_min == pytest.approx(expected_app_increment(*args, "min"), abs=1e-6)

    def test_large_n_max_limit(self):
        s = EntropyState(0.3, 10**7, 0.0, 30)
        d_max, _ = increment_closed_form(s)
        x = theta_eq(s).value - s.mean_min
        body_weight = 1 - 0.5 * math.erfc(math.sqrt(s.n_min) * x / math.sqrt(2 * s.sigma2))
        limit = 0.5 * math.log(s.n_max / (s.n_max + 1)) * body_weight
        assert d_max == pytest.approx(limit, rel=1e-3)

    def test_zero_offset_keeps_only_prefactors(self):
        d_max, d_min = increments_kernel(0.0, 40, 7, 1.0)
        assert d_max == pytest.approx(0.25 * math.log(40 / 41), rel=1e-14)
        assert d_min == 0.0

    def test_needs_defined_crossing_point(self):
        with pytest.raises(ValueError):
            increment_closed_form(EntropyState(1.0, 2, 0.0, 2))


class TestDeltaSimplified:
    def test_far_separated_limit(self):
        s = EntropyState(40.0, 500, 0.0, 100)
        value = delta_simplified(s)
        assert value == pytest.approx(0.5 * math.log(500 / 501), rel=1e-14)
        assert value < 0

    def test_reference_state_sign(self):
        d_max, d_min = increment_closed_form(FIG1)
        assert np.sign(delta_simplified(FIG1)) == np.sign(d_max - d_min)

    def test_error_shrinks_with_counts(self):
        def rel_error(n_min, n_max):
            s = EntropyState(0.3, n_max, 0.0, n_min)
            d_max, d_min = increment_closed_form(s)
            return abs(delta_simplified(s) - (d_max - d_min)) / abs(d_max - d_min)

        assert rel_error(200, 20_000) < rel_error(100, 10_000)

    def test_needs_more_max_pulls(self):
        with pytest.raises(ValueError):
            delta_simplified(EntropyState(1.0, 3, 0.0, 4))
