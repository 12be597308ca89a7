import math

import numpy as np
import pytest

from minmaxlab.smoothstep import (
    ALPHA,
    ELL,
    G,
    StepSpec,
    d1_bound,
    d2_bound,
    named_step,
    step_d1,
    step_d2,
    step_eval,
)

from oracles import central_diff, central_diff2, rel_err

THIRDS = StepSpec(1.0 / 3.0, 2.0 / 3.0)


class TestStepSpec:
    def test_rejects_reversed_knees(self):
        with pytest.raises(ValueError):
            StepSpec(0.5, 0.5)
        with pytest.raises(ValueError):
            StepSpec(0.7, 0.3)

    def test_rejects_negative_lower_knee(self):
        with pytest.raises(ValueError):
            StepSpec(-0.1, 0.5)

    def test_width(self):
        assert StepSpec(1.0, 3.5).width == 2.5


class TestStepEval:
    def test_plateau_low(self):
        assert step_eval(THIRDS, 0.2) == 0.0
        assert step_eval(THIRDS, 1.0 / 3.0) == 0.0
        assert step_eval(THIRDS, -5.0) == 0.0

    def test_plateau_high(self):
        assert step_eval(THIRDS, 2.0 / 3.0) == 1.0
        assert step_eval(THIRDS, 0.9) == 1.0
        assert step_eval(THIRDS, 100.0) == 1.0

    def test_midpoint_symmetry(self):
        # knees are irrational in binary64, so symmetry holds to rounding
        assert math.isclose(step_eval(THIRDS, 0.5), 0.5, abs_tol=1e-14)

    def test_interior_value(self):
        # 1/(x-1/3) = 15 and 1/(2/3-x) = 3.75 at x = 0.4
        expected = 1.0 / (1.0 + math.exp(11.25))
        assert math.isclose(step_eval(THIRDS, 0.4), expected, rel_tol=1e-9)
        assert expected == pytest.approx(1.3e-5, rel=0.05)

    def test_range_and_monotonicity(self):
        rng = np.random.default_rng(7)
        xs = np.sort(rng.uniform(-0.5, 1.5, size=500))
        vals = [step_eval(THIRDS, float(x)) for x in xs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_non_unit_knees(self):
        spec = StepSpec(3.0, 4.0)
        assert step_eval(spec, 3.0) == 0.0
        assert step_eval(spec, 4.0) == 1.0
        assert step_eval(spec, 3.5) == 0.5

    def test_random_specs_satisfy_contract(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            c1 = float(rng.uniform(0.0, 5.0))
            spec = StepSpec(c1, c1 + float(rng.uniform(0.05, 3.0)))
            assert step_eval(spec, spec.c1) == 0.0
            assert step_eval(spec, spec.c2) == 1.0
            xs = np.sort(rng.uniform(spec.c1 - 1, spec.c2 + 1, size=50))
            vals = [step_eval(spec, float(x)) for x in xs]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


class TestDerivatives:
    def test_d1_zero_on_plateaus_and_knees(self):
        for x in (0.2, 1.0 / 3.0, 2.0 / 3.0, 0.9):
            assert step_d1(THIRDS, x) == 0.0

    def test_d2_zero_on_plateaus_and_knees(self):
        for x in (0.1, 1.0 / 3.0, 2.0 / 3.0, 0.9):
            assert step_d2(THIRDS, x) == 0.0

    def test_d1_matches_central_difference(self):
        rng = np.random.default_rng(11)
        width = THIRDS.width
        xs = rng.uniform(THIRDS.c1 - width, THIRDS.c2 + width, size=300)
        f = lambda t: step_eval(THIRDS, t)
        for x in xs:
            fd = central_diff(f, float(x), h=1e-6)
            assert rel_err(fd, step_d1(THIRDS, float(x))) <= 1e-5

    def test_d1_midpoint_against_fd(self):
        fd = central_diff(lambda t: step_eval(THIRDS, t), 0.5, h=1e-6)
        assert rel_err(fd, step_d1(THIRDS, 0.5)) <= 1e-5

    def test_d2_matches_central_difference(self):
        rng = np.random.default_rng(13)
        xs = rng.uniform(0.36, 0.64, size=200)
        f = lambda t: step_eval(THIRDS, t)
        for x in xs:
            fd = central_diff2(f, float(x), h=1e-4)
            assert rel_err(fd, step_d2(THIRDS, float(x))) <= 1e-4

    def test_d2_at_045_against_fd(self):
        fd = central_diff2(lambda t: step_eval(THIRDS, t), 0.45, h=1e-4)
        assert rel_err(fd, step_d2(THIRDS, 0.45)) <= 1e-4

    def test_sampled_bounds(self):
        rng = np.random.default_rng(17)
        width = THIRDS.width
        xs = rng.uniform(THIRDS.c1 - width, THIRDS.c2 + width, size=10_000)
        sup1 = max(abs(step_d1(THIRDS, float(x))) for x in xs)
        sup2 = max(abs(step_d2(THIRDS, float(x))) for x in xs)
        assert sup1 <= d1_bound(THIRDS)  # e^6
        assert sup2 <= d2_bound(THIRDS)  # 12 e^12
        assert d1_bound(THIRDS) == pytest.approx(math.exp(6.0))
        assert d2_bound(THIRDS) == pytest.approx(12.0 * math.exp(12.0))

    @pytest.mark.parametrize("curve", [G, ELL, ALPHA, named_step("energy", 2)])
    def test_named_step_bounds(self, curve):
        rng = np.random.default_rng(19)
        spec = curve.spec
        xs = rng.uniform(spec.c1 - spec.width, spec.c2 + spec.width, size=2000)
        assert max(abs(curve.d1(float(x))) for x in xs) <= curve.d1_bound()
        assert max(abs(curve.d2(float(x))) for x in xs) <= curve.d2_bound()

    def test_narrow_step_stays_finite(self):
        spec = StepSpec(0.0, 1e-4)
        for x in (0.0, 2.5e-5, 5e-5, 7.5e-5, 1e-4):
            assert 0.0 <= step_eval(spec, x) <= 1.0
            assert math.isfinite(step_d1(spec, x))
            assert math.isfinite(step_d2(spec, x))


class TestNamedSteps:
    def test_g_at_zero(self):
        assert G(0.0) == 1.0

    def test_g_saturation(self):
        assert G(2.0) == 0.0
        assert G(1.0 / 3.0) == 1.0

    def test_ell_midpoint(self):
        assert math.isclose(ELL(0.5), 0.5, abs_tol=1e-14)
        assert ELL(-0.25) == 0.0
        assert ELL(0.75) == 1.0

    def test_g_equals_reflected_step(self):
        rng = np.random.default_rng(23)
        for z in rng.uniform(0.0, 1.0, size=100):
            assert abs(G(float(z)) - step_eval(THIRDS, 1.0 - float(z))) <= 1e-12

    def test_alpha_profile(self):
        assert ALPHA(0.0) == 1.0
        assert ALPHA(1.0 / 6.0) == 1.0
        assert ALPHA(1.0 / 3.0) == 0.0
        assert 0.0 < ALPHA(0.25) < 1.0

    def test_energy_spec(self):
        e3 = named_step("energy", 3)
        assert e3.spec.c1 == 9.0
        assert e3.spec.c2 == 10.0
        assert e3(9.0) == 0.0
        assert e3(10.0) == 1.0

    def test_energy_requires_valid_m(self):
        with pytest.raises(ValueError):
            named_step("energy")
        with pytest.raises(ValueError):
            named_step("energy", 0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            named_step("sigmoid")

    def test_named_derivatives_chain_rule(self):
        rng = np.random.default_rng(29)
        for z in rng.uniform(0.0, 1.0, size=50):
            z = float(z)
            assert G.d1(z) == -step_d1(THIRDS, z)
            assert G.d2(z) == -step_d2(THIRDS, z)
            fd = central_diff(ELL, z, h=1e-6)
            assert rel_err(fd, ELL.d1(z)) <= 1e-5
