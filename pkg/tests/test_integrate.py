"""Engine-level checks of the embedded Cash-Karp integrator."""

import math

import numpy as np
import pytest

from jostlab._integrate import integrate_adaptive, integrate_fixed
from jostlab.errors import StiffnessError


def exp_rhs(r, y):
    return -2.0 * y


class TestAdaptive:
    def test_scalar_exponential_decay(self):
        y0 = np.array([1.0 + 0j])
        res = integrate_adaptive(exp_rhs, 0.0, 2.0, y0, 1e-10)
        assert abs(res.final[0] - math.exp(-4.0)) < 1e-9

    def test_batch_shapes_and_values(self):
        rates = np.array([0.5, 1.0, 2.0])

        def rhs(r, y):
            return -rates * y

        y0 = np.ones((1, 3), dtype=complex)
        res = integrate_adaptive(rhs, 0.0, 1.0, y0, 1e-11)
        expected = np.exp(-rates)
        assert np.max(np.abs(res.final[0] - expected)) < 1e-10

    def test_exact_landings(self):
        y0 = np.array([1.0 + 0j])
        targets = [0.3, 0.577, 1.111, 1.9]
        res = integrate_adaptive(exp_rhs, 0.0, 2.0, y0, 1e-10,
                                 r_eval=targets)
        recorded = set(res.rs)
        for t in targets:
            assert t in recorded  # exact float membership, not approximate

    def test_zero_rhs_is_exact(self):
        def rhs(r, y):
            return np.zeros_like(y)

        y0 = np.array([1.0 + 0j, 0.5 - 0.25j])
        res = integrate_adaptive(rhs, 0.0, 10.0, y0, 1e-12)
        assert np.array_equal(res.final, y0)
        assert float(res.est_error[0]) == 0.0

    def test_est_error_monotone_in_tol(self):
        def rhs(r, y):
            return np.array([y[1], -25.0 * y[0]])

        y0 = np.array([0.0 + 0j, 5.0 + 0j])
        errs = []
        for tol in (1e-6, 1e-8, 1e-10, 1e-12):
            res = integrate_adaptive(rhs, 0.0, 3.0, y0, tol)
            errs.append(float(res.est_error))
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_stiffness_error(self):
        # oscillation frequency diverging fast enough to exhaust any step
        def rhs(r, y):
            w = 1.0 / (1.0 - r) ** 6
            return np.array([w * 1j * y[0]])

        y0 = np.array([1.0 + 0j])
        with pytest.raises(StiffnessError) as err:
            integrate_adaptive(rhs, 0.0, 1.0, y0, 1e-10, max_steps=200000)
        assert err.value.r is not None

    def test_deterministic(self):
        y0 = np.array([1.0 + 0j])
        r1 = integrate_adaptive(exp_rhs, 0.0, 2.0, y0, 1e-10)
        r2 = integrate_adaptive(exp_rhs, 0.0, 2.0, y0, 1e-10)
        assert r1.rs == r2.rs
        assert r1.final[0] == r2.final[0]


class TestFixedStep:
    def test_order_five_convergence(self):
        # global error of the propagating solution scales like h**5
        def rhs(r, y):
            return np.array([y[1], -y[0]])  # harmonic oscillator

        y0 = np.array([0.0 + 0j, 1.0 + 0j])
        span = 2.0
        errors = []
        steps = [40, 80, 160, 320]
        for n in steps:
            final = integrate_fixed(rhs, 0.0, span, y0, n)
            errors.append(abs(final[0] - math.sin(span)))
        slopes = [math.log(errors[i] / errors[i + 1]) / math.log(2.0)
                  for i in range(len(errors) - 1)]
        slope = sum(slopes) / len(slopes)
        assert 4.0 <= slope <= 6.0
