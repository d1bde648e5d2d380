import math
from unittest import TestCase

import numpy as np

from lib.combinatorics import beta_of_lambda, catalan
from lib.errors import ConfigError
from lib.fibonacci import (fib_convergence_abscissa, fib_marginal, fib_pressure, fib_pressure_bounds, fib_pressure_fit,
                           fib_return_series, fib_walk_dp, level_cap)
from lib.pressure import ROOT


def sv_masses(lam, count):
    # C_{n-1} (1 - lam) (lam (1 - lam))^(n-1) for n = 1..count
    return np.array([catalan(n - 1) * (1 - lam) * (lam * (1 - lam)) ** (n - 1) for n in range(1, count + 1)])


class TestWalkDP(TestCase):

    def test_conservation(self):
        tail, table = fib_walk_dp(0.45, n_max=2000)
        self.assertLess(abs(table.conservation_defect()), 1e-12)
        self.assertAlmostEqual(tail[0], 1.0, places=15)
        self.assertTrue(np.all(np.diff(tail) <= 1e-16))

    def test_unit_clock_is_stratmann_vogt(self):
        lam = 0.45
        _, table = fib_walk_dp(lam, n_max=60, clock='unit')
        masses = sv_masses(lam, 60)
        self.assertLess(np.max(np.abs(table.by_time[1:61] / masses - 1.0)), 1e-10)

    def test_steps_marginal(self):
        lam = 0.42
        _, table = fib_walk_dp(lam, n_max=100, clock='unit', k_max=30)
        masses = sv_masses(lam, 31)
        self.assertLess(np.max(np.abs(table.by_steps / masses - 1.0)), 1e-10)
        # unit clock: k + 1 steps take time k + 1
        k = np.arange(31)
        self.assertTrue(np.allclose(table.joint[k, k + 1], table.by_time[1:32], rtol=1e-12, atol=0.0))
        self.assertEqual(np.count_nonzero(table.joint), 31)

    def test_joint_table_margins(self):
        lam, k_max = 0.45, 60
        _, table = fib_walk_dp(lam, n_max=3000, k_max=k_max)
        self.assertEqual(table.joint.shape, (k_max + 1, 3001))
        # every step costs at least one unit, so short times only hold short excursions
        self.assertLess(np.max(np.abs(table.beyond_steps[:k_max + 2])), 1e-15)
        self.assertGreater(table.beyond_steps.min(), -1e-15)
        self.assertAlmostEqual(math.fsum(table.by_steps) + math.fsum(table.beyond_steps), table.returned, places=12)
        # fibonacci clock: same excursions as the unit clock, some still running at the horizon
        masses = sv_masses(lam, k_max + 1)
        self.assertTrue(np.all(table.by_steps <= masses * (1.0 + 1e-12)))
        self.assertLess(abs(table.by_steps[5] / masses[5] - 1.0), 1e-10)

    def test_joint_table_weights_time(self):
        lam, u = 0.45, 0.01
        _, plain = fib_walk_dp(lam, n_max=2000, k_max=40)
        _, damped = fib_walk_dp(lam, u=u, n_max=2000, k_max=40)
        n = np.arange(2001)
        self.assertTrue(np.allclose(damped.joint, plain.joint * np.exp(-u * n), rtol=1e-10, atol=0.0))
        self.assertTrue(np.all(damped.by_steps[1:] < plain.by_steps[1:]))

    def test_tail_band(self):
        lam = 0.45
        tail, _ = fib_walk_dp(lam, n_max=10000)
        beta = beta_of_lambda(lam)
        n = np.unique(np.geomspace(100, 10000, 40).astype(np.int64))
        scaled = tail[n] * n ** beta
        self.assertLessEqual(scaled.max() / scaled.min(), 4.0)

    def test_level_cap(self):
        self.assertEqual(level_cap(10, 'unit'), 12)
        # S_5 = 13 is the first clock value above 10
        self.assertEqual(level_cap(10), 6)

    def test_ranges(self):
        with self.assertRaises(ConfigError):
            fib_walk_dp(0.3)
        with self.assertRaises(ConfigError):
            fib_walk_dp(0.45, n_max=5000, clock='unit')


class TestFibPressure(TestCase):

    def test_unit_temperature(self):
        result = fib_pressure(0.45, 1.0)
        self.assertEqual(result.kind, ROOT)
        self.assertEqual(result.u0, 0.0)
        self.assertLess(abs(result.residual), 1e-9)

    def test_root(self):
        result = fib_pressure(0.45, 0.95)
        self.assertEqual(result.kind, ROOT)
        self.assertGreater(result.u0, 0.0)
        self.assertAlmostEqual(fib_return_series(0.45, 0.95, result.u0), 1.0, places=9)

    def test_convergence_abscissa(self):
        lam, t = 0.45, 0.95
        a = fib_convergence_abscissa(lam, t)
        # 4 (lam (1 - lam))^t > 1: the level operator at u = 0 is not a contraction
        self.assertGreater(a, 0.0)
        self.assertEqual(fib_return_series(lam, t, a * (1.0 - 1e-6)), math.inf)
        self.assertTrue(math.isfinite(fib_return_series(lam, t, a * (1.0 + 1e-6))))
        self.assertEqual(fib_convergence_abscissa(lam, 1.0), 0.0)

        result = fib_pressure(lam, t)
        self.assertEqual(result.kind, ROOT)
        self.assertGreater(result.bracket[0], a)
        self.assertGreater(result.u0, a)

    def test_exponent(self):
        lam = 0.45
        report = fib_pressure_fit(lam, np.linspace(0.9, 0.995, 12))
        target = 1.0 / beta_of_lambda(lam)
        self.assertLess(abs(report.exponent / target - 1.0), 0.05)

    def test_bounds_at_unit_temperature(self):
        lam = 0.45
        bounds = fib_pressure_bounds(lam, 1.0)
        self.assertAlmostEqual(bounds['lower_exponent'], 1.0 / beta_of_lambda(lam), places=10)
        self.assertAlmostEqual(bounds['upper_exponent'], lam * math.log((1 + math.sqrt(5)) / 2) / 0.2, places=12)

    def test_above_one(self):
        with self.assertRaises(ConfigError):
            fib_pressure(0.45, 1.2)


class TestMarginal(TestCase):

    def test_geometric_marginal(self):
        lam = 0.45
        result = fib_marginal(lam)
        self.assertLess(result['max_abs_error'], 1e-10)
        self.assertAlmostEqual(result['mean_steps'], (1 - lam) / (1 - 2 * lam), places=9)
