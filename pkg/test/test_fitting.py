from unittest import TestCase

import numpy as np

from lib.errors import ConfigError
from lib.fitting import fit_power_law, geometric_grid
from lib.potential import PotentialFamily


class TestFitPowerLaw(TestCase):

    def test_exact_power(self):
        x = geometric_grid(1e-4, 1e-1, 20)
        report = fit_power_law(x, 3.0 * x ** -0.7)
        self.assertAlmostEqual(report.exponent, -0.7, places=10)
        self.assertAlmostEqual(report.constant, 3.0, places=9)
        self.assertAlmostEqual(report.r2, 1.0, places=12)
        self.assertEqual(report.n_points, 20)

    def test_sign_dropped(self):
        x = geometric_grid(1.0, 100.0, 10)
        self.assertAlmostEqual(fit_power_law(x, -x ** 2).exponent, 2.0, places=10)

    def test_narrow_window(self):
        x = np.linspace(1.0, 5.0, 10)
        with self.assertRaises(ConfigError):
            fit_power_law(x, x)

    def test_too_few_points(self):
        with self.assertRaises(ConfigError):
            fit_power_law([1.0, 100.0], [1.0, 2.0])

    def test_report_json(self):
        x = geometric_grid(1.0, 100.0, 10)
        doc = fit_power_law(x, x).to_json()
        self.assertEqual(doc['n_points'], 10)
        self.assertEqual(doc['window'], [1.0, 100.0])


class TestGeometricGrid(TestCase):

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            geometric_grid(0.0, 1.0, 5)
        with self.assertRaises(ConfigError):
            geometric_grid(1.0, 0.5, 5)


class TestPotentialFamily(TestCase):

    def test_polynomial_range(self):
        with self.assertRaises(ConfigError):
            PotentialFamily.polynomial(1.5)
        with self.assertRaises(ConfigError):
            PotentialFamily.polynomial(0.5, C=0.0)

    def test_values(self):
        psi = PotentialFamily.polynomial(1.0, C=2.0, c_prime=1.0)
        self.assertEqual(list(psi.values([1, 2])), [-1.0, -3.0])
        self.assertEqual(psi.linear_rate, -2.0)
        self.assertAlmostEqual(float(PotentialFamily.log().values(np.e)), 1.0, places=15)

    def test_damping_scale(self):
        self.assertEqual(PotentialFamily.log().damping_scale(0.1), float('inf'))
        self.assertEqual(PotentialFamily.polynomial(1.0).damping_scale(0.1), float('inf'))
        self.assertAlmostEqual(PotentialFamily.polynomial(0.5).damping_scale(0.5), 10000.0, places=8)

    def test_custom_table(self):
        psi = PotentialFamily('custom', table=[1.0, 2.0, 3.0])
        self.assertEqual(list(psi.values([1, 3, 10])), [1.0, 3.0, 3.0])
        self.assertIsNone(PotentialFamily.from_json(None))
