import math
from unittest import TestCase

import mpmath

from lib.errors import ConfigError, IntegrationFailure
from lib.map_families import gaspard_wang_model
from lib.tails import TailLaw, ch_constant, log_catalan_over_4k


class TestLogCatalan(TestCase):

    def test_exact_values(self):
        for k in range(0, 40):
            exact = math.comb(2 * k, k) // (k + 1) / 4 ** k
            self.assertAlmostEqual(math.exp(float(log_catalan_over_4k(k))) / exact, 1.0, places=12)


class TestTailLaw(TestCase):

    def test_rejects_bad_exponent(self):
        with self.assertRaises(ConfigError):
            TailLaw(1.5, 1.0)
        with self.assertRaises(ConfigError):
            TailLaw(0.0, 1.0)

    def test_rejects_unknown_kind(self):
        with self.assertRaises(ConfigError):
            TailLaw(0.5, 1.0, kind='stretched')

    def test_exact_power(self):
        law = TailLaw(0.5, 1.0)
        self.assertAlmostEqual(float(law.at_least(100)), 0.1, places=15)
        self.assertAlmostEqual(float(law.greater_than(99)), 0.1, places=15)
        self.assertAlmostEqual(math.exp(float(law.log_mass(1))), 1.0 - 2.0 ** -0.5, places=15)

    def test_log_mass_telescopes(self):
        law = TailLaw(0.75, 1.0, corrections=[(0.25, 1.5)])
        masses = [math.exp(float(law.log_mass(x))) for x in range(1, 200)]
        self.assertAlmostEqual(math.fsum(masses), float(law.at_least(1) - law.at_least(200)), places=14)

    def test_catalan_closed_tail(self):
        law = TailLaw.catalan(0.5)
        self.assertTrue(law.has_closed_tail())
        self.assertAlmostEqual(float(law.greater_than(0)), 1.0, places=14)
        self.assertAlmostEqual(float(law.greater_than(3)), 20.0 / 64.0, places=14)
        self.assertFalse(TailLaw.catalan(0.4).has_closed_tail())

    def test_catalan_growth_rate(self):
        law = TailLaw.catalan(0.5, t=0.9)
        self.assertAlmostEqual(law.growth_rate, 0.1 * math.log(4.0), places=14)

    def test_scaled(self):
        law = TailLaw(0.5, 1.0).scaled(math.log(0.5))
        self.assertAlmostEqual(float(law.at_least(4)), 0.25, places=15)

    def test_json(self):
        law = TailLaw(0.6, 0.8, corrections=[(0.2, 1.2)], shift=0.5, truncation=100)
        again = TailLaw.from_json(law.to_json())
        self.assertEqual(again.corrections, law.corrections)
        self.assertEqual(again.shift, 0.5)
        self.assertEqual(again.truncation, 100)


class TestChConstant(TestCase):

    def test_zero_constant(self):
        self.assertAlmostEqual(ch_constant(TailLaw(0.5, 0.0)), 0.0, places=12)

    def test_pure_power_is_zeta(self):
        for beta in (0.5, 0.75, 0.4):
            expected = float(mpmath.zeta(beta))
            self.assertLess(abs(ch_constant(TailLaw(beta, 1.0)) - expected), 1e-8)

    def test_slow_tails_with_default_truncation(self):
        for beta in (0.4, 0.5):
            law = gaspard_wang_model(beta).tail_law
            expected = math.exp(law.log_scale) * float(mpmath.zeta(beta))
            value = ch_constant(law)
            self.assertTrue(math.isfinite(value))
            self.assertLess(abs(value - expected), 1e-8)

    def test_slow_correction_term(self):
        law = gaspard_wang_model(0.75, 'with_corrections').tail_law
        expected = math.exp(law.log_scale) * (0.5 * float(mpmath.zeta(0.75)) + 0.5 * float(mpmath.zeta(1.5)))
        self.assertLess(abs(ch_constant(law) - expected), 1e-8)

    def test_negative_for_pure_power(self):
        self.assertLess(ch_constant(TailLaw(0.5, 1.0)), 0.0)

    def test_non_integrable_correction(self):
        with self.assertRaises(IntegrationFailure):
            ch_constant(TailLaw(0.4, 0.5, corrections=[(0.5, 0.8)]))
