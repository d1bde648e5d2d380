import math
from unittest import TestCase

import numpy as np

from lib.errors import ConfigError, NumericalFailure
from lib.induced_model import gibbs_weights, tail
from lib.map_families import gaspard_wang_model
from lib.potential import PotentialFamily
from lib.renewal import (arcsine_cdf, correlation, discrete_ks_distance, drift_schedule, drifted_law, ks_distance,
                         last_visit_law, renewal_limit, renewal_sequence, renewal_tail_bound, two_sample_ks)


class TestRenewalSequence(TestCase):

    def test_first_terms(self):
        seq = renewal_sequence([0.3, 0.2, 0.1], 5)
        self.assertEqual(seq.u[0], 1.0)
        self.assertAlmostEqual(seq.u[1], 0.3, places=15)
        self.assertAlmostEqual(seq.u[2], 0.2 + 0.09, places=15)

    def test_geometric(self):
        seq = renewal_sequence(np.power(0.5, np.arange(1, 201)), 1000)
        self.assertLess(abs(seq.u[1000] - 0.5), 1e-8)

    def test_fft_agrees(self):
        q = gibbs_weights(gaspard_wang_model(0.75, n_max=5000), 0.0, 0.0).q
        direct = renewal_sequence(q, 4096)
        fast = renewal_sequence(q, 4096, method='fft')
        self.assertLess(np.max(np.abs(direct.u - fast.u)), 1e-10)
        self.assertLess(direct.recursion_defect(), 1e-12)

    def test_limit(self):
        beta = 0.75
        model = gaspard_wang_model(beta)
        q = gibbs_weights(model, 0.0, 0.0).q
        seq = renewal_sequence(q, 100000, method='fft')
        limit = renewal_limit(beta, 1.0)
        self.assertAlmostEqual(limit, 0.2251, places=4)
        scaled = seq.scaled(beta)
        self.assertLess(abs(scaled[-1] / limit - 1.0), 0.08)
        top = scaled[50000:]
        self.assertLess((top.max() - top.min()) / top.mean(), 0.03)

    def test_tail_bound(self):
        self.assertEqual(renewal_tail_bound(np.full(10, 0.09), 100), 1.0)
        self.assertAlmostEqual(renewal_tail_bound(np.full(10, 0.0999), 500), 0.5, places=9)
        self.assertEqual(renewal_tail_bound(np.full(10, 0.01), 5), 0.0)

    def test_bad_law(self):
        with self.assertRaises(ConfigError):
            renewal_sequence([0.5, -0.1], 10)
        with self.assertRaises(ConfigError):
            renewal_sequence([0.7, 0.4], 10)
        with self.assertRaises(ConfigError):
            renewal_sequence([0.5], 10, method='laplace')


class TestCorrelation(TestCase):

    def setUp(self):
        self.model = gaspard_wang_model(0.5, n_max=10000)

    def test_constant_observables(self):
        q, result = drifted_law(self.model, 0.0)
        self.assertIsNone(result)
        seq = renewal_sequence(q, 500)
        total = math.fsum(q)
        self.assertAlmostEqual(correlation(self.model, 0.0, 0), total, places=14)
        values = correlation(self.model, 0.0, [1, 10, 500], renewal=seq)
        for n, value in zip((1, 10, 500), values):
            self.assertAlmostEqual(value, total * seq.u[n], places=12)

    def test_drifted(self):
        model = self.model.with_potential(PotentialFamily.log())
        q, result = drifted_law(model, 1e-3)
        self.assertGreater(result.u0, 0.0)
        self.assertLessEqual(math.fsum(q), 1.0 + 1e-12)
        self.assertTrue(0.0 < correlation(model, 1e-3, 200) < 1.0)

    def test_transient(self):
        model = self.model.with_potential(PotentialFamily.polynomial(0.5))
        with self.assertRaises(NumericalFailure):
            correlation(model, 0.01, 100)

    def test_observable_size(self):
        with self.assertRaises(ConfigError):
            correlation(self.model, 0.0, 10, v_values=[1.0, 2.0])

    def test_schedule(self):
        schedule = drift_schedule(0.5, [100.0])
        self.assertAlmostEqual(float(schedule['renewal_scale'][0]), 0.01, places=15)
        self.assertAlmostEqual(float(schedule['beta_eps'][0]), 100.0 ** (-0.5 / 0.4 - 0.05), places=15)
        with self.assertRaises(ConfigError):
            drift_schedule(0.5, [100.0], eps=0.6)


class TestArcsine(TestCase):

    def test_values(self):
        self.assertAlmostEqual(float(arcsine_cdf(0.75, 1.0)), 1.0, places=15)
        self.assertAlmostEqual(float(arcsine_cdf(0.5, 0.5)), 0.5, places=14)
        self.assertAlmostEqual(float(arcsine_cdf(0.5, 0.25)), 1.0 / 3.0, places=14)

    def test_classical_law(self):
        t = np.linspace(0.0, 1.0, 101)
        expected = 2.0 / math.pi * np.arcsin(np.sqrt(t))
        self.assertLess(np.max(np.abs(arcsine_cdf(0.5, t) - expected)), 1e-8)

    def test_range(self):
        with self.assertRaises(ConfigError):
            arcsine_cdf(1.0, 0.5)

    def test_ks(self):
        cdf = lambda t: arcsine_cdf(0.5, t)
        self.assertAlmostEqual(ks_distance([0.5], cdf), 0.5, places=14)
        self.assertAlmostEqual(ks_distance(np.zeros(10), cdf), 1.0, places=14)
        with self.assertRaises(ConfigError):
            ks_distance([], cdf)

    def test_two_sample(self):
        sample = np.linspace(0.0, 1.0, 50)
        statistic, pvalue = two_sample_ks(sample, sample)
        self.assertEqual(statistic, 0.0)
        self.assertAlmostEqual(pvalue, 1.0, places=12)


class TestLastVisitLaw(TestCase):

    def test_geometric(self):
        q = np.power(0.5, np.arange(1, 61))
        pmf = last_visit_law(q, 20)
        self.assertEqual(pmf.size, 21)
        self.assertAlmostEqual(pmf[0], 0.5 ** 20, places=15)
        self.assertAlmostEqual(pmf[20], 0.5, places=14)
        self.assertAlmostEqual(pmf[19], 0.25, places=14)
        self.assertAlmostEqual(math.fsum(pmf), 1.0, places=12)

    def test_heavy_tail(self):
        model = gaspard_wang_model(0.5, n_max=2000)
        q, _ = drifted_law(model, 0.0)
        pmf = last_visit_law(q, 2000)
        self.assertAlmostEqual(math.fsum(pmf), 1.0, places=10)
        self.assertAlmostEqual(pmf[0], tail(model, 2000), places=10)
        self.assertTrue(np.all(pmf >= 0.0))

    def test_horizon(self):
        with self.assertRaises(ConfigError):
            last_visit_law([0.5, 0.5], 0)

    def test_discrete_ks(self):
        pmf = np.array([0.25, 0.25, 0.5])
        self.assertAlmostEqual(discrete_ks_distance([0, 0], pmf), 0.75, places=15)
        self.assertAlmostEqual(discrete_ks_distance([0, 1, 2, 2], pmf), 0.0, places=15)
        with self.assertRaises(ConfigError):
            discrete_ks_distance([3], pmf)
        with self.assertRaises(ConfigError):
            discrete_ks_distance([], pmf)
