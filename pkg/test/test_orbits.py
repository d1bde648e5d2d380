from unittest import TestCase

import numpy as np
from scipy import stats

from lib.errors import ConfigError
from lib.map_families import FlatMap, GaspardWang, PomeauManneville, gaspard_wang_model, pm_cylinders
from lib.orbits import (float_last_visits, orbit, perturb_endpoints, pm_first_return_sample, sample_inducing_set,
                        skeleton_return_times)


class TestFloatOrbit(TestCase):

    def setUp(self):
        self.pm = PomeauManneville(2.0)

    def test_immediate_return(self):
        # f(0.9) = 0.8
        summary = orbit(self.pm, x0=0.9, n=1)
        self.assertEqual(list(summary.return_times), [1])
        self.assertEqual(summary.last_visit, 1)

    def test_first_gap_is_first_return(self):
        summary = orbit(self.pm, x0=0.6, n=500)
        self.assertEqual(summary.return_times[0], self.pm.first_return(0.6))
        self.assertEqual(summary.return_times.sum(), summary.last_visit)

    def test_vectorized_last_visits(self):
        gw = GaspardWang(0.5)
        x0 = [0.72, 0.75, 0.8, 0.95, 0.99]
        last, _ = float_last_visits(gw, 200, x0)
        self.assertEqual(list(last), [orbit(gw, x0=x, n=200).last_visit for x in x0])

    def test_random_start(self):
        summary = orbit(self.pm, n=100, seed=5)
        self.assertTrue(summary.x0 > 0.5)
        self.assertEqual(orbit(self.pm, n=100, seed=5).x0, summary.x0)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            orbit(self.pm, x0=0.9, n=0)
        with self.assertRaises(ConfigError):
            orbit(self.pm, n=10)
        with self.assertRaises(ConfigError):
            orbit(None, x0=0.9, n=10)
        with self.assertRaises(ConfigError):
            orbit(self.pm, x0=0.9, n=10, mode='exact')


class TestEndpoints(TestCase):

    def test_perturbation(self):
        pm = PomeauManneville(2.0)
        with self.assertLogs('pressure-lab.orbits', level='INFO'):
            x, count = perturb_endpoints(pm, [0.5, 0.3])
        self.assertEqual(count, 1)
        self.assertGreater(x[0], 0.5)
        self.assertEqual(x[1], 0.3)

    def test_right_end(self):
        x, count = perturb_endpoints(GaspardWang(0.5), [1.0])
        self.assertEqual(count, 1)
        self.assertLess(x[0], 1.0)

    def test_flat_sample(self):
        flat = FlatMap(2.0, 1.0)
        rng = np.random.Generator(np.random.Philox(7))
        x = sample_inducing_set(flat, 1000, rng)
        self.assertTrue(np.all(flat.in_inducing_set(x)))
        self.assertTrue(np.any(x < 0) and np.any(x > 0))


class TestSkeleton(TestCase):

    def test_geometric_mean(self):
        q = np.power(0.5, np.arange(1, 61))
        rng = np.random.Generator(np.random.Philox(11))
        times = skeleton_return_times(q, 100000, rng, 61)
        self.assertLess(abs(times.mean() - 2.0), 3.0 * np.sqrt(2.0 / 100000))
        self.assertEqual(times.min(), 1)

    def test_overflow(self):
        rng = np.random.Generator(np.random.Philox(1))
        times = skeleton_return_times(np.array([0.25, 0.25]), 10000, rng, 99)
        self.assertEqual(set(np.unique(times)), {1, 2, 99})

    def test_orbit(self):
        model = gaspard_wang_model(0.5, n_max=1000)
        summary = orbit(n=1000, seed=3, mode='skeleton', model=model)
        again = orbit(n=1000, seed=3, mode='skeleton', model=model)
        self.assertEqual(summary.last_visit, summary.return_times.sum())
        self.assertLessEqual(summary.last_visit, 1000)
        self.assertEqual(list(summary.return_times), list(again.return_times))

    def test_needs_long_model(self):
        with self.assertRaises(ConfigError):
            orbit(n=5000, seed=3, mode='skeleton', model=gaspard_wang_model(0.5, n_max=1000))
        with self.assertRaises(ConfigError):
            orbit(n=100, mode='skeleton', model=gaspard_wang_model(0.5, n_max=1000))


class TestFirstReturnSample(TestCase):

    def test_matches_cylinders(self):
        trials = 200000
        tau = pm_first_return_sample(2.0, trials=trials, seed=3)
        table, _ = pm_cylinders(2.0)
        probability = table.lengths() / 0.5
        bins = 20
        expected = np.concatenate([probability[:bins], [1.0 - probability[:bins].sum()]]) * trials
        observed = np.concatenate([np.bincount(tau, minlength=bins + 1)[1:bins + 1], [np.sum(tau > bins)]])
        self.assertGreater(stats.chisquare(observed, expected).pvalue, 0.01)

    def test_cap(self):
        tau = pm_first_return_sample(2.0, trials=20000, seed=1, n_cap=5)
        self.assertEqual(tau.max(), 6)
        self.assertEqual(tau.min(), 1)
