import math
from unittest import TestCase

import mpmath
import numpy as np

from lib.combinatorics import sv_model
from lib.errors import ConfigError, DivergentModel, DivergentSeries
from lib.induced_model import (InducedModel, abramov_residual, expected_tau, gibbs_weights, measure_distance,
                               model_from_json, model_to_json, normalize, normalizer, tail, tail_band)
from lib.map_families import gaspard_wang_model
from lib.potential import PotentialFamily
from lib.pressure import solve_u0
from lib.tails import TailLaw


def power_model(beta, n_max=20000, with_law=True):
    n = np.arange(1, n_max + 1, dtype=float)
    log_mass = np.log(n ** -beta - (n + 1) ** -beta)
    law = TailLaw(beta, 1.0, truncation=n_max) if with_law else None
    return InducedModel(log_mass, tail_law=law, name='power')


def geometric_model(count=60):
    n = np.arange(1, count + 1, dtype=float)
    return normalize(InducedModel(-n * math.log(2.0), finite=True, name='geometric'))


class TestNormalize(TestCase):

    def test_exact_power_is_identity(self):
        model = power_model(0.5)
        result = normalize(model)
        self.assertTrue(result.normalized)
        self.assertLess(np.max(np.abs(result.log_mass - model.log_mass)), 1e-12)

    def test_fitted_extension(self):
        model = power_model(1.5, n_max=2000, with_law=False)
        result = normalize(model)
        self.assertLess(np.max(np.abs(result.log_mass - model.log_mass)), 1e-9)

    def test_sv_half(self):
        model = sv_model(0.5, n_max=2000)
        masses = np.exp(model.log_mass[:4])
        for value, expected in zip(masses, (0.5, 0.125, 0.0625, 5.0 / 128.0)):
            self.assertAlmostEqual(value, expected, places=12)

    def test_divergent(self):
        with self.assertRaises(DivergentModel):
            normalize(InducedModel(np.zeros(1000)))

    def test_empty(self):
        with self.assertRaises(ConfigError):
            InducedModel([])


class TestTail(TestCase):

    def setUp(self):
        self.model = normalize(power_model(0.5))

    def test_first_values(self):
        self.assertAlmostEqual(tail(self.model, 0), 1.0, places=12)
        self.assertAlmostEqual(tail(self.model, 1), 2.0 ** -0.5, places=12)

    def test_prescribed(self):
        self.assertAlmostEqual(tail(self.model, 99), 0.1, places=12)
        self.assertAlmostEqual(tail(self.model, 10 ** 6), (10 ** 6 + 1) ** -0.5, places=14)

    def test_nonincreasing(self):
        values = [tail(self.model, n) for n in range(0, 30000, 97)]
        self.assertTrue(all(a >= b for a, b in zip(values[:-1], values[1:])))

    def test_sv_constant(self):
        model = sv_model(0.5, n_max=2000)
        self.assertAlmostEqual(tail(model, 10 ** 6) * 1000.0 * math.sqrt(math.pi), 1.0, places=6)

    def test_negative_index(self):
        with self.assertRaises(ConfigError):
            tail(self.model, -1)

    def test_band(self):
        c2, c1 = tail_band(self.model, 10, 10000)
        self.assertLessEqual(c2, c1)
        self.assertGreater(c2, 0.95)
        self.assertLessEqual(c1, 1.0)


class TestGibbsWeights(TestCase):

    def test_conformal(self):
        model = normalize(power_model(0.5))
        weights = gibbs_weights(model, 0.0, 0.0)
        self.assertAlmostEqual(weights.normalizer, 1.0, places=12)
        self.assertAlmostEqual(math.fsum(weights.q) + weights.tail_mass, 1.0, places=12)
        self.assertLess(np.max(np.abs(weights.q - np.exp(model.log_mass))), 1e-15)

    def test_eigenvalue_oracle(self):
        model = normalize(power_model(0.5))
        u = 1e-4
        with mpmath.workdps(40):
            expected = 1 - mpmath.expm1(u) * mpmath.polylog(0.5, mpmath.exp(-u))
        self.assertAlmostEqual(gibbs_weights(model, u, 0.0).normalizer, float(expected), places=11)

    def test_below_abscissa(self):
        model = sv_model(0.5, t=0.9, n_max=2000)
        with self.assertRaises(DivergentSeries) as context:
            gibbs_weights(model, 0.1, 0.0)
        self.assertAlmostEqual(context.exception.abscissa, 0.1 * math.log(4.0), places=12)


class TestExpectedTau(TestCase):

    def test_geometric(self):
        self.assertAlmostEqual(expected_tau(geometric_model(), 0.0, 0.0), 2.0, places=12)

    def test_infinite_mean(self):
        self.assertEqual(expected_tau(normalize(power_model(0.5)), 0.0, 0.0), math.inf)

    def test_damped(self):
        model = normalize(power_model(0.5)).with_potential(PotentialFamily.polynomial(1.0))
        value = expected_tau(model, 0.0, 1e-3)
        self.assertTrue(math.isfinite(value))
        self.assertGreater(value, 1.0)


class TestMeasureDistance(TestCase):

    def test_zero(self):
        model = normalize(power_model(0.5)).with_potential(PotentialFamily.log())
        self.assertEqual(measure_distance(model, 0.0), 0.0)

    def test_monotone(self):
        model = gaspard_wang_model(0.75, n_max=20000).with_potential(PotentialFamily.polynomial(0.75))
        values = [measure_distance(model, s) for s in np.geomspace(1e-5, 1e-2, 8)]
        self.assertTrue(all(a < b for a, b in zip(values[:-1], values[1:])))

    def test_needs_normalized(self):
        with self.assertRaises(ConfigError):
            measure_distance(power_model(0.5), 0.1)


class TestAbramov(TestCase):

    def test_conformal(self):
        model = normalize(power_model(0.5))
        self.assertLess(abs(abramov_residual(model, 0.0, 0.0)), 1e-12)

    def test_at_root(self):
        model = normalize(power_model(0.5)).with_potential(PotentialFamily.log())
        result = solve_u0(model, 1e-3)
        self.assertLess(abs(abramov_residual(model, 1e-3, result.u0)), 1e-10)
        self.assertLess(abramov_residual(model, 1e-3, result.u0 + 0.1), 0.0)


class TestSerialization(TestCase):

    def test_counts(self):
        model = sv_model(0.5, n_max=400)
        doc = model_to_json(model)
        self.assertEqual(doc['classes'][3]['count'], '5')
        self.assertIsInstance(doc['classes'][-1]['count'], dict)
        again = model_from_json(doc)
        self.assertLess(np.max(np.abs(again.log_mass - model.log_mass)), 1e-12)
        self.assertAlmostEqual(normalizer(again, 0.0, 0.0), 1.0, places=12)
