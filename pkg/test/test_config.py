import os
import tempfile
from unittest import TestCase

import numpy as np

from lib.config import ExperimentConfig, parse_grid, parse_list
from lib.errors import ConfigError


class TestGrids(TestCase):

    def test_geometric(self):
        grid = parse_grid('1e-5:1e-2:4')
        self.assertEqual(grid.size, 4)
        self.assertAlmostEqual(grid[1], 1e-4, places=15)
        self.assertAlmostEqual(grid[-1], 1e-2, places=15)

    def test_linear(self):
        grid = parse_grid('lin:0.9:0.99:10')
        self.assertTrue(np.allclose(np.diff(grid), 0.01))

    def test_list(self):
        self.assertEqual(list(parse_grid([0.1, 0.2, 0.3])), [0.1, 0.2, 0.3])
        self.assertEqual(parse_list('0.4, 0.5'), [0.4, 0.5])

    def test_malformed(self):
        for spec in ('1:2', '0:1:5', '2:1:5', 'a:b:c', '1e-3:1e-2:1'):
            with self.assertRaises(ConfigError):
                parse_grid(spec)
        with self.assertRaises(ConfigError):
            parse_list('0.4,x')


class TestExperimentConfig(TestCase):

    def test_unknown_subcommand(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig('fib-chaos')

    def test_update(self):
        config = ExperimentConfig('sv-pressure', {'n-max': 10, 'lam': 0.3, 't': None})
        self.assertEqual(config.integer('n_max'), 10)
        self.assertEqual(config.number('lambda'), 0.3)
        self.assertEqual(config.number('t', 1.0), 1.0)
        with self.assertRaises(ConfigError):
            config.update({'temperature': 2.0})

    def test_missing_number(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig('relation').number('beta')

    def test_validate(self):
        bad = ({'beta': 1.5}, {'lambda': 0.7}, {'trials': 10}, {'n_max': 10.5}, {'psi': 'cubic'},
               {'mode': 'exact'}, {'s_grid': '1:2'}, {'gamma': 1.5})
        for values in bad:
            with self.assertRaises(ConfigError):
                ExperimentConfig('relation', values).validate()
        ExperimentConfig('relation', {'beta': 0.5, 's_grid': '1e-5:1e-2:25'}).validate()

    def test_potential(self):
        psi = ExperimentConfig('pi-scaling', {'psi': 'polynomial', 'gamma': 0.5, 'C': 2.0}).potential()
        self.assertEqual(psi.kind, 'polynomial')
        self.assertEqual(psi.gamma, 0.5)
        self.assertEqual(ExperimentConfig('relation').potential().kind, 'log')

    def test_to_json(self):
        doc = ExperimentConfig('arcsine', {'beta': 0.5, 'threads': 4, 'out': '/tmp'}).to_json()
        self.assertEqual(doc['subcommand'], 'arcsine')
        self.assertEqual(doc['beta'], 0.5)
        self.assertNotIn('threads', doc)
        self.assertNotIn('out', doc)


class TestToml(TestCase):

    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.dir.cleanup()

    def write(self, text):
        path = os.path.join(self.dir.name, 'lab.toml')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_section_overrides(self):
        path = self.write('beta = 0.5\nseed = 1\n\n[relation]\nbeta = 0.75\npsi = "polynomial"\n')
        with self.assertLogs('pressure-lab.config', level='INFO'):
            config = ExperimentConfig.from_toml('relation', path, {'seed': 3})
        self.assertEqual(config.number('beta'), 0.75)
        self.assertEqual(config.get('psi'), 'polynomial')
        self.assertEqual(config.integer('seed'), 3)

    def test_other_section_ignored(self):
        path = self.write('beta = 0.5\n\n[renewal]\nbeta = 0.75\n')
        self.assertEqual(ExperimentConfig.from_toml('relation', path).number('beta'), 0.5)

    def test_unknown_key(self):
        path = self.write('temperature = 2.0\n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_toml('relation', path)

    def test_malformed(self):
        path = self.write('beta = \n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_toml('relation', path)

    def test_missing(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_toml('relation', os.path.join(self.dir.name, 'absent.toml'))
