import importlib.util
import json
import os
import tempfile
from unittest import TestCase, mock

import lib.experiments
from lib.common import Constants
from lib.errors import DivergentSeries

SCRIPT = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'pressure-lab.py')


def load_script():
    spec = importlib.util.spec_from_file_location('pressure_lab', SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


class TestCommandLine(TestCase):

    @classmethod
    def setUpClass(cls):
        cls.cli = load_script()

    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.out = self.dir.name

    def tearDown(self):
        self.dir.cleanup()

    def summary(self, name):
        with open(os.path.join(self.out, name + '.json')) as f:
            return json.load(f)

    def test_flat_options(self):
        parser = self.cli.build_parser()
        for name in lib.experiments.EXPERIMENTS:
            args = parser.parse_args([name, '--lambda', '0.4', '--beta', '0.75'])
            self.assertEqual(args.subcommand, name)
            self.assertEqual(args.beta, 0.75)
        with self.assertRaises(SystemExit):
            parser.parse_args(['no-such-experiment'])

    def test_catalan_check(self):
        code = self.cli.main(['catalan-check', '--n-max', '10', '--out', self.out])
        self.assertEqual(code, Constants.EXIT_OK)
        doc = self.summary('catalan-check')
        self.assertTrue(doc['all_equal'])
        self.assertTrue(os.path.exists(os.path.join(self.out, 'catalan-check_counts.csv')))

    def test_sv_pressure(self):
        code = self.cli.main(['sv-pressure', '--lambda', '0.5', '--t', '0.9', '--n-max', '2000', '--out', self.out])
        self.assertEqual(code, Constants.EXIT_OK)
        doc = self.summary('sv-pressure')
        self.assertEqual(doc['kind'], 'Abscissa')
        self.assertAlmostEqual(doc['u0'], 0.1386294361, places=9)
        self.assertTrue(doc['pass'])
        self.assertEqual(doc['config']['lambda'], 0.5)

    def test_config_file(self):
        path = os.path.join(self.out, 'lab.toml')
        with open(path, 'w') as f:
            f.write('[sv-pressure]\nlambda = 0.5\nt = 0.5\nn_max = 2000\n')
        code = self.cli.main(['sv-pressure', '--config', path, '--out', self.out])
        self.assertEqual(code, Constants.EXIT_OK)
        self.assertAlmostEqual(self.summary('sv-pressure')['u0'], 0.5 * Constants.LOG4, places=6)

    def test_config_error(self):
        code = self.cli.main(['relation', '--beta', '1.5', '--out', self.out])
        self.assertEqual(code, Constants.EXIT_CONFIG)
        doc = self.summary('relation')
        self.assertEqual(doc['error'], 'ConfigError')
        self.assertEqual(doc['exit_code'], Constants.EXIT_CONFIG)

    def test_numerical_failure(self):
        def diverge(config):
            raise DivergentSeries('series diverges', 0.25)

        with mock.patch.dict(lib.experiments.EXPERIMENTS, {'renewal': diverge}):
            code = self.cli.main(['renewal', '--out', self.out])
        self.assertEqual(code, Constants.EXIT_NUMERICAL)
        doc = self.summary('renewal')
        self.assertEqual(doc['error'], 'DivergentSeries')
        self.assertEqual(doc['abscissa'], 0.25)

    def test_unknown_subcommand(self):
        with self.assertRaises(SystemExit):
            self.cli.main(['fib-chaos'])
