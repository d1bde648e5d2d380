import json
import math
import os
import tempfile
from unittest import TestCase

import numpy as np

from lib.fitting import fit_power_law
from lib.report import dumps, plain, write_csv, write_report


class TestPlain(TestCase):

    def test_non_finite(self):
        self.assertEqual(plain(math.inf), 'inf')
        self.assertEqual(plain(np.float64(-np.inf)), '-inf')
        self.assertEqual(plain(float('nan')), 'nan')

    def test_numpy(self):
        doc = plain({'a': np.arange(3), 'b': np.bool_(True), 'c': (np.int64(2), np.float32(0.5))})
        self.assertEqual(doc, {'a': [0, 1, 2], 'b': True, 'c': [2, 0.5]})
        self.assertIsInstance(doc['c'][0], int)

    def test_to_json(self):
        x = np.array([1.0, 10.0, 100.0])
        doc = json.loads(dumps({'fit': fit_power_law(x, x ** 2)}))
        self.assertAlmostEqual(doc['fit']['exponent'], 2.0, places=12)


class TestFiles(TestCase):

    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.dir.cleanup()

    def test_csv_precision(self):
        path = os.path.join(self.dir.name, 'curve.csv')
        with self.assertLogs('pressure-lab.report', level='INFO'):
            write_csv(path, ('n', 'value'), [(1, 0.1), (2, np.float64(1.0 / 3.0))])
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], 'n,value')
        self.assertEqual(lines[1], '1,0.10000000000000001')
        self.assertEqual(float(lines[2].split(',')[1]), 1.0 / 3.0)

    def test_report(self):
        out = os.path.join(self.dir.name, 'run')
        written = write_report(out, 'renewal', {'u': math.inf}, {'renewal': (('n', 'u_n'), [(1, 0.5)])})
        self.assertEqual([os.path.basename(p) for p in written], ['renewal_renewal.csv', 'renewal.json'])
        with open(written[-1]) as f:
            self.assertEqual(json.load(f), {'u': 'inf'})
