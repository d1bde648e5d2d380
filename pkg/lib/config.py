import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from lib.errors import ConfigError
from lib.fitting import geometric_grid
from lib.potential import PotentialFamily

LOGGER = logging.getLogger('pressure-lab.config')

SUBCOMMANDS = ('catalan-check', 'sv-tails', 'sv-pressure', 'fib-tails', 'fib-pressure', 'fib-marginal', 'pm-model',
               'flat-model', 'eigen-asym', 'relation', 'pi-scaling', 'renewal', 'correlation', 'arcsine',
               'etau-scaling', 'measure-distance')

PSI_KINDS = ('log', 'polynomial', 'constant')

# key -> default; None means "use the subcommand default"
DEFAULTS = {
    'alpha': None,
    'b': None,
    'lambda': None,
    't': None,
    't_grid': None,
    'beta': None,
    'betas': None,
    'lambdas': None,
    'gammas': None,
    'tail_kind': 'exact_power',
    'psi': 'log',
    'kappa': 1.0,
    'c_prime': 0.0,
    'C': 1.0,
    'gamma': 1.0,
    'n_max': None,
    'N': 400,
    'n': None,
    's': 0.0,
    's_grid': None,
    'u_grid': None,
    'trials': 100000,
    'seed': 0,
    'threads': None,
    'mode': 'skeleton',
    'out': '.',
}


def parse_grid(spec):
    """
    'start:stop:count' geometric grid, 'lin:start:stop:count' linear grid, or a list of values
    """
    if isinstance(spec, (list, tuple)):
        try:
            return np.array([float(value) for value in spec])
        except (TypeError, ValueError):
            raise ConfigError('Grid list must hold numbers: {}'.format(spec))
    text = str(spec).strip()
    linear = text.startswith('lin:')
    if linear:
        text = text[4:]
    parts = text.split(':')
    if len(parts) != 3:
        raise ConfigError('Grid spec must be start:stop:count, got {!r}'.format(spec))
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError('Grid spec must be start:stop:count, got {!r}'.format(spec))
    if count < 2 or not start < stop:
        raise ConfigError('Grid spec needs start < stop and count >= 2, got {!r}'.format(spec))
    if linear:
        return np.linspace(start, stop, count)
    if start <= 0:
        raise ConfigError('Geometric grid needs start > 0, got {!r}'.format(spec))
    return geometric_grid(start, stop, count)


def parse_list(spec):
    if isinstance(spec, (list, tuple)):
        values = spec
    else:
        values = str(spec).split(',')
    try:
        return [float(value) for value in values]
    except ValueError:
        raise ConfigError('Expected a comma separated list of numbers, got {!r}'.format(spec))


class ExperimentConfig(object):
    """
    Parameters of one subcommand run: TOML file values overridden by command-line flags
    """

    def __init__(self, subcommand, values=None):
        if subcommand not in SUBCOMMANDS:
            raise ConfigError('Unknown subcommand: ' + str(subcommand))
        self.subcommand = subcommand
        self.values = dict(DEFAULTS)
        if values:
            self.update(values)

    @classmethod
    def from_toml(cls, subcommand, path, overrides=None):
        """
        Read a TOML file; a [subcommand] table overrides the top-level keys
        """
        try:
            with open(path, 'rb') as f:
                doc = tomllib.load(f)
        except OSError as e:
            raise ConfigError('Cannot read config {}: {}'.format(path, e))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError('Malformed config {}: {}'.format(path, e))
        LOGGER.info('Read %s', path)
        values = {k: v for k, v in doc.items() if not isinstance(v, dict)}
        section = doc.get(subcommand, {})
        if not isinstance(section, dict):
            raise ConfigError('[{}] must be a table'.format(subcommand))
        values.update(section)
        config = cls(subcommand, values)
        if overrides:
            config.update(overrides)
        return config

    def update(self, values):
        for key, value in values.items():
            key = key.replace('-', '_')
            if key == 'lam':
                key = 'lambda'
            if key not in DEFAULTS:
                raise ConfigError('Unknown configuration key: ' + key)
            if value is not None:
                self.values[key] = value

    def get(self, key, default=None):
        value = self.values.get(key)
        return default if value is None else value

    def number(self, key, default=None):
        value = self.get(key, default)
        if value is None:
            raise ConfigError('{} needs --{}'.format(self.subcommand, key.replace('_', '-')))
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError('{} must be a number, got {!r}'.format(key, value))

    def integer(self, key, default=None):
        value = self.number(key, default)
        if value != math.floor(value):
            raise ConfigError('{} must be an integer, got {}'.format(key, value))
        return int(value)

    def grid(self, key, default):
        return parse_grid(self.get(key, default))

    def numbers(self, key, default):
        return parse_list(self.get(key, default))

    def potential(self):
        kind = self.get('psi')
        if kind == 'log':
            return PotentialFamily.log(self.number('kappa'), self.number('c_prime'))
        if kind == 'polynomial':
            return PotentialFamily.polynomial(self.number('gamma'), self.number('C'), self.number('c_prime'))
        if kind == 'constant':
            return PotentialFamily.constant(self.number('c_prime'))
        raise ConfigError('Unknown potential kind {!r}, expected one of {}'.format(kind, PSI_KINDS))

    def validate(self):
        """
        Range-check every numeric parameter that is set
        """
        v = self.values
        checks = (
            ('alpha', lambda x: x > 0, 'alpha > 0'),
            ('b', lambda x: x > 0, 'b > 0'),
            ('lambda', lambda x: 0 < x <= 0.5, 'lambda in (0, 1/2]'),
            ('t', lambda x: x > 0, 't > 0'),
            ('beta', lambda x: 0 < x < 1, 'beta in (0, 1)'),
            ('kappa', math.isfinite, 'finite kappa'),
            ('C', lambda x: x > 0, 'C > 0'),
            ('gamma', lambda x: 0 < x <= 1, 'gamma in (0, 1]'),
            ('n_max', lambda x: x >= 1, 'n_max >= 1'),
            ('N', lambda x: x >= 2, 'N >= 2'),
            ('n', lambda x: x >= 1, 'n >= 1'),
            ('s', lambda x: x >= 0, 's >= 0'),
            ('trials', lambda x: x >= 1000, 'trials >= 1000'),
            ('threads', lambda x: x >= 1, 'threads >= 1'),
        )
        for key, check, text in checks:
            if v.get(key) is None:
                continue
            if not check(self.number(key)):
                raise ConfigError('{} must satisfy {}, got {}'.format(key, text, v[key]))
        for key in ('n_max', 'N', 'n', 'trials', 'seed', 'threads'):
            if v.get(key) is not None:
                self.integer(key)
        for key in ('s_grid', 'u_grid', 't_grid'):
            if v.get(key) is not None:
                parse_grid(v[key])
        for key in ('betas', 'lambdas', 'gammas'):
            if v.get(key) is not None:
                parse_list(v[key])
        if v['psi'] not in PSI_KINDS:
            raise ConfigError('Unknown potential kind {!r}, expected one of {}'.format(v['psi'], PSI_KINDS))
        if v['mode'] not in ('skeleton', 'orbit'):
            raise ConfigError('mode must be skeleton or orbit, got {!r}'.format(v['mode']))
        if v['tail_kind'] not in ('exact_power', 'with_corrections'):
            raise ConfigError('tail_kind must be exact_power or with_corrections, got {!r}'.format(v['tail_kind']))
        return self

    def to_json(self):
        doc = {'subcommand': self.subcommand}
        for key, value in sorted(self.values.items()):
            if value is not None and key not in ('out', 'threads'):
                doc[key] = value
        return doc

    def __str__(self):
        return 'ExperimentConfig({}, {})'.format(self.subcommand, self.to_json())
