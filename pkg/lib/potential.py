import math

import numpy as np

from lib.errors import ConfigError


class PotentialFamily(object):
    """
    Induced perturbation psi_bar as a function of the inducing time

      L1_log:      psi_bar(n) = kappa log n + c_prime
      polynomial:  psi_bar(n) = c_prime - C n^gamma,   gamma in (0, 1], C > 0
      custom:      psi_bar(n) = table[n - 1], last value held beyond the table
    """

    KINDS = ('L1_log', 'polynomial', 'custom')

    def __init__(self, kind, kappa=1.0, c_prime=0.0, C=1.0, gamma=1.0, table=None):
        if kind not in PotentialFamily.KINDS:
            raise ConfigError('Unknown potential kind: ' + str(kind))
        if kind == 'polynomial':
            if not 0.0 < gamma <= 1.0:
                raise ConfigError('Polynomial potential needs gamma in (0, 1], got {}'.format(gamma))
            if C <= 0:
                raise ConfigError('Polynomial potential needs C > 0, got {}'.format(C))
        if kind == 'custom':
            if table is None or len(table) == 0:
                raise ConfigError('Custom potential needs a nonempty table')
            table = np.asarray(table, dtype=float)

        self.kind = kind
        self.kappa = float(kappa)
        self.c_prime = float(c_prime)
        self.C = float(C)
        self.gamma = float(gamma)
        self.table = table

    @classmethod
    def log(cls, kappa=1.0, c_prime=0.0):
        return cls('L1_log', kappa=kappa, c_prime=c_prime)

    @classmethod
    def constant(cls, value):
        return cls('L1_log', kappa=0.0, c_prime=value)

    @classmethod
    def polynomial(cls, gamma, C=1.0, c_prime=0.0):
        return cls('polynomial', C=C, gamma=gamma, c_prime=c_prime)

    @classmethod
    def from_json(cls, doc):
        if doc is None:
            return None
        return cls(doc['kind'], kappa=doc.get('kappa', 1.0), c_prime=doc.get('c_prime', 0.0), C=doc.get('C', 1.0),
                   gamma=doc.get('gamma', 1.0), table=doc.get('table'))

    def to_json(self):
        doc = {'kind': self.kind}
        if self.kind == 'L1_log':
            doc.update(kappa=self.kappa, c_prime=self.c_prime)
        elif self.kind == 'polynomial':
            doc.update(C=self.C, gamma=self.gamma, c_prime=self.c_prime)
        else:
            doc['table'] = [float(v) for v in self.table]
        return doc

    def values(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == 'L1_log':
            if self.kappa == 0.0:
                return np.full_like(n, self.c_prime)
            return self.kappa * np.log(n) + self.c_prime
        if self.kind == 'polynomial':
            return self.c_prime - self.C * np.power(n, self.gamma)
        index = np.clip(np.ceil(n).astype(np.int64), 1, len(self.table)) - 1
        return self.table[index]

    @property
    def linear_rate(self):
        """
        lim psi_bar(n) / n, shifts the convergence abscissa by s * linear_rate
        """
        if self.kind == 'polynomial' and self.gamma == 1.0:
            return -self.C
        return 0.0

    @property
    def log_rate(self):
        """
        Coefficient of log n in psi_bar, shifts the polynomial exponent of the class masses
        """
        return self.kappa if self.kind == 'L1_log' else 0.0

    def damping_scale(self, s):
        """
        Inducing time beyond which exp(s psi_bar) cuts the series off (stretched-exponential kinds)
        """
        if self.kind == 'polynomial' and s > 0 and self.gamma < 1.0:
            return (50.0 / (s * self.C)) ** (1.0 / self.gamma)
        return math.inf

    def __str__(self):
        if self.kind == 'L1_log':
            return 'psi_bar(n) = {:g} log n + {:g}'.format(self.kappa, self.c_prime)
        if self.kind == 'polynomial':
            return 'psi_bar(n) = {:g} - {:g} n^{:g}'.format(self.c_prime, self.C, self.gamma)
        return 'psi_bar(n) = table[{}]'.format(len(self.table))
