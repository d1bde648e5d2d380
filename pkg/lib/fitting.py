import logging
import math

import numpy as np
from scipy import stats

from lib.errors import ConfigError

LOGGER = logging.getLogger('pressure-lab.fitting')


class FitReport(object):
    """
    Log-log regression y ~ constant * x^exponent

    Extra diagnostics (residual curves, corrected fits, ...) ride along in
    ``extra`` and are serialized with the report.
    """

    def __init__(self, exponent, constant, stderr_exponent, stderr_constant, r2, window, n_points, extra=None):
        self.exponent = exponent
        self.constant = constant
        self.stderr_exponent = stderr_exponent
        self.stderr_constant = stderr_constant
        self.r2 = r2
        self.window = window
        self.n_points = n_points
        self.extra = extra if extra is not None else {}

    def to_json(self):
        doc = {
            'exponent': self.exponent,
            'constant': self.constant,
            'stderr_exponent': self.stderr_exponent,
            'stderr_constant': self.stderr_constant,
            'r2': self.r2,
            'window': list(self.window),
            'n_points': self.n_points,
        }
        if self.extra:
            doc['extra'] = self.extra
        return doc

    def __str__(self):
        return 'exponent {:.6f} (+/- {:.2e}), constant {:.6g}, r2 {:.8f}, window [{:.3g}, {:.3g}], {} points'.format(
            self.exponent, self.stderr_exponent, self.constant, self.r2, self.window[0], self.window[1],
            self.n_points)


def fit_power_law(x, y, min_decades=1.0):
    """
    Least-squares fit of log|y| against log x

    :param x: positive abscissae
    :param y: nonzero ordinates, the sign is dropped
    :param min_decades: refuse windows narrower than this many decades
    :return: FitReport
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(keep) < 3:
        raise ConfigError('Fit needs at least 3 usable points, got {}'.format(int(np.count_nonzero(keep))))
    x, y = x[keep], y[keep]

    decades = math.log10(x.max() / x.min())
    if decades < min_decades:
        raise ConfigError('Fit window spans {:.2f} decades, need at least {}'.format(decades, min_decades))

    result = stats.linregress(np.log(x), np.log(y))
    constant = math.exp(result.intercept)
    report = FitReport(exponent=float(result.slope),
                       constant=constant,
                       stderr_exponent=float(result.stderr),
                       stderr_constant=constant * float(result.intercept_stderr),
                       r2=float(result.rvalue ** 2),
                       window=(float(x.min()), float(x.max())),
                       n_points=int(x.size))
    LOGGER.debug('Fit: %s', report)
    return report


def geometric_grid(start, stop, count):
    if start <= 0 or stop <= start or count < 2:
        raise ConfigError('Invalid geometric grid {}:{}:{}'.format(start, stop, count))
    return np.geomspace(start, stop, int(count))
