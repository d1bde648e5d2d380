import logging
import math

import numpy as np
from scipy import integrate, special

from lib.common import Constants
from lib.errors import ConfigError, IntegrationFailure

LOGGER = logging.getLogger('pressure-lab.tails')

_LOG_PI = math.log(math.pi)


def log_catalan_over_4k(k):
    """
    log(C_k / 4^k) for real k >= 0, accurate for large k

    C_k / 4^k = 2 B(k + 1/2, 3/2) / pi
    """
    k = np.asarray(k, dtype=float)
    return special.betaln(k + 0.5, 1.5) + math.log(2.0) - _LOG_PI


class TailLaw(object):
    """
    Return-time tail of an induced system.

    Describes the at-least tail G(x) = mu(tau >= x) of the normalized model:

      kind 'power':    G(x) = scale * (c (x+shift)^-beta + sum coef (x+shift)^-exp)
      kind 'catalan':  classes of the Stratmann-Vogt first return map,
                       mass(x) = C_{x-1} (1-lam)^t (lam(1-lam))^(t(x-1)), times scale

    ``band`` is the (C2, C1) pair of the two-sided bound C2 n^-beta <= tail <= C1 n^-beta
    when it has been measured on an enumerated range.
    """

    def __init__(self, beta, c, corrections=(), shift=0.0, kind='power', truncation=None, band=None,
                 lam=None, t=1.0, log_scale=0.0):
        if kind not in ('power', 'catalan'):
            raise ConfigError('Unknown tail kind: ' + str(kind))
        if not 0.0 < beta < 1.0:
            raise ConfigError('Tail exponent beta must lie in (0, 1), got {}'.format(beta))
        if c < 0:
            raise ConfigError('Tail constant must be nonnegative, got {}'.format(c))
        if kind == 'catalan' and (lam is None or not 0.0 < lam <= 0.5):
            raise ConfigError('Catalan tail needs lambda in (0, 1/2], got {}'.format(lam))

        self.beta = float(beta)
        self.c = float(c)
        self.corrections = tuple((float(coef), float(exponent)) for coef, exponent in corrections)
        self.shift = float(shift)
        self.kind = kind
        self.truncation = truncation
        self.band = band
        self.lam = lam
        self.t = float(t)
        self.log_scale = float(log_scale)

    @classmethod
    def catalan(cls, lam, t=1.0, truncation=None):
        # Polynomial part of the tail is n^-1/2 / sqrt(pi) at lam = 1/2, t = 1
        return cls(beta=0.5, c=1.0 / math.sqrt(math.pi), kind='catalan', truncation=truncation, lam=lam, t=t)

    @classmethod
    def from_json(cls, doc):
        return cls(beta=doc['beta'], c=doc['c'], corrections=doc.get('corrections', ()),
                   shift=doc.get('shift', 0.0), kind=doc.get('kind', 'power'), truncation=doc.get('truncation'),
                   band=tuple(doc['band']) if doc.get('band') else None, lam=doc.get('lambda'),
                   t=doc.get('t', 1.0), log_scale=doc.get('log_scale', 0.0))

    def to_json(self):
        doc = {'kind': self.kind, 'beta': self.beta, 'c': self.c, 'shift': self.shift,
               'corrections': [list(pair) for pair in self.corrections], 'log_scale': self.log_scale}
        if self.truncation is not None:
            doc['truncation'] = self.truncation
        if self.band is not None:
            doc['band'] = list(self.band)
        if self.kind == 'catalan':
            doc['lambda'] = self.lam
            doc['t'] = self.t
        return doc

    def scaled(self, log_factor):
        return TailLaw(self.beta, self.c, self.corrections, self.shift, self.kind, self.truncation, self.band,
                       self.lam, self.t, self.log_scale + log_factor)

    def with_band(self, band):
        return TailLaw(self.beta, self.c, self.corrections, self.shift, self.kind, self.truncation, band,
                       self.lam, self.t, self.log_scale)

    @property
    def growth_rate(self):
        """
        Exponential growth rate of the class masses
        """
        if self.kind == 'catalan':
            return Constants.LOG4 + self.t * math.log(self.lam * (1.0 - self.lam))
        return 0.0

    @property
    def power_exponent(self):
        """
        Polynomial exponent of the class masses, mass(x) ~ x^power_exponent * e^(growth x)
        """
        if self.kind == 'catalan':
            return -1.5
        return -1.0 - self.beta

    def has_closed_tail(self):
        return self.kind == 'power' or (self.lam == 0.5 and self.t == 1.0)

    def _power_terms(self):
        terms = [(self.c, self.beta)] if self.c > 0 else []
        return terms + list(self.corrections)

    def log_mass(self, x):
        """
        Log of the class mass at (real) inducing time x >= 1

        :param x: float or array
        :return: log(G(x) - G(x + 1)) for 'power', log of the Catalan class mass for 'catalan'
        """
        x = np.asarray(x, dtype=float)
        if self.kind == 'catalan':
            k = x - 1.0
            return (log_catalan_over_4k(k) + k * self.growth_rate + self.t * math.log(1.0 - self.lam)
                    + self.log_scale)

        z = x + self.shift
        total = np.zeros_like(z)
        for coef, exponent in self._power_terms():
            # z^-e - (z+1)^-e without cancellation
            total = total + coef * np.power(z, -exponent) * -np.expm1(-exponent * np.log1p(1.0 / z))
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.log(total) + self.log_scale

    def at_least(self, x):
        """
        G(x) = mu(tau >= x), closed form when available
        """
        x = np.asarray(x, dtype=float)
        if self.kind == 'catalan':
            if not self.has_closed_tail():
                raise IntegrationFailure('No closed-form tail for lambda={}, t={}'.format(self.lam, self.t))
            # mu(tau > m) = binom(2m, m) / 4^m = B(m + 1/2, 1/2) / pi with m = x - 1
            return np.exp(special.betaln(x - 0.5, 0.5) - _LOG_PI + self.log_scale)
        z = x + self.shift
        total = np.zeros_like(z)
        for coef, exponent in self._power_terms():
            total = total + coef * np.power(z, -exponent)
        return total * math.exp(self.log_scale)

    def greater_than(self, n):
        """
        mu(tau > n) from the closed form
        """
        return self.at_least(np.asarray(n, dtype=float) + 1.0)

    def __str__(self):
        text = 'TailLaw({}, beta={:.6g}, c={:.6g}'.format(self.kind, self.beta, self.c)
        if self.corrections:
            text += ', corrections=' + str(self.corrections)
        if self.shift:
            text += ', shift={:.6g}'.format(self.shift)
        if self.band is not None:
            text += ', band=[{:.6g}, {:.6g}]'.format(*self.band)
        return text + ')'


def _interval_integral(x, c, beta):
    # integral of c t^-beta over [x - 1, x]
    x = np.asarray(x, dtype=float)
    return c * np.power(x, 1.0 - beta) * -np.expm1((1.0 - beta) * np.log1p(-1.0 / x)) / (1.0 - beta)


def ch_constant(tail, k_max=20000):
    """
    c_H = integral over [0, inf) of G(ceil(x)) - c x^-beta

    The integer intervals [k-1, k) with k >= 2 are summed in closed form, [0, 1) goes
    through adaptive quadrature and the sum beyond k_max is closed by Euler-Maclaurin: quadrature
    over CH_QUAD_SPAN in x, then the leading x^(-beta-1) term of the summand in closed form.

    :param tail: TailLaw
    :param k_max: number of integer intervals summed explicitly
    :return: c_H
    """
    for coef, exponent in tail.corrections:
        if coef != 0.0 and exponent <= 1.0:
            raise IntegrationFailure('Correction x^-{} is not integrable at infinity'.format(exponent))
    if tail.kind == 'catalan' and not tail.has_closed_tail():
        raise IntegrationFailure('c_H needs the closed-form tail (lambda = 1/2, t = 1)')

    scale = math.exp(tail.log_scale)
    c = tail.c * scale
    beta = tail.beta
    g1 = float(tail.at_least(1.0))

    head, head_err = integrate.quad(lambda x: g1 - c * x ** -beta if x > 0 else g1, 0.0, 1.0,
                                    epsabs=1e-13, epsrel=1e-13, limit=200)
    if head_err > 1e-9:
        raise IntegrationFailure('Quadrature on [0, 1) did not converge (error {:.2e})'.format(head_err))

    k = np.arange(2, k_max + 1, dtype=float)
    body = math.fsum(tail.at_least(k) - _interval_integral(k, c, beta))

    def h(x):
        return float(tail.at_least(x) - _interval_integral(x, c, beta))

    start = k_max + 1.0
    span = math.log(Constants.CH_QUAD_SPAN)
    rest, rest_err = integrate.quad(lambda y: h(start * math.exp(y)) * start * math.exp(y), 0.0, span,
                                    epsabs=1e-15, epsrel=1e-12, limit=400)
    # beyond the quadrature window: corrections in closed form, h(x) - corrections ~ a x^(-beta-1)
    far = start * Constants.CH_QUAD_SPAN
    z = far + tail.shift
    corrections = [coef * z ** -exponent for coef, exponent in tail.corrections]
    rest += (h(far) - scale * math.fsum(corrections)) * far / beta
    rest += scale * math.fsum(term * z / (exponent - 1.0)
                              for term, (_, exponent) in zip(corrections, tail.corrections))
    step = 0.5
    derivative = (h(start + step) - h(start - step)) / (2.0 * step)
    rest += 0.5 * h(start) - derivative / 12.0
    if rest_err > 1e-9:
        raise IntegrationFailure('Euler-Maclaurin remainder did not converge (error {:.2e})'.format(rest_err))

    value = head + body + rest
    LOGGER.debug('c_H = %.15g (head %.3e, body %.3e, remainder %.3e)', value, head, body, rest)
    return value
