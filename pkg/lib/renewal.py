import logging
import math

import numpy as np
from scipy import signal, special, stats

from lib.errors import ConfigError, NumericalFailure
from lib.induced_model import gibbs_weights
from lib.labtypes import FloatArray, Probability
from lib.pressure import ROOT, solve_u0

LOGGER = logging.getLogger('pressure-lab.renewal')


class RenewalSequence(object):
    """
    u_0 = 1, u_n = sum_{j=1}^n q_j u_{n-j}

    q[j - 1] is the probability of a return block of length j.
    """

    def __init__(self, q, u, tail_bound=0.0, method='direct'):
        self.q = q
        self.u = u
        self.tail_bound = tail_bound
        self.method = method

    @property
    def n_max(self):
        return len(self.u) - 1

    def recursion_defect(self):
        """
        max_n |u_n - sum q_j u_{n-j}|, recomputed independently of the construction
        """
        n_max = self.n_max
        q = np.zeros(n_max)
        k = min(n_max, len(self.q))
        q[:k] = self.q[:k]
        rebuilt = signal.fftconvolve(q, self.u[:n_max])[:n_max]
        return float(np.max(np.abs(self.u[1:] - rebuilt))) if n_max else 0.0

    def scaled(self, beta):
        """
        n^(1 - beta) u_n for n >= 1
        """
        n = np.arange(1, self.n_max + 1, dtype=float)
        return n ** (1.0 - beta) * self.u[1:]

    def rows(self, beta):
        n = np.arange(1, self.n_max + 1)
        return zip(n, self.u[1:], self.scaled(beta))

    def __str__(self):
        return 'RenewalSequence(n_max={}, method={}, u_n_max={:.6g})'.format(self.n_max, self.method, self.u[-1])


def _padded(q, n_max: int) -> FloatArray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ConfigError('Return law must be a nonempty vector')
    if np.any(q < 0):
        raise ConfigError('Return law has negative entries')
    if math.fsum(q) > 1.0 + 1e-12:
        raise ConfigError('Return law has total mass {} > 1'.format(math.fsum(q)))
    padded = np.zeros(n_max)
    k = min(n_max, q.size)
    padded[:k] = q[:k]
    return padded


def _direct(q: FloatArray, n_max: int) -> FloatArray:
    u = np.empty(n_max + 1)
    u[0] = 1.0
    for n in range(1, n_max + 1):
        u[n] = np.dot(q[:n], u[n - 1::-1])
    return u


def _inverse_series(a: FloatArray, n: int) -> FloatArray:
    """
    First n coefficients of 1 / a(z), a[0] != 0, by Newton doubling on fftconvolve
    """
    v = np.array([1.0 / a[0]])
    m = 1
    while m < n:
        m = min(2 * m, n)
        av = signal.fftconvolve(a[:m], v)[:m]
        correction = signal.fftconvolve(v, av)[:m]
        v = np.concatenate([v, np.zeros(m - v.size)])
        v = 2.0 * v - correction
    return v[:n]


def renewal_sequence(q, n_max, method='direct'):
    """
    Renewal masses of the return law q up to n_max

    :param q: q[j - 1] = P(tau = j); truncated laws are allowed
    :param method: 'direct' convolution or 'fft' series inversion of 1 / (1 - Q(z))
    :return: RenewalSequence
    """
    if n_max < 1:
        raise ConfigError('n_max must be >= 1, got {}'.format(n_max))
    padded = _padded(q, n_max)
    if method == 'direct':
        u = _direct(padded, n_max)
    elif method == 'fft':
        u = _inverse_series(np.concatenate([[1.0], -padded]), n_max + 1)
    else:
        raise ConfigError('Unknown renewal method: ' + str(method))
    if not np.all(np.isfinite(u)):
        raise NumericalFailure('Renewal sequence is not finite')
    bound = renewal_tail_bound(q, n_max)
    LOGGER.debug('Renewal sequence (%s) to n=%d, truncation bound %.3e', method, n_max, bound)
    return RenewalSequence(np.asarray(q, dtype=float), u, bound, method)


def renewal_tail_bound(q, n_max: int) -> Probability:
    """
    Bound on |u_n - u_n(complete law)| for n <= n_max caused by the classes missing from q

    A renewal path up to n_max uses at most n_max blocks, each longer than the
    enumerated range with probability equal to the missing mass.
    """
    q = np.asarray(q, dtype=float)
    if q.size >= n_max:
        return 0.0
    missing = max(0.0, 1.0 - math.fsum(q))
    return min(1.0, n_max * missing)


def renewal_limit(beta: float, c: float) -> float:
    """
    lim n^(1 - beta) u_n = sin(pi beta) / (pi c) for tails mu(tau > n) ~ c n^-beta
    """
    return math.sin(math.pi * beta) / (math.pi * c)


def drifted_law(model, s):
    """
    Gibbs class law at (u0(s), s); s = 0 gives the conformal masses

    :return: (q, PressureSolveResult or None)
    """
    if s == 0:
        return gibbs_weights(model, 0.0, 0.0).q, None
    result = solve_u0(model, s)
    if result.kind != ROOT:
        raise NumericalFailure('s={} is transient (u0 = {} is the convergence abscissa)'.format(s, result.u0))
    return gibbs_weights(model, result.u0, s).q, result


def correlation(model, s, n, v_values=None, w_values=None, renewal=None):
    """
    Integral of v * (w o f^n) over Y under the induced equilibrium state at s

    v and w are constant on branch classes; the value is E[w] sum_{j<=n} E[v; tau=j] u_{n-j}.

    :param n: integer or array of integers
    :param v_values: per-class values of v, scalar or array (1 by default)
    :param w_values: per-class values of w, scalar or array (1 by default)
    :param renewal: precomputed RenewalSequence of the same law
    :return: float or array matching n
    """
    q, _ = drifted_law(model, s)
    size = q.size

    def classwise(values):
        if values is None:
            return np.ones(size)
        values = np.asarray(values, dtype=float)
        if values.ndim == 0:
            return np.full(size, float(values))
        if values.size < size:
            raise ConfigError('Observable needs {} class values, got {}'.format(size, values.size))
        return values[:size]

    v = classwise(v_values)
    w = classwise(w_values)
    index = np.asarray(n, dtype=np.int64)
    top = int(index.max())
    if renewal is None or renewal.n_max < top:
        renewal = renewal_sequence(q, max(top, 1))
    mean_w = math.fsum(q * w)

    def at(m):
        if m == 0:
            return math.fsum(q * v * w)
        k = min(m, size)
        return mean_w * float(np.dot((v * q)[:k], renewal.u[m - 1::-1][:k]))

    if index.ndim == 0:
        return at(int(index))
    return np.array([at(int(m)) for m in index])


def drift_schedule(beta, n, eps=0.1, extra=0.05):
    """
    Drifts s_n tending to 0 with the horizon

    beta_eps:       n^(-(1 - beta) / (beta - eps) - extra)
    renewal_scale:  n^(-beta - 1/2), keeping n u0(s_n) -> 0 for every beta
    """
    if not 0.0 < beta < 1.0:
        raise ConfigError('beta must lie in (0, 1), got {}'.format(beta))
    if not 0.0 < eps < beta:
        raise ConfigError('eps must lie in (0, beta), got {}'.format(eps))
    n = np.asarray(n, dtype=float)
    return {
        'beta_eps': n ** (-(1.0 - beta) / (beta - eps) - extra),
        'renewal_scale': n ** (-beta - 0.5),
    }


def arcsine_cdf(beta, t):
    """
    P(Z <= t) for the generalized arcsine law with density proportional to u^(beta-1) (1-u)^-beta
    """
    if not 0.0 < beta < 1.0:
        raise ConfigError('beta must lie in (0, 1), got {}'.format(beta))
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return special.betainc(beta, 1.0 - beta, t)


def ks_distance(sample, cdf):
    """
    sup |empirical CDF - cdf|
    """
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise ConfigError('KS distance needs a nonempty sample')
    return float(stats.kstest(sample, cdf).statistic)


def last_visit_law(q, n, renewal=None):
    """
    Exact law of the last renewal Z_n <= n: P(Z_n = k) = u_k mu(tau > n - k)

    :param q: return law, q[j - 1] = P(tau = j); mass missing from q counts as tau > n
    :param renewal: precomputed RenewalSequence of q with n_max >= n
    :return: pmf over k = 0..n
    """
    if n < 1:
        raise ConfigError('Horizon must be >= 1, got {}'.format(n))
    padded = _padded(q, n)
    if renewal is None or renewal.n_max < n:
        renewal = renewal_sequence(q, n)
    missing = max(0.0, 1.0 - math.fsum(padded))
    # survival[m] = mu(tau > m) for m = 0..n
    survival = np.concatenate([np.cumsum(padded[::-1])[::-1], [0.0]]) + missing
    return renewal.u[:n + 1] * survival[::-1]


def discrete_ks_distance(k, pmf):
    """
    sup |empirical CDF - CDF| for integer samples k on the support 0..len(pmf) - 1
    """
    k = np.asarray(k, dtype=np.int64)
    if k.size == 0:
        raise ConfigError('KS distance needs a nonempty sample')
    if k.min() < 0 or k.max() >= len(pmf):
        raise ConfigError('Sample leaves the support 0..{}'.format(len(pmf) - 1))
    empirical = np.cumsum(np.bincount(k, minlength=len(pmf))) / float(k.size)
    return float(np.max(np.abs(empirical - np.cumsum(pmf))))


def two_sample_ks(a, b):
    """
    :return: (statistic, p-value)
    """
    result = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(result.statistic), float(result.pvalue)
