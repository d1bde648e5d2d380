"""
Induced Markov systems with potentials that are constant on branch classes.

A model stores, for inducing times n = 1..N, the class log-mass log N(n) + w(n).
Series over all classes are the enumerated head plus a remainder over the
continuation (a TailLaw, or a least-squares extension of the last decade),
closed by Euler-Maclaurin.
"""
import logging
import math
import warnings

import numpy as np
from scipy import integrate

from lib.common import Constants
from lib.errors import ConfigError, DivergentModel, DivergentSeries
from lib.potential import PotentialFamily
from lib.tails import TailLaw

LOGGER = logging.getLogger('pressure-lab.induced_model')


class BranchClass(object):

    def __init__(self, inducing_time, count, log_weight, psi_bar=0.0, log_count=None):
        if inducing_time < 1:
            raise ConfigError('Inducing time must be >= 1, got {}'.format(inducing_time))
        self.inducing_time = int(inducing_time)
        self.count = count
        self.log_weight = float(log_weight)
        self.psi_bar = float(psi_bar)
        if log_count is None:
            log_count = math.log(count) if count > 0 else -math.inf
        self.log_count = float(log_count)

    def to_json(self):
        if isinstance(self.count, int) and self.count < Constants.EXACT_COUNT_LIMIT:
            count = str(self.count)
        else:
            count = {'log': self.log_count}
        return {'n': self.inducing_time, 'count': count, 'log_weight': self.log_weight, 'psi_bar': self.psi_bar}

    @classmethod
    def from_json(cls, doc):
        count = doc['count']
        if isinstance(count, dict):
            return cls(doc['n'], math.exp(min(count['log'], 700.0)), doc['log_weight'], doc.get('psi_bar', 0.0),
                       log_count=count['log'])
        return cls(doc['n'], int(count), doc['log_weight'], doc.get('psi_bar', 0.0))

    def __str__(self):
        return 'n={} count={} w={:.12g} psi={:.6g}'.format(self.inducing_time, self.count, self.log_weight,
                                                          self.psi_bar)


class GibbsWeights(object):

    def __init__(self, n, q, normalizer, log_normalizer, tail_mass, u, s):
        self.n = n
        self.q = q
        self.normalizer = normalizer
        self.log_normalizer = log_normalizer
        self.tail_mass = tail_mass
        self.u = u
        self.s = s

    def __str__(self):
        return 'GibbsWeights(u={:.6g}, s={:.6g}, F={:.15g}, {} classes, tail mass {:.3e})'.format(
            self.u, self.s, self.normalizer, len(self.q), self.tail_mass)


class InducedModel(object):

    def __init__(self, log_mass, log_counts=None, exact_counts=None, potential=None, tail_law=None, finite=False,
                 normalized=False, growth_rate=None, name='model', meta=None):
        log_mass = np.asarray(log_mass, dtype=float)
        if log_mass.ndim != 1 or log_mass.size == 0:
            raise ConfigError('An induced model needs a nonempty class list')

        self.log_mass = log_mass
        self.log_counts = np.zeros_like(log_mass) if log_counts is None else np.asarray(log_counts, dtype=float)
        self.exact_counts = tuple(exact_counts) if exact_counts is not None else None
        self.potential = potential
        self.tail_law = tail_law
        self.finite = finite
        self.normalized = normalized
        self.name = name
        self.meta = dict(meta) if meta else {}

        self.truncation = log_mass.size
        self.n = np.arange(1, self.truncation + 1, dtype=float)
        self._growth_rate = growth_rate
        self._extension = None
        self._suffix = None
        self._psi = None

    @classmethod
    def from_log_weights(cls, log_weights, counts=None, **kwargs):
        """
        Build a model from per-class log-weights w(n) and optional multiplicities N(n)
        """
        log_weights = np.asarray(log_weights, dtype=float)
        if counts is None:
            return cls(log_weights, **kwargs)
        exact = all(isinstance(c, int) for c in counts)
        log_counts = np.array([math.log(c) if c > 0 else -math.inf for c in counts])
        return cls(log_weights + log_counts, log_counts=log_counts, exact_counts=counts if exact else None,
                   **kwargs)

    @classmethod
    def from_classes(cls, classes, **kwargs):
        classes = list(classes)
        if not classes:
            raise ConfigError('An induced model needs a nonempty class list')
        times = [bc.inducing_time for bc in classes]
        if times != list(range(1, len(classes) + 1)):
            raise ConfigError('Branch classes must have consecutive inducing times 1..N')
        log_counts = np.array([bc.log_count for bc in classes])
        log_weights = np.array([bc.log_weight for bc in classes])
        exact = [bc.count for bc in classes]
        exact = exact if all(isinstance(c, int) for c in exact) else None
        return cls(log_weights + log_counts, log_counts=log_counts, exact_counts=exact, **kwargs)

    def replace(self, **kwargs):
        fields = dict(log_mass=self.log_mass, log_counts=self.log_counts, exact_counts=self.exact_counts,
                      potential=self.potential, tail_law=self.tail_law, finite=self.finite,
                      normalized=self.normalized, growth_rate=self._growth_rate, name=self.name, meta=self.meta)
        fields.update(kwargs)
        return InducedModel(**fields)

    def with_potential(self, potential):
        return self.replace(potential=potential)

    @property
    def log_weights(self):
        return self.log_mass - self.log_counts

    def psi(self, x):
        if self.potential is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.potential.values(x)

    def psi_head(self):
        if self._psi is None:
            self._psi = self.psi(self.n)
        return self._psi

    def _fitted_extension(self):
        # log m(x) ~ a x + b log x + c0 + d / x over the last decade of classes
        if self._extension is None:
            lo = self.truncation // 10 if self.truncation >= 40 else 0
            x = self.n[lo:]
            y = self.log_mass[lo:]
            keep = np.isfinite(y)
            if np.count_nonzero(keep) < 4:
                raise DivergentModel('Too few finite classes to extend the series')
            x, y = x[keep], y[keep]
            basis = np.column_stack([x, np.log(x), np.ones_like(x), 1.0 / x])
            coef = np.linalg.lstsq(basis, y, rcond=None)[0]
            if abs(coef[0]) < 1e-10:
                coef[0] = 0.0
            self._extension = coef
            LOGGER.debug('%s: fitted extension growth %.6g, power %.6g', self.name, coef[0], coef[1])
        return self._extension

    def continuation_log_mass(self, x):
        x = np.asarray(x, dtype=float)
        if self.tail_law is not None:
            return self.tail_law.log_mass(x)
        a, b, c0, d = self._fitted_extension()
        return a * x + b * np.log(x) + c0 + d / x

    def class_log_mass(self, n):
        """
        Log-mass of inducing times n, enumerated or continued
        """
        n = np.asarray(n, dtype=np.int64)
        out = np.empty(n.shape, dtype=float)
        head = n <= self.truncation
        out[head] = self.log_mass[n[head] - 1]
        if np.any(~head):
            if self.finite:
                out[~head] = -math.inf
            else:
                out[~head] = self.continuation_log_mass(n[~head])
        return out

    @property
    def growth_rate(self):
        if self.finite:
            return -math.inf
        if self._growth_rate is not None:
            return self._growth_rate
        if self.tail_law is not None:
            return self.tail_law.growth_rate
        return float(self._fitted_extension()[0])

    @property
    def power_exponent(self):
        if self.tail_law is not None:
            return self.tail_law.power_exponent
        return float(self._fitted_extension()[1])

    def abscissa(self, s=0.0):
        """
        Convergence abscissa of F(u, s) = sum N(n) e^(w(n) + s psi(n) - u n)
        """
        rate = self.growth_rate
        if self.potential is not None:
            rate += s * self.potential.linear_rate
        return rate

    def convergent_at_abscissa(self, s=0.0, extra_power=0.0):
        if self.finite:
            return True
        if self.potential is not None and self.potential.damping_scale(s) < math.inf:
            return True
        power = self.power_exponent + extra_power
        if self.potential is not None:
            power += s * self.potential.log_rate
        return power < -1.0

    def check_convergent(self, u, s=0.0, extra_power=0.0):
        a = self.abscissa(s)
        if u < a - 1e-12 * max(1.0, abs(a)):
            raise DivergentSeries('Series diverges for u={:.12g} below the abscissa {:.12g}'.format(u, a), a)
        if u <= a and not self.convergent_at_abscissa(s, extra_power):
            raise DivergentSeries('Series diverges at its abscissa u={:.12g}'.format(a), a)

    def suffix_masses(self):
        if self._suffix is None:
            masses = np.exp(self.log_mass)
            self._suffix = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])
        return self._suffix

    def branch_classes(self):
        weights = self.log_weights
        psi = self.psi_head()
        for i in range(self.truncation):
            if self.exact_counts is not None and i < len(self.exact_counts):
                count = self.exact_counts[i]
            else:
                count = math.exp(min(self.log_counts[i], 700.0))
            yield BranchClass(i + 1, count, weights[i], psi[i], log_count=self.log_counts[i])

    def __str__(self):
        text = '{}: {} classes'.format(self.name, self.truncation)
        if self.tail_law is not None:
            text += ', ' + str(self.tail_law)
        if self.potential is not None:
            text += ', ' + str(self.potential)
        return text + (', normalized' if self.normalized else '')


"""
============================================================================
Series engine
============================================================================
"""


def _quad_piece(g, lo, hi):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        value, error = integrate.quad(g, lo, hi, epsabs=1e-18, epsrel=1e-13, limit=400)
    if caught and error > 1e-10 * abs(value) + 1e-16:
        LOGGER.warning('Remainder quadrature on [%g, %g]: %s (error %.2e)', lo, hi, caught[0].message, error)
    return value, error


def remainder(model, term, start, scales=()):
    """
    Sum of term over inducing times n >= start on the continuation

    Euler-Maclaurin: integral over [start, inf) + f(start)/2 - f'(start)/12, the integral taken in
    the log variable y = log(x / start) and split at the characteristic scales of the summand.

    :param model: InducedModel
    :param term: callable (x, log_mass) -> summand values
    :param start: first inducing time of the remainder
    :param scales: inducing times where the summand changes behaviour (exponential cut-offs)
    :return: (value, error estimate)
    """
    if model.finite:
        return 0.0, 0.0

    start = float(start)

    def f(x):
        return float(term(np.asarray(x, dtype=float), model.continuation_log_mass(x)))

    def g(y):
        if y > 700.0:
            return 0.0
        x = start * math.exp(y)
        value = f(x) * x
        return value if math.isfinite(value) else 0.0

    cuts = sorted({math.log(k * scale / start) for scale in scales if math.isfinite(scale) and scale > 0
                   for k in (1.0, 50.0) if k * scale > start})
    edges = [0.0] + cuts
    value, error = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece, piece_err = _quad_piece(g, lo, hi)
        value += piece
        error += piece_err
    piece, piece_err = _quad_piece(g, edges[-1], np.inf)
    value += piece
    error += piece_err

    finite_scales = [sc for sc in scales if math.isfinite(sc) and sc > 0]
    h = 0.01 * min([start] + finite_scales)
    derivative = (f(start + h) - f(start - h)) / (2.0 * h)
    value += 0.5 * f(start) - derivative / 12.0

    h3 = 0.1 * min([start] + finite_scales)
    third = (f(start + 2 * h3) - 2 * f(start + h3) + 2 * f(start - h3) - f(start - 2 * h3)) / (2.0 * h3 ** 3)
    error += abs(third) / 720.0
    return value, error


def _scales(model, u, s):
    scales = []
    rate = u - model.abscissa(s)
    if rate > 0:
        scales.append(1.0 / rate)
    if u > 0:
        scales.append(1.0 / u)
    if model.potential is not None:
        scales.append(model.potential.damping_scale(s))
    return scales


def series(model, term, u, s, start=1):
    """
    Sum of term over all classes with inducing time >= start

    :return: (value, remainder, remainder error)
    """
    lo = max(start, 1) - 1
    head = 0.0
    if lo < model.truncation:
        head = math.fsum(term(model.n[lo:], model.log_mass[lo:]))
    rem, err = remainder(model, term, max(start, model.truncation + 1), _scales(model, u, s))
    if err > Constants.REMAINDER_TRUST * max(abs(head + rem), 1e-300):
        LOGGER.debug('%s: remainder %.3e with error estimate %.3e', model.name, rem, err)
    return head + rem, rem, err


def direct_term(model, u, s, weight=None):
    def term(x, log_mass):
        with np.errstate(under='ignore', over='ignore'):
            values = np.exp(log_mass + s * model.psi(x) - u * x)
        return values if weight is None else values * weight(x)
    return term


def deviation_term(model, u, s, weight=None):
    # mass * (e^(s psi - u n) - 1), the cancellation-free part of F - 1 on normalized models
    def term(x, log_mass):
        with np.errstate(under='ignore', over='ignore'):
            values = np.exp(log_mass) * np.expm1(s * model.psi(x) - u * x)
        return values if weight is None else values * weight(x)
    return term


def deviation(model, u, s):
    """
    D(u, s) = F(u, s) - 1 on a normalized model
    """
    if not model.normalized:
        raise ConfigError('Deviation sums need a normalized model')
    model.check_convergent(u, s)
    return series(model, deviation_term(model, u, s), u, s)[0]


def normalizer(model, u, s):
    """
    F(u, s) = sum N(n) e^(w(n) + s psi(n) - u n)
    """
    model.check_convergent(u, s)
    if model.normalized:
        return 1.0 + series(model, deviation_term(model, u, s), u, s)[0]
    return series(model, direct_term(model, u, s), u, s)[0]


def log_normalizer(model, u, s):
    model.check_convergent(u, s)
    if model.normalized:
        return math.log1p(series(model, deviation_term(model, u, s), u, s)[0])
    return math.log(series(model, direct_term(model, u, s), u, s)[0])


"""
============================================================================
Operations
============================================================================
"""


def normalize(model):
    """
    Rescale the class masses so that sum N(n) e^(w(n)) = 1

    :param model: InducedModel
    :return: normalized InducedModel
    """
    a = model.abscissa(0.0)
    if a > Constants.NORMALIZE_TOL or (a >= 0.0 and not model.convergent_at_abscissa(0.0)):
        raise DivergentModel('{}: total conformal mass diverges (growth {:.6g}, power {:.6g})'.format(
            model.name, model.growth_rate, model.power_exponent if not model.finite else -math.inf))

    base = model.replace(potential=None, normalized=False)
    law = model.tail_law
    if law is not None and law.has_closed_tail() and not model.finite:
        rem, err = float(law.greater_than(model.truncation)), 0.0
        total = math.fsum(np.exp(model.log_mass)) + rem
    else:
        total, rem, err = series(base, direct_term(base, 0.0, 0.0), 0.0, 0.0)
    if not total > 0 or not math.isfinite(total):
        raise DivergentModel('{}: total conformal mass is {}'.format(model.name, total))

    log_total = math.log(total)
    tail_law = model.tail_law.scaled(-log_total) if model.tail_law is not None else None
    result = model.replace(log_mass=model.log_mass - log_total, tail_law=tail_law, normalized=True)
    if result.tail_law is None and not result.finite:
        result._extension = model._fitted_extension() - np.array([0.0, 0.0, log_total, 0.0])
    LOGGER.info('%s: normalized by total mass %.15g (remainder %.3e, error %.1e)', model.name, total, rem, err)
    return result


def tail(model, n):
    """
    mu(tau > n) = sum over m > n of N(m) e^(w(m))

    :param model: normalized InducedModel
    :param n: integer >= 0
    :return: tail mass
    """
    n = int(n)
    if n < 0:
        raise ConfigError('Tail index must be >= 0')
    law = model.tail_law
    if n >= model.truncation:
        if model.finite:
            return 0.0
        if law is not None and law.has_closed_tail():
            return float(law.greater_than(n))
        return series(model, direct_term(model, 0.0, 0.0), 0.0, 0.0, start=n + 1)[0]
    return float(model.suffix_masses()[n]) + tail(model, model.truncation)


def tails(model, n):
    return np.array([tail(model, k) for k in np.asarray(n, dtype=np.int64)])


def tail_band(model, n_lo, n_hi, beta=None, points=60):
    """
    (C2, C1) with C2 n^-beta <= tail(n) <= C1 n^-beta on [n_lo, n_hi]
    """
    if beta is None:
        if model.tail_law is None:
            raise ConfigError('Tail band needs beta')
        beta = model.tail_law.beta
    grid = np.unique(np.geomspace(n_lo, n_hi, points).astype(np.int64))
    scaled = tails(model, grid) * grid.astype(float) ** beta
    return float(scaled.min()), float(scaled.max())


def gibbs_weights(model, u, s):
    """
    Class law q_n proportional to N(n) e^(w(n) + s psi(n) - u n)

    :param model: InducedModel
    :param u: real above the convergence abscissa
    :param s: perturbation parameter
    :return: GibbsWeights with the unnormalized total F(u, s)
    """
    log_f = log_normalizer(model, u, s)
    with np.errstate(under='ignore'):
        q = np.exp(model.log_mass + s * model.psi_head() - u * model.n - log_f)
    tail_mass = max(0.0, 1.0 - math.fsum(q))
    return GibbsWeights(model.n, q, math.exp(log_f), log_f, tail_mass, u, s)


def expected_tau(model, u, s):
    """
    Mean inducing time under the Gibbs law at (u, s); math.inf when the mean diverges
    """
    a = model.abscissa(s)
    model.check_convergent(u, s)
    if u <= a and not model.convergent_at_abscissa(s, extra_power=1.0):
        return math.inf
    numerator = series(model, direct_term(model, u, s, weight=lambda x: x), u, s)[0]
    return numerator / normalizer(model, u, s)


def measure_distance(model, s):
    """
    Total variation distance between the class laws at (0, s) and (0, 0)
    """
    if not model.normalized:
        raise ConfigError('measure_distance needs a normalized model')
    if s == 0:
        return 0.0
    d = deviation(model, 0.0, s)
    f = 1.0 + d

    def term(x, log_mass):
        with np.errstate(under='ignore'):
            return np.exp(log_mass) * np.abs(np.expm1(s * model.psi(x)) - d) / f

    return series(model, term, 0.0, s)[0]


def abramov_residual(model, s, u0):
    """
    h(q) + sum q (w + s psi - u0 n) for the Gibbs law q at (u0, s)

    Vanishes exactly when F(u0, s) = 1; the classes beyond the truncation are Gibbs by
    construction and contribute tail_mass * log F.
    """
    weights = gibbs_weights(model, u0, s)
    q = weights.q
    keep = q > 0
    q = q[keep]
    entropy = -math.fsum(q * (np.log(q) - model.log_counts[keep]))
    potential = model.log_weights[keep] + s * model.psi_head()[keep] - u0 * model.n[keep]
    integral = math.fsum(q * potential)
    return entropy + integral + weights.tail_mass * weights.log_normalizer


def model_to_json(model):
    doc = {
        'name': model.name,
        'classes': [bc.to_json() for bc in model.branch_classes()],
        'truncation': model.truncation,
        'finite': model.finite,
        'normalized': model.normalized,
        'meta': model.meta,
    }
    if model.tail_law is not None:
        doc['tail'] = model.tail_law.to_json()
    if model.potential is not None:
        doc['potential'] = model.potential.to_json()
    if model._growth_rate is not None:
        doc['growth_rate'] = model._growth_rate
    return doc


def model_from_json(doc):
    classes = [BranchClass.from_json(entry) for entry in doc['classes']]
    tail_law = TailLaw.from_json(doc['tail']) if 'tail' in doc else None
    return InducedModel.from_classes(classes, potential=PotentialFamily.from_json(doc.get('potential')),
                                     tail_law=tail_law, finite=doc.get('finite', False),
                                     normalized=doc.get('normalized', False), growth_rate=doc.get('growth_rate'),
                                     name=doc.get('name', 'model'), meta=doc.get('meta'))
