import logging
import math

import numpy as np
from scipy import optimize

from lib.common import Constants
from lib.errors import ConfigError, NumericalFailure
from lib.induced_model import InducedModel, normalize, normalizer
from lib.tails import TailLaw

LOGGER = logging.getLogger('pressure-lab.map_families')

FAMILIES = ('pomeau_manneville', 'flat', 'gaspard_wang', 'stratmann_vogt', 'fibonacci')


class IntervalMapDescriptor(object):
    """
    Interval map with named inverse branches and an inducing set

    Subclasses provide forward, derivative, inverse and in_inducing_set.
    """

    family = None
    branches = ()

    def forward(self, x):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError

    def inverse(self, branch, y):
        raise NotImplementedError

    def in_inducing_set(self, x):
        raise NotImplementedError

    def first_return(self, x, max_steps=10 ** 6):
        """
        First return time to the inducing set by float iteration
        """
        for step in range(1, max_steps + 1):
            x = float(self.forward(x))
            if self.in_inducing_set(x):
                return step
        return max_steps + 1

    def to_json(self):
        return {'family': self.family}

    def __str__(self):
        params = ', '.join('{}={}'.format(k, v) for k, v in self.to_json().items() if k != 'family')
        return '{}({})'.format(self.family, params)


class PomeauManneville(IntervalMapDescriptor):
    """
    f(x) = x (1 + 2^alpha x^alpha) on [0, 1/2], b (2x - 1) on (1/2, 1]; induced on Y = (1/2, 1]
    """

    family = 'pomeau_manneville'
    branches = ('left', 'right')

    def __init__(self, alpha, b=1.0):
        if not alpha > 1.0:
            raise ConfigError('Pomeau-Manneville needs alpha > 1, got {}'.format(alpha))
        if not 0.0 < b <= 1.0:
            raise ConfigError('Pomeau-Manneville needs b in (0, 1], got {}'.format(b))
        self.alpha = float(alpha)
        self.b = float(b)
        self.scale = 2.0 ** self.alpha

    @property
    def beta(self):
        return 1.0 / self.alpha

    def left(self, x):
        x = np.asarray(x, dtype=float)
        return x * (1.0 + self.scale * np.power(x, self.alpha))

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0.5, self.left(np.minimum(x, 0.5)), self.b * (2.0 * x - 1.0))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0.5, 1.0 + (1.0 + self.alpha) * self.scale * np.power(np.minimum(x, 0.5), self.alpha),
                        2.0 * self.b)

    def inverse(self, branch, y):
        if branch == 'right':
            if not 0.0 <= y <= self.b:
                raise ConfigError('Right branch covers [0, {}], got {}'.format(self.b, y))
            return 0.5 + y / (2.0 * self.b)
        if branch != 'left':
            raise ConfigError('Unknown branch: ' + str(branch))
        if not 0.0 <= y <= 1.0:
            raise ConfigError('Left branch covers [0, 1], got {}'.format(y))
        if y == 0.0:
            return 0.0
        try:
            x = optimize.brentq(lambda v: float(self.left(v)) - y, 0.0, min(y, 0.5),
                                xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        except (ValueError, RuntimeError) as e:
            raise NumericalFailure('Left inverse branch failed at y={}: {}'.format(y, e))
        # Newton polish
        for _ in range(2):
            step = (float(self.left(x)) - y) / float(self.derivative(x))
            x -= step
        if abs(float(self.left(x)) - y) > Constants.INVERSE_BRANCH_TOL * max(y, 1e-300) * 10:
            raise NumericalFailure('Left inverse branch did not converge at y={}'.format(y))
        return x

    def in_inducing_set(self, x):
        return np.asarray(x) > 0.5

    def to_json(self):
        return {'family': self.family, 'alpha': self.alpha, 'b': self.b}


class FlatMap(IntervalMapDescriptor):
    """
    f(x) = 1 - 2 exp(-b (|x|^-alpha - 1)) on [-1, 1], flat critical point at 0
    """

    family = 'flat'
    branches = ('minus', 'plus')

    def __init__(self, alpha, b):
        if not alpha > 0 or not b > 0:
            raise ConfigError('Flat family needs alpha, b > 0, got alpha={} b={}'.format(alpha, b))
        if not 2.0 * b * alpha > 1.0:
            raise ConfigError('Flat family needs |f\'(1)| = 2 b alpha > 1, got {}'.format(2.0 * b * alpha))
        self.alpha = float(alpha)
        self.b = float(b)
        self._fixed_point = None

    @property
    def beta(self):
        return 1.0 / self.alpha

    @property
    def log_slope(self):
        """
        log |f'(1)| = log(2 b alpha)
        """
        return math.log(2.0 * self.b * self.alpha)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide='ignore', over='ignore'):
            exponent = -self.b * (np.power(ax, -self.alpha) - 1.0)
            return np.where(ax == 0.0, 1.0, 1.0 - 2.0 * np.exp(exponent))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            value = 2.0 * self.b * self.alpha * np.exp(-self.b * (np.power(ax, -self.alpha) - 1.0)) \
                * np.power(ax, -self.alpha - 1.0)
            return np.where(ax == 0.0, 0.0, -np.sign(x) * value)

    def inverse(self, branch, y):
        if not -1.0 <= y < 1.0:
            raise ConfigError('Flat inverse branches cover [-1, 1), got {}'.format(y))
        magnitude = (1.0 - math.log((1.0 - y) / 2.0) / self.b) ** (-self.beta)
        if branch == 'plus':
            return magnitude
        if branch == 'minus':
            return -magnitude
        raise ConfigError('Unknown branch: ' + str(branch))

    @property
    def fixed_point(self):
        """
        Orientation-reversing fixed point p in (0, 1)
        """
        if self._fixed_point is None:
            self._fixed_point = optimize.brentq(lambda x: float(self.forward(x)) - x, 1e-300, 1.0,
                                                xtol=1e-16, rtol=4 * np.finfo(float).eps)
        return self._fixed_point

    def in_inducing_set(self, x):
        return np.abs(np.asarray(x)) >= self.fixed_point

    def to_json(self):
        return {'family': self.family, 'alpha': self.alpha, 'b': self.b}


class GaspardWang(IntervalMapDescriptor):
    """
    Countably piecewise linear map with breakpoints d_n = (n + 1)^-beta

    (d_1, 1] is the inducing set and maps onto (0, 1]; (d_n, d_{n-1}] maps onto (d_{n-1}, d_{n-2}].
    """

    family = 'gaspard_wang'

    def __init__(self, beta):
        if not 0.0 < beta < 1.0:
            raise ConfigError('beta must lie in (0, 1), got {}'.format(beta))
        self.beta = float(beta)

    def breakpoint(self, n):
        return (np.asarray(n, dtype=float) + 1.0) ** (-self.beta)

    def branch_of(self, x):
        """
        n with d_n < x <= d_{n-1}
        """
        x = np.asarray(x, dtype=float)
        n = np.floor(np.power(x, -1.0 / self.beta)).astype(np.int64)
        # repair rounding at the breakpoints
        n = np.where(x <= self.breakpoint(n), n + 1, n)
        n = np.where(x > self.breakpoint(n - 1), n - 1, n)
        return np.maximum(n, 1)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        n = self.branch_of(x)
        lo, hi = self.breakpoint(n), self.breakpoint(n - 1)
        theta = (x - lo) / (hi - lo)
        image_lo = np.where(n == 1, 0.0, self.breakpoint(n - 1))
        image_hi = np.where(n == 1, 1.0, self.breakpoint(n - 2))
        return image_lo + theta * (image_hi - image_lo)

    def derivative(self, x):
        n = self.branch_of(x)
        lo, hi = self.breakpoint(n), self.breakpoint(n - 1)
        image_lo = np.where(n == 1, 0.0, self.breakpoint(n - 1))
        image_hi = np.where(n == 1, 1.0, self.breakpoint(n - 2))
        return (image_hi - image_lo) / (hi - lo)

    def inverse(self, branch, y):
        n = int(branch)
        if n < 1:
            raise ConfigError('Branch index must be >= 1, got {}'.format(branch))
        lo, hi = float(self.breakpoint(n)), float(self.breakpoint(n - 1))
        image_lo = 0.0 if n == 1 else float(self.breakpoint(n - 1))
        image_hi = 1.0 if n == 1 else float(self.breakpoint(n - 2))
        return lo + (y - image_lo) * (hi - lo) / (image_hi - image_lo)

    def in_inducing_set(self, x):
        return np.asarray(x) > self.breakpoint(1)

    def induced_jump(self, y):
        """
        One step of the first return map: (return time, image in Y)

        The image of y under f lands in (d_n, d_{n-1}] with relative position theta; n - 1
        linear steps later the orbit re-enters Y at the same relative position.
        """
        d1 = float(self.breakpoint(1))
        x = (y - d1) / (1.0 - d1)
        n = int(self.branch_of(x))
        lo, hi = float(self.breakpoint(n)), float(self.breakpoint(n - 1))
        theta = (x - lo) / (hi - lo)
        return n, d1 + theta * (1.0 - d1)

    def to_json(self):
        return {'family': self.family, 'beta': self.beta}


class CodedMap(IntervalMapDescriptor):
    """
    Maps handled through their Markov coding only (Stratmann-Vogt and Fibonacci)
    """

    def __init__(self, family, lam):
        if family not in ('stratmann_vogt', 'fibonacci'):
            raise ConfigError('Unknown coded family: ' + str(family))
        if not 0.0 < lam <= 0.5:
            raise ConfigError('lambda must lie in (0, 1/2], got {}'.format(lam))
        self.family = family
        self.lam = float(lam)

    def forward(self, x):
        raise ConfigError('{} is available through its Markov coding only'.format(self.family))

    derivative = forward

    def inverse(self, branch, y):
        raise ConfigError('{} is available through its Markov coding only'.format(self.family))

    def in_inducing_set(self, x):
        raise ConfigError('{} is available through its Markov coding only'.format(self.family))

    def to_json(self):
        return {'family': self.family, 'lambda': self.lam}


def make_descriptor(family, alpha=None, b=None, beta=None, lam=None):
    if family == 'pomeau_manneville':
        return PomeauManneville(alpha, 1.0 if b is None else b)
    if family == 'flat':
        return FlatMap(alpha, b)
    if family == 'gaspard_wang':
        return GaspardWang(beta)
    if family in ('stratmann_vogt', 'fibonacci'):
        return CodedMap(family, lam)
    raise ConfigError('Unknown map family: ' + str(family))


class CylinderTable(object):
    """
    Cylinders {tau = n} of the first return map inside the inducing domain
    """

    def __init__(self, n, left, right, weight, domain):
        self.n = n
        self.left = left
        self.right = right
        self.weight = weight
        self.domain = domain

    def lengths(self):
        return self.right - self.left

    def rows(self):
        return zip(self.n, self.left, self.right, self.weight)

    def __len__(self):
        return len(self.n)

    def __str__(self):
        return 'CylinderTable({} cylinders in ({:g}, {:g}])'.format(len(self.n), *self.domain)


def pm_preimages(pm, count):
    """
    z_0 = 1/2 and z_k = left^-1(z_{k-1}), k < count
    """
    z = np.empty(count)
    z[0] = 0.5
    for k in range(1, count):
        z[k] = pm.inverse('left', z[k - 1])
    return z


def pm_cylinders(alpha, b=1.0, n_max=Constants.PM_N_MAX, t=1.0):
    """
    First return cylinders of the Pomeau-Manneville map to Y = (1/2, 1]

    Cylinder {tau = n} is the set of y with R(y) = b(2y - 1) in (z_{n-1}, z_{n-2}] (n >= 2), or in
    (1/2, b] for n = 1. The weight is (|cylinder| / |F(cylinder)|)^t, the value of |(f^tau)'|^-t at
    the mean-value point.
    """
    pm = PomeauManneville(alpha, b)
    z = pm_preimages(pm, n_max)
    n = np.arange(1, n_max + 1)

    # R-intervals (lo, hi]
    lo = np.empty(n_max)
    hi = np.empty(n_max)
    lo[0], hi[0] = 0.5, max(0.5, b)
    lo[1:] = z[1:]
    hi[1:] = np.minimum(z[:-1], b)
    hi = np.maximum(hi, lo)

    left = 0.5 + lo / (2.0 * b)
    right = 0.5 + hi / (2.0 * b)

    # image of the cylinder under the induced map: (1/2, left^(n-1)(hi)]
    image = np.empty(n_max)
    image[0] = hi[0] - 0.5
    for k in range(1, n_max):
        top = hi[k]
        if top <= lo[k]:
            image[k] = 0.5
        elif top < z[k - 1]:
            for _ in range(k):
                top = float(pm.left(top))
            image[k] = top - 0.5
        else:
            image[k] = 0.5
    with np.errstate(divide='ignore', invalid='ignore'):
        weight = np.where(right > left, np.power((right - left) / image, t), 0.0)
    if b < 1.0:
        LOGGER.info('PM b=%g: first return map is not Markov, cylinders are cut at R = b', b)
    return CylinderTable(n, left, right, weight, (0.5, 1.0)), z


def pm_induced_model(alpha, b=1.0, t=1.0, n_max=Constants.PM_N_MAX):
    """
    First return model of the Pomeau-Manneville map to (1/2, 1]

    :return: InducedModel, normalized when t = 1
    """
    table, z = pm_cylinders(alpha, b, n_max, t)
    pm = PomeauManneville(alpha, b)
    beta = pm.beta
    scale = alpha * 2.0 ** alpha
    # tail(n) = z_{n-1} / b continues as (scale (x - 2 + k0))^-beta / b in the at-least form
    shift = z[-1] ** (-alpha) / scale - n_max - 1.0
    c = scale ** (-beta) / b
    law = TailLaw(beta, c, shift=shift, truncation=n_max)
    if t != 1.0:
        law = None
    with np.errstate(divide='ignore'):
        log_mass = np.log(table.weight)
    model = InducedModel(log_mass, tail_law=law, name='pomeau_manneville',
                         meta={'alpha': alpha, 'b': b, 't': t})
    if t == 1.0:
        total = normalizer(model, 0.0, 0.0)
        model.meta['total_mass'] = total
        LOGGER.info('PM alpha=%g b=%g: total conformal mass %.12f', alpha, b, total)
        model = normalize(model)
    return model


def flat_sequences(alpha, b, n_max):
    """
    a_n, n = 1..n_max, and zeta_n = eps_n / r^n with eps_n = 1 - f(a_n)

    eps_1 = 1 - p and eps_{n+1} = 1 - V_+(eps_n - 1), computed in log space once eps underflows.
    """
    flat = FlatMap(alpha, b)
    beta = flat.beta
    p = flat.fixed_point
    log_r = -flat.log_slope

    log_eps = np.empty(n_max)
    log_eps[0] = math.log1p(-p)
    delta = 1.0 - p
    for n in range(1, n_max):
        if log_eps[n - 1] < -700.0:
            log_eps[n] = log_eps[n - 1] + log_r
            continue
        q = -math.log1p(-delta / 2.0) / b
        delta = -math.expm1(-beta * math.log1p(q))
        if delta <= 0.0:
            log_eps[n] = log_eps[n - 1] + log_r
        else:
            log_eps[n] = math.log(delta)

    a = np.power(1.0 - (log_eps - math.log(2.0)) / b, -beta)
    if not np.all(np.isfinite(a)):
        raise NumericalFailure('Flat map backward orbit overflowed')
    n = np.arange(1, n_max + 1)
    zeta = np.exp(log_eps - n * log_r)
    return flat, a, zeta


def flat_induced_model(alpha, b, n_max=Constants.FLAT_N_MAX, density_ratio=0.0):
    """
    Induced model of the flat family from the backward orbit a_n

    tail(n) = A(a_n) / A(1) with A(a) = a + (h2 / 3 h0) a^3, a_0 = 1.

    :param density_ratio: h2 / h0 of the acip density at the flat point
    :return: (InducedModel, a_n array, zeta_n array)
    """
    flat, a, zeta = flat_sequences(alpha, b, n_max)
    kappa = density_ratio / 3.0

    def area(x):
        return x + kappa * x ** 3

    tails = np.concatenate([[1.0], area(a) / area(1.0)])
    masses = tails[:-1] - tails[1:]
    if np.any(masses < 0):
        raise NumericalFailure('Flat map tails are not monotone')

    beta = flat.beta
    L = flat.log_slope
    log_zeta = math.log(zeta[-1])
    shift = (b + math.log(2.0) - log_zeta) / L - 1.0
    c = (b / L) ** beta / area(1.0)
    corrections = [(kappa * (b / L) ** (3 * beta) / area(1.0), 3 * beta)] if kappa else []
    law = TailLaw(beta, c, corrections=corrections, shift=shift, truncation=n_max)

    with np.errstate(divide='ignore'):
        model = InducedModel(np.log(masses), tail_law=law, name='flat', meta={'alpha': alpha, 'b': b})
    model = normalize(model)
    LOGGER.info('Flat alpha=%g b=%g: p=%.15f, zeta -> %.12g', alpha, b, flat.fixed_point, zeta[-1])
    return model, a, zeta


def gaspard_wang_model(beta, tail_kind='exact_power', n_max=Constants.SCALAR_N_MAX, weight=0.5):
    """
    Reference scalar model with prescribed tails, N(n) = 1

    exact_power:      mu(tau >= n) = n^-beta
    with_corrections: mu(tau >= n) = (1 - weight) n^-beta + weight n^-2beta
    """
    if tail_kind == 'exact_power':
        law = TailLaw(beta, 1.0, truncation=n_max)
    elif tail_kind == 'with_corrections':
        if not 0.0 < weight < 1.0:
            raise ConfigError('Correction weight must lie in (0, 1), got {}'.format(weight))
        law = TailLaw(beta, 1.0 - weight, corrections=[(weight, 2.0 * beta)], truncation=n_max)
    else:
        raise ConfigError('Unknown tail kind: ' + str(tail_kind))
    n = np.arange(1, n_max + 1, dtype=float)
    model = InducedModel(law.log_mass(n), tail_law=law, name='gaspard_wang',
                         meta={'beta': beta, 'tail_kind': tail_kind})
    return normalize(model)
