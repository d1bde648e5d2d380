import logging

import numpy as np

from lib.common import Constants
from lib.errors import ConfigError
from lib.labtypes import FloatArray, IntArray
from lib.induced_model import gibbs_weights
from lib.map_families import FlatMap, GaspardWang, PomeauManneville

LOGGER = logging.getLogger('pressure-lab.orbits')


class OrbitSummary(object):
    """
    Inducing-set visits of one trajectory up to time n

    return_times holds the gaps between consecutive visits (the first gap counted from time 0
    when the orbit starts in Y); last_visit is Z_n = max{0 <= j <= n : f^j x in Y}, 0 if none.
    """

    def __init__(self, n, x0, return_times, last_visit, perturbations=0, mode='float'):
        self.n = n
        self.x0 = x0
        self.return_times = np.asarray(return_times, dtype=np.int64)
        self.last_visit = last_visit
        self.perturbations = perturbations
        self.mode = mode

    @property
    def visits(self):
        return len(self.return_times)

    def to_json(self):
        return {'n': self.n, 'x0': self.x0, 'mode': self.mode, 'visits': self.visits,
                'last_visit': self.last_visit, 'perturbations': self.perturbations}

    def __str__(self):
        return 'Orbit(n={}, visits={}, Z_n={})'.format(self.n, self.visits, self.last_visit)


def endpoints(descriptor):
    if isinstance(descriptor, PomeauManneville):
        return np.array([0.0, 0.5, 1.0])
    if isinstance(descriptor, GaspardWang):
        return np.array([0.0, float(descriptor.breakpoint(1)), 1.0])
    if isinstance(descriptor, FlatMap):
        return np.array([-1.0, 0.0, 1.0])
    raise ConfigError('{} has no float orbit'.format(descriptor.family))


def perturb_endpoints(descriptor, x, eps=Constants.ENDPOINT_EPS):
    """
    Move points within eps of a branch endpoint by 2 eps into the domain

    :return: (x, number of perturbed points)
    """
    x = np.array(x, dtype=float, copy=True, ndmin=1)
    hit = np.zeros(x.shape, dtype=bool)
    for point in endpoints(descriptor):
        near = np.abs(x - point) < eps
        hit |= near
        x[near] = point + (2.0 * eps if point < 1.0 else -2.0 * eps)
    count = int(np.count_nonzero(hit))
    if count:
        LOGGER.info('%s: perturbed %d orbit point(s) off a branch endpoint', descriptor.family, count)
    return x, count


def sample_inducing_set(descriptor, size, rng):
    """
    Uniform (Lebesgue) starting points in the inducing set
    """
    if isinstance(descriptor, PomeauManneville):
        lo = 0.5
    elif isinstance(descriptor, GaspardWang):
        lo = float(descriptor.breakpoint(1))
    elif isinstance(descriptor, FlatMap):
        lo = descriptor.fixed_point
        magnitude = rng.uniform(lo, 1.0, size)
        return np.where(rng.random(size) < 0.5, -magnitude, magnitude)
    else:
        raise ConfigError('{} has no float orbit'.format(descriptor.family))
    return lo + (1.0 - lo) * (1.0 - rng.random(size))


def skeleton_return_times(q: FloatArray, size: int, rng: np.random.Generator, overflow: int) -> IntArray:
    """
    i.i.d. return times from the class law q; mass beyond the enumerated classes maps to overflow
    """
    cumulative = np.cumsum(q)
    draws = rng.random(size)
    index = np.searchsorted(cumulative, draws, side='right')
    return np.where(index < len(q), index + 1, overflow)


def orbit(descriptor=None, x0=None, n=1000, seed=None, mode='float', model=None, u=0.0, s=0.0):
    """
    Visits to the inducing set along one trajectory

    :param descriptor: IntervalMapDescriptor for float iteration
    :param x0: start point; drawn uniformly from the inducing set when None (seed required)
    :param n: horizon
    :param mode: 'float' iterates the map, 'skeleton' draws return times from the Gibbs law of model at (u, s)
    :return: OrbitSummary
    """
    if n < 1:
        raise ConfigError('Orbit horizon must be >= 1, got {}'.format(n))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed))) if seed is not None else None

    if mode == 'skeleton':
        if model is None:
            raise ConfigError('Skeleton mode needs an induced model')
        if model.truncation < n:
            raise ConfigError('Skeleton mode needs the model truncation ({}) >= horizon ({})'.format(
                model.truncation, n))
        if rng is None:
            raise ConfigError('Skeleton mode needs a seed')
        q = gibbs_weights(model, u, s).q
        times = []
        clock = 0
        while True:
            tau = int(skeleton_return_times(q, 1, rng, n + 1)[0])
            if clock + tau > n:
                break
            clock += tau
            times.append(tau)
        return OrbitSummary(n, None, times, clock, mode='skeleton')
    if mode != 'float':
        raise ConfigError('Unknown orbit mode: ' + str(mode))

    if descriptor is None:
        raise ConfigError('Float mode needs a map descriptor')
    if x0 is None:
        if rng is None:
            raise ConfigError('A random start point needs a seed')
        x0 = float(sample_inducing_set(descriptor, 1, rng)[0])

    x = float(x0)
    perturbations = 0
    times = []
    last = 0 if bool(descriptor.in_inducing_set(x)) else None
    previous = 0
    for j in range(1, n + 1):
        x = float(descriptor.forward(x))
        moved, count = perturb_endpoints(descriptor, x)
        if count:
            x = float(moved[0])
            perturbations += count
        if bool(descriptor.in_inducing_set(x)):
            times.append(j - previous)
            previous = j
            last = j
    return OrbitSummary(n, x0, times, 0 if last is None else last, perturbations)


def float_last_visits(descriptor, n, x0):
    """
    Z_n for a vector of start points by simultaneous float iteration

    :return: (Z_n array, number of endpoint perturbations)
    """
    x = np.array(x0, dtype=float, copy=True)
    last = np.zeros(x.shape, dtype=np.int64)
    perturbations = 0
    for j in range(1, n + 1):
        x = descriptor.forward(x)
        x, count = perturb_endpoints(descriptor, x)
        perturbations += count
        last = np.where(descriptor.in_inducing_set(x), j, last)
    return last, perturbations


def pm_first_return_sample(alpha, b=1.0, trials=10 ** 6, seed=0, n_cap=Constants.PM_N_MAX):
    """
    First return times to (1/2, 1] for Lebesgue-uniform start points, by vectorized iteration

    Times above n_cap are reported as n_cap + 1.
    """
    pm = PomeauManneville(alpha, b)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    y = 0.5 + 0.5 * (1.0 - rng.random(trials))
    x = pm.b * (2.0 * y - 1.0)
    tau = np.ones(trials, dtype=np.int64)
    active = np.flatnonzero(x <= 0.5)
    steps = 1
    while active.size and steps <= n_cap:
        x[active] = pm.left(x[active])
        tau[active] += 1
        active = active[x[active] <= 0.5]
        steps += 1
    tau[active] = n_cap + 1
    LOGGER.debug('PM first returns: %d trials, %d above the cap %d', trials, active.size, n_cap)
    return tau
