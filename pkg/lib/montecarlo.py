import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lib.common import Constants
from lib.errors import ConfigError
from lib.orbits import float_last_visits, sample_inducing_set, skeleton_return_times
from lib.renewal import drifted_law

LOGGER = logging.getLogger('pressure-lab.montecarlo')


class LastVisitSample(object):
    """
    Empirical Z_n / n values, ordered by trial index
    """

    def __init__(self, n, values, seed, trials, mode, s=0.0, perturbations=0):
        self.n = n
        self.values = values
        self.seed = seed
        self.trials = trials
        self.mode = mode
        self.s = s
        self.perturbations = perturbations

    def rows(self):
        return ((value,) for value in self.values)

    def last_visits(self):
        """
        Z_n as integers
        """
        return np.rint(self.values * self.n).astype(np.int64)

    def to_json(self):
        return {'n': self.n, 'trials': self.trials, 'seed': self.seed, 'mode': self.mode, 's': self.s,
                'mean': float(np.mean(self.values)), 'perturbations': self.perturbations}

    def __str__(self):
        return 'LastVisitSample(n={}, trials={}, mode={}, mean={:.6g})'.format(
            self.n, self.trials, self.mode, float(np.mean(self.values)))


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get(Constants.THREADS_ENV, '1'))
    if threads < 1:
        raise ConfigError('Thread count must be >= 1, got {}'.format(threads))
    return threads


def block_rng(seed: int, block: int) -> np.random.Generator:
    """
    Independent Philox stream of one trial block
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _skeleton_block(q, n, size, rng):
    clock = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        step = skeleton_return_times(q, active.size, rng, n + 1)
        moved = clock[active] + step
        keep = moved <= n
        clock[active[keep]] = moved[keep]
        active = active[keep]
    return clock, 0


def _orbit_block(descriptor, n, size, rng):
    return float_last_visits(descriptor, n, sample_inducing_set(descriptor, size, rng))


def simulate_last_visit(model=None, n=10000, trials=100000, seed=0, mode='skeleton', s=0.0, descriptor=None,
                        threads=None):
    """
    Monte Carlo sample of Z_n / n for orbits started in the inducing set

    Trials run in blocks of Constants.TRIAL_BLOCK, block b drawing from its own
    Philox stream, so the sample does not depend on the thread count.

    :param model: normalized InducedModel (skeleton mode; its potential drives s > 0)
    :param mode: 'skeleton' draws i.i.d. return times, 'orbit' iterates descriptor
    :return: LastVisitSample
    """
    if trials < 1000:
        raise ConfigError('Monte Carlo needs at least 1000 trials, got {}'.format(trials))
    if n < 1:
        raise ConfigError('Horizon must be >= 1, got {}'.format(n))

    if mode == 'skeleton':
        if model is None:
            raise ConfigError('Skeleton mode needs an induced model')
        q, _ = drifted_law(model, s)

        def run(block, size):
            return _skeleton_block(q, n, size, block_rng(seed, block))
    elif mode == 'orbit':
        if descriptor is None:
            raise ConfigError('Orbit mode needs a map descriptor')

        def run(block, size):
            return _orbit_block(descriptor, n, size, block_rng(seed, block))
    else:
        raise ConfigError('Unknown Monte Carlo mode: ' + str(mode))

    blocks = [(block, min(Constants.TRIAL_BLOCK, trials - start))
              for block, start in enumerate(range(0, trials, Constants.TRIAL_BLOCK))]
    with ThreadPoolExecutor(max_workers=thread_count(threads)) as executor:
        results = list(executor.map(lambda job: run(*job), blocks))

    values = np.concatenate([last for last, _ in results]) / float(n)
    perturbations = sum(count for _, count in results)
    LOGGER.info('Simulated %d %s trials to n=%d (%d blocks)', trials, mode, n, len(blocks))
    return LastVisitSample(n, values, seed, trials, mode, s, perturbations)
