import logging
import math
from fractions import Fraction

import numpy as np
from scipy import special

from lib.common import Constants
from lib.errors import ConfigError, InvalidDyck
from lib.induced_model import InducedModel, normalize
from lib.tails import TailLaw, log_catalan_over_4k

LOGGER = logging.getLogger('pressure-lab.combinatorics')

UP = 'u'
DOWN = 'd'


def catalan(n, limit=Constants.CATALAN_EXACT_MAX):
    """
    C_n = binom(2n, n) / (n + 1), exact

    :param n: integer >= 0
    :param limit: largest n accepted
    :return: int
    """
    if n < 0:
        raise ConfigError('Catalan index must be >= 0, got {}'.format(n))
    if n > limit:
        raise ConfigError('Catalan index {} above the exact-mode maximum {}'.format(n, limit))
    return math.comb(2 * n, n) // (n + 1)


def catalan_sequence(count):
    """
    C_0 .. C_{count-1} by the ratio recurrence C_{k+1} = C_k 2(2k+1) / (k+2)
    """
    values = [1]
    for k in range(count - 1):
        values.append(values[-1] * 2 * (2 * k + 1) // (k + 2))
    return values[:count]


def fibonacci(k):
    """
    Clock values S_0, S_1, S_2, ... = 1, 2, 3, 5, 8, ...
    """
    if k < 0:
        raise ConfigError('Fibonacci index must be >= 0, got {}'.format(k))
    a, b = 1, 2
    for _ in range(k):
        a, b = b, a + b
    return a


def beta_of_lambda(lam):
    """
    Tail exponent of the Fibonacci induced system, log((1 - lam) / lam) / log G
    """
    if not 0.0 < lam < 0.5:
        raise ConfigError('lambda must lie in (0, 1/2), got {}'.format(lam))
    return math.log((1.0 - lam) / lam) / math.log(Constants.GOLDEN_MEAN)


class DyckWord(object):
    """
    Balanced word over {u, d} whose prefixes never hold more downs than ups
    """

    def __init__(self, letters):
        letters = ''.join(letters)
        height = 0
        for position, letter in enumerate(letters):
            if letter == UP:
                height += 1
            elif letter == DOWN:
                height -= 1
            else:
                raise InvalidDyck('Unknown letter {!r}'.format(letter), position)
            if height < 0:
                raise InvalidDyck('Prefix ending at {} has more downs than ups'.format(position), position)
        if height != 0:
            raise InvalidDyck('Word is unbalanced by {}'.format(height), len(letters))
        self.letters = letters

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, DyckWord) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __str__(self):
        return self.letters

    def __repr__(self):
        return 'DyckWord({!r})'.format(self.letters)


class LevelPath(object):
    """
    Excursion (V_2, V_i1, ..., V_2) of the Stratmann-Vogt coding avoiding V_1

    A path of n levels encodes a first return of inducing time n; (2,) is the
    single domain with inducing time 1.
    """

    def __init__(self, levels):
        levels = tuple(int(level) for level in levels)
        if not levels or levels[0] != 2 or levels[-1] != 2:
            raise ConfigError('Level path must start and end at level 2: {}'.format(levels))
        for i, j in zip(levels[:-1], levels[1:]):
            if j < 2 or j < i - 1:
                raise ConfigError('Transition {} -> {} is not allowed'.format(i, j))
        self.levels = levels

    @property
    def inducing_time(self):
        return len(self.levels)

    def __eq__(self, other):
        return isinstance(other, LevelPath) and self.levels == other.levels

    def __hash__(self):
        return hash(self.levels)

    def __str__(self):
        return '(' + ', '.join('V{}'.format(level) for level in self.levels) + ')'

    def __repr__(self):
        return 'LevelPath({})'.format(self.levels)


def dyck_encode(path):
    """
    Each step i -> j becomes u^(1 + j - i) d

    :param path: LevelPath
    :return: DyckWord of length 2 (n - 1)
    """
    letters = []
    for i, j in zip(path.levels[:-1], path.levels[1:]):
        letters.append(UP * (1 + j - i) + DOWN)
    return DyckWord(''.join(letters))


def dyck_decode(word):
    """
    Inverse of dyck_encode

    :param word: DyckWord or str
    :return: LevelPath
    """
    if not isinstance(word, DyckWord):
        word = DyckWord(word)
    levels = [2]
    ups = 0
    for letter in word.letters:
        if letter == UP:
            ups += 1
        else:
            levels.append(levels[-1] + ups - 1)
            ups = 0
    return LevelPath(levels)


def dyck_words(k):
    """
    All Dyck words of length 2k in lexicographic order (u < d)
    """
    def extend(prefix, ups, downs):
        if ups == k and downs == k:
            yield DyckWord(prefix)
            return
        if ups < k:
            yield from extend(prefix + UP, ups + 1, downs)
        if downs < ups:
            yield from extend(prefix + DOWN, ups, downs + 1)

    return extend('', 0, 0)


def _first_return_paths(n):
    def extend(levels):
        remaining = n - len(levels)
        current = levels[-1]
        if remaining == 0:
            if current == 2:
                yield LevelPath(levels)
            return
        # level j must still be able to come down to 2 in the remaining steps
        for j in range(max(2, current - 1), 2 + remaining):
            yield from extend(levels + [j])

    return extend([2])


def enumerate_first_returns(n):
    """
    Every level path of inducing time n, by exhaustive search over the transition rule
    """
    if not 1 <= n <= Constants.EXHAUSTIVE_MAX:
        raise ConfigError('Exhaustive enumeration needs 1 <= n <= {}, got {}'.format(Constants.EXHAUSTIVE_MAX, n))
    return list(_first_return_paths(n))


def count_first_returns(n, exhaustive=False):
    """
    Number of first-return words of length n

    :param n: inducing time >= 1
    :param exhaustive: count by walking every path instead of the level DP
    :return: int
    """
    if n < 1:
        raise ConfigError('Inducing time must be >= 1, got {}'.format(n))
    if exhaustive:
        if n > Constants.EXHAUSTIVE_MAX:
            raise ConfigError('Exhaustive mode needs n <= {}'.format(Constants.EXHAUSTIVE_MAX))
        return sum(1 for _ in _first_return_paths(n))
    if n > Constants.CATALAN_EXACT_MAX:
        raise ConfigError('DP mode needs n <= {}'.format(Constants.CATALAN_EXACT_MAX))

    # ways[h] = number of partial paths at level h + 2
    ways = np.zeros(n, dtype=object)
    ways[0] = 1
    for step in range(1, n):
        reachable = n - step
        # new level j collects every level i <= j + 1
        prefix = np.cumsum(ways[:reachable + 1])
        ways = np.zeros(n, dtype=object)
        ways[:reachable] = prefix[1:reachable + 1]
    return int(ways[0])


def sv_model(lam, t=1.0, n_max=Constants.SV_N_MAX):
    """
    First return model of the Stratmann-Vogt map to V_1

    Class n holds C_{n-1} branches, each of conformal weight (1-lam)^t (lam(1-lam))^(t(n-1)).

    :param lam: lambda in (0, 1/2]
    :param t: inverse temperature of the potential -t log|T'|
    :param n_max: number of enumerated classes
    :return: InducedModel (normalized when t = 1)
    """
    if not 0.0 < lam <= 0.5:
        raise ConfigError('lambda must lie in (0, 1/2], got {}'.format(lam))
    if n_max < 10:
        raise ConfigError('n_max must be >= 10, got {}'.format(n_max))

    k = np.arange(n_max, dtype=float)
    log_counts = log_catalan_over_4k(k) + k * Constants.LOG4

    exact = []
    for value in catalan_sequence(n_max):
        if value >= Constants.EXACT_COUNT_LIMIT:
            break
        exact.append(value)
    log_counts[:len(exact)] = [math.log(value) for value in exact]

    log_step = math.log(lam * (1.0 - lam))
    log_weights = t * (math.log(1.0 - lam) + k * log_step)
    LOGGER.debug('SV model lambda=%g t=%g: %d exact counts, %d classes', lam, t, len(exact), n_max)

    model = InducedModel(log_counts + log_weights, log_counts=log_counts, exact_counts=exact,
                         tail_law=TailLaw.catalan(lam, t, truncation=n_max), name='sv',
                         meta={'lambda': lam, 't': t})
    if t == 1.0:
        model = normalize(model)
    return model


def log_reflection_delta(k, M, lam):
    """
    log of binom(2k, M + k) [lam (1 - lam)]^k
    """
    k = np.asarray(k, dtype=float)
    log_binom = special.gammaln(2 * k + 1) - special.gammaln(M + k + 1) - special.gammaln(k - M + 1)
    return log_binom + k * math.log(lam * (1.0 - lam))


def reflection_delta(k, M, lam):
    if not 1 <= M <= k:
        raise ConfigError('Reflection count needs 1 <= M <= k, got M={} k={}'.format(M, k))
    return float(np.exp(log_reflection_delta(k, M, lam)))


def reflection_delta_exact(k, M, lam):
    """
    Exact rational value for rational lambda
    """
    if not 1 <= M <= k:
        raise ConfigError('Reflection count needs 1 <= M <= k, got M={} k={}'.format(M, k))
    lam = Fraction(lam)
    return math.comb(2 * k, M + k) * (lam * (1 - lam)) ** k


def reflection_stationary_point(M, lam):
    """
    Real root of Delta_{k-1} = Delta_k, i.e. (1 - 4x) k^2 + 2 x k - M^2 = 0 with x = lam(1 - lam)
    """
    x = lam * (1.0 - lam)
    a = 1.0 - 4.0 * x
    return (-x + math.sqrt(x * x + a * M * M)) / a


def reflection_argmax(M, lam, k_max=None):
    """
    argmax over k >= M of Delta_k, with the predicted k0 = M / (1 - 2 lam)

    :return: (argmax, k0)
    """
    if not 0.0 < lam < 0.5:
        raise ConfigError('lambda must lie in (0, 1/2), got {}'.format(lam))
    k0 = M / (1.0 - 2.0 * lam)
    if k_max is None:
        k_max = int(4 * k0) + 50
    k = np.arange(M, k_max + 1)
    best = int(k[np.argmax(log_reflection_delta(k, M, lam))])
    LOGGER.debug('Reflection argmax M=%d lambda=%g: k=%d, k0=%.3f', M, lam, best, k0)
    return best, k0


def reflection_sign_changes(M, lam, k_max=None):
    """
    Number of sign changes of log Delta_k - log Delta_{k-1} over k in (M, k_max]
    """
    k0 = M / (1.0 - 2.0 * lam)
    if k_max is None:
        k_max = int(4 * k0) + 50
    diffs = np.diff(log_reflection_delta(np.arange(M, k_max + 1), M, lam))
    signs = np.sign(diffs[diffs != 0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
