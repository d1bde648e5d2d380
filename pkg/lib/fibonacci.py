"""
Reinduced Fibonacci system as a clocked walk on the levels V_1, V_2, ...

From level j >= 2 the walk moves to level i >= j - 1 with probability (1 - lam) lam^(i-j+1),
from V_1 to level i >= 1 with probability (1 - lam) lam^(i-1). Leaving level m costs the clock
value S_{m-1} (V_1 costs S_0 = 1). The reinduced return time tau is the total cost of an
excursion from V_1 back to V_1.
"""
import logging
import math

import numpy as np
from scipy import optimize

from lib.combinatorics import beta_of_lambda, fibonacci
from lib.common import Constants
from lib.errors import ConfigError, RootNotBracketed
from lib.fitting import fit_power_law
from lib.pressure import ABSCISSA, ROOT, PressureSolveResult

LOGGER = logging.getLogger('pressure-lab.fibonacci')


def _check_lambda(lam):
    if not Constants.FIB_LAMBDA_MIN < lam < Constants.FIB_LAMBDA_MAX:
        raise ConfigError('lambda must lie in ({:.6f}, 1/2), got {}'.format(Constants.FIB_LAMBDA_MIN, lam))


def level_costs(levels, clock='fibonacci'):
    """
    Cost of leaving each level 1..levels
    """
    if clock == 'fibonacci':
        return np.array([fibonacci(m - 1) for m in range(1, levels + 1)], dtype=np.int64)
    if clock == 'unit':
        return np.ones(levels, dtype=np.int64)
    raise ConfigError('Unknown clock: ' + str(clock))


def level_cap(n_max, clock='fibonacci'):
    """
    Highest level that can be visited by an excursion returning by time n_max
    """
    if clock == 'unit':
        return n_max + 2
    level = 1
    while fibonacci(level) <= n_max:
        level += 1
    return level + 1


def _step_weights(lam, t, u, costs):
    # K[m, i] = ((1-lam) lam^(i-m+1))^t e^(-u cost_m) for levels m, i >= 2, index = level - 1
    levels = costs.size
    K = np.zeros((levels, levels))
    log_lam = math.log(lam)
    log_rest = math.log1p(-lam)
    for m in range(2, levels + 1):
        i = np.arange(max(2, m - 1), levels + 1)
        K[m - 1, i - 1] = np.exp(t * (log_rest + (i - m + 1) * log_lam) - u * costs[m - 1])
    return K


class FibClassTable(object):
    """
    Output of the clocked-walk DP

    joint[k, n]: weight of excursions with k + 1 steps and total time n, for k <= k_max
    by_time[n]: weight of excursions with total time n, any number of steps
    by_steps[k]: row sums of joint, excursions with k + 1 steps returning by the horizon
    beyond_steps[n]: weight at time n carried by excursions longer than k_max + 1 steps
    """

    def __init__(self, lam, t, u, joint, by_time, overflow, in_flight, levels):
        self.lam = lam
        self.t = t
        self.u = u
        self.joint = joint
        self.by_time = by_time
        self.overflow = overflow
        self.in_flight = in_flight
        self.levels = levels

    @property
    def by_steps(self):
        return self.joint.sum(axis=1)

    @property
    def beyond_steps(self):
        return self.by_time - self.joint.sum(axis=0)

    @property
    def returned(self):
        return math.fsum(self.by_time)

    def tail(self):
        """
        mu(tau > n) for n = 0..n_max
        """
        return 1.0 - np.cumsum(self.by_time)

    def conservation_defect(self):
        return self.returned + self.in_flight + self.overflow - 1.0

    def __str__(self):
        return 'FibClassTable(lambda={:g}, t={:g}, u={:g}, horizon {}, returned {:.12f})'.format(
            self.lam, self.t, self.u, self.by_time.size - 1, self.returned)


def fib_walk_dp(lam, t=1.0, u=0.0, n_max=10000, clock='fibonacci', k_max=200):
    """
    Exact DP over (level, accumulated time) for the reinduced Fibonacci return time

    :param lam: lambda in (2/(3+sqrt 5), 1/2)
    :param t: inverse temperature, steps weighted by P^t
    :param u: every unit of clock time weighted by e^-u
    :param n_max: time horizon, <= 10^5
    :param clock: 'fibonacci' or 'unit' (the Stratmann-Vogt reduction)
    :param k_max: rows of the joint (steps, time) table hold excursions of 1..k_max + 1 steps
    :return: (tail array mu(tau > n), FibClassTable)
    """
    _check_lambda(lam)
    if not 1 <= n_max <= 100000:
        raise ConfigError('n_max must lie in [1, 10^5], got {}'.format(n_max))
    if clock == 'unit' and n_max > 2000:
        raise ConfigError('The unit clock keeps one level per time step, n_max must be <= 2000')

    levels = level_cap(n_max, clock)
    costs = level_costs(levels, clock)
    K = _step_weights(lam, t, u, costs)

    log_lam = math.log(lam)
    log_rest = math.log1p(-lam)
    lam_t = math.exp(t * log_lam)
    # weight sent above the top level, per source level
    spill = np.zeros(levels)
    for m in range(2, levels + 1):
        spill[m - 1] = math.exp(t * (log_rest + (levels - m + 2) * log_lam) - u * costs[m - 1]) / (1.0 - lam_t)
    back = math.exp(t * log_rest - u * costs[1])

    # mass[m][T]: weight sitting at level m + 1 at time T, waiting to be moved
    mass = np.zeros((levels, n_max + 1))
    by_time = np.zeros(n_max + 1)

    # first step out of V_1
    start = math.exp(t * log_rest - u * costs[0])
    if costs[0] <= n_max:
        by_time[costs[0]] += start
        i = np.arange(2, levels + 1)
        mass[1:, costs[0]] = np.exp(t * (log_rest + (i - 1) * log_lam) - u * costs[0])
    overflow = math.exp(t * (log_rest + levels * log_lam) - u * costs[0]) / (1.0 - lam_t)

    rows = np.arange(1, levels)
    shifts = costs[1:]
    for T in range(costs[0] + 1, n_max + 1):
        src = T - shifts
        ok = src >= 0
        g = np.zeros(levels - 1)
        g[ok] = mass[rows[ok], src[ok]]
        if not g.any():
            continue
        mass[1:, T] = g @ K[1:, 1:]
        by_time[T] = back * g[0]
        overflow += float(spill[1:] @ g)

    # weight still waiting to leave its level at the horizon
    in_flight = 0.0
    for m in range(2, levels + 1):
        c = int(costs[m - 1])
        lo = max(0, n_max - c + 1)
        in_flight += math.fsum(mass[m - 1, lo:])

    joint = _joint_table(K, costs, start, mass[1:, costs[0]], back, n_max, k_max)
    table = FibClassTable(lam, t, u, joint, by_time, overflow, in_flight, levels)
    if t == 1.0 and u == 0.0:
        LOGGER.debug('%s: conservation defect %.2e', table, table.conservation_defect())
    return table.tail(), table


def _joint_table(K, costs, start, first, back, n_max, k_max):
    # v[row, T - lo]: weight at level row + 2 at time T after k steps
    joint = np.zeros((k_max + 1, n_max + 1))
    lo = hi = int(costs[0])
    if lo > n_max:
        return joint
    joint[0, lo] = start
    v = first[:, None].copy()

    # levels sharing a clock cost move together, one matrix product per distinct cost
    by_cost = {}
    for row, c in enumerate(costs[1:]):
        by_cost.setdefault(int(c), []).append(row)
    groups = [(c, np.array(rows), K[np.array(rows) + 1, 1:].T) for c, rows in sorted(by_cost.items())]
    c_min, c_max = groups[0][0], groups[-1][0]
    c_back = int(costs[1])

    for k in range(1, k_max + 1):
        b = min(hi, n_max - c_back)
        if lo <= b:
            joint[k, lo + c_back:b + c_back + 1] = back * v[0, :b - lo + 1]
        new_lo, new_hi = lo + c_min, min(hi + c_max, n_max)
        if new_lo > n_max:
            break
        layer = np.zeros((v.shape[0], new_hi - new_lo + 1))
        for c, rows, KT in groups:
            b = min(hi, n_max - c)
            if lo <= b:
                layer[:, lo + c - new_lo:b + c - new_lo + 1] += KT @ v[rows, :b - lo + 1]
        v, lo, hi = layer, new_lo, new_hi
    return joint


def _spectral_radius(K):
    return float(np.max(np.abs(np.linalg.eigvals(K))))


def _level_radius(lam, t, u, levels):
    return _spectral_radius(_step_weights(lam, t, u, level_costs(levels))[1:, 1:])


def fib_convergence_abscissa(lam, t, levels=80):
    """
    Smallest u >= 0 above which F(t, u) converges

    The level operator decreases entrywise in u, so its spectral radius crosses 1 once.
    """
    _check_lambda(lam)
    if _level_radius(lam, t, 0.0, levels) < 1.0:
        return 0.0
    hi = 1.0
    while _level_radius(lam, t, hi, levels) >= 1.0:
        hi *= 2.0
        if hi > 1024.0:
            raise RootNotBracketed('Level operator at t={} does not contract for u <= 1024'.format(t))
    return optimize.brentq(lambda u: _level_radius(lam, t, u, levels) - 1.0, 0.0, hi, xtol=1e-15, rtol=1e-14)


def fib_return_series(lam, t, u, levels=80):
    """
    F(t, u) = sum over excursions of P^t e^(-u tau), by a level-space linear solve

    :return: F, math.inf when the truncated level operator has spectral radius >= 1
    """
    _check_lambda(lam)
    costs = level_costs(levels)
    K = _step_weights(lam, t, u, costs)[1:, 1:]
    if _spectral_radius(K) >= 1.0:
        return math.inf

    log_lam = math.log(lam)
    log_rest = math.log1p(-lam)
    i = np.arange(2, levels + 1)
    first = np.exp(t * (log_rest + (i - 1) * log_lam) - u * costs[0])
    home = np.zeros(levels - 1)
    home[0] = math.exp(t * log_rest - u * costs[1])
    x = np.linalg.solve(np.eye(levels - 1) - K, home)
    return math.exp(t * log_rest - u * costs[0]) + float(first @ x)


def fib_pressure(lam, t, levels=80):
    """
    Pressure P(phi_t) of the Fibonacci map as the root of log F(t, u) = 0
    """
    _check_lambda(lam)
    if t > 1.0:
        raise ConfigError('Fibonacci pressure is solved for t <= 1, got {}'.format(t))

    def g(y):
        return math.log(fib_return_series(lam, t, math.exp(y), levels))

    if t == 1.0:
        at_zero = fib_return_series(lam, t, 0.0, levels)
        return PressureSolveResult(ROOT, 0.0, math.log(at_zero), s=0.0, residual=at_zero - 1.0)

    # log F is finite and continuous on (abscissa, inf)
    a = fib_convergence_abscissa(lam, t, levels)
    hi = max(0.0, math.log(a) + 1.0) if a > 0.0 else 0.0
    while g(hi) > 0:
        hi += 1.0
        if hi > 10:
            raise RootNotBracketed('No upper bracket for the Fibonacci pressure at t={}'.format(t))
    if a > 0.0:
        lo = math.log(a) + Constants.FIB_ABSCISSA_OFFSET
        while not math.isfinite(fib_return_series(lam, t, math.exp(lo), levels)):
            lo += Constants.FIB_ABSCISSA_OFFSET
        at_abscissa = g(lo)
        if at_abscissa <= 0:
            LOGGER.warning('Fibonacci pressure at t=%g sits on the convergence abscissa %.12g', t, a)
            return PressureSolveResult(ABSCISSA, a, at_abscissa, s=1.0 - t, bracket=(a, a),
                                       residual=math.expm1(at_abscissa), boundary=True)
    else:
        lo = hi - 2.0
        while g(lo) < 0:
            lo -= 2.0
            if lo < -80:
                raise RootNotBracketed('No lower bracket for the Fibonacci pressure at t={}'.format(t))

    y, info = optimize.brentq(g, lo, hi, xtol=1e-13, maxiter=400, full_output=True)
    u0 = math.exp(y)
    value = fib_return_series(lam, t, u0, levels)
    return PressureSolveResult(ROOT, u0, math.log(value), s=1.0 - t, bracket=(math.exp(lo), math.exp(hi)),
                               residual=value - 1.0, iterations=info.iterations)


def fib_pressure_bounds(lam, t):
    """
    Exponents of the two-sided bound C0 (1-t)^a <= P(phi_t) <= C1 (1-t)^b

    R is taken with the orientation that makes log R positive; at t = 1 the lower
    exponent is 1/beta.
    """
    _check_lambda(lam)
    x = (lam * (1.0 - lam)) ** t
    root = math.sqrt(1.0 - 4.0 * x)
    log_r = abs(math.log(4.0 * x) - 2.0 * math.log1p(-root))
    log_g = math.log(Constants.GOLDEN_MEAN)
    return {'lower_exponent': log_g / log_r, 'upper_exponent': lam * log_g / (2.0 * t * (1.0 - 2.0 * lam))}


def fib_pressure_fit(lam, t_grid):
    """
    Fit log P(phi_t) against log(1 - t), target slope 1/beta
    """
    _check_lambda(lam)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid >= 1.0):
        raise ConfigError('t grid must lie below 1')
    results = [fib_pressure(lam, t) for t in t_grid]
    u0 = np.array([r.u0 for r in results])
    report = fit_power_law(1.0 - t_grid, u0, min_decades=1.0)
    beta = beta_of_lambda(lam)
    report.extra = {
        'beta': beta,
        'target_exponent': 1.0 / beta,
        'bounds': fib_pressure_bounds(lam, float(t_grid.max())),
        'curve': {'t': t_grid.tolist(), 'u0': u0.tolist(), 'kind': [r.kind for r in results]},
    }
    LOGGER.info('Fibonacci pressure fit lambda=%g: %s (target %.5f)', lam, report, 1.0 / beta)
    return report


def fib_marginal(lam, k_max=40, levels=400):
    """
    One-step marginal mu(sigma = S_k) from the occupation measure of an excursion

    Visits to level k + 1 per excursion, divided by the mean excursion length.
    """
    _check_lambda(lam)
    costs = np.ones(levels, dtype=np.int64)
    K = _step_weights(lam, 1.0, 0.0, costs)[1:, 1:]
    i = np.arange(2, levels + 1)
    first = (1.0 - lam) * np.power(lam, i - 1)
    # occupation of levels >= 2 solves occ = first + occ K
    occupation = np.linalg.solve((np.eye(levels - 1) - K).T, first)
    visits = np.concatenate([[1.0], occupation])
    mean_steps = math.fsum(visits)
    marginal = visits[:k_max + 1] / mean_steps
    k = np.arange(k_max + 1)
    predicted = (1.0 - 2.0 * lam) / (1.0 - lam) * np.power(lam / (1.0 - lam), k)
    return {'k': k.tolist(), 'marginal': marginal.tolist(), 'predicted': predicted.tolist(),
            'mean_steps': mean_steps, 'max_abs_error': float(np.max(np.abs(marginal - predicted)))}
