"""
One function per subcommand. Each takes a validated ExperimentConfig and returns
(summary, curves) with curves = {name: (header, rows)}.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lib.combinatorics import (beta_of_lambda, catalan, count_first_returns, dyck_decode, dyck_encode, dyck_words,
                               sv_model)
from lib.common import Constants
from lib.errors import ConfigError
from lib.fibonacci import fib_marginal, fib_pressure_fit, fib_walk_dp
from lib.fitting import fit_power_law, geometric_grid
from lib.induced_model import expected_tau, gibbs_weights, measure_distance, tail_band, tails
from lib.map_families import GaspardWang, flat_induced_model, gaspard_wang_model, pm_cylinders, pm_induced_model
from lib.montecarlo import simulate_last_visit, thread_count
from lib.potential import PotentialFamily
from lib.pressure import (eigen_asymptotics_fit, liftability_check, matrix_pressure, pi_s, pressure_relation_fit,
                          relation_band, solve_u0, sv_closed_form_pressure)
from lib.renewal import (arcsine_cdf, correlation, discrete_ks_distance, drift_schedule, ks_distance,
                         last_visit_law, renewal_limit, renewal_sequence, two_sample_ks)

LOGGER = logging.getLogger('pressure-lab.experiments')


def sweep(func, items, threads=None):
    """
    func over items on a thread pool, results in item order
    """
    with ThreadPoolExecutor(max_workers=thread_count(threads)) as executor:
        return list(executor.map(func, items))


def _threads(config):
    value = config.get('threads')
    return None if value is None else int(value)


def _tail_grid(lo, hi, points=40):
    return np.unique(geometric_grid(lo, hi, points).astype(np.int64))


def catalan_check(config):
    n_max = config.integer('n_max', 14)
    rows = []
    for n in range(1, n_max + 1):
        dp = count_first_returns(n)
        exhaustive = count_first_returns(n, exhaustive=True) if n <= Constants.EXHAUSTIVE_MAX else dp
        rows.append((n, dp, exhaustive, catalan(n - 1)))
    counts_equal = all(dp == ex == cat for _, dp, ex, cat in rows)

    # bijection between first returns and Dyck words on the small cases
    bijection = True
    for k in range(0, min(n_max, 10)):
        for word in dyck_words(k):
            if dyck_encode(dyck_decode(word)) != word:
                bijection = False
    summary = {'n_max': n_max, 'all_equal': counts_equal and bijection, 'counts_equal': counts_equal,
               'bijection': bijection}
    return summary, {'counts': (('n', 'dp', 'exhaustive', 'catalan'), rows)}


def sv_tails(config):
    lam = config.number('lambda', 0.5)
    n_max = config.integer('n_max', Constants.SV_N_MAX)
    model = sv_model(lam, 1.0, n_max)
    if lam == 0.5:
        grid = _tail_grid(1000, 10 ** 6)
        values = tails(model, grid)
        fit = fit_power_law(grid, values)
        scaled = values * np.sqrt(grid)
        target = 1.0 / math.sqrt(math.pi)
        summary = {'lambda': lam, 'fit': fit, 'exponent': -fit.exponent, 'constant_at_max': float(scaled[-1]),
                   'target_constant': target,
                   'pass': abs(-fit.exponent - 0.5) <= 0.005 and abs(scaled[-1] / target - 1.0) <= 0.02}
    else:
        grid = _tail_grid(10, n_max)
        values = tails(model, grid)
        scaled = values * np.sqrt(grid)
        summary = {'lambda': lam, 'growth_rate': model.growth_rate,
                   'decay_rate': -(math.log(values[-1]) - math.log(values[0])) / float(grid[-1] - grid[0])}
    rows = list(zip(grid, values, scaled))
    return summary, {'tails': (('n', 'tail', 'sqrt_n_tail'), rows)}


def sv_pressure(config):
    lam = config.number('lambda', 0.5)
    t = config.number('t', 1.0)
    model = sv_model(lam, t, config.integer('n_max', Constants.SV_N_MAX))
    result = solve_u0(model, 0.0)
    summary = {'lambda': lam, 't': t, 'kind': result.kind, 'u0': result.u0, 'result': result,
               'liftability': liftability_check(model, 0.0, result)}
    if lam == 0.5:
        expected = (1.0 - t) * Constants.LOG4
        summary['expected_u0'] = expected
        summary['pass'] = abs(result.u0 - expected) < 1e-6
    else:
        N = config.integer('N', 400)
        closed = sv_closed_form_pressure(lam, t)
        matrix = matrix_pressure(lam, t, 0.0, N)
        summary.update(closed_form_induced_pressure=closed, matrix_induced_pressure=matrix, N=N,
                       pass_matrix=abs(matrix - closed) < 1e-6)
    return summary, {}


def fib_tails(config):
    lambdas = config.numbers('lambdas', [config.number('lambda', 0.45)] if config.get('lambda') else
                             [0.42, 0.45, 0.48])
    n_max = config.integer('n_max', 10000)

    def one(lam):
        tail, table = fib_walk_dp(lam, n_max=n_max)
        beta = beta_of_lambda(lam)
        grid = _tail_grid(100, n_max)
        scaled = tail[grid] * grid.astype(float) ** beta
        return lam, beta, grid, tail[grid], scaled, table

    rows = []
    reports = []
    for lam, beta, grid, values, scaled, table in sweep(one, lambdas, _threads(config)):
        ratio = float(scaled.max() / scaled.min())
        reports.append({'lambda': lam, 'beta': beta, 'band': [float(scaled.min()), float(scaled.max())],
                        'band_ratio': ratio, 'conservation_defect': table.conservation_defect(),
                        'returned_short': math.fsum(table.by_steps),
                        'returned_long': math.fsum(table.beyond_steps), 'pass': ratio <= 4.0})
        rows.extend((lam, n, v, sc) for n, v, sc in zip(grid, values, scaled))
    summary = {'n_max': n_max, 'lambdas': reports, 'pass': all(r['pass'] for r in reports)}
    return summary, {'tails': (('lambda', 'n', 'tail', 'scaled_tail'), rows)}


def fib_pressure(config):
    lam = config.number('lambda', 0.45)
    t_grid = config.grid('t_grid', 'lin:0.9:0.995:12')
    report = fib_pressure_fit(lam, t_grid)
    target = report.extra['target_exponent']
    curve = report.extra['curve']
    summary = {'lambda': lam, 'fit': report, 'target_exponent': target,
               'pass': abs(report.exponent / target - 1.0) <= 0.05}
    return summary, {'pressure': (('t', 'u0'), list(zip(curve['t'], curve['u0'])))}


def fib_marginal_experiment(config):
    lam = config.number('lambda', 0.45)
    result = fib_marginal(lam, k_max=config.integer('n_max', 40))
    summary = {'lambda': lam, 'mean_steps': result['mean_steps'], 'max_abs_error': result['max_abs_error'],
               'pass': result['max_abs_error'] < 1e-10}
    rows = list(zip(result['k'], result['marginal'], result['predicted']))
    return summary, {'marginal': (('k', 'marginal', 'predicted'), rows)}


def pm_model(config):
    alpha = config.number('alpha', 2.0)
    b = config.number('b', 1.0)
    t = config.number('t', 1.0)
    n_max = config.integer('n_max', Constants.PM_N_MAX)
    model = pm_induced_model(alpha, b, t, n_max)
    table, _ = pm_cylinders(alpha, b, n_max, t)
    summary = {'alpha': alpha, 'b': b, 't': t, 'n_max': n_max, 'markov': b == 1.0}
    if t == 1.0:
        grid = _tail_grid(100, n_max)
        values = tails(model, grid)
        fit = fit_power_law(grid, values)
        summary.update(fit=fit, exponent=-fit.exponent, target_exponent=1.0 / alpha,
                       total_mass=model.meta.get('total_mass'), expected_tau=expected_tau(model, 0.0, 0.0),
                       pass_exponent=abs(-fit.exponent - 1.0 / alpha) <= 0.02)
    else:
        result = solve_u0(model, 0.0)
        summary.update(kind=result.kind, u0=result.u0, result=result)
    return summary, {'cylinders': (('n', 'left', 'right', 'weight'), list(table.rows()))}


def flat_model(config):
    alpha = config.number('alpha', 4.0 / 3.0)
    b = config.number('b', 1.0)
    n_max = config.integer('n_max', Constants.FLAT_N_MAX)
    model, a, zeta = flat_induced_model(alpha, b, n_max)
    beta = 1.0 / alpha
    log_slope = math.log(2.0 * b * alpha)
    n = np.arange(1, n_max + 1, dtype=float)
    normalized_a = a * n ** beta * (log_slope / b) ** beta
    steps = np.abs(np.diff(zeta))
    nonzero = steps[steps > 0]
    ratio = float(np.median(nonzero[1:] / nonzero[:-1])) if nonzero.size > 2 else 0.0
    grid = _tail_grid(100, n_max)
    fit = fit_power_law(grid, tails(model, grid))
    summary = {'alpha': alpha, 'b': b, 'beta': beta, 'n_max': n_max, 'a_ratio_at_max': float(normalized_a[-1]),
               'zeta_limit': float(zeta[-1]), 'zeta_step_ratio': ratio, 'fit': fit, 'exponent': -fit.exponent,
               'pass': abs(normalized_a[-1] - 1.0) <= 0.02 and abs(-fit.exponent - beta) <= 0.02}
    rows = list(zip(n.astype(np.int64), a, zeta, normalized_a))
    return summary, {'sequence': (('n', 'a_n', 'zeta_n', 'scaled_a_n'), rows)}


def eigen_asym(config):
    betas = config.numbers('betas', [config.number('beta')] if config.get('beta') else [0.4, 0.5, 0.75])
    u_grid = config.grid('u_grid', Constants.U_GRID)
    tail_kind = config.get('tail_kind')
    n_max = config.integer('n_max', Constants.SCALAR_N_MAX)

    def one(beta):
        return beta, eigen_asymptotics_fit(gaspard_wang_model(beta, tail_kind, n_max), u_grid)

    reports, rows = [], []
    for beta, fit in sweep(one, betas, _threads(config)):
        theory = fit.extra['theory_constant']
        residual_target = min(2.0 * beta, 1.0) - 0.1
        ok = (abs(fit.exponent / beta - 1.0) <= 0.01 and abs(fit.constant / theory - 1.0) <= 0.02
              and fit.extra['residual_exponent'] >= residual_target)
        reports.append({'beta': beta, 'fit': fit, 'residual_target': residual_target, 'pass': ok})
        curve = fit.extra['curve']
        rows.extend((beta, u, v, r) for u, v, r in zip(curve['u'], curve['one_minus_lambda'], curve['residual']))
    summary = {'betas': reports, 'pass': all(r['pass'] for r in reports)}
    return summary, {'eigen': (('beta', 'u', 'one_minus_lambda', 'residual'), rows)}


def relation(config):
    beta = config.number('beta', 0.5)
    potential = config.potential()
    s_grid = config.grid('s_grid', Constants.S_GRID)
    model = gaspard_wang_model(beta, config.get('tail_kind'), config.integer('n_max', Constants.SCALAR_N_MAX))
    fit = pressure_relation_fit(model, potential, s_grid)
    band = tail_band(model, 10, model.truncation, beta)
    banded = model.replace(tail_law=model.tail_law.with_band(band))
    extra = fit.extra
    summary = {'beta': beta, 'potential': potential, 'fit': fit, 'band': relation_band(banded, s_grid, potential),
               'pass_exponent': abs(fit.exponent * beta - 1.0) <= 0.02,
               'pass_constant': abs(extra['C_pointwise'] / extra['C_true'] - 1.0) <= 0.05,
               'pass_lower_bound': extra['lower_bound_ratio_monotone']}
    summary['pass'] = summary['pass_exponent'] and summary['pass_constant'] and summary['pass_lower_bound']
    curve = extra['curve']
    rows = list(zip(curve['s'], curve['u0'], curve['pbar'], curve['Q'], curve['Q_lead']))
    return summary, {'relation': (('s', 'u0', 'pbar', 'Q', 'Q_lead'), rows)}


def pi_scaling(config):
    beta = config.number('beta', 0.5)
    potential = config.potential()
    s_grid = config.grid('s_grid', Constants.S_GRID)
    model = gaspard_wang_model(beta, config.get('tail_kind'), config.integer('n_max', Constants.SCALAR_N_MAX))
    fit = pi_s(model, potential, s_grid)
    if potential.kind == 'polynomial':
        target = beta / potential.gamma
        ok = abs(fit.exponent / target - 1.0) <= 0.03
    else:
        target = 1.0
        ok = abs(fit.exponent - 1.0) <= 0.02
    curve = fit.extra['curve']
    summary = {'beta': beta, 'potential': potential, 'fit': fit, 'target_exponent': target, 'pass': ok}
    return summary, {'pi': (('s', 'pi'), list(zip(curve['s'], curve['pi'])))}


def _geometric_law(count=200):
    return np.power(0.5, np.arange(1, count + 1))


def renewal(config):
    beta = config.number('beta', 0.75)
    n_max = config.integer('n', 100000)
    model = gaspard_wang_model(beta, config.get('tail_kind'), max(n_max, config.integer('n_max', n_max)))
    q = gibbs_weights(model, 0.0, 0.0).q
    seq = renewal_sequence(q, n_max)
    scaled = seq.scaled(beta)
    top = scaled[n_max // 2 - 1:]
    variation = float((top.max() - top.min()) / top.mean())

    check = min(n_max, 1 << 14)
    fast = renewal_sequence(q, check, method='fft')
    agreement = float(np.max(np.abs(fast.u - seq.u[:check + 1])))

    geometric = renewal_sequence(_geometric_law(), 1000)
    c = model.tail_law.c * math.exp(model.tail_law.log_scale)
    summary = {'beta': beta, 'n_max': n_max, 'scaled_at_max': float(scaled[-1]), 'variation_top_half': variation,
               'limit': renewal_limit(beta, c), 'fft_agreement': agreement,
               'recursion_defect': seq.recursion_defect(), 'tail_bound': seq.tail_bound,
               'geometric_u_1000': float(geometric.u[-1]),
               'pass': variation < 0.03 and abs(geometric.u[-1] - 0.5) < 1e-8 and agreement < 1e-10}
    return summary, {'renewal': (('n', 'u_n', 'n_pow_scaled'), list(seq.rows(beta)))}


def correlation_experiment(config):
    beta = config.number('beta', 0.75)
    n = config.integer('n', 100000)
    potential = config.potential()
    model = gaspard_wang_model(beta, config.get('tail_kind'), max(n, config.integer('n_max', n)))
    model = model.with_potential(potential)
    schedules = drift_schedule(beta, n)

    base = correlation(model, 0.0, n)
    scale = n ** (1.0 - beta)
    reports = []
    for name in ('beta_eps', 'renewal_scale'):
        s = float(schedules[name])
        value = correlation(model, s, n)
        reports.append({'schedule': name, 's': s, 'scaled': value * scale, 'ratio': value / base})
    renewal_scale = reports[1]
    summary = {'beta': beta, 'n': n, 'potential': potential, 'scaled_s0': base * scale, 'schedules': reports,
               'pass_schedule': renewal_scale['schedule'], 'pass': abs(renewal_scale['ratio'] - 1.0) <= 0.05}
    rows = [(r['schedule'], r['s'], r['scaled'], r['ratio']) for r in reports]
    return summary, {'drift': (('schedule', 's', 'scaled', 'ratio'), rows)}


def arcsine(config):
    beta = config.number('beta', 0.5)
    n = config.integer('n', 10000)
    trials = config.integer('trials')
    seed = config.integer('seed')
    mode = config.get('mode')
    s = config.number('s')
    threads = _threads(config)
    model = gaspard_wang_model(beta, config.get('tail_kind'), max(n, config.integer('n_max', n)))
    descriptor = GaspardWang(beta) if mode == 'orbit' else None

    sample = simulate_last_visit(model, n, trials, seed, mode, descriptor=descriptor, threads=threads)
    pmf = last_visit_law(gibbs_weights(model, 0.0, 0.0).q, n)
    ks_exact = discrete_ks_distance(sample.last_visits(), pmf)

    # distance of the exact law at n from the limit law, at least the atom mu(tau > n) at 0
    cdf = np.cumsum(pmf)
    limit = arcsine_cdf(beta, np.arange(n + 1) / float(n))
    limit_floor = float(max(np.max(np.abs(cdf - limit)), np.max(np.abs(cdf[:-1] - limit[1:]))))
    ks = ks_distance(sample.values, lambda t: arcsine_cdf(beta, t))
    grid = np.linspace(0.0, 1.0, 1001)
    closed_form_error = None
    if beta == 0.5:
        closed_form_error = float(np.max(np.abs(arcsine_cdf(0.5, grid) - 2.0 / math.pi * np.arcsin(np.sqrt(grid)))))
    summary = {'beta': beta, 'n': n, 'sample': sample, 'ks_exact': ks_exact, 'ks': ks, 'limit_floor': limit_floor,
               'atom_at_zero': float(pmf[0]), 'closed_form_error': closed_form_error,
               'pass': ks_exact < 0.01, 'pass_limit': ks < limit_floor + 0.01}

    if s > 0:
        drifted = simulate_last_visit(model.with_potential(config.potential()), n, trials, seed + 1, 'skeleton', s,
                                      threads=threads)
        statistic, pvalue = two_sample_ks(drifted.values, sample.values)
        summary['drift'] = {'s': s, 'ks': statistic, 'pvalue': pvalue, 'pass': statistic < 0.02}
    return summary, {'sample': (('z_over_n',), list(sample.rows()))}


def etau_scaling(config):
    beta = config.number('beta', 0.5)
    gamma = config.number('gamma', 1.0)
    s_grid = config.grid('s_grid', '1e-7:1e-4:13')
    potential = PotentialFamily.polynomial(gamma, config.number('C'), config.number('c_prime'))
    model = gaspard_wang_model(beta, config.get('tail_kind'), config.integer('n_max', Constants.SCALAR_N_MAX))
    model = model.with_potential(potential)
    values = np.array(sweep(lambda s: expected_tau(model, 0.0, s), list(s_grid), _threads(config)))
    fit = fit_power_law(s_grid, values)
    target = (beta - 1.0) / gamma
    summary = {'beta': beta, 'gamma': gamma, 'fit': fit, 'target_exponent': target,
               'expected_tau_s0': expected_tau(model, 0.0, 0.0),
               'pass': abs(fit.exponent / target - 1.0) <= 0.03}
    return summary, {'etau': (('s', 'expected_tau'), list(zip(s_grid, values)))}


def measure_distance_experiment(config):
    beta = config.number('beta', 0.5)
    potential = config.potential()
    s_grid = config.grid('s_grid', '1e-4:1e-2:13')
    model = gaspard_wang_model(beta, config.get('tail_kind'), config.integer('n_max', Constants.SCALAR_N_MAX))
    model = model.with_potential(potential)
    values = np.array(sweep(lambda s: measure_distance(model, s), list(s_grid), _threads(config)))
    fit = fit_power_law(s_grid, values)
    summary = {'beta': beta, 'potential': potential, 'fit': fit, 'target_lower_exponent': beta - 0.05,
               'monotone': bool(np.all(np.diff(values) > 0)), 'pass': fit.exponent >= beta - 0.05}
    return summary, {'distance': (('s', 'distance'), list(zip(s_grid, values)))}


EXPERIMENTS = {
    'catalan-check': catalan_check,
    'sv-tails': sv_tails,
    'sv-pressure': sv_pressure,
    'fib-tails': fib_tails,
    'fib-pressure': fib_pressure,
    'fib-marginal': fib_marginal_experiment,
    'pm-model': pm_model,
    'flat-model': flat_model,
    'eigen-asym': eigen_asym,
    'relation': relation,
    'pi-scaling': pi_scaling,
    'renewal': renewal,
    'correlation': correlation_experiment,
    'arcsine': arcsine,
    'etau-scaling': etau_scaling,
    'measure-distance': measure_distance_experiment,
}


def run(config):
    """
    Validate and run one subcommand

    :return: (summary, curves)
    """
    config.validate()
    try:
        experiment = EXPERIMENTS[config.subcommand]
    except KeyError:
        raise ConfigError('Unknown subcommand: ' + config.subcommand)
    LOGGER.info('Running %s', config.subcommand)
    summary, curves = experiment(config)
    summary = dict(summary, config=config.to_json())
    return summary, curves
