import logging
import math

import numpy as np
from scipy import optimize, special

from lib.common import Constants
from lib.errors import ConfigError, NumericalFailure, RootNotBracketed, StagnationError
from lib.fitting import FitReport, fit_power_law
from lib.induced_model import deviation, log_normalizer, normalizer
from lib.tails import ch_constant

LOGGER = logging.getLogger('pressure-lab.pressure')

ROOT = 'Root'
ABSCISSA = 'Abscissa'


class PressureSolveResult(object):
    """
    Solution of the induced pressure equation log F(u0, s) = 0

    kind is Root when the equation has a solution above the convergence abscissa,
    Abscissa when it has none and u0 is the abscissa itself (transient case).
    """

    def __init__(self, kind, u0, induced_pressure, s=0.0, bracket=None, residual=0.0, boundary=False,
                 iterations=0):
        self.kind = kind
        self.u0 = u0
        self.induced_pressure = induced_pressure
        self.s = s
        self.bracket = bracket
        self.residual = residual
        self.boundary = boundary
        self.iterations = iterations

    def to_json(self):
        return {
            'kind': self.kind,
            'u0': self.u0,
            'induced_pressure': self.induced_pressure,
            's': self.s,
            'bracket': list(self.bracket) if self.bracket is not None else None,
            'residual': self.residual,
            'boundary': self.boundary,
            'iterations': self.iterations,
        }

    def __str__(self):
        text = '{} u0={:.15g} (s={:.6g}, induced pressure {:.3e})'.format(self.kind, self.u0, self.s,
                                                                          self.induced_pressure)
        return text + (' [boundary]' if self.boundary else '')


class EigenCurve(object):

    def __init__(self, u, s, values, one_minus, derivative):
        self.u = u
        self.s = s
        self.values = values
        self.one_minus = one_minus
        self.derivative = derivative

    def rows(self):
        return zip(self.u, self.values, self.one_minus, self.derivative)

    def __str__(self):
        return 'EigenCurve(s={:g}, {} points on [{:.3g}, {:.3g}])'.format(self.s, len(self.u), self.u[0], self.u[-1])


def series_pressure(model, u, s):
    """
    Gurevich pressure log F(u, s) of a full-branch model with class-constant potential
    """
    return log_normalizer(model, u, s)


def _sv_transfer(lam, t, u):
    # row 1 sums every column, row i >= 2 sums columns i-1 onwards
    head = math.exp(t * math.log(1.0 - lam) - u)
    body = math.exp(t * math.log(lam * (1.0 - lam)) - u)

    def apply(v):
        suffix = np.cumsum(v[::-1])[::-1]
        out = np.empty_like(v)
        out[0] = head * suffix[0]
        out[1:] = body * suffix[:-1]
        return out

    return apply


def matrix_pressure(lam, t, u, N=400):
    """
    log of the leading eigenvalue of the N x N truncated Stratmann-Vogt transfer matrix

    :param lam: lambda in (0, 1/2]
    :param t: inverse temperature
    :param u: shift, every step weighted by e^-u
    :param N: truncation, >= 50
    :return: log eigenvalue
    """
    if not 0.0 < lam <= 0.5:
        raise ConfigError('lambda must lie in (0, 1/2], got {}'.format(lam))
    if N < 50:
        raise ConfigError('Matrix truncation must be >= 50, got {}'.format(N))
    if lam ** t > 0.5:
        LOGGER.warning('lambda^t = %.6g > 1/2, the closed form does not apply', lam ** t)

    apply = _sv_transfer(lam, t, u)
    v = np.full(N, 1.0 / N)
    ratio = 0.0
    for iteration in range(1, Constants.POWER_ITERATION_MAX + 1):
        w = apply(v)
        ratio = math.fsum(w)
        w /= ratio
        change = np.abs(w - v).sum()
        v = w
        if change <= Constants.POWER_ITERATION_TOL:
            LOGGER.debug('Power iteration N=%d converged after %d steps', N, iteration)
            return math.log(ratio)
    raise StagnationError('Power iteration stagnated after {} steps (last change {:.2e})'.format(
        Constants.POWER_ITERATION_MAX, change))


def sv_closed_form_pressure(lam, t):
    return t * math.log(1.0 - lam) - math.log1p(-lam ** t)


def solve_u0(model, s=0.0):
    """
    Solve log F(u0, s) = 0 for u0 above the convergence abscissa

    :param model: normalized InducedModel carrying its perturbation
    :param s: perturbation parameter >= 0
    :return: PressureSolveResult
    """
    a = model.abscissa(s)
    if math.isfinite(a) and model.convergent_at_abscissa(s):
        at_abscissa = log_normalizer(model, a, s)
        if abs(at_abscissa) <= Constants.ROOT_TOL:
            return PressureSolveResult(ROOT, a, at_abscissa, s, (a, a), residual=math.expm1(at_abscissa),
                                       boundary=True)
        if at_abscissa < 0:
            boundary = at_abscissa > -1e-10
            if boundary:
                LOGGER.warning('s=%g: F at the abscissa is within %.1e of 1', s, -at_abscissa)
            return PressureSolveResult(ABSCISSA, a, at_abscissa, s, (a, a), residual=math.expm1(at_abscissa),
                                       boundary=boundary)

    base = a if math.isfinite(a) else 0.0
    if math.isfinite(a):
        def g(y):
            return log_normalizer(model, base + math.exp(y), s)
    else:
        # finite class list, root anywhere on the real line
        def g(y):
            return log_normalizer(model, y, s)

    hi = 0.0
    for _ in range(64):
        if g(hi) < 0:
            break
        hi += math.log(2.0) if math.isfinite(a) else max(1.0, abs(hi))
    else:
        raise RootNotBracketed('No upper bracket for the pressure root at s={}'.format(s))

    lo = hi - 1.0
    for _ in range(400):
        if g(lo) > 0:
            break
        lo -= 2.0
        if math.isfinite(a) and lo < -700.0:
            raise RootNotBracketed('No lower bracket for the pressure root at s={}'.format(s))
    else:
        raise RootNotBracketed('No lower bracket for the pressure root at s={}'.format(s))

    y, info = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=400, full_output=True)
    if not info.converged:
        raise RootNotBracketed('Brent iteration failed at s={}: {}'.format(s, info.flag))
    u0 = base + math.exp(y) if math.isfinite(a) else y
    at_root = g(y)
    residual = math.expm1(at_root)
    if abs(residual) > Constants.ROOT_TOL:
        LOGGER.warning('s=%g: root residual |F - 1| = %.2e', s, abs(residual))
    bracket = (base + math.exp(lo), base + math.exp(hi)) if math.isfinite(a) else (lo, hi)
    return PressureSolveResult(ROOT, u0, at_root, s, bracket, residual=residual, iterations=info.iterations)


def liftability_check(model, s, result, delta=None):
    """
    Induced pressure at u0 and just above it; zero then strictly negative for a lifted root
    """
    if delta is None:
        delta = 1e-3 * max(abs(result.u0), 1e-6)
    at_root = series_pressure(model, result.u0, s)
    above = series_pressure(model, result.u0 + delta, s)
    ok = above < 0 and (result.kind != ROOT or abs(at_root) < 1e-10)
    return {'at_root': at_root, 'above_root': above, 'delta': delta, 'ok': ok}


def eigen_curve(model, u_grid, s=0.0):
    """
    lambda(u, s) on a grid with Richardson-extrapolated central differences in u
    """
    u = np.asarray(u_grid, dtype=float)
    one_minus = np.array([-deviation(model, x, s) if model.normalized else 1.0 - normalizer(model, x, s)
                          for x in u])

    def central(x, h):
        if model.normalized:
            return (deviation(model, x + h, s) - deviation(model, x - h, s)) / (2.0 * h)
        return (normalizer(model, x + h, s) - normalizer(model, x - h, s)) / (2.0 * h)

    derivative = np.array([(4.0 * central(x, x / 200.0) - central(x, x / 100.0)) / 3.0 for x in u])
    return EigenCurve(u, s, 1.0 - one_minus, one_minus, derivative)


def _check_window(grid, decades, upper):
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3 or grid.min() <= 0 or grid.max() > upper:
        raise ConfigError('Grid must hold at least 3 points in (0, {}]'.format(upper))
    if math.log10(grid.max() / grid.min()) < decades:
        raise ConfigError('Grid spans less than {} decades'.format(decades))
    return grid


def eigen_asymptotics_fit(model, u_grid):
    """
    Fit 1 - lambda(u) ~ c Gamma(1-beta) u^beta + c_H u on a normalized model

    The reported fit is of 1 - lambda(u) - c_H u; the unsubtracted fit and the fit of the
    residual after removing both leading terms ride along in ``extra``.
    """
    u = _check_window(u_grid, 2.0, 0.1)
    law = model.tail_law
    if law is None:
        raise ConfigError('Eigenvalue asymptotics need a tail law')

    c = law.c * math.exp(law.log_scale)
    beta = law.beta
    c_h = ch_constant(law)
    theory = c * special.gamma(1.0 - beta)

    one_minus = np.array([-deviation(model, x, 0.0) for x in u])
    raw = fit_power_law(u, one_minus, min_decades=2.0)
    report = fit_power_law(u, one_minus - c_h * u, min_decades=2.0)
    residual = one_minus - theory * np.power(u, beta) - c_h * u
    residual_fit = fit_power_law(u, residual, min_decades=2.0)

    report.extra = {
        'beta': beta,
        'c': c,
        'c_H': c_h,
        'theory_constant': theory,
        'raw': raw.to_json(),
        'residual': residual_fit.to_json(),
        'residual_exponent': residual_fit.exponent,
        'curve': {'u': u.tolist(), 'one_minus_lambda': one_minus.tolist(), 'residual': residual.tolist()},
    }
    LOGGER.info('Eigenvalue fit: %s; residual exponent %.4f', report, residual_fit.exponent)
    return report


def relation_constant(law):
    """
    C with u0 ~ (C Pbar)^(1/beta); the beta-scaled variant carries an extra factor beta
    """
    c = law.c * math.exp(law.log_scale)
    gamma = special.gamma(1.0 - law.beta)
    return 1.0 / (c * gamma), 1.0 / (c * law.beta * gamma)


def _solve_grid(model, s_grid):
    s_used, u0, pbar = [], [], []
    for s in s_grid:
        result = solve_u0(model, s)
        if result.kind != ROOT or result.u0 <= 0:
            LOGGER.warning('Excluding s=%g from the relation fit: %s', s, result)
            continue
        p = series_pressure(model, 0.0, s)
        if p <= 0:
            LOGGER.warning('Excluding s=%g from the relation fit: induced pressure %.3e <= 0', s, p)
            continue
        s_used.append(s)
        u0.append(result.u0)
        pbar.append(p)
    return np.array(s_used), np.array(u0), np.array(pbar)


def pressure_relation_fit(model, potential, s_grid, eps=0.05):
    """
    Regress log u0(s) on log Pbar(s), Pbar(s) = log F(0, s)

    :param model: normalized InducedModel with a tail law
    :param potential: PotentialFamily of the perturbation
    :param s_grid: perturbation parameters
    :param eps: slack in the lower bound u0 >= C0 s^(1/(beta-eps))
    :return: FitReport, constant field holding C^(1/beta) from the intercept
    """
    law = model.tail_law
    if law is None:
        raise ConfigError('The pressure relation needs a tail law')
    model = model.with_potential(potential)
    s, u0, pbar = _solve_grid(model, s_grid)
    if s.size < 3:
        raise NumericalFailure('Only {} recurrent grid points left for the relation fit'.format(s.size))

    beta = law.beta
    report = fit_power_law(pbar, u0)
    c_true, c_scaled = relation_constant(law)
    c_h = ch_constant(law)

    q_lead = -(c_h / beta) * c_true ** (1.0 / beta) * np.power(pbar, (1.0 - beta) / beta)
    q_observed = u0 / np.power(c_true * pbar, 1.0 / beta) - 1.0
    corrected = fit_power_law(pbar, u0 / (1.0 + q_lead))

    low = max(3, s.size // 3)
    pointwise = float(np.exp(np.mean(np.log(np.power(u0[:low], beta) / pbar[:low]))))

    ratio = u0 / np.power(s, 1.0 / (beta - eps))
    order = np.argsort(s)
    c0 = float(ratio.min())

    report.extra = {
        'beta': beta,
        'target_exponent': 1.0 / beta,
        'C_true': c_true,
        'C_beta_scaled': c_scaled,
        'C_from_intercept': float(math.exp(beta * math.log(report.constant))),
        'C_pointwise': pointwise,
        'c_H': c_h,
        'corrected': corrected.to_json(),
        'C0_lower_bound': c0,
        'lower_bound_ratio_monotone': bool(np.all(np.diff(ratio[order]) <= 0)),
        'curve': {'s': s.tolist(), 'u0': u0.tolist(), 'pbar': pbar.tolist(), 'Q': q_observed.tolist(),
                  'Q_lead': q_lead.tolist()},
    }
    LOGGER.info('Relation fit: %s; corrected exponent %.5f, C pointwise %.6g (true %.6g, beta-scaled %.6g)',
                report, corrected.exponent, pointwise, c_true, c_scaled)
    return report


def relation_band(model, s_grid, potential=None):
    """
    Two-sided band ((K2 Pbar)^(1/beta), (K1 Pbar)^(1/beta)) from the tail band (C2, C1)
    """
    law = model.tail_law
    if law is None or law.band is None:
        raise ConfigError('The relation band needs a tail law with a measured band')
    if potential is not None:
        model = model.with_potential(potential)
    c2, c1 = law.band
    gamma = special.gamma(1.0 - law.beta)
    k_lo, k_hi = 1.0 / (c1 * gamma), 1.0 / (c2 * gamma)
    s, u0, pbar = _solve_grid(model, s_grid)
    lower = np.power(k_lo * pbar, 1.0 / law.beta)
    upper = np.power(k_hi * pbar, 1.0 / law.beta)
    inside = (u0 >= lower) & (u0 <= upper)
    return {'s': s.tolist(), 'u0': u0.tolist(), 'lower': lower.tolist(), 'upper': upper.tolist(),
            'inside_fraction': float(np.mean(inside)) if inside.size else 0.0}


def pi_s(model, potential, s_grid):
    """
    Pi(s) = sum N(n) e^(w(n)) (e^(s psi(n)) - 1) with its log-log magnitude slope
    """
    s = np.asarray(s_grid, dtype=float)
    if np.any(s <= 0) or np.any(s > 0.1):
        raise ConfigError('s grid must lie in (0, 0.1]')
    model = model.with_potential(potential)
    values = np.array([deviation(model, 0.0, x) for x in s])
    report = fit_power_law(s, values)
    report.extra = {
        'sign': int(np.sign(values[0])) if np.all(np.sign(values) == np.sign(values[0])) else 0,
        'curve': {'s': s.tolist(), 'pi': values.tolist()},
    }
    if potential.kind == 'polynomial' and model.tail_law is not None:
        beta = model.tail_law.beta
        report.extra['computed_exponent'] = beta / potential.gamma
        report.extra['gamma_beta_exponent'] = potential.gamma * beta
        LOGGER.info('Pi(s) magnitude exponent %.5f, beta/gamma = %.5f, gamma*beta = %.5f',
                    report.exponent, beta / potential.gamma, potential.gamma * beta)
    return report
