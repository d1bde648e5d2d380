#!/usr/bin/env python3

"""
Numerical lab for null-recurrent equilibrium states

Builds induced Markov models of intermittent interval maps, solves the pressure
equation of the perturbed potentials and checks the asymptotic laws (pressure
scaling, eigenvalue expansion, tails, renewal decay, arcsine law).

Usage: python3 pressure-lab.py <subcommand> [options]

    ex. python3 pressure-lab.py catalan-check --n-max 14
    ex. python3 pressure-lab.py sv-pressure --lambda 0.5 --t 0.9
    ex. python3 pressure-lab.py relation --beta 0.5 --psi log --s-grid 1e-5:1e-2:25
    ex. python3 pressure-lab.py arcsine --beta 0.5 --n 10000 --trials 100000 --seed 7 --threads 4

Every subcommand writes <out>/<subcommand>.json and its CSV curves
<out>/<subcommand>_<curve>.csv. Exit codes: 0 success, 2 configuration error,
3 numerical failure (with a diagnostic JSON).
"""

import argparse
import logging
import os
import sys
import textwrap

from lib.common import Constants
from lib.config import SUBCOMMANDS, ExperimentConfig
from lib.errors import ConfigError, NumericalFailure
from lib.experiments import run
from lib.report import write_json, write_report

logging.basicConfig()
LOGGER = logging.getLogger('pressure-lab')

OPTIONS = (
    ('--alpha', float, 'Map exponent alpha'),
    ('--b', float, 'Map parameter b'),
    ('--lambda', float, 'Stratmann-Vogt / Fibonacci parameter lambda'),
    ('--t', float, 'Inverse temperature t'),
    ('--t-grid', str, 'Grid of t values, lin:start:stop:count'),
    ('--beta', float, 'Tail exponent beta'),
    ('--betas', str, 'Comma separated tail exponents'),
    ('--lambdas', str, 'Comma separated lambda values'),
    ('--tail-kind', str, 'exact_power or with_corrections'),
    ('--psi', str, 'Perturbation kind: log, polynomial or constant'),
    ('--kappa', float, 'Coefficient of log n in psi_bar'),
    ('--c-prime', float, 'Constant C\' in psi_bar'),
    ('--C', float, 'Coefficient C of the polynomial perturbation'),
    ('--gamma', float, 'Exponent gamma of the polynomial perturbation'),
    ('--n-max', int, 'Truncation of the class list'),
    ('--N', int, 'Matrix truncation'),
    ('--n', int, 'Time horizon'),
    ('--s', float, 'Perturbation parameter s'),
    ('--s-grid', str, 'Grid of s values, start:stop:count (geometric)'),
    ('--u-grid', str, 'Grid of u values, start:stop:count (geometric)'),
    ('--trials', int, 'Monte Carlo trials'),
    ('--seed', int, 'Random seed'),
    ('--mode', str, 'Monte Carlo mode: skeleton or orbit'),
)


def build_parser():
    parser = argparse.ArgumentParser(prog='pressure-lab',
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     description=textwrap.dedent('''\
        Pressure lab
        --------------------------------
            Induced models, pressure equations and asymptotic checks
            for null-recurrent equilibrium states
        '''),
                                     epilog=textwrap.dedent('''\
        Subcommands:
            {}
        '''.format(', '.join(SUBCOMMANDS)))
                                     )
    parser.add_argument('subcommand', type=str, choices=SUBCOMMANDS, metavar='subcommand',
                        help='Experiment to run')
    parser.add_argument('--config', type=str, metavar='/path/to/config.toml', help='TOML configuration file')
    parser.add_argument('--out', type=str, metavar='/path/to/output', help='Output directory')
    parser.add_argument('--threads', type=int,
                        help='Worker threads (default ${} or 1)'.format(Constants.THREADS_ENV))
    for flag, kind, text in OPTIONS:
        parser.add_argument(flag, type=kind, help=text)
    parser.add_argument('-v', '--verbose', action='store_true', help='Verbose output')
    parser.add_argument('--debug', action='store_true', help='Verbose debug output')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.verbose:
        LOGGER.setLevel(logging.INFO)
    if args.debug:
        LOGGER.setLevel(logging.DEBUG)

    LOGGER.debug('args: ' + str(args))

    overrides = {key: value for key, value in vars(args).items()
                 if key not in ('subcommand', 'config', 'verbose', 'debug') and value is not None}
    out = overrides.get('out', '.')

    try:
        if args.config:
            config = ExperimentConfig.from_toml(args.subcommand, args.config, overrides)
        else:
            config = ExperimentConfig(args.subcommand, overrides)
        out = config.get('out', '.')
        summary, curves = run(config)
        write_report(out, args.subcommand, summary, curves)
    except ConfigError as e:
        LOGGER.error(str(e))
        return fail(out, args.subcommand, e, Constants.EXIT_CONFIG)
    except NumericalFailure as e:
        LOGGER.error(str(e))
        return fail(out, args.subcommand, e, Constants.EXIT_NUMERICAL)
    return Constants.EXIT_OK


def fail(out, subcommand, error, code):
    doc = {'error': type(error).__name__, 'message': str(error), 'exit_code': code}
    abscissa = getattr(error, 'abscissa', None)
    if abscissa is not None:
        doc['abscissa'] = abscissa
    try:
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, subcommand + '.json'), doc)
    except OSError as e:
        LOGGER.error('Failed to write diagnostics: ' + str(e))
    return code


if __name__ == '__main__':
    sys.exit(main())
