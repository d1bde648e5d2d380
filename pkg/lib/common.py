#!/usr/bin/env python3

import math


class Constants():
    # Golden mean, growth rate of the Fibonacci clock
    GOLDEN_MEAN = (1.0 + math.sqrt(5.0)) / 2.0

    # Lower end of the infinite-measure window for the Fibonacci family
    FIB_LAMBDA_MIN = 2.0 / (3.0 + math.sqrt(5.0))
    FIB_LAMBDA_MAX = 0.5
    # Distance in log u between the level-operator abscissa and the lowest bracket point
    FIB_ABSCISSA_OFFSET = 1e-9

    LOG4 = math.log(4.0)

    # Default truncations
    SCALAR_N_MAX = 100000
    SV_N_MAX = 10000
    PM_N_MAX = 2000
    FLAT_N_MAX = 10000
    CATALAN_EXACT_MAX = 10000
    EXHAUSTIVE_MAX = 25

    # Counts above this switch from exact integers to log-space floats
    EXACT_COUNT_LIMIT = 2 ** 512

    # Tolerances
    NORMALIZE_TOL = 1e-12
    ROOT_TOL = 1e-13
    REMAINDER_TRUST = 1e-12
    POWER_ITERATION_TOL = 1e-13
    POWER_ITERATION_MAX = 200000
    ENDPOINT_EPS = 1e-15
    INVERSE_BRANCH_TOL = 1e-14

    # Ratio of the end to the start of the c_H remainder quadrature
    CH_QUAD_SPAN = 1e3

    # Default fit windows, start:stop:count geometric grid specs
    S_GRID = '1e-5:1e-2:25'
    U_GRID = '1e-6:1e-2:25'

    # Monte Carlo trials are grouped in blocks, one RNG stream per block
    TRIAL_BLOCK = 1024

    # CSV float format, 17 significant digits
    FLOAT_FORMAT = '%.17g'

    THREADS_ENV = 'PLAB_THREADS'

    # Exit codes
    EXIT_OK = 0
    EXIT_CONFIG = 2
    EXIT_NUMERICAL = 3
