import csv
import json
import logging
import math
import os

import numpy as np

from lib.common import Constants

LOGGER = logging.getLogger('pressure-lab.report')


def plain(value):
    """
    JSON-ready copy: numpy scalars and arrays become Python values, non-finite floats become strings
    """
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if hasattr(value, 'to_json'):
        return plain(value.to_json())
    return value


def dumps(doc):
    return json.dumps(plain(doc), indent=2, sort_keys=True) + '\n'


def write_json(path, doc):
    with open(path, 'w') as f:
        f.write(dumps(doc))
    LOGGER.info('Wrote %s', path)


def format_cell(value):
    if isinstance(value, (float, np.floating)):
        return Constants.FLOAT_FORMAT % value
    return str(value)


def write_csv(path, header, rows):
    """
    CSV with a header line; floats with 17 significant digits
    """
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    LOGGER.info('Wrote %s', path)


def write_report(out, subcommand, summary, curves=None):
    """
    <out>/<subcommand>.json plus one <out>/<subcommand>_<curve>.csv per curve

    :param curves: {name: (header, rows)}
    :return: list of written paths
    """
    os.makedirs(out, exist_ok=True)
    written = []
    for name, (header, rows) in sorted((curves or {}).items()):
        path = os.path.join(out, '{}_{}.csv'.format(subcommand, name))
        write_csv(path, header, rows)
        written.append(path)
    path = os.path.join(out, subcommand + '.json')
    write_json(path, summary)
    written.append(path)
    return written
