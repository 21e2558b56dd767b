"""Power unit conversions.

All internal computations are carried in linear milliwatts; dBm appears
only at I/O boundaries (datasets, configs, CSV emission).
"""

import numpy as np


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))
