"""dB / linear conversions used at configuration and reporting boundaries."""

import numpy as np


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def db_to_linear(x_db):
    return _out(np.power(10.0, np.asarray(x_db, dtype=float) / 10.0))


def linear_to_db(x):
    return _out(10.0 * np.log10(np.asarray(x, dtype=float)))


# dBm <-> mW is the same mapping; kept separate for readability at call sites.
dbm_to_mw = db_to_linear
mw_to_dbm = linear_to_db
