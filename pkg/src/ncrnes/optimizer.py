"""Shannon rate, energy efficiency, and exhaustive EE-maximizing search.

The search evaluates every point of a ``ParameterGrid`` (optionally filtered
by an EIRP cap) and reduces to a single winner with a total order:

    highest EE, then lowest total power, then lowest gNB PA output, then
    fewest gNB transmit elements, then the remaining fields ascending
    (bandwidth, NCR PA output cap, NCR Tx elements, NCR Rx elements).

Because the order is total, the result does not depend on how the grid is
split into chunks or on which thread finishes first.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .linkbudget import (
    GnbConfig,
    NcrConfig,
    UeConfig,
    NCR_MAX_GAIN_DB,
    beamformed_snr,
    effective_snr,
    path_loss_linear,
)
from .powermodel import (
    PowerConstants,
    gnb_pa_power,
    gnb_power,
    ncr_power,
    ncr_rx_power,
    ncr_tx_power,
)
from .units import db_to_linear, dbm_to_mw

LN2 = math.log(2.0)

BW_BOUNDS_HZ = (1e6, 400e6)
PAOUT_BOUNDS_DBM = (0.0, 10.0)
GNB_NTX_BOUNDS = (1, 192)
NCR_ANT_BOUNDS = (1, 32)


def shannon_rate(bandwidth_hz, snr_linear):
    """BW * log2(1 + SNR) in bit/s."""
    snr = np.asarray(snr_linear, dtype=float)
    rate = np.asarray(bandwidth_hz, dtype=float) * np.log1p(snr) / LN2
    return float(rate) if rate.ndim == 0 else rate


# --------------------------------------------------------------------------
# configurations and grids


class DirectConfig(NamedTuple):
    bw_hz: float
    gnb_paout_mw: float
    gnb_n_tx: int


class IndirectConfig(NamedTuple):
    bw_hz: float
    gnb_paout_mw: float
    gnb_n_tx: int
    ncr_paout_max_mw: float
    ncr_n_tx: int
    ncr_n_rx: int


def paout_values_mw(lo_dbm=PAOUT_BOUNDS_DBM[0], hi_dbm=PAOUT_BOUNDS_DBM[1], step_db=0.5):
    n = int(round((hi_dbm - lo_dbm) / step_db))
    dbm = lo_dbm + step_db * np.arange(n + 1)
    dbm = dbm[dbm <= hi_dbm + 1e-9]
    if dbm[-1] < hi_dbm - 1e-9:
        dbm = np.append(dbm, hi_dbm)
    return tuple(float(v) for v in dbm_to_mw(dbm))


def antenna_values(lo, hi, step):
    """Multiples of ``step`` in [lo, hi] plus both endpoints."""
    vals = set(range(step, hi + 1, step)) | {lo, hi}
    return tuple(sorted(v for v in vals if lo <= v <= hi))


@dataclass(frozen=True)
class ParameterGrid:
    """Candidate values for each tunable parameter (ascending).

    The NCR fields are only used by the indirect search. ``gnb_eirp_cap_dbm``
    optionally drops gNB candidates with PAout_dBm + 20 log10(N_tx) above it.
    """

    bw_values: tuple
    gnb_paout_values: tuple
    gnb_ntx_values: tuple
    ncr_paout_values: tuple = ()
    ncr_ntx_values: tuple = ()
    ncr_nrx_values: tuple = ()
    gnb_eirp_cap_dbm: float | None = None

    def __post_init__(self):
        for name in ("bw_values", "gnb_paout_values", "gnb_ntx_values",
                     "ncr_paout_values", "ncr_ntx_values", "ncr_nrx_values"):
            vals = tuple(getattr(self, name))
            object.__setattr__(self, name, vals)
            if list(vals) != sorted(vals) or len(set(vals)) != len(vals):
                raise ValueError(f"{name} must be strictly ascending")
        if not (self.bw_values and self.gnb_paout_values and self.gnb_ntx_values):
            raise ValueError("direct grid dimensions must be nonempty")
        if min(self.bw_values) <= 0 or min(self.gnb_paout_values) < 0 or min(self.gnb_ntx_values) < 1:
            raise ValueError("grid values out of physical range")

    @classmethod
    def default(cls, paout_step_db=0.5, gnb_ntx_step=4, ncr_ant_step=1,
                bw_values=(1e6, 50e6, 100e6, 200e6, 400e6)):
        paout = paout_values_mw(step_db=paout_step_db)
        ncr_ant = antenna_values(*NCR_ANT_BOUNDS, ncr_ant_step)
        return cls(
            bw_values=tuple(bw_values),
            gnb_paout_values=paout,
            gnb_ntx_values=antenna_values(*GNB_NTX_BOUNDS, gnb_ntx_step),
            ncr_paout_values=paout,
            ncr_ntx_values=ncr_ant,
            ncr_nrx_values=ncr_ant,
        )

    @property
    def has_ncr(self):
        return bool(self.ncr_paout_values and self.ncr_ntx_values and self.ncr_nrx_values)

    def size(self, topology="direct"):
        n = len(self.bw_values) * len(self.gnb_paout_values) * len(self.gnb_ntx_values)
        if topology == "indirect":
            n *= len(self.ncr_paout_values) * len(self.ncr_ntx_values) * len(self.ncr_nrx_values)
        return n

    def check_bounds(self):
        """Raise ValueError if any value falls outside the problem's stated ranges."""
        lo, hi = BW_BOUNDS_HZ
        _in_range("bw_values", self.bw_values, lo, hi)
        pmin, pmax = (float(dbm_to_mw(v)) for v in PAOUT_BOUNDS_DBM)
        _in_range("gnb_paout_values", self.gnb_paout_values, pmin, pmax)
        _in_range("gnb_ntx_values", self.gnb_ntx_values, *GNB_NTX_BOUNDS)
        _in_range("ncr_paout_values", self.ncr_paout_values, pmin, pmax)
        _in_range("ncr_ntx_values", self.ncr_ntx_values, *NCR_ANT_BOUNDS)
        _in_range("ncr_nrx_values", self.ncr_nrx_values, *NCR_ANT_BOUNDS)

    def baseline(self, topology="direct", **overrides):
        """Most spectrally efficient configuration: every dimension at its maximum.

        Keyword overrides replace individual fields (e.g. a baseline PA output
        that is not itself a grid member).
        """
        if topology == "direct":
            cfg = DirectConfig(self.bw_values[-1], self.gnb_paout_values[-1], self.gnb_ntx_values[-1])
        else:
            if not self.has_ncr:
                raise ValueError("grid has no NCR dimensions")
            cfg = IndirectConfig(self.bw_values[-1], self.gnb_paout_values[-1], self.gnb_ntx_values[-1],
                                 self.ncr_paout_values[-1], self.ncr_ntx_values[-1], self.ncr_nrx_values[-1])
        return cfg._replace(**overrides)

    def eirp_ok(self, paout_mw, n_tx):
        if self.gnb_eirp_cap_dbm is None:
            return True
        return np.asarray(paout_mw) * np.asarray(n_tx, dtype=float) ** 2 <= db_to_linear(self.gnb_eirp_cap_dbm) * (1 + 1e-12)


def _in_range(name, vals, lo, hi):
    bad = [v for v in vals if not (lo * (1 - 1e-9) <= v <= hi * (1 + 1e-9))]
    if bad:
        raise ValueError(f"{name}: values {bad} outside [{lo}, {hi}]")


# --------------------------------------------------------------------------
# link scenarios


@dataclass(frozen=True)
class DirectLink:
    """gNB -> UE link: geometry of the access hop, UE receiver and its noise."""

    geom: object
    noise: object
    ue: UeConfig = UeConfig()


@dataclass(frozen=True)
class RelayLink:
    """gNB -> NCR -> UE link."""

    bh_geom: object
    ac_geom: object
    ncr_noise: object
    ue_noise: object
    ue: UeConfig = UeConfig()
    max_gain_linear: float = db_to_linear(NCR_MAX_GAIN_DB)


# --------------------------------------------------------------------------
# objective kernels (broadcast over any mix of scalars and arrays)


def _gnb_total(n_tx, paout, pa_model, k):
    return k.p_ms_gnb + k.alpha * k.p_non_pa + k.beta * gnb_pa_power(n_tx, paout, pa_model, k)


def _direct_kernel(bw, paout, n_tx, link, pa_model, k, pl=None):
    if pl is None:
        pl = path_loss_linear(link.geom)
    snr = beamformed_snr(paout, n_tx, link.ue.n_rx, pl, link.noise.power_mw(bw))
    rate = bw * np.log1p(snr) / LN2
    power = _gnb_total(n_tx, paout, pa_model, k)
    return snr, rate, power, rate / power


def _indirect_kernel(bw, g_paout, g_ntx, n_pmax, n_ntx, n_nrx, link, pa_model, k, pls=None):
    pl_bh, pl_ac = pls if pls is not None else (path_loss_linear(link.bh_geom), path_loss_linear(link.ac_geom))
    ncr_noise = link.ncr_noise.power_mw(bw)
    snr_bh = beamformed_snr(g_paout, g_ntx, n_nrx, pl_bh, ncr_noise)
    n_ntx = np.asarray(n_ntx, dtype=float)
    paout_ncr = np.minimum(n_pmax, link.max_gain_linear * (1.0 + snr_bh) * ncr_noise / n_ntx)
    snr_ac = beamformed_snr(paout_ncr, n_ntx, link.ue.n_rx, pl_ac, link.ue_noise.power_mw(bw))
    snr = effective_snr(snr_bh, snr_ac)
    rate = bw * np.log1p(snr) / LN2
    p_ncr = k.p_const_ncr + ncr_rx_power(n_nrx, k) + ncr_tx_power(n_ntx, paout_ncr, pa_model, k)
    power = _gnb_total(g_ntx, g_paout, pa_model, k) + p_ncr
    return snr_bh, snr_ac, paout_ncr, snr, rate, power, rate / power


# --------------------------------------------------------------------------
# single-configuration evaluation


@dataclass(frozen=True)
class OptResult:
    """A configuration together with its EE, rate, power and SNRs."""

    topology: str
    config: tuple
    ee: float
    rate_bps: float
    power_total: float
    gnb_power: object
    snr: float
    ncr_power: object = None
    snr_bh: float | None = None
    snr_ac: float | None = None
    ncr_paout_actual_mw: float | None = None
    evaluations: int = 1

    @property
    def best_config(self):
        return self.config


def ee_direct(gnb, ue, geom, noise, pa_model, consts):
    """EE of one direct-topology configuration (``evaluations`` is 1)."""
    link = DirectLink(geom, noise, ue)
    snr, rate, power, ee = _direct_kernel(gnb.bandwidth_hz, gnb.paout_mw, gnb.n_tx, link, pa_model, consts)
    return OptResult(
        topology="direct",
        config=DirectConfig(float(gnb.bandwidth_hz), float(gnb.paout_mw), int(gnb.n_tx)),
        ee=float(ee), rate_bps=float(rate), power_total=float(power),
        gnb_power=gnb_power(gnb, pa_model, consts), snr=float(snr),
    )


def ee_indirect(gnb, ncr, ue, bh_geom, ac_geom, ncr_noise, ue_noise, pa_model, consts):
    """EE of one repeater-assisted configuration; the NCR output is gain-clamped."""
    link = RelayLink(bh_geom, ac_geom, ncr_noise, ue_noise, ue, ncr.max_gain_linear)
    snr_bh, snr_ac, paout_ncr, snr, rate, power, ee = _indirect_kernel(
        gnb.bandwidth_hz, gnb.paout_mw, gnb.n_tx, ncr.paout_max_mw, ncr.n_tx, ncr.n_rx,
        link, pa_model, consts)
    return OptResult(
        topology="indirect",
        config=IndirectConfig(float(gnb.bandwidth_hz), float(gnb.paout_mw), int(gnb.n_tx),
                              float(ncr.paout_max_mw), int(ncr.n_tx), int(ncr.n_rx)),
        ee=float(ee), rate_bps=float(rate), power_total=float(power),
        gnb_power=gnb_power(gnb, pa_model, consts),
        ncr_power=ncr_power(ncr, float(paout_ncr), pa_model, consts),
        snr=float(snr), snr_bh=float(snr_bh), snr_ac=float(snr_ac),
        ncr_paout_actual_mw=float(paout_ncr),
    )


def evaluate_direct(cfg, link, pa_model, consts):
    return ee_direct(GnbConfig(cfg.gnb_n_tx, cfg.gnb_paout_mw, cfg.bw_hz),
                     link.ue, link.geom, link.noise, pa_model, consts)


def evaluate_indirect(cfg, link, pa_model, consts):
    return ee_indirect(GnbConfig(cfg.gnb_n_tx, cfg.gnb_paout_mw, cfg.bw_hz),
                       NcrConfig(cfg.ncr_n_tx, cfg.ncr_n_rx, cfg.ncr_paout_max_mw, link.max_gain_linear),
                       link.ue, link.bh_geom, link.ac_geom, link.ncr_noise, link.ue_noise,
                       pa_model, consts)


def evaluate(cfg, link, pa_model, consts):
    if isinstance(cfg, IndirectConfig):
        return evaluate_indirect(cfg, link, pa_model, consts)
    return evaluate_direct(cfg, link, pa_model, consts)


# --------------------------------------------------------------------------
# exhaustive search


def selection_key(ee, power, cfg):
    """Sort key implementing the tie-break order (smaller is better)."""
    if isinstance(cfg, IndirectConfig):
        rest = (cfg.bw_hz, cfg.ncr_paout_max_mw, cfg.ncr_n_tx, cfg.ncr_n_rx)
    else:
        rest = (cfg.bw_hz,)
    return (-ee, power, cfg.gnb_paout_mw, cfg.gnb_n_tx) + rest


def _chunk_best(ee, power, axes, fields, make_cfg):
    """Best point of one chunk. ``axes`` are the value arrays of the varying dims."""
    ee = np.where(np.isnan(ee), -np.inf, ee)
    best = ee.max()
    if best == -np.inf:
        return None
    idx = np.argwhere(ee == best)
    if len(idx) > 1:
        pw = np.broadcast_to(power, ee.shape)[tuple(idx.T)]
        cols = [axes[d][idx[:, d]] for d in fields]
        order = np.lexsort(tuple(reversed([pw] + cols)))
        idx = idx[order[:1]]
    i = tuple(idx[0])
    cfg = make_cfg(i)
    return selection_key(float(best), float(np.broadcast_to(power, ee.shape)[i]), cfg), cfg


def _run_chunks(tasks, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        results = [t() for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(lambda t: t(), tasks))
    results = [r for r in results if r is not None]
    if not results:
        raise ValueError("no feasible configuration in grid")
    return min(results, key=lambda r: r[0])[1]


def optimize_direct(grid, link, pa_model, consts=PowerConstants(), n_jobs=1):
    """Exhaustively maximize direct-link EE over ``grid``."""
    bw = np.asarray(grid.bw_values, dtype=float)
    pa = np.asarray(grid.gnb_paout_values, dtype=float)
    nt = np.asarray(grid.gnb_ntx_values)
    pl = path_loss_linear(link.geom)
    feasible = np.broadcast_to(grid.eirp_ok(pa[:, None], nt[None, :]), (len(pa), len(nt)))
    n_eval = int(feasible.sum()) * len(bw)

    def task(b):
        def run():
            _, _, power, ee = _direct_kernel(bw[b], pa[:, None], nt[None, :], link, pa_model, consts, pl)
            ee = np.where(feasible, ee, -np.inf)
            # axes: 0 -> paout, 1 -> n_tx; tie-break after power: paout, n_tx
            return _chunk_best(ee, power, (pa, nt), (0, 1),
                               lambda i: DirectConfig(float(bw[b]), float(pa[i[0]]), int(nt[i[1]])))
        return run

    cfg = _run_chunks([task(b) for b in range(len(bw))], n_jobs)
    return replace(evaluate_direct(cfg, link, pa_model, consts), evaluations=n_eval)


def optimize_indirect(grid, link, pa_model, consts=PowerConstants(), n_jobs=1):
    """Exhaustively maximize repeater-assisted EE over the six-dimensional grid."""
    if not grid.has_ncr:
        raise ValueError("grid has no NCR dimensions")
    bw = np.asarray(grid.bw_values, dtype=float)
    gp = np.asarray(grid.gnb_paout_values, dtype=float)
    gn = np.asarray(grid.gnb_ntx_values)
    npm = np.asarray(grid.ncr_paout_values, dtype=float)
    nnt = np.asarray(grid.ncr_ntx_values)
    nnr = np.asarray(grid.ncr_nrx_values)
    pls = (path_loss_linear(link.bh_geom), path_loss_linear(link.ac_geom))
    feasible = np.broadcast_to(grid.eirp_ok(gp[:, None], gn[None, :]), (len(gp), len(gn)))
    n_eval = int(feasible.sum()) * len(bw) * len(npm) * len(nnt) * len(nnr)

    # chunk axes: 0 gnb n_tx, 1 ncr paout cap, 2 ncr n_tx, 3 ncr n_rx
    g_nt = gn[:, None, None, None]
    n_pm = npm[None, :, None, None]
    n_nt = nnt[None, None, :, None]
    n_nr = nnr[None, None, None, :]

    def task(b, p):
        def run():
            if not feasible[p].any():
                return None
            *_, power, ee = _indirect_kernel(bw[b], gp[p], g_nt, n_pm, n_nt, n_nr,
                                             link, pa_model, consts, pls)
            ee = np.where(feasible[p][:, None, None, None], ee, -np.inf)
            # tie-break after power (paout fixed in chunk): n_tx_gnb, ncr cap, ncr n_tx, ncr n_rx
            return _chunk_best(
                ee, power, (gn, npm, nnt, nnr), (0, 1, 2, 3),
                lambda i: IndirectConfig(float(bw[b]), float(gp[p]), int(gn[i[0]]),
                                         float(npm[i[1]]), int(nnt[i[2]]), int(nnr[i[3]])))
        return run

    tasks = [task(b, p) for b in range(len(bw)) for p in range(len(gp))]
    cfg = _run_chunks(tasks, n_jobs)
    return replace(evaluate_indirect(cfg, link, pa_model, consts), evaluations=n_eval)


def iter_grid(grid, topology="direct"):
    """All grid configurations in lexicographic order (feasible ones only)."""
    dims = [grid.bw_values, grid.gnb_paout_values, grid.gnb_ntx_values]
    cls = DirectConfig
    if topology == "indirect":
        dims += [grid.ncr_paout_values, grid.ncr_ntx_values, grid.ncr_nrx_values]
        cls = IndirectConfig
    for vals in itertools.product(*dims):
        cfg = cls(*vals)
        if grid.eirp_ok(cfg.gnb_paout_mw, cfg.gnb_n_tx):
            yield cfg


def relative_metrics(opt, baseline):
    """(EE ratio, rate ratio) of an optimized result against a baseline."""
    rel_rate = opt.rate_bps / baseline.rate_bps if baseline.rate_bps > 0 else 1.0
    rel_ee = opt.ee / baseline.ee if baseline.ee > 0 else 1.0
    return rel_ee, rel_rate
