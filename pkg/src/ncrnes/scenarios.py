"""Link-level studies: distance sweeps, back-off strategy extraction, and the
small cell + NCR versus macro cell coverage comparison.
"""

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linkbudget import (
    GnbConfig,
    LinkGeometry,
    NoiseModel,
    UeConfig,
    NCR_MAX_GAIN_DB,
    NF_NCR_DB,
    NF_UE_DB,
    FRIIS_1M_28GHZ_DB,
    effective_snr,
    ncr_pa_output,
    snr_access,
    snr_backhaul,
    snr_direct,
)
from .optimizer import (
    DirectLink,
    ParameterGrid,
    RelayLink,
    evaluate_direct,
    evaluate_indirect,
    optimize_direct,
    optimize_indirect,
    relative_metrics,
    shannon_rate,
)
from .powermodel import PaEfficiencyModel, PowerConstants, gnb_power, ncr_power
from .units import db_to_linear, dbm_to_mw, mw_to_dbm


def default_distances(lo=5.0, hi=200.0, n=40):
    return tuple(float(d) for d in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepSpec:
    """Inputs of a distance sweep.

    Direct sweeps vary the gNB-UE distance. Indirect sweeps keep the
    gNB-NCR distance ``d_bh_m`` fixed and vary the NCR-UE distance.
    """

    distances_m: tuple = field(default_factory=default_distances)
    pa_model: PaEfficiencyModel = PaEfficiencyModel()
    grid: ParameterGrid = field(default_factory=ParameterGrid.default)
    consts: PowerConstants = PowerConstants()
    ac_exponent: float = 3.2
    bh_exponent: float = 2.0
    ref_pathloss_db: float = FRIIS_1M_28GHZ_DB
    d_bh_m: float = 94.0
    ue: UeConfig = UeConfig()
    ue_noise: NoiseModel = NoiseModel.from_db(NF_UE_DB)
    ncr_noise: NoiseModel = NoiseModel.from_db(NF_NCR_DB)
    ncr_max_gain_linear: float = db_to_linear(NCR_MAX_GAIN_DB)
    baseline_overrides: tuple = ()
    n_jobs: int = 1

    def __post_init__(self):
        d = np.asarray(self.distances_m, dtype=float)
        if d.size == 0 or np.any(d <= 0) or np.any(np.diff(d) <= 0):
            raise ValueError("distances_m must be positive and strictly ascending")
        object.__setattr__(self, "distances_m", tuple(float(x) for x in d))
        object.__setattr__(self, "baseline_overrides", tuple(dict(self.baseline_overrides).items()))

    def direct_link(self, d):
        return DirectLink(LinkGeometry(d, self.ac_exponent, self.ref_pathloss_db), self.ue_noise, self.ue)

    def relay_link(self, d_ac):
        return RelayLink(
            LinkGeometry(self.d_bh_m, self.bh_exponent, self.ref_pathloss_db),
            LinkGeometry(d_ac, self.ac_exponent, self.ref_pathloss_db),
            self.ncr_noise, self.ue_noise, self.ue, self.ncr_max_gain_linear,
        )


@dataclass(frozen=True)
class SweepRow:
    distance_m: float
    opt: object
    baseline: object
    rel_ee: float
    rel_rate: float


def _row(d, opt, base):
    rel_ee, rel_rate = relative_metrics(opt, base)
    return SweepRow(d, opt, base, rel_ee, rel_rate)


def direct_sweep(spec):
    base_cfg = spec.grid.baseline("direct", **dict(spec.baseline_overrides))
    rows = []
    for d in spec.distances_m:
        link = spec.direct_link(d)
        opt = optimize_direct(spec.grid, link, spec.pa_model, spec.consts, n_jobs=spec.n_jobs)
        rows.append(_row(d, opt, evaluate_direct(base_cfg, link, spec.pa_model, spec.consts)))
    return rows


def indirect_sweep(spec):
    base_cfg = spec.grid.baseline("indirect", **dict(spec.baseline_overrides))
    rows = []
    for d in spec.distances_m:
        link = spec.relay_link(d)
        opt = optimize_indirect(spec.grid, link, spec.pa_model, spec.consts, n_jobs=spec.n_jobs)
        rows.append(_row(d, opt, evaluate_indirect(base_cfg, link, spec.pa_model, spec.consts)))
    return rows


# --------------------------------------------------------------------------
# back-off strategy


class StrategyEvent(NamedTuple):
    parameter: str
    distance_m: float


_PARAMS = {
    "direct": ("bw_hz", "gnb_paout_mw", "gnb_n_tx"),
    "indirect": ("bw_hz", "gnb_paout_mw", "gnb_n_tx", "ncr_paout_mw", "ncr_n_tx", "ncr_n_rx"),
}


def _param_value(res, name):
    # The NCR's PA output is compared after the gain clamp; grid caps above
    # the clamped value all describe the same operating point.
    if name == "ncr_paout_mw":
        return res.ncr_paout_actual_mw
    return getattr(res.config, name)


def extract_strategy(rows):
    """Back-off order: where each parameter first leaves its baseline value.

    Rows are scanned from the farthest distance inward. Events come back
    ordered by decreasing distance (earliest back-off first); parameters that
    depart at the same distance share a distance value.
    """
    if not rows:
        return []
    rows = sorted(rows, key=lambda r: r.distance_m, reverse=True)
    names = _PARAMS[rows[0].opt.topology]
    events = []
    for name in names:
        for r in rows:
            if not np.isclose(_param_value(r.opt, name), _param_value(r.baseline, name), rtol=1e-9, atol=0):
                events.append(StrategyEvent(name, r.distance_m))
                break
    order = {n: i for i, n in enumerate(names)}
    return sorted(events, key=lambda e: (-e.distance_m, order[e.parameter]))


def departure_distance(events, parameter):
    """Distance at which ``parameter`` first backs off, or 0.0 if it never does."""
    for e in events:
        if e.parameter == parameter:
            return e.distance_m
    return 0.0


# --------------------------------------------------------------------------
# CSV output


def _dbm(x):
    return "" if x is None else repr(float(mw_to_dbm(x)))


def _result_columns(prefix, res):
    c = res.config
    cols = {
        f"{prefix}_ee": repr(res.ee),
        f"{prefix}_rate_bps": repr(res.rate_bps),
        f"{prefix}_power": repr(res.power_total),
        f"{prefix}_snr_db": repr(float(10 * np.log10(res.snr))) if res.snr > 0 else "-inf",
        f"{prefix}_bw_hz": repr(c.bw_hz),
        f"{prefix}_gnb_paout_dbm": _dbm(c.gnb_paout_mw),
        f"{prefix}_gnb_n_tx": str(c.gnb_n_tx),
    }
    if res.topology == "indirect":
        cols.update({
            f"{prefix}_ncr_paout_max_dbm": _dbm(c.ncr_paout_max_mw),
            f"{prefix}_ncr_paout_dbm": _dbm(res.ncr_paout_actual_mw),
            f"{prefix}_ncr_n_tx": str(c.ncr_n_tx),
            f"{prefix}_ncr_n_rx": str(c.ncr_n_rx),
        })
    return cols


def sweep_table(rows):
    out = []
    for r in rows:
        rec = {"distance_m": repr(r.distance_m), "rel_ee": repr(r.rel_ee), "rel_rate": repr(r.rel_rate)}
        rec.update(_result_columns("opt", r.opt))
        rec.update(_result_columns("baseline", r.baseline))
        out.append(rec)
    return out


def write_csv(records, path):
    if not records:
        raise ValueError("nothing to write")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(records)


def write_sweep_csv(rows, path):
    write_csv(sweep_table(rows), path)


# --------------------------------------------------------------------------
# coverage and SC + NCR vs MC


def coverage_range(tx_config, rx_config, geom_template, noise, target_snr_linear):
    """Distance at which a transmitter's direct SNR falls to the target.

    Inverts SNR(d) = SNR(1 m) * d^-n in closed form.
    """
    if not target_snr_linear > 0:
        raise ValueError("target SNR must be > 0")
    snr_1m = snr_direct(tx_config, rx_config, geom_template.at(1.0), noise)
    if snr_1m < target_snr_linear:
        raise ValueError(f"target SNR unreachable even at 1 m (SNR there is {snr_1m:.4g})")
    return float((snr_1m / target_snr_linear) ** (1.0 / geom_template.pathloss_exponent))


def required_access_snr(snr_bh, target_snr_linear):
    """Access-hop SNR at which the end-to-end SNR equals the target."""
    if snr_bh <= target_snr_linear:
        raise ValueError("backhaul SNR does not exceed the target; repeater cannot reach it")
    return target_snr_linear * (snr_bh + 1.0) / (snr_bh - target_snr_linear)


@dataclass(frozen=True)
class McCandidates:
    n_tx_values: tuple = (192, 256, 384, 512, 768, 1024)
    paout_values_mw: tuple = tuple(float(x) for x in dbm_to_mw(np.arange(0.0, 13.0 + 1e-9, 0.5)))


class CompareRow(NamedTuple):
    distance_m: float
    region: str  # "sc" (direct from the small cell) or "ncr" (via the repeater)
    rate_sc_path: float
    rate_mc: float
    ee_sc_path: float
    ee_mc: float


@dataclass(frozen=True)
class CompareResult:
    d_bh_m: float
    d_ac_m: float
    mc_config: GnbConfig
    rows: tuple

    @property
    def coverage_m(self):
        return self.d_bh_m + self.d_ac_m

    def region(self, name):
        return [r for r in self.rows if r.region == name]

    def table(self):
        return [{k: (repr(v) if isinstance(v, float) else v) for k, v in r._asdict().items()}
                for r in self.rows]


def compare_sc_mc(target_snr, sc_config, ncr_config, mc_candidates=McCandidates(),
                  ue=UeConfig(), bh_template=LinkGeometry(1.0, 2.0), ac_template=LinkGeometry(1.0, 3.2),
                  ncr_noise=NoiseModel.from_db(NF_NCR_DB), ue_noise=NoiseModel.from_db(NF_UE_DB),
                  pa_model=PaEfficiencyModel(), consts=PowerConstants(), n_points=60,
                  ncr_on_in_sc_region=False):
    """Rate and EE versus distance for SC (+ NCR at its coverage edge) and the
    smallest macro cell covering the same range.

    The NCR sits at the small cell's direct coverage edge ``d_bh``. UEs up to
    ``d_bh`` are served directly by the small cell, farther ones through the
    NCR up to its own coverage edge. The macro cell is the candidate with the
    fewest Tx elements (then the lowest PA output) that reaches the target SNR
    at ``d_bh + d_ac``. Distances are sampled uniformly on the open interval
    (0, d_bh + d_ac); region boundaries themselves are not sampled.
    """
    bw = sc_config.bandwidth_hz
    d_bh = coverage_range(sc_config, ue, ac_template, ue_noise, target_snr)
    bh_geom = bh_template.at(d_bh)
    s_bh = snr_backhaul(sc_config, ncr_config, bh_geom, ncr_noise)
    paout_ncr = ncr_pa_output(ncr_config, s_bh, ncr_noise, bw)
    ncr_tx = GnbConfig(ncr_config.n_tx, paout_ncr, bw)
    d_ac = coverage_range(ncr_tx, ue, ac_template, ue_noise, required_access_snr(s_bh, target_snr))
    reach = d_bh + d_ac

    mc = None
    best_reach = (0.0, None)
    for n_tx in mc_candidates.n_tx_values:
        for p in mc_candidates.paout_values_mw:
            cand = GnbConfig(n_tx, p, bw)
            snr = snr_direct(cand, ue, ac_template.at(reach), ue_noise)
            if snr >= target_snr:
                mc = cand
                break
            r = coverage_range(cand, ue, ac_template, ue_noise, target_snr) if snr_direct(
                cand, ue, ac_template, ue_noise) >= target_snr else 0.0
            if r > best_reach[0]:
                best_reach = (r, cand)
        if mc is not None:
            break
    if mc is None:
        raise ValueError(f"no macro-cell candidate reaches {reach:.1f} m; the longest reach is "
                         f"{best_reach[0]:.1f} m with {best_reach[1]}")

    p_sc = gnb_power(sc_config, pa_model, consts).total
    p_ncr_on = ncr_power(ncr_config, paout_ncr, pa_model, consts).total
    p_ncr_off = ncr_power(ncr_config, paout_ncr, pa_model, consts, active=False).total
    p_mc = gnb_power(mc, pa_model, consts).total

    rows = []
    for d in np.linspace(0.0, reach, n_points + 2)[1:-1]:
        d = float(d)
        if np.isclose(d, d_bh):
            continue
        if d < d_bh:
            region = "sc"
            snr = snr_direct(sc_config, ue, ac_template.at(d), ue_noise)
            p_path = p_sc + (p_ncr_on if ncr_on_in_sc_region else p_ncr_off)
        else:
            region = "ncr"
            s_ac = snr_access(ncr_config, ue, ac_template.at(d - d_bh), ue_noise, paout_ncr, bw)
            snr = effective_snr(s_bh, s_ac)
            p_path = p_sc + p_ncr_on
        r_path = shannon_rate(bw, snr)
        r_mc = shannon_rate(bw, snr_direct(mc, ue, ac_template.at(d), ue_noise))
        rows.append(CompareRow(d, region, r_path, r_mc, r_path / p_path, r_mc / p_mc))
    return CompareResult(d_bh, d_ac, mc, tuple(rows))
