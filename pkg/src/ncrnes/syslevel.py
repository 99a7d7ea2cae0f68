"""Multi-sector system-level simulation with small cells and NCRs.

A deployment is a set of three-sector small cells, NCRs attached to a parent
sector, and stationary UEs. Each covered UE is served by the single best
candidate path (direct from a sector, or through an NCR). Sectors schedule
their UEs with equal time shares under full buffer traffic, so sector
throughput is the mean link rate of its UEs.

Regimes are named ``"<mode>:<opt_mode>"`` with mode in
{always_on, smart, no_repeaters} and opt_mode in {baseline, ee_optimal}.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .linkbudget import (
    FRIIS_1M_28GHZ_DB,
    NF_NCR_DB,
    NF_UE_DB,
    GnbConfig,
    LinkGeometry,
    NcrConfig,
    NoiseModel,
    UeConfig,
    beamformed_snr,
    effective_snr,
    path_loss_linear,
)
from .optimizer import LN2, ParameterGrid, _gnb_total
from .powermodel import PaEfficiencyModel, PowerConstants, ncr_rx_power, ncr_tx_power
from .units import db_to_linear

MODES = ("always_on", "smart", "no_repeaters")
OPT_MODES = ("baseline", "ee_optimal")
METRICS = ("sector_throughput", "sector_power", "sector_ee", "ue_rate")
SECTOR_WIDTH_DEG = 120.0


def regime_name(mode, opt_mode):
    return f"{mode}:{opt_mode}"


# --------------------------------------------------------------------------
# deployment


@dataclass(frozen=True)
class DeploymentParams:
    n_sites: int = 20
    n_ncrs: int = 62
    n_ues: int = 600
    area_m: tuple = (1000.0, 1000.0)
    site_jitter: float = 0.3           # fraction of the grid cell size
    ncr_sector_fraction: float = 0.4   # share of sectors that get NCRs
    max_ncrs_per_sector: int = 3
    ncr_radius_m: float = 150.0
    ncr_radius_spread: float = 0.2


@dataclass(eq=False)
class Deployment:
    area_m: tuple
    site_ids: np.ndarray
    site_xy: np.ndarray
    ncr_ids: np.ndarray
    ncr_xy: np.ndarray
    ncr_sector: np.ndarray
    ue_ids: np.ndarray
    ue_xy: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.site_ids = np.asarray(self.site_ids, dtype=int).reshape(-1)
        self.site_xy = np.asarray(self.site_xy, dtype=float).reshape(-1, 2)
        self.ncr_ids = np.asarray(self.ncr_ids, dtype=int).reshape(-1)
        self.ncr_xy = np.asarray(self.ncr_xy, dtype=float).reshape(-1, 2)
        self.ncr_sector = np.asarray(self.ncr_sector, dtype=int).reshape(-1)
        self.ue_ids = np.asarray(self.ue_ids, dtype=int).reshape(-1)
        self.ue_xy = np.asarray(self.ue_xy, dtype=float).reshape(-1, 2)
        self.area_m = tuple(float(v) for v in self.area_m)
        for name in ("site_ids", "ncr_ids", "ue_ids"):
            ids = getattr(self, name)
            if len(set(ids.tolist())) != len(ids):
                raise ValueError(f"{name} must be unique")
        bad = sorted(set(self.ncr_sector.tolist()) - set(self.sector_ids.tolist()))
        if bad:
            raise ValueError(f"NCRs reference unknown sectors {bad}")

    @property
    def sector_ids(self):
        return (self.site_ids[:, None] * 3 + np.arange(3)[None, :]).reshape(-1)

    def sector_site_index(self, sector_id):
        return int(np.flatnonzero(self.site_ids == sector_id // 3)[0])

    def ncrs_of_sector(self, sector_id):
        return np.flatnonzero(self.ncr_sector == sector_id)

    def to_dict(self):
        return {
            "area_m": list(self.area_m),
            "sites": [{"id": int(i), "x": float(x), "y": float(y)}
                      for i, (x, y) in zip(self.site_ids, self.site_xy)],
            "ncrs": [{"id": int(i), "x": float(x), "y": float(y), "sector_id": int(s)}
                     for i, (x, y), s in zip(self.ncr_ids, self.ncr_xy, self.ncr_sector)],
            "ues": [{"id": int(i), "x": float(x), "y": float(y)}
                    for i, (x, y) in zip(self.ue_ids, self.ue_xy)],
            "seed": self.seed,
        }


def azimuth_deg(origin_xy, xy):
    d = np.asarray(xy, dtype=float) - np.asarray(origin_xy, dtype=float)
    return np.mod(np.degrees(np.arctan2(d[..., 1], d[..., 0])), 360.0)


def wedge_index(az_deg):
    """Sector index 0/1/2 for the wedges [0,120), [120,240), [240,360)."""
    return np.minimum((np.asarray(az_deg) // SECTOR_WIDTH_DEG).astype(int), 2)


def generate_deployment(params=DeploymentParams(), seed=0):
    rng = np.random.default_rng(seed)
    w, h = params.area_m
    n_sectors = 3 * params.n_sites
    if params.n_ncrs > n_sectors * params.max_ncrs_per_sector:
        raise ValueError(f"{params.n_ncrs} NCRs do not fit in {n_sectors} sectors "
                         f"with at most {params.max_ncrs_per_sector} each")

    cols = max(1, math.ceil(math.sqrt(params.n_sites * w / h)))
    rows = math.ceil(params.n_sites / cols)
    cells = np.sort(rng.choice(rows * cols, size=params.n_sites, replace=False))
    cw, ch = w / cols, h / rows
    cx = (cells % cols + 0.5) * cw
    cy = (cells // cols + 0.5) * ch
    jit = rng.uniform(-params.site_jitter, params.site_jitter, size=(params.n_sites, 2))
    site_xy = np.column_stack([cx + jit[:, 0] * cw, cy + jit[:, 1] * ch])

    n_with = max(math.ceil(params.n_ncrs / params.max_ncrs_per_sector),
                 round(params.ncr_sector_fraction * n_sectors))
    n_with = min(n_with, n_sectors, params.n_ncrs) if params.n_ncrs else 0
    chosen = np.sort(rng.choice(n_sectors, size=n_with, replace=False)) if n_with else np.array([], int)
    counts = np.ones(n_with, dtype=int)
    for _ in range(params.n_ncrs - n_with):
        open_ = np.flatnonzero(counts < params.max_ncrs_per_sector)
        counts[rng.choice(open_)] += 1
    ncr_sector = np.repeat(chosen, counts)

    site_of = ncr_sector // 3
    margin = 10.0
    az = (ncr_sector % 3) * SECTOR_WIDTH_DEG + rng.uniform(margin, SECTOR_WIDTH_DEG - margin, len(ncr_sector))
    r = params.ncr_radius_m * rng.uniform(1 - params.ncr_radius_spread, 1 + params.ncr_radius_spread,
                                          len(ncr_sector))
    ncr_xy = site_xy[site_of] + np.column_stack([r * np.cos(np.radians(az)), r * np.sin(np.radians(az))])

    ue_xy = rng.uniform([0.0, 0.0], [w, h], size=(params.n_ues, 2))
    return Deployment(params.area_m, np.arange(params.n_sites), site_xy,
                      np.arange(len(ncr_sector)), ncr_xy, ncr_sector,
                      np.arange(params.n_ues), ue_xy, seed)


_POINT = {"type": "object", "required": ["id", "x", "y"], "additionalProperties": False,
          "properties": {"id": {"type": "integer"}, "x": {"type": "number"}, "y": {"type": "number"}}}
_NCR = {"type": "object", "required": ["id", "x", "y", "sector_id"], "additionalProperties": False,
        "properties": {**_POINT["properties"], "sector_id": {"type": "integer", "minimum": 0}}}
DEPLOYMENT_SCHEMA = {
    "type": "object",
    "required": ["area_m", "sites", "ncrs", "ues"],
    "additionalProperties": False,
    "properties": {
        "area_m": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                   "minItems": 2, "maxItems": 2},
        "sites": {"type": "array", "items": _POINT, "minItems": 1},
        "ncrs": {"type": "array", "items": _NCR},
        "ues": {"type": "array", "items": _POINT},
        "seed": {"type": ["integer", "null"]},
    },
}


class DeploymentError(ValueError):
    pass


def deployment_from_dict(doc):
    try:
        jsonschema.validate(doc, DEPLOYMENT_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise DeploymentError(f"{path}: {e.message}") from None
    site_ids = {s["id"] for s in doc["sites"]}
    for i, n in enumerate(doc["ncrs"]):
        if n["sector_id"] // 3 not in site_ids:
            raise DeploymentError(f"ncrs/{i}/sector_id: sector {n['sector_id']} belongs to no site")

    def cols(items, *keys):
        return [np.array([it[k] for it in items]) for k in keys]

    sid, sx, sy = cols(doc["sites"], "id", "x", "y")
    nid, nx, ny, ns = cols(doc["ncrs"], "id", "x", "y", "sector_id")
    uid, ux, uy = cols(doc["ues"], "id", "x", "y")
    try:
        return Deployment(doc["area_m"], sid, np.column_stack([sx, sy]), nid,
                          np.column_stack([nx, ny]) if len(nx) else np.empty((0, 2)), ns,
                          uid, np.column_stack([ux, uy]) if len(ux) else np.empty((0, 2)),
                          doc.get("seed"))
    except ValueError as e:
        raise DeploymentError(str(e)) from None


def load_deployment(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise DeploymentError(f"{path}: invalid JSON ({e})") from None
    return deployment_from_dict(doc)


def save_deployment(dep, path):
    with open(path, "w") as fh:
        json.dump(dep.to_dict(), fh, indent=1)
        fh.write("\n")


# --------------------------------------------------------------------------
# association


@dataclass(frozen=True)
class SystemSetup:
    """Radio parameters shared by every node; ``gnb``/``ncr`` are the
    baseline (most spectrally efficient) configurations."""

    gnb: GnbConfig = GnbConfig(192, 10.0, 400e6)
    ncr: NcrConfig = NcrConfig(32, 32, 10.0)
    ue: UeConfig = UeConfig()
    ue_noise: NoiseModel = NoiseModel.from_db(NF_UE_DB)
    ncr_noise: NoiseModel = NoiseModel.from_db(NF_NCR_DB)
    ac_exponent: float = 3.2
    bh_exponent: float = 2.0
    ref_pathloss_db: float = FRIIS_1M_28GHZ_DB
    coverage_threshold_db: float = -3.0
    min_distance_m: float = 1.0
    association: str = "sector_first"

    def __post_init__(self):
        if self.association not in ("sector_first", "best_path"):
            raise ValueError(f"unknown association rule {self.association!r}")

    def pl(self, d, exponent):
        return path_loss_linear(LinkGeometry(np.maximum(d, self.min_distance_m), exponent,
                                             self.ref_pathloss_db))


@dataclass(frozen=True)
class Association:
    """Per-UE serving path. ``sector[i] == -1`` marks an uncovered UE and
    ``ncr[i] == -1`` a direct path; ``ncr`` holds NCR array indices."""

    sector: np.ndarray
    ncr: np.ndarray
    snr: np.ndarray

    @property
    def covered(self):
        return self.sector >= 0

    def path(self, i):
        if self.sector[i] < 0:
            return None
        return "direct" if self.ncr[i] < 0 else f"ncr:{int(self.ncr[i])}"


def _geometry(dep, setup):
    d_site = np.linalg.norm(dep.ue_xy[:, None, :] - dep.site_xy[None, :, :], axis=2)
    wedge = wedge_index(azimuth_deg(dep.site_xy[None, :, :], dep.ue_xy[:, None, :]))
    ue_sector = dep.site_ids[None, :] * 3 + wedge
    ncr_site = np.array([dep.sector_site_index(s) for s in dep.ncr_sector], dtype=int)
    d_bh = np.linalg.norm(dep.ncr_xy - dep.site_xy[ncr_site], axis=1) if len(ncr_site) else np.zeros(0)
    d_ac = np.linalg.norm(dep.ue_xy[:, None, :] - dep.ncr_xy[None, :, :], axis=2)
    return d_site, ue_sector, d_bh, d_ac


def associate_ues(dep, setup=SystemSetup(), use_repeaters=True):
    """Serve each UE by its best candidate path at the baseline configurations.

    With ``setup.association == "sector_first"`` the UE belongs to the sector
    with the strongest direct link and picks between that sector and the NCRs
    attached to it, so repeaters never move load between sectors. With
    "best_path" every sector whose azimuth wedge contains the UE (one per
    site) competes, through its own link or any of its NCRs. UEs whose best
    effective SNR is below the coverage threshold stay uncovered.
    """
    d_site, ue_sector, d_bh, d_ac = _geometry(dep, setup)
    g, bw = setup.gnb, setup.gnb.bandwidth_hz
    snr_d = beamformed_snr(g.paout_mw, g.n_tx, setup.ue.n_rx, setup.pl(d_site, setup.ac_exponent),
                           setup.ue_noise.power_mw(bw))
    best = np.argmax(snr_d, axis=1) if d_site.shape[1] else np.zeros(len(d_site), int)
    rows = np.arange(len(d_site))
    sector = ue_sector[rows, best]
    snr = snr_d[rows, best]
    ncr = np.full(len(d_site), -1)
    if use_repeaters and len(dep.ncr_ids):
        n = setup.ncr
        s_bh = beamformed_snr(g.paout_mw, g.n_tx, n.n_rx, setup.pl(d_bh, setup.bh_exponent),
                              setup.ncr_noise.power_mw(bw))
        p_ncr = np.minimum(n.paout_max_mw, n.max_gain_linear * (1 + s_bh) * setup.ncr_noise.power_mw(bw) / n.n_tx)
        s_ac = beamformed_snr(p_ncr[None, :], n.n_tx, setup.ue.n_rx, setup.pl(d_ac, setup.ac_exponent),
                              setup.ue_noise.power_mw(bw))
        eff = effective_snr(s_bh[None, :], s_ac)
        ncr_site = np.array([dep.sector_site_index(t) for t in dep.ncr_sector], dtype=int)
        if setup.association == "sector_first":
            allowed = sector[:, None] == dep.ncr_sector[None, :]
        else:
            allowed = ue_sector[:, ncr_site] == dep.ncr_sector[None, :]
        eff = np.where(allowed, eff, -1.0)
        j = np.argmax(eff, axis=1)
        eff_best = eff[rows, j]
        use = eff_best > snr
        sector = np.where(use, dep.ncr_sector[j], sector)
        ncr = np.where(use, j, -1)
        snr = np.where(use, eff_best, snr)
    covered = snr >= db_to_linear(setup.coverage_threshold_db)
    return Association(np.where(covered, sector, -1), np.where(covered, ncr, -1), snr)


# --------------------------------------------------------------------------
# sector evaluation


@dataclass(frozen=True)
class SectorReport:
    sector_id: int
    throughput_bps: float
    power: float
    ee: float
    n_ues_direct: int
    n_ues_indirect: int
    gnb_config: tuple = None
    ncr_configs: dict = field(default_factory=dict)
    ue_ids: tuple = ()
    ue_rates_bps: tuple = ()   # time-shared rate of each UE in ue_ids


def _gnb_candidates(grid):
    bw, p, n = np.meshgrid(np.asarray(grid.bw_values, float), np.asarray(grid.gnb_paout_values, float),
                           np.asarray(grid.gnb_ntx_values), indexing="ij")
    bw, p, n = bw.ravel(), p.ravel(), n.ravel()
    ok = np.broadcast_to(grid.eirp_ok(p, n), p.shape)
    return bw[ok], p[ok], n[ok]


def _ncr_candidates(grid):
    pm, nt, nr = np.meshgrid(np.asarray(grid.ncr_paout_values, float), np.asarray(grid.ncr_ntx_values),
                             np.asarray(grid.ncr_nrx_values), indexing="ij")
    return pm.ravel(), nt.ravel(), nr.ravel()


def _direct_rates(bw, p, n, pl, setup):
    snr = beamformed_snr(p, n, setup.ue.n_rx, pl, setup.ue_noise.power_mw(bw))
    return bw * np.log1p(snr) / LN2


def _ncr_terms(bw, p, n, pm, nt, nr, pl_bh, pls_ac, setup, pa_model, k, active):
    """(sum of link rates of the NCR's UEs, NCR power) over the broadcast grid."""
    if not active:
        shape = np.broadcast_shapes(np.shape(bw), np.shape(pm))
        return np.zeros(shape), np.full(shape, k.ncr_sleep_power)
    ncr_noise = setup.ncr_noise.power_mw(bw)
    s_bh = beamformed_snr(p, n, nr, pl_bh, ncr_noise)
    paout = np.minimum(pm, setup.ncr.max_gain_linear * (1.0 + s_bh) * ncr_noise / np.asarray(nt, float))
    power = k.p_const_ncr + ncr_rx_power(nr, k) + ncr_tx_power(nt, paout, pa_model, k)
    rate = np.zeros(np.broadcast_shapes(np.shape(power), np.shape(bw)))
    for pl_ac in pls_ac:
        s_ac = beamformed_snr(paout, nt, setup.ue.n_rx, pl_ac, setup.ue_noise.power_mw(bw))
        rate = rate + bw * np.log1p(effective_snr(s_bh, s_ac)) / LN2
    return rate, np.broadcast_to(power, rate.shape)


def _argmax_min_power(val, power):
    """Row-wise argmax of ``val``; ties go to the lowest power, then lowest index."""
    best = val.max(axis=1, keepdims=True)
    return np.argmin(np.where(val == best, power, np.inf), axis=1)


def _dinkelbach(direct_rate, gnb_power, ncr_terms, max_iter=100):
    """Maximize (A_g + sum_j a_j[g, c_j]) / (P_g + sum_j b_j[g, c_j]) per gNB candidate g.

    Each a_j, b_j has shape (G, C_j). For fixed g the ratio is maximized exactly
    over the discrete product of the C_j by Dinkelbach's parametric method.
    Returns (ratio, power, choices) with choices[j] of shape (G,).
    """
    g = np.arange(len(gnb_power))
    # start from each NCR's lowest-power option
    choice = [np.argmin(b, axis=1) for _, b in ncr_terms]
    num = direct_rate + sum((a[g, c] for (a, _), c in zip(ncr_terms, choice)), np.zeros_like(gnb_power))
    den = gnb_power + sum((b[g, c] for (_, b), c in zip(ncr_terms, choice)), np.zeros_like(gnb_power))
    lam = num / den
    for _ in range(max_iter):
        new = [_argmax_min_power(a - lam[:, None] * b, b) for a, b in ncr_terms]
        num_n = direct_rate + sum((a[g, c] for (a, _), c in zip(ncr_terms, new)), np.zeros_like(gnb_power))
        den_n = gnb_power + sum((b[g, c] for (_, b), c in zip(ncr_terms, new)), np.zeros_like(gnb_power))
        lam_n = num_n / den_n
        better = lam_n > lam
        if not better.any():
            break
        choice = [np.where(better, cn, co) for cn, co in zip(new, choice)]
        num, den, lam = np.where(better, num_n, num), np.where(better, den_n, den), np.where(better, lam_n, lam)
    return lam, den, choice


def evaluate_sector(sector_id, dep, assoc, mode="always_on", opt_mode="baseline",
                    pa_model=PaEfficiencyModel(), consts=PowerConstants(), grid=None,
                    setup=SystemSetup(), ue_mask=None):
    """Throughput, power and EE of one sector under a mode / optimization regime.

    ``assoc`` must come from ``associate_ues`` (with repeaters unless mode is
    no_repeaters). ``ue_mask`` restricts which UEs are scheduled.
    """
    if mode not in MODES or opt_mode not in OPT_MODES:
        raise ValueError(f"unknown regime {mode}:{opt_mode}")
    served = assoc.sector == sector_id
    if ue_mask is not None:
        served &= ue_mask
    ues = np.flatnonzero(served)
    site = dep.sector_site_index(sector_id)
    ncr_idx = dep.ncrs_of_sector(sector_id) if mode != "no_repeaters" else np.array([], int)
    direct_ues = ues[assoc.ncr[ues] < 0]
    ncr_ues = {int(j): ues[assoc.ncr[ues] == j] for j in ncr_idx}
    if mode == "no_repeaters" and np.any(assoc.ncr[ues] >= 0):
        raise ValueError("no_repeaters mode needs an association computed without repeaters")
    active = {j: (mode == "always_on" or len(u) > 0) for j, u in ncr_ues.items()}

    pl_direct = setup.pl(np.linalg.norm(dep.ue_xy[direct_ues] - dep.site_xy[site], axis=1), setup.ac_exponent)
    pl_bh = {j: setup.pl(np.linalg.norm(dep.ncr_xy[j] - dep.site_xy[site]), setup.bh_exponent) for j in ncr_idx}
    pl_ac = {j: setup.pl(np.linalg.norm(dep.ue_xy[u] - dep.ncr_xy[j], axis=1), setup.ac_exponent)
             for j, u in ncr_ues.items()}

    if opt_mode == "baseline":
        g, n = setup.gnb, setup.ncr
        bw, p, nt_g = np.array([g.bandwidth_hz]), np.array([g.paout_mw]), np.array([g.n_tx])
        pm, nt, nr = np.array([n.paout_max_mw]), np.array([n.n_tx]), np.array([n.n_rx])
    else:
        if grid is None:
            raise ValueError("ee_optimal needs a parameter grid")
        bw, p, nt_g = _gnb_candidates(grid)
        pm, nt, nr = _ncr_candidates(grid)

    col = (slice(None), None)
    rates_direct = [_direct_rates(bw, p, nt_g, pl, setup) for pl in pl_direct]
    a_direct = sum(rates_direct, np.zeros(len(bw)))
    p_gnb = _gnb_total(nt_g, p, pa_model, consts) * np.ones(len(bw))
    terms = [_ncr_terms(bw[col], p[col], nt_g[col], pm[None, :], nt[None, :], nr[None, :],
                        pl_bh[j], pl_ac[j], setup, pa_model, consts, active[j]) for j in ncr_idx]
    ratio, power, choice = _dinkelbach(a_direct, p_gnb, terms)
    # best gNB candidate: highest EE, then lowest power, then lowest PA output, then fewest elements
    order = np.lexsort((bw, nt_g, p, power, -ratio))
    gi = int(order[0])

    ncr_cfg = {}
    ue_rate = {int(i): float(r[gi]) for i, r in zip(direct_ues, rates_direct)}
    for j, c in zip(ncr_idx, choice):
        ci = int(c[gi])
        ncr_cfg[int(dep.ncr_ids[j])] = (float(pm[ci]), int(nt[ci]), int(nr[ci]), bool(active[j]))
        for i, pl in zip(ncr_ues[int(j)], pl_ac[j]):
            r, _ = _ncr_terms(bw[gi], p[gi], nt_g[gi], pm[ci], nt[ci], nr[ci], pl_bh[j], [pl],
                              setup, pa_model, consts, True)
            ue_rate[int(i)] = float(r)

    n_ues = len(ues)
    total_rate = float(sum(ue_rate.values()))
    throughput = total_rate / n_ues if n_ues else 0.0
    pw = float(power[gi])
    ids = tuple(int(dep.ue_ids[i]) for i in sorted(ue_rate))
    shares = tuple(ue_rate[i] / n_ues for i in sorted(ue_rate))
    return SectorReport(
        sector_id=int(sector_id), throughput_bps=throughput, power=pw, ee=throughput / pw,
        n_ues_direct=len(direct_ues), n_ues_indirect=n_ues - len(direct_ues),
        gnb_config=(float(bw[gi]), float(p[gi]), int(nt_g[gi])), ncr_configs=ncr_cfg,
        ue_ids=ids, ue_rates_bps=shares,
    )


# --------------------------------------------------------------------------
# whole system


@dataclass(frozen=True)
class SystemReport:
    sectors: dict          # regime -> tuple of SectorReport (ordered by sector id)
    ue_rates: dict         # regime -> {ue_id: time-shared rate}
    shared_ues: tuple      # UE ids covered without repeaters (the compared set)

    def values(self, metric, regime):
        if metric == "ue_rate":
            items = self.ue_rates[regime].items()
        else:
            attr = {"sector_throughput": "throughput_bps", "sector_power": "power", "sector_ee": "ee"}[metric]
            items = ((s.sector_id, getattr(s, attr)) for s in self.sectors[regime])
        return sorted(items, key=lambda kv: (kv[1], kv[0]))

    def cdf(self, metric, regime):
        """Sorted values: the support of the empirical CDF."""
        return np.array([v for _, v in self.values(metric, regime)])

    @property
    def regimes(self):
        return tuple(self.sectors)


def default_system_grid():
    """Coarser grid for per-sector optimization (shares the problem bounds)."""
    return ParameterGrid.default(paout_step_db=1.0, gnb_ntx_step=16, ncr_ant_step=4)


def run_system(dep, setup=SystemSetup(), pa_model=PaEfficiencyModel(), consts=PowerConstants(),
               grid=None, modes=MODES, opt_modes=OPT_MODES):
    if grid is None:
        grid = default_system_grid()
    assoc_rep = associate_ues(dep, setup, use_repeaters=True)
    assoc_none = associate_ues(dep, setup, use_repeaters=False)
    shared = assoc_none.covered
    sectors, ue_rates = {}, {}
    for mode in modes:
        assoc = assoc_none if mode == "no_repeaters" else assoc_rep
        for opt_mode in opt_modes:
            reps = tuple(evaluate_sector(s, dep, assoc, mode, opt_mode, pa_model, consts, grid, setup,
                                         ue_mask=shared) for s in dep.sector_ids)
            name = regime_name(mode, opt_mode)
            sectors[name] = reps
            ue_rates[name] = {u: r for rep in reps for u, r in zip(rep.ue_ids, rep.ue_rates_bps)}
    return SystemReport(sectors, ue_rates, tuple(int(i) for i in dep.ue_ids[shared]))


def write_system_csvs(report, out_dir):
    """One CSV per metric with rows (regime, entity_id, value), ascending within regime."""
    paths = []
    for metric in METRICS:
        path = os.path.join(out_dir, f"{metric}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["regime", "entity_id", "value"])
            for regime in report.regimes:
                for eid, v in report.values(metric, regime):
                    w.writerow([regime, eid, repr(float(v))])
        paths.append(path)
    return paths
