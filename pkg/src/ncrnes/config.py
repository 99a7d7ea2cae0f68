"""Run configuration: strict JSON schema, defaults, and conversion to the
linear-unit objects the core modules expect.

Resolution order is command-line flags > config file > defaults. Every
effective value ends up in the resolved dict, which is echoed verbatim into
the run manifest.
"""

import copy
import json

import jsonschema
import numpy as np

from .linkbudget import (
    FRIIS_1M_28GHZ_DB,
    NCR_MAX_GAIN_DB,
    NF_NCR_DB,
    NF_UE_DB,
    THERMAL_NOISE_DBM_PER_HZ,
    GnbConfig,
    LinkGeometry,
    NcrConfig,
    NoiseModel,
    UeConfig,
)
from .optimizer import (
    GNB_NTX_BOUNDS,
    NCR_ANT_BOUNDS,
    PAOUT_BOUNDS_DBM,
    ParameterGrid,
    antenna_values,
    paout_values_mw,
)
from .powermodel import PaEfficiencyModel, PowerConstants
from .scenarios import McCandidates, SweepSpec, default_distances
from .syslevel import DeploymentParams, SystemSetup
from .units import db_to_linear, dbm_to_mw

STUDIES = ("direct-sweep", "indirect-sweep", "compare-mc", "system")

DEFAULTS = {
    "pa_model": "fixed",
    "seed": 0,
    "n_jobs": 1,
    "pa": {"paout_ref_dbm": 10.0, "eff_max": 0.3, "exponent": 0.5},
    "grid": {
        "paout_min_dbm": PAOUT_BOUNDS_DBM[0],
        "paout_max_dbm": PAOUT_BOUNDS_DBM[1],
        "paout_step_db": 0.5,
        "gnb_ntx_step": 4,
        "ncr_ant_step": 1,
        "bw_mhz": [1.0, 50.0, 100.0, 200.0, 400.0],
        "gnb_eirp_cap_dbm": None,
    },
    "constants": {k: v for k, v in PowerConstants().__dict__.items()},
    "geometry": {"ac_exponent": 3.2, "bh_exponent": 2.0, "ref_pathloss_db": FRIIS_1M_28GHZ_DB, "d_bh_m": 94.0},
    "noise": {"nf_ue_db": NF_UE_DB, "nf_ncr_db": NF_NCR_DB, "n0_dbm_per_hz": THERMAL_NOISE_DBM_PER_HZ},
    "ue_n_rx": 4,
    "ncr_max_gain_db": NCR_MAX_GAIN_DB,
    "sweep": {"d_min_m": 5.0, "d_max_m": 200.0, "n_points": 40},
    "compare": {
        "target_snr_db": 0.0,
        "bw_mhz": 400.0,
        "sc_n_tx": 192,
        "sc_paout_dbm": 10.0,
        "ncr_n_tx": 32,
        "ncr_n_rx": 32,
        "ncr_paout_max_dbm": 10.0,
        "mc_n_tx": [192, 256, 384, 512, 768, 1024],
        "mc_paout_max_dbm": 13.0,
        "mc_paout_step_db": 0.5,
        "n_points": 60,
    },
    "system": {
        "deployment_file": None,
        "n_sites": 20,
        "n_ncrs": 62,
        "n_ues": 600,
        "area_m": [1000.0, 1000.0],
        "ncr_sector_fraction": 0.4,
        "max_ncrs_per_sector": 3,
        "ncr_radius_m": 150.0,
        "coverage_threshold_db": -3.0,
        "association": "sector_first",
        "paout_step_db": 1.0,
        "gnb_ntx_step": 16,
        "ncr_ant_step": 4,
    },
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_PAOUT = {"type": "number", "minimum": PAOUT_BOUNDS_DBM[0], "maximum": PAOUT_BOUNDS_DBM[1]}
_STEP = {"type": "number", "exclusiveMinimum": 0, "maximum": 10}
_INT1 = {"type": "integer", "minimum": 1}
_FRAC = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_BW = {"type": "number", "minimum": 1.0, "maximum": 400.0}


def _obj(props):
    return {"type": "object", "additionalProperties": False, "properties": props}


SCHEMA = _obj({
    "pa_model": {"enum": ["fixed", "varying"]},
    "seed": {"type": "integer", "minimum": 0},
    "n_jobs": _INT1,
    "pa": _obj({"paout_ref_dbm": _NUM, "eff_max": _FRAC, "exponent": _POS}),
    "grid": _obj({
        "paout_min_dbm": _PAOUT, "paout_max_dbm": _PAOUT, "paout_step_db": _STEP,
        "gnb_ntx_step": {"type": "integer", "minimum": 1, "maximum": GNB_NTX_BOUNDS[1]},
        "ncr_ant_step": {"type": "integer", "minimum": 1, "maximum": NCR_ANT_BOUNDS[1]},
        "bw_mhz": {"type": "array", "items": _BW, "minItems": 1},
        "gnb_eirp_cap_dbm": {"type": ["number", "null"]},
    }),
    "constants": _obj({k: ({"type": "number", "minimum": 0} if k == "ncr_sleep_power" else _POS)
                       for k in DEFAULTS["constants"]}),
    "geometry": _obj({"ac_exponent": _POS, "bh_exponent": _POS, "ref_pathloss_db": _NUM, "d_bh_m": _POS}),
    "noise": _obj({"nf_ue_db": {"type": "number", "minimum": 0},
                   "nf_ncr_db": {"type": "number", "minimum": 0}, "n0_dbm_per_hz": _NUM}),
    "ue_n_rx": _INT1,
    "ncr_max_gain_db": _NUM,
    "sweep": _obj({"d_min_m": _POS, "d_max_m": _POS, "n_points": _INT1}),
    "compare": _obj({
        "target_snr_db": _NUM, "bw_mhz": _BW,
        "sc_n_tx": {"type": "integer", "minimum": 1, "maximum": GNB_NTX_BOUNDS[1]},
        "sc_paout_dbm": _PAOUT,
        "ncr_n_tx": {"type": "integer", "minimum": 1, "maximum": NCR_ANT_BOUNDS[1]},
        "ncr_n_rx": {"type": "integer", "minimum": 1, "maximum": NCR_ANT_BOUNDS[1]},
        "ncr_paout_max_dbm": _PAOUT,
        "mc_n_tx": {"type": "array", "items": _INT1, "minItems": 1},
        "mc_paout_max_dbm": {"type": "number", "minimum": 0},
        "mc_paout_step_db": _STEP,
        "n_points": _INT1,
    }),
    "system": _obj({
        "deployment_file": {"type": ["string", "null"]},
        "n_sites": _INT1, "n_ncrs": {"type": "integer", "minimum": 0}, "n_ues": {"type": "integer", "minimum": 0},
        "area_m": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        "ncr_sector_fraction": _FRAC, "max_ncrs_per_sector": _INT1, "ncr_radius_m": _POS,
        "coverage_threshold_db": _NUM,
        "association": {"enum": ["sector_first", "best_path"]},
        "paout_step_db": _STEP,
        "gnb_ntx_step": {"type": "integer", "minimum": 1, "maximum": GNB_NTX_BOUNDS[1]},
        "ncr_ant_step": {"type": "integer", "minimum": 1, "maximum": NCR_ANT_BOUNDS[1]},
    }),
})


class ConfigError(ValueError):
    pass


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(doc):
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as e:
        path = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {e.message}") from None
    g = doc.get("grid", {})
    lo, hi = g.get("paout_min_dbm", PAOUT_BOUNDS_DBM[0]), g.get("paout_max_dbm", PAOUT_BOUNDS_DBM[1])
    if lo > hi:
        raise ConfigError("grid.paout_min_dbm: exceeds grid.paout_max_dbm")
    s = doc.get("sweep", {})
    if s.get("d_min_m", 0) > s.get("d_max_m", np.inf):
        raise ConfigError("sweep.d_min_m: exceeds sweep.d_max_m")


def parse_config(path=None, overrides=None):
    """Resolved config dict. ``overrides`` (from flags) win over the file."""
    doc = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror}") from None
        if text.strip():
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: invalid JSON ({e})") from None
    validate(doc)
    cfg = _merge(DEFAULTS, doc)
    cfg = _merge(cfg, overrides or {})
    validate(cfg)
    return cfg


# --------------------------------------------------------------------------
# dB -> linear objects


def pa_model(cfg):
    p = cfg["pa"]
    return PaEfficiencyModel(cfg["pa_model"], float(dbm_to_mw(p["paout_ref_dbm"])), p["eff_max"],
                             exponent=p["exponent"])


def constants(cfg):
    return PowerConstants(**cfg["constants"])


def grid(cfg):
    g = cfg["grid"]
    paout = paout_values_mw(g["paout_min_dbm"], g["paout_max_dbm"], g["paout_step_db"])
    ncr_ant = antenna_values(*NCR_ANT_BOUNDS, g["ncr_ant_step"])
    return ParameterGrid(
        bw_values=tuple(sorted(b * 1e6 for b in g["bw_mhz"])),
        gnb_paout_values=paout,
        gnb_ntx_values=antenna_values(*GNB_NTX_BOUNDS, g["gnb_ntx_step"]),
        ncr_paout_values=paout,
        ncr_ntx_values=ncr_ant,
        ncr_nrx_values=ncr_ant,
        gnb_eirp_cap_dbm=g["gnb_eirp_cap_dbm"],
    )


def noise_models(cfg):
    n = cfg["noise"]
    return NoiseModel.from_db(n["nf_ue_db"], n["n0_dbm_per_hz"]), NoiseModel.from_db(n["nf_ncr_db"], n["n0_dbm_per_hz"])


def sweep_spec(cfg):
    s, geo = cfg["sweep"], cfg["geometry"]
    ue_noise, ncr_noise = noise_models(cfg)
    return SweepSpec(
        distances_m=default_distances(s["d_min_m"], s["d_max_m"], s["n_points"]),
        pa_model=pa_model(cfg), grid=grid(cfg), consts=constants(cfg),
        ac_exponent=geo["ac_exponent"], bh_exponent=geo["bh_exponent"], ref_pathloss_db=geo["ref_pathloss_db"],
        d_bh_m=geo["d_bh_m"], ue=UeConfig(cfg["ue_n_rx"]), ue_noise=ue_noise, ncr_noise=ncr_noise,
        ncr_max_gain_linear=float(db_to_linear(cfg["ncr_max_gain_db"])), n_jobs=cfg["n_jobs"],
    )


def compare_inputs(cfg):
    """Keyword arguments for ``compare_sc_mc``."""
    c, geo = cfg["compare"], cfg["geometry"]
    ue_noise, ncr_noise = noise_models(cfg)
    bw = c["bw_mhz"] * 1e6
    mc_p = np.arange(0.0, c["mc_paout_max_dbm"] + 1e-9, c["mc_paout_step_db"])
    return dict(
        target_snr=float(db_to_linear(c["target_snr_db"])),
        sc_config=GnbConfig(c["sc_n_tx"], float(dbm_to_mw(c["sc_paout_dbm"])), bw),
        ncr_config=NcrConfig(c["ncr_n_tx"], c["ncr_n_rx"], float(dbm_to_mw(c["ncr_paout_max_dbm"])),
                             float(db_to_linear(cfg["ncr_max_gain_db"]))),
        mc_candidates=McCandidates(tuple(c["mc_n_tx"]), tuple(float(x) for x in dbm_to_mw(mc_p))),
        ue=UeConfig(cfg["ue_n_rx"]),
        bh_template=LinkGeometry(1.0, geo["bh_exponent"], geo["ref_pathloss_db"]),
        ac_template=LinkGeometry(1.0, geo["ac_exponent"], geo["ref_pathloss_db"]),
        ncr_noise=ncr_noise, ue_noise=ue_noise, pa_model=pa_model(cfg), consts=constants(cfg),
        n_points=c["n_points"],
    )


def deployment_params(cfg):
    s = cfg["system"]
    return DeploymentParams(s["n_sites"], s["n_ncrs"], s["n_ues"], tuple(s["area_m"]),
                            ncr_sector_fraction=s["ncr_sector_fraction"],
                            max_ncrs_per_sector=s["max_ncrs_per_sector"], ncr_radius_m=s["ncr_radius_m"])


def system_setup(cfg):
    s, geo = cfg["system"], cfg["geometry"]
    ue_noise, ncr_noise = noise_models(cfg)
    g = cfg["grid"]
    return SystemSetup(
        gnb=GnbConfig(GNB_NTX_BOUNDS[1], float(dbm_to_mw(g["paout_max_dbm"])), max(g["bw_mhz"]) * 1e6),
        ncr=NcrConfig(NCR_ANT_BOUNDS[1], NCR_ANT_BOUNDS[1], float(dbm_to_mw(g["paout_max_dbm"])),
                      float(db_to_linear(cfg["ncr_max_gain_db"]))),
        ue=UeConfig(cfg["ue_n_rx"]), ue_noise=ue_noise, ncr_noise=ncr_noise,
        ac_exponent=geo["ac_exponent"], bh_exponent=geo["bh_exponent"], ref_pathloss_db=geo["ref_pathloss_db"],
        coverage_threshold_db=s["coverage_threshold_db"], association=s["association"],
    )


def system_grid(cfg):
    s, g = cfg["system"], cfg["grid"]
    paout = paout_values_mw(g["paout_min_dbm"], g["paout_max_dbm"], s["paout_step_db"])
    ncr_ant = antenna_values(*NCR_ANT_BOUNDS, s["ncr_ant_step"])
    return ParameterGrid(
        bw_values=tuple(sorted(b * 1e6 for b in g["bw_mhz"])),
        gnb_paout_values=paout,
        gnb_ntx_values=antenna_values(*GNB_NTX_BOUNDS, s["gnb_ntx_step"]),
        ncr_paout_values=paout, ncr_ntx_values=ncr_ant, ncr_nrx_values=ncr_ant,
        gnb_eirp_cap_dbm=g["gnb_eirp_cap_dbm"],
    )
