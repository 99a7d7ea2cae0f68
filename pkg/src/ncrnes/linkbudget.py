"""Downlink link budget for direct (gNB -> UE) and repeater-assisted
(gNB -> NCR -> UE) links.

Everything here works in linear units (mW, mW/Hz, plain ratios). The node
configs accept numpy arrays as well as scalars so the optimizer can push a
whole parameter grid through the same formulas by broadcasting.
"""

from dataclasses import dataclass

import numpy as np

from .units import db_to_linear

FRIIS_1M_28GHZ_DB = 61.4
THERMAL_NOISE_DBM_PER_HZ = -174.0
NF_UE_DB = 10.0
NF_NCR_DB = 7.0
NCR_MAX_GAIN_DB = 90.0


def _check(cond, msg):
    if not np.all(cond):
        raise ValueError(msg)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class LinkGeometry:
    """Distance power-law path loss: PL_dB = ref_pathloss_db + 10 n log10(d)."""

    distance_m: float
    pathloss_exponent: float
    ref_pathloss_db: float = FRIIS_1M_28GHZ_DB

    def __post_init__(self):
        _check(np.asarray(self.distance_m) > 0, f"distance_m must be > 0, got {self.distance_m}")
        _check(np.asarray(self.pathloss_exponent) > 0, "pathloss_exponent must be > 0")
        _check(np.isfinite(self.ref_pathloss_db), "ref_pathloss_db must be finite")

    def at(self, distance_m):
        return LinkGeometry(distance_m, self.pathloss_exponent, self.ref_pathloss_db)


@dataclass(frozen=True)
class NoiseModel:
    noise_figure_linear: float
    thermal_noise_density_mw_per_hz: float = db_to_linear(THERMAL_NOISE_DBM_PER_HZ)

    def __post_init__(self):
        _check(self.noise_figure_linear >= 1.0, "noise figure must be >= 1 (0 dB)")
        _check(self.thermal_noise_density_mw_per_hz > 0, "thermal noise density must be > 0")

    @classmethod
    def from_db(cls, nf_db, n0_dbm_per_hz=THERMAL_NOISE_DBM_PER_HZ):
        return cls(db_to_linear(nf_db), db_to_linear(n0_dbm_per_hz))

    def power_mw(self, bandwidth_hz):
        """Receiver noise power NF * N0 * BW in mW."""
        return self.noise_figure_linear * self.thermal_noise_density_mw_per_hz * bandwidth_hz


@dataclass(frozen=True)
class GnbConfig:
    n_tx: int
    paout_mw: float
    bandwidth_hz: float

    def __post_init__(self):
        _check(np.asarray(self.n_tx) >= 1, "gNB n_tx must be >= 1")
        _check(np.asarray(self.paout_mw) >= 0, "gNB paout_mw must be >= 0")
        _check(np.asarray(self.bandwidth_hz) > 0, "bandwidth_hz must be > 0")


@dataclass(frozen=True)
class NcrConfig:
    n_tx: int
    n_rx: int
    paout_max_mw: float
    max_gain_linear: float = db_to_linear(NCR_MAX_GAIN_DB)

    def __post_init__(self):
        _check(np.asarray(self.n_tx) >= 1, "NCR n_tx must be >= 1")
        _check(np.asarray(self.n_rx) >= 1, "NCR n_rx must be >= 1")
        _check(np.asarray(self.paout_max_mw) >= 0, "NCR paout_max_mw must be >= 0")
        _check(np.asarray(self.max_gain_linear) > 0, "NCR max_gain_linear must be > 0")


@dataclass(frozen=True)
class UeConfig:
    n_rx: int = 4

    def __post_init__(self):
        _check(np.asarray(self.n_rx) >= 1, "UE n_rx must be >= 1")


def path_loss_db(geom):
    d = np.asarray(geom.distance_m, dtype=float)
    return _out(geom.ref_pathloss_db + 10.0 * geom.pathloss_exponent * np.log10(d))


def path_loss_linear(geom):
    d = np.asarray(geom.distance_m, dtype=float)
    return _out(db_to_linear(geom.ref_pathloss_db) * d ** geom.pathloss_exponent)


def beamformed_snr(paout_mw, n_tx, n_rx, path_loss, noise_mw):
    """PAout * N_tx^2 * N_rx / (PL * noise).

    N_tx enters squared: once for the radiated power PAout * N_tx and once
    for the transmit array gain.
    """
    n_tx = np.asarray(n_tx, dtype=float)
    return paout_mw * (n_tx * n_tx) * n_rx / (path_loss * noise_mw)


def snr_direct(gnb, ue, geom, noise):
    """Downlink SNR of a UE served directly by the gNB."""
    return _out(beamformed_snr(gnb.paout_mw, gnb.n_tx, ue.n_rx,
                               path_loss_linear(geom), noise.power_mw(gnb.bandwidth_hz)))


def snr_backhaul(gnb, ncr, geom, noise):
    """SNR at the NCR receiver on the gNB -> NCR hop (noise is the NCR's)."""
    return _out(beamformed_snr(gnb.paout_mw, gnb.n_tx, ncr.n_rx,
                               path_loss_linear(geom), noise.power_mw(gnb.bandwidth_hz)))


def ncr_pa_output(ncr, snr_bh, noise, bandwidth_hz):
    """Per-element NCR PA output in mW.

    The repeater amplifies whatever it receives (signal plus its own noise)
    by at most ``max_gain_linear``, spread over its transmit elements, and
    cannot exceed ``paout_max_mw``.
    """
    snr_bh = np.asarray(snr_bh, dtype=float)
    _check(snr_bh >= 0, "snr_bh must be >= 0")
    gain_limited = (ncr.max_gain_linear * (1.0 + snr_bh) * noise.power_mw(bandwidth_hz)
                    / np.asarray(ncr.n_tx, dtype=float))
    return _out(np.minimum(ncr.paout_max_mw, gain_limited))


def snr_access(ncr, ue, geom, noise, paout_actual_mw, bandwidth_hz):
    """SNR at the UE on the NCR -> UE hop, given the NCR's actual PA output."""
    return _out(beamformed_snr(paout_actual_mw, ncr.n_tx, ue.n_rx,
                               path_loss_linear(geom), noise.power_mw(bandwidth_hz)))


def effective_snr(snr_bh, snr_ac):
    """End-to-end SNR of the amplify-and-forward chain.

    1 / (1/SNR_BH + (1/SNR_AC) * (1 + SNR_BH)/SNR_BH). A zero SNR on either
    hop gives 0 and an infinite SNR on one hop gives the other hop's SNR
    (the limits of the expression).
    """
    bh = np.asarray(snr_bh, dtype=float)
    ac = np.asarray(snr_ac, dtype=float)
    with np.errstate(divide="ignore"):
        inv_bh = 1.0 / bh
        inv_ac = 1.0 / ac
        return _out(1.0 / (inv_bh + inv_ac * (1.0 + inv_bh)))


def effective_snr_alt(snr_bh, snr_ac):
    """SNR_AC / (1 + (1 + SNR_AC)/SNR_BH); same quantity as effective_snr."""
    bh = np.asarray(snr_bh, dtype=float)
    ac = np.asarray(snr_ac, dtype=float)
    return _out(ac / (1.0 + (1.0 + ac) / bh))
