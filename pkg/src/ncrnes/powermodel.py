"""gNB and NCR downlink power consumption in abstract Unit Power.

The shipped ``PowerConstants`` defaults are small round toy numbers, not
3GPP reference values. Override them from a run config for real studies.
"""

from dataclasses import dataclass, field

import numpy as np

from .linkbudget import _check, _out


@dataclass(frozen=True)
class PaEfficiencyModel:
    """PA efficiency, normalized to the efficiency at ``paout_ref_mw``.

    kind="fixed" models a bias-adjusted PA (normalized efficiency is always 1).
    kind="varying" models a legacy PA whose efficiency rises with output
    power. By default the curve is eff_max * (P / paout_ref) ** exponent,
    capped at eff_max and floored at ``eff_floor``. The default exponent 0.5
    is class-B-like; 1 is class-A-like (DC draw independent of output). Pass
    ``curve=(paout_mw, efficiency)`` to use a piecewise-linear table instead
    (clamped at its endpoints).
    """

    kind: str = "fixed"
    paout_ref_mw: float = 10.0
    eff_max: float = 0.3
    eff_floor: float = 1e-6
    curve: tuple | None = None
    exponent: float = 0.5

    def __post_init__(self):
        _check(self.exponent > 0, "exponent must be > 0")
        if self.kind not in ("fixed", "varying"):
            raise ValueError(f"unknown PA efficiency kind {self.kind!r}")
        _check(self.paout_ref_mw > 0, "paout_ref_mw must be > 0")
        _check(0 < self.eff_floor < self.eff_max <= 1, "need 0 < eff_floor < eff_max <= 1")
        if self.curve is not None:
            x, y = (np.asarray(v, dtype=float) for v in self.curve)
            if x.ndim != 1 or x.shape != y.shape or x.size < 2:
                raise ValueError("curve must be two equal-length 1-D sequences (>= 2 points)")
            if np.any(np.diff(x) <= 0):
                raise ValueError("curve output powers must be strictly increasing")
            if np.any(np.diff(y) < 0):
                raise ValueError("curve efficiencies must be nondecreasing")
            if np.any(y <= 0) or np.any(y > 1):
                raise ValueError("curve efficiencies must lie in (0, 1]")
            object.__setattr__(self, "curve", (tuple(x.tolist()), tuple(y.tolist())))

    def efficiency(self, paout_mw):
        """Absolute PA efficiency at the given per-element output (varying kind)."""
        p = np.asarray(paout_mw, dtype=float)
        if self.curve is not None:
            return _out(np.interp(p, self.curve[0], self.curve[1]))
        eff = self.eff_max * (p / self.paout_ref_mw) ** self.exponent
        return _out(np.clip(eff, self.eff_floor, self.eff_max))


def pa_efficiency_norm(model, paout_mw):
    """Normalized PA efficiency eta = PAeff(paout) / PAeff(paout_ref)."""
    p = np.asarray(paout_mw, dtype=float)
    _check(p >= 0, "paout_mw must be >= 0")
    if model.kind == "fixed":
        return _out(np.ones_like(p))
    return _out(np.asarray(model.efficiency(p)) / model.efficiency(model.paout_ref_mw))


@dataclass(frozen=True)
class PowerConstants:
    # gNB
    p_ms_gnb: float = 10.0
    p_non_pa: float = 20.0
    p_active_dl: float = 40.0
    p_active_ul: float = 20.0
    ref_tx_power_per_ru_mw: float = 1920.0
    alpha: float = 0.4
    beta: float = 0.6
    # NCR
    ref_n_rx: int = 32
    gamma: float = 0.4
    xi: float = 0.6
    p_const_ncr: float = 5.0
    ncr_ref_tx_power_mw: float = 320.0
    ncr_sleep_power: float = 0.0

    def __post_init__(self):
        for name in ("p_ms_gnb", "p_non_pa", "p_active_dl", "p_active_ul",
                     "ref_tx_power_per_ru_mw", "alpha", "beta", "ref_n_rx",
                     "gamma", "xi", "p_const_ncr", "ncr_ref_tx_power_mw"):
            if not getattr(self, name) > 0:
                raise ValueError(f"PowerConstants.{name} must be > 0")
        if self.ncr_sleep_power < 0:
            raise ValueError("PowerConstants.ncr_sleep_power must be >= 0")
        if not self.p_active_dl > self.p_ms_gnb:
            raise ValueError("p_active_dl must exceed p_ms_gnb")


@dataclass(frozen=True)
class PowerBreakdown:
    """gNB consumption split into its weighted contributions.

    ``static_part + non_pa_part + pa_part == total``; ``p_pa`` is the raw
    PA-related consumption before the beta weight.
    """

    static_part: float
    non_pa_part: float
    pa_part: float
    p_pa: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", _out(self.static_part + self.non_pa_part + self.pa_part))


@dataclass(frozen=True)
class NcrPowerBreakdown:
    const_part: float
    rx_part: float
    tx_part: float
    active: bool = True
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", _out(self.const_part + self.rx_part + self.tx_part))


def gnb_pa_power(n_tx, paout_mw, model, k):
    """Raw PA-related gNB consumption P_PA (array friendly)."""
    eta = pa_efficiency_norm(model, paout_mw)
    return (np.asarray(n_tx, dtype=float) * paout_mw / k.ref_tx_power_per_ru_mw
            / eta * (k.p_active_dl - k.p_ms_gnb))


def gnb_power(cfg, model, k):
    p_pa = gnb_pa_power(cfg.n_tx, cfg.paout_mw, model, k)
    return PowerBreakdown(
        static_part=k.p_ms_gnb,
        non_pa_part=k.alpha * k.p_non_pa,
        pa_part=_out(k.beta * p_pa),
        p_pa=_out(p_pa),
    )


def ncr_rx_power(n_rx, k):
    return np.asarray(n_rx, dtype=float) / k.ref_n_rx * (k.gamma * k.p_active_ul)


def ncr_tx_power(n_tx, paout_mw, model, k):
    eta = pa_efficiency_norm(model, paout_mw)
    return (np.asarray(n_tx, dtype=float) * paout_mw / k.ncr_ref_tx_power_mw
            / eta * (k.xi * k.p_active_dl))


def ncr_power(cfg, paout_actual_mw, model, k, active=True):
    """NCR consumption; an inactive (switched off) repeater draws only sleep power."""
    if not active:
        return NcrPowerBreakdown(k.ncr_sleep_power, 0.0, 0.0, active=False)
    return NcrPowerBreakdown(
        const_part=k.p_const_ncr,
        rx_part=_out(ncr_rx_power(cfg.n_rx, k)),
        tx_part=_out(ncr_tx_power(cfg.n_tx, paout_actual_mw, model, k)),
    )
