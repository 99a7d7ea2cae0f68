import csv
import math

import numpy as np
import pytest

from ncrnes.linkbudget import GnbConfig, LinkGeometry, NcrConfig, NoiseModel, UeConfig, snr_direct
from ncrnes.optimizer import ParameterGrid, evaluate_indirect, optimize_indirect, shannon_rate
from ncrnes.powermodel import PaEfficiencyModel
from ncrnes.scenarios import (
    McCandidates,
    StrategyEvent,
    SweepSpec,
    compare_sc_mc,
    coverage_range,
    default_distances,
    departure_distance,
    direct_sweep,
    extract_strategy,
    indirect_sweep,
    required_access_snr,
    write_sweep_csv,
)

SMALL = ParameterGrid.default(paout_step_db=1.0, gnb_ntx_step=16, ncr_ant_step=8)
UE_NOISE = NoiseModel.from_db(10.0)
SC = GnbConfig(192, 10.0, 400e6)
NCR = NcrConfig(32, 32, 10.0)


class TestSweeps:
    def test_far_rows_equal_baseline(self):
        rows = direct_sweep(SweepSpec(distances_m=(400.0, 800.0)))
        for r in rows:
            assert (r.rel_ee, r.rel_rate) == (1.0, 1.0)
            assert r.opt.config == r.baseline.config

    def test_short_distance_fixed(self):
        (row,) = direct_sweep(SweepSpec(distances_m=(10.0,)))
        assert row.rel_ee > 1.0
        assert 0.0 < row.rel_rate < 1.0

    def test_singleton_grid(self):
        g = ParameterGrid((4e8,), (10.0,), (192,), (10.0,), (32,), (32,))
        spec = SweepSpec(distances_m=(5.0, 50.0), grid=g)
        for r in direct_sweep(spec) + indirect_sweep(spec):
            assert (r.rel_ee, r.rel_rate) == (1.0, 1.0)

    def test_rel_ee_at_least_one(self):
        spec = SweepSpec(distances_m=default_distances(5, 200, 8), grid=SMALL,
                         pa_model=PaEfficiencyModel("varying"))
        assert all(r.rel_ee >= 1.0 for r in direct_sweep(spec) + indirect_sweep(spec))

    def test_indirect_is_composition(self):
        spec = SweepSpec(distances_m=(15.0, 48.0), grid=SMALL)
        rows = indirect_sweep(spec)
        for d, row in zip((15.0, 48.0), rows):
            link = spec.relay_link(d)
            assert row.opt == optimize_indirect(SMALL, link, spec.pa_model, spec.consts)
            assert row.baseline == evaluate_indirect(SMALL.baseline("indirect"), link, spec.pa_model, spec.consts)

    def test_distances_validated(self):
        with pytest.raises(ValueError):
            SweepSpec(distances_m=(10.0, 5.0))
        with pytest.raises(ValueError):
            SweepSpec(distances_m=(0.0, 5.0))

    def test_baseline_override(self):
        spec = SweepSpec(distances_m=(30.0,), baseline_overrides={"gnb_paout_mw": 3.0})
        (row,) = direct_sweep(spec)
        assert row.baseline.config.gnb_paout_mw == 3.0

    def test_csv(self, tmp_path):
        rows = direct_sweep(SweepSpec(distances_m=(10.0, 20.0, 40.0), grid=SMALL))
        path = tmp_path / "s.csv"
        write_sweep_csv(rows, path)
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        recs = list(csv.DictReader(raw.decode().splitlines()))
        assert len(recs) == 3
        assert list(recs[0])[:3] == ["distance_m", "rel_ee", "rel_rate"]
        assert float(recs[1]["distance_m"]) == 20.0


class TestStrategy:
    def test_empty_when_all_baseline(self):
        assert extract_strategy(direct_sweep(SweepSpec(distances_m=(300.0, 600.0)))) == []
        assert extract_strategy([]) == []

    def test_fixed_reduces_power_first(self):
        rows = direct_sweep(SweepSpec())
        ev = extract_strategy(rows)
        assert ev[0].parameter == "gnb_paout_mw"
        assert departure_distance(ev, "gnb_paout_mw") > departure_distance(ev, "gnb_n_tx")

    def test_varying_reduces_elements_first(self):
        rows = direct_sweep(SweepSpec(pa_model=PaEfficiencyModel("varying")))
        ev = extract_strategy(rows)
        assert ev[0].parameter == "gnb_n_tx"
        assert departure_distance(ev, "gnb_n_tx") > departure_distance(ev, "gnb_paout_mw")

    def test_order_independent_of_row_order(self):
        rows = direct_sweep(SweepSpec(distances_m=default_distances(5, 200, 10)))
        assert extract_strategy(rows) == extract_strategy(rows[::-1])

    def test_departure_distance_default(self):
        assert departure_distance([StrategyEvent("gnb_n_tx", 10.0)], "bw_hz") == 0.0


class TestCoverage:
    geom = LinkGeometry(1.0, 3.2)

    def test_one_metre(self):
        t = snr_direct(SC, UeConfig(), self.geom, UE_NOISE)
        assert coverage_range(SC, UeConfig(), self.geom, UE_NOISE, t) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("target_db", [-3.0, 0.0, 10.0, 30.0])
    def test_inverts_snr(self, target_db):
        t = 10 ** (target_db / 10)
        d = coverage_range(SC, UeConfig(), self.geom, UE_NOISE, t)
        assert snr_direct(SC, UeConfig(), self.geom.at(d), UE_NOISE) == pytest.approx(t, rel=1e-9)

    def test_three_db_with_free_space(self):
        g2 = LinkGeometry(1.0, 2.0)
        a = coverage_range(SC, UeConfig(), g2, UE_NOISE, 1.0)
        b = coverage_range(SC, UeConfig(), g2, UE_NOISE, 10 ** -0.3)
        assert b / a == pytest.approx(10 ** (3 / 20), rel=1e-12)

    def test_unreachable(self):
        with pytest.raises(ValueError):
            coverage_range(GnbConfig(1, 1e-3, 4e8), UeConfig(), self.geom, UE_NOISE, 1e6)

    def test_required_access_snr(self):
        s_bh, t = 1000.0, 2.0
        s_ac = required_access_snr(s_bh, t)
        assert 1 / (1 / s_bh + (1 / s_ac) * (1 + 1 / s_bh)) == pytest.approx(t, rel=1e-12)
        with pytest.raises(ValueError):
            required_access_snr(1.0, 2.0)


class TestCompare:
    def test_geometry_and_macro_choice(self):
        res = compare_sc_mc(1.0, SC, NCR)
        # frozen from an independent run of the closed-form inversions
        assert res.d_bh_m == pytest.approx(279.13433991454366, rel=1e-9)
        assert res.d_ac_m == pytest.approx(91.08544512613418, rel=1e-9)
        assert res.mc_config.n_tx == 256
        assert 10 * math.log10(res.mc_config.paout_mw) == pytest.approx(11.5)
        edge = snr_direct(res.mc_config, UeConfig(), LinkGeometry(res.coverage_m, 3.2), UE_NOISE)
        assert edge >= 1.0

    def test_smallest_macro_rule(self):
        res = compare_sc_mc(1.0, SC, NCR)
        smaller = GnbConfig(192, float(10 ** 1.3), 400e6)   # 13 dBm, the largest 192-element candidate
        assert snr_direct(smaller, UeConfig(), LinkGeometry(res.coverage_m, 3.2), UE_NOISE) < 1.0

    def test_sc_region_is_direct_rate(self):
        res = compare_sc_mc(1.0, SC, NCR, n_points=20)
        for r in res.region("sc"):
            want = shannon_rate(400e6, snr_direct(SC, UeConfig(), LinkGeometry(r.distance_m, 3.2), UE_NOISE))
            assert r.rate_sc_path == pytest.approx(want, rel=1e-12)
            assert r.distance_m < res.d_bh_m

    def test_rate_advantage_in_ncr_region(self):
        res = compare_sc_mc(1.0, SC, NCR)
        ncr = res.region("ncr")
        assert ncr and all(r.rate_sc_path > r.rate_mc for r in ncr)
        assert all(r.rate_sc_path < r.rate_mc for r in res.region("sc"))

    def test_infeasible_macro(self):
        with pytest.raises(ValueError, match="longest reach"):
            compare_sc_mc(1.0, SC, NCR, McCandidates((192,), (10.0,)))

    def test_sampling(self):
        res = compare_sc_mc(1.0, SC, NCR, n_points=30)
        d = np.array([r.distance_m for r in res.rows])
        assert np.all(np.diff(d) > 0) and d[0] > 0 and d[-1] < res.coverage_m
        assert len(res.table()) == len(res.rows)
