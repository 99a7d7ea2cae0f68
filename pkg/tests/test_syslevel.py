import itertools
import json
import math

import numpy as np
import pytest

from ncrnes.linkbudget import GnbConfig, LinkGeometry, NcrConfig, NoiseModel, UeConfig
from ncrnes.linkbudget import effective_snr, ncr_pa_output, snr_access, snr_backhaul, snr_direct
from ncrnes.optimizer import ParameterGrid
from ncrnes.powermodel import PaEfficiencyModel, PowerConstants, gnb_power, ncr_power
from ncrnes.syslevel import (
    MODES,
    OPT_MODES,
    Deployment,
    DeploymentError,
    DeploymentParams,
    SystemSetup,
    associate_ues,
    azimuth_deg,
    deployment_from_dict,
    evaluate_sector,
    generate_deployment,
    load_deployment,
    run_system,
    save_deployment,
    wedge_index,
    write_system_csvs,
)

K = PowerConstants()
FIXED = PaEfficiencyModel()
SETUP = SystemSetup()
UE_NOISE = NoiseModel.from_db(10.0)
NCR_NOISE = NoiseModel.from_db(7.0)
BW = 400e6


def fixture_doc(ues=((10.0, 5.0), (160.0, 60.0)), ncrs=((150.0, 50.0, 0),)):
    return {
        "area_m": [400.0, 400.0],
        "sites": [{"id": 0, "x": 0.0, "y": 0.0}],
        "ncrs": [{"id": i, "x": x, "y": y, "sector_id": s} for i, (x, y, s) in enumerate(ncrs)],
        "ues": [{"id": i, "x": x, "y": y} for i, (x, y) in enumerate(ues)],
        "seed": None,
    }


def hand_direct_snr(d):
    return snr_direct(GnbConfig(192, 10.0, BW), UeConfig(4), LinkGeometry(d, 3.2), UE_NOISE)


def hand_relay(d_bh, d_ac, gnb=GnbConfig(192, 10.0, BW), ncr=NcrConfig(32, 32, 10.0)):
    s_bh = snr_backhaul(gnb, ncr, LinkGeometry(d_bh, 2.0), NCR_NOISE)
    p = ncr_pa_output(ncr, s_bh, NCR_NOISE, gnb.bandwidth_hz)
    s_ac = snr_access(ncr, UeConfig(4), LinkGeometry(d_ac, 3.2), UE_NOISE, p, gnb.bandwidth_hz)
    return effective_snr(s_bh, s_ac), p


class TestDeployment:
    def test_counts(self):
        dep = generate_deployment(DeploymentParams(), seed=7)
        assert len(dep.site_ids) == 20 and len(dep.ncr_ids) == 62 and len(dep.ue_ids) == 600
        assert len(dep.sector_ids) == 60

    def test_deterministic(self):
        a, b = generate_deployment(seed=3), generate_deployment(seed=3)
        assert a.to_dict() == b.to_dict()

    def test_seed_changes_positions(self):
        a, b = generate_deployment(seed=3), generate_deployment(seed=4)
        assert len(a.ue_ids) == len(b.ue_ids)
        assert not np.allclose(a.ue_xy, b.ue_xy)

    def test_ncrs_in_parent_wedge_and_capped(self):
        p = DeploymentParams()
        dep = generate_deployment(p, seed=1)
        for xy, s in zip(dep.ncr_xy, dep.ncr_sector):
            site = dep.site_xy[dep.sector_site_index(s)]
            assert wedge_index(azimuth_deg(site, xy)) == s % 3
        _, counts = np.unique(dep.ncr_sector, return_counts=True)
        assert counts.max() <= p.max_ncrs_per_sector

    def test_infeasible_counts(self):
        with pytest.raises(ValueError):
            generate_deployment(DeploymentParams(n_sites=2, n_ncrs=20, max_ncrs_per_sector=3))

    def test_wedges_partition_circle(self):
        az = np.linspace(0, 360, 3601)[:-1]
        idx = wedge_index(az)
        assert set(idx.tolist()) == {0, 1, 2}
        assert np.all(idx == (az // 120).astype(int))


class TestDeploymentFile:
    def test_roundtrip(self, tmp_path):
        dep = generate_deployment(DeploymentParams(n_sites=4, n_ncrs=5, n_ues=30), seed=2)
        path = tmp_path / "dep.json"
        save_deployment(dep, path)
        assert load_deployment(path).to_dict() == dep.to_dict()

    def test_hand_built(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(fixture_doc()))
        dep = load_deployment(path)
        assert dep.site_ids.tolist() == [0] and dep.sector_ids.tolist() == [0, 1, 2]
        assert dep.ncr_sector.tolist() == [0]
        np.testing.assert_array_equal(dep.ue_xy, [[10.0, 5.0], [160.0, 60.0]])

    def test_missing_parent_sector(self):
        doc = fixture_doc(ncrs=((150.0, 50.0, 7),))
        with pytest.raises(DeploymentError, match="ncrs/0/sector_id"):
            deployment_from_dict(doc)

    def test_schema_error_names_path(self):
        doc = fixture_doc()
        doc["ues"][1]["x"] = "far"
        with pytest.raises(DeploymentError, match="ues/1/x"):
            deployment_from_dict(doc)
        doc = fixture_doc()
        doc["extra"] = 1
        with pytest.raises(DeploymentError):
            deployment_from_dict(doc)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        with pytest.raises(DeploymentError):
            load_deployment(path)

    def test_duplicate_ids(self):
        doc = fixture_doc()
        doc["ues"][1]["id"] = 0
        with pytest.raises(DeploymentError):
            deployment_from_dict(doc)


class TestAssociation:
    dep = deployment_from_dict(fixture_doc())

    def test_paths(self):
        a = associate_ues(self.dep, SETUP)
        assert a.path(0) == "direct" and a.path(1) == "ncr:0"
        assert a.sector.tolist() == [0, 0]

    def test_snr_hand_computation(self):
        a = associate_ues(self.dep, SETUP)
        d0 = math.hypot(10, 5)
        assert a.snr[0] == pytest.approx(hand_direct_snr(d0), rel=1e-12)
        relay, _ = hand_relay(math.hypot(150, 50), math.hypot(10, 10))
        direct = hand_direct_snr(math.hypot(160, 60))
        assert relay > direct
        assert a.snr[1] == pytest.approx(relay, rel=1e-12)

    def test_without_repeaters(self):
        a = associate_ues(self.dep, SETUP, use_repeaters=False)
        assert np.all(a.ncr == -1) and np.all(a.covered)

    def test_no_ncrs_in_deployment(self):
        dep = deployment_from_dict(fixture_doc(ncrs=()))
        a = associate_ues(dep, SETUP)
        assert np.all(a.ncr == -1)

    def test_threshold(self):
        dep = deployment_from_dict(fixture_doc(ues=((10.0, 5.0), (5000.0, 5000.0)), ncrs=()))
        a = associate_ues(dep, SETUP)
        assert a.covered.tolist() == [True, False] and a.path(1) is None
        assert np.all(a.snr[a.covered] >= 10 ** (SETUP.coverage_threshold_db / 10))

    def test_wedge_respected(self):
        # UE behind the site (sector 1 wedge) cannot use the sector-0 NCR
        dep = deployment_from_dict(fixture_doc(ues=((-20.0, 30.0),)))
        for rule in ("sector_first", "best_path"):
            a = associate_ues(dep, SystemSetup(association=rule))
            assert a.path(0) == "direct" and a.sector[0] == 1

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            SystemSetup(association="nearest")


class TestEvaluateSector:
    dep = deployment_from_dict(fixture_doc())

    def test_hand_composed_report(self):
        a = associate_ues(self.dep, SETUP)
        rep = evaluate_sector(0, self.dep, a, "always_on", "baseline", FIXED, K, setup=SETUP)
        r0 = BW * math.log2(1 + hand_direct_snr(math.hypot(10, 5)))
        relay, p_ncr = hand_relay(math.hypot(150, 50), math.hypot(10, 10))
        r1 = BW * math.log2(1 + relay)
        power = gnb_power(GnbConfig(192, 10.0, BW), FIXED, K).total + ncr_power(NcrConfig(32, 32, 10.0), p_ncr,
                                                                               FIXED, K).total
        assert rep.throughput_bps == pytest.approx((r0 + r1) / 2, rel=1e-12)
        assert rep.power == pytest.approx(power, rel=1e-12) and power == pytest.approx(73.0)
        assert (rep.n_ues_direct, rep.n_ues_indirect) == (1, 1)
        assert rep.ee * rep.power == pytest.approx(rep.throughput_bps, rel=1e-12)
        assert sum(rep.ue_rates_bps) == pytest.approx(rep.throughput_bps, rel=1e-12)

    def test_sector_without_ncrs_same_in_always_on_and_no_repeaters(self):
        dep = deployment_from_dict(fixture_doc(ues=((-20.0, 30.0), (-60.0, 10.0), (10.0, 5.0))))
        a_rep = associate_ues(dep, SETUP)
        a_none = associate_ues(dep, SETUP, use_repeaters=False)
        x = evaluate_sector(1, dep, a_rep, "always_on", "baseline", FIXED, K, setup=SETUP)
        y = evaluate_sector(1, dep, a_none, "no_repeaters", "baseline", FIXED, K, setup=SETUP)
        assert x == y

    def test_smart_mode_idle_ncr(self):
        dep = deployment_from_dict(fixture_doc(ues=((10.0, 5.0),)))
        a = associate_ues(dep, SETUP)
        smart = evaluate_sector(0, dep, a, "smart", "baseline", FIXED, K, setup=SETUP)
        on = evaluate_sector(0, dep, a, "always_on", "baseline", FIXED, K, setup=SETUP)
        assert smart.power == pytest.approx(36.0)
        assert on.power == pytest.approx(73.0)
        assert smart.throughput_bps == on.throughput_bps

    def test_empty_sector(self):
        a = associate_ues(self.dep, SETUP)
        rep = evaluate_sector(2, self.dep, a, "always_on", "baseline", FIXED, K, setup=SETUP)
        assert rep.throughput_bps == 0.0 and rep.ee == 0.0 and rep.power == 36.0

    def test_no_repeaters_needs_plain_association(self):
        a = associate_ues(self.dep, SETUP)
        with pytest.raises(ValueError):
            evaluate_sector(0, self.dep, a, "no_repeaters", "baseline", FIXED, K, setup=SETUP)

    def test_ee_optimal_needs_grid(self):
        a = associate_ues(self.dep, SETUP)
        with pytest.raises(ValueError):
            evaluate_sector(0, self.dep, a, "smart", "ee_optimal", FIXED, K, grid=None, setup=SETUP)


def brute_force_sector(dep, a, grid, model, sector=0):
    """Enumerate the shared gNB config and every NCR config combination."""
    served = np.flatnonzero(a.sector == sector)
    site = dep.site_xy[0]
    ncrs = dep.ncrs_of_sector(sector)
    gnbs = list(itertools.product(grid.bw_values, grid.gnb_paout_values, grid.gnb_ntx_values))
    ncr_opts = list(itertools.product(grid.ncr_paout_values, grid.ncr_ntx_values, grid.ncr_nrx_values))
    best = -1.0
    for bw, p, n in gnbs:
        g = GnbConfig(n, p, bw)
        rate_d = sum(bw * math.log2(1 + snr_direct(g, UeConfig(4), LinkGeometry(
            float(np.linalg.norm(dep.ue_xy[i] - site)), 3.2), UE_NOISE)) for i in served if a.ncr[i] < 0)
        for combo in itertools.product(ncr_opts, repeat=len(ncrs)):
            rate, power = rate_d, gnb_power(g, model, K).total
            for j, (pm, nt, nr) in zip(ncrs, combo):
                c = NcrConfig(nt, nr, pm)
                s_bh = snr_backhaul(g, c, LinkGeometry(float(np.linalg.norm(dep.ncr_xy[j] - site)), 2.0), NCR_NOISE)
                pa = ncr_pa_output(c, s_bh, NCR_NOISE, bw)
                power += ncr_power(c, pa, model, K).total
                for i in served[a.ncr[served] == j]:
                    s_ac = snr_access(c, UeConfig(4), LinkGeometry(float(np.linalg.norm(dep.ue_xy[i] - dep.ncr_xy[j])),
                                                                  3.2), UE_NOISE, pa, bw)
                    rate += bw * math.log2(1 + effective_snr(s_bh, s_ac))
            best = max(best, rate / len(served) / power)
    return best


@pytest.mark.parametrize("model", [PaEfficiencyModel("fixed"), PaEfficiencyModel("varying")])
def test_ee_optimal_matches_brute_force(model):
    dep = deployment_from_dict(fixture_doc(
        ues=((10.0, 5.0), (160.0, 60.0), (90.0, 150.0), (70.0, 140.0)),
        ncrs=((150.0, 50.0, 0), (60.0, 120.0, 0))))
    a = associate_ues(dep, SETUP)
    assert sorted(a.ncr.tolist()) == [-1, 0, 1, 1]
    grid = ParameterGrid((1e8, 4e8), (1.0, 10.0), (64, 192), (1.0, 10.0), (8, 32), (8, 32))
    rep = evaluate_sector(0, dep, a, "always_on", "ee_optimal", model, K, grid, SETUP)
    assert rep.ee == pytest.approx(brute_force_sector(dep, a, grid, model), rel=1e-12)
    base = evaluate_sector(0, dep, a, "always_on", "baseline", model, K, grid, SETUP)
    assert rep.ee >= base.ee


@pytest.fixture(scope="module")
def small_system():
    dep = generate_deployment(DeploymentParams(n_sites=6, n_ncrs=10, n_ues=120, area_m=(600.0, 600.0)), seed=5)
    grid = ParameterGrid.default(paout_step_db=2.0, gnb_ntx_step=32, ncr_ant_step=8)
    return dep, grid, run_system(dep, SETUP, FIXED, K, grid)


class TestRunSystem:
    def test_regimes(self, small_system):
        _, _, rep = small_system
        assert set(rep.regimes) == {f"{m}:{o}" for m in MODES for o in OPT_MODES}

    def test_ee_identity(self, small_system):
        _, _, rep = small_system
        for reps in rep.sectors.values():
            for s in reps:
                assert s.ee * s.power == pytest.approx(s.throughput_bps, rel=1e-12, abs=0)

    def test_power_mode_ordering(self, small_system):
        _, _, rep = small_system
        p = {m: np.array([s.power for s in rep.sectors[f"{m}:baseline"]]) for m in MODES}
        assert np.all(p["always_on"] >= p["smart"]) and np.all(p["smart"] >= p["no_repeaters"])

    def test_optimizer_dominance(self, small_system):
        _, _, rep = small_system
        for m in MODES:
            b = [s.ee for s in rep.sectors[f"{m}:baseline"]]
            o = [s.ee for s in rep.sectors[f"{m}:ee_optimal"]]
            assert all(x >= y for x, y in zip(o, b))

    def test_throughput_dominance(self, small_system):
        _, _, rep = small_system
        for m in ("always_on", "smart"):
            assert np.all(rep.cdf("ue_rate", f"{m}:baseline") >= rep.cdf("ue_rate", "no_repeaters:baseline"))

    def test_shared_ue_set(self, small_system):
        dep, _, rep = small_system
        shared = set(rep.shared_ues)
        for rates in rep.ue_rates.values():
            assert set(rates) == shared

    def test_csvs(self, small_system, tmp_path):
        dep, grid, rep = small_system
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        write_system_csvs(rep, a)
        write_system_csvs(run_system(dep, SETUP, FIXED, K, grid), b)
        for f in ("sector_throughput", "sector_power", "sector_ee", "ue_rate"):
            raw = (a / f"{f}.csv").read_bytes()
            assert raw == (b / f"{f}.csv").read_bytes()
            lines = raw.decode().splitlines()
            assert lines[0] == "regime,entity_id,value"
            rows = [ln.split(",") for ln in lines[1:]]
            assert {r[0] for r in rows} == set(rep.regimes)
            for regime in rep.regimes:
                vals = [float(r[2]) for r in rows if r[0] == regime]
                assert vals == sorted(vals)


def test_deployment_validation_direct():
    with pytest.raises(ValueError):
        Deployment((1.0, 1.0), [0], [[0, 0]], [0], [[1, 1]], [5], [], np.empty((0, 2)))
