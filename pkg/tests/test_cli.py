import csv
import json
import subprocess
import sys

import pytest

from ncrnes import cli, config

FAST_SYSTEM = {"system": {"n_sites": 3, "n_ncrs": 4, "n_ues": 40, "area_m": [400.0, 400.0],
                          "paout_step_db": 5.0, "gnb_ntx_step": 64, "ncr_ant_step": 16}}
FAST_INDIRECT = {"grid": {"paout_step_db": 5.0, "gnb_ntx_step": 64, "ncr_ant_step": 16},
                 "sweep": {"n_points": 4}}


def write_cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def keys(d, prefix=""):
    out = set()
    for k, v in d.items():
        out.add(prefix + k)
        if isinstance(v, dict):
            out |= keys(v, prefix + k + ".")
    return out


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        assert config.parse_config(write_cfg(tmp_path, "")) == config.DEFAULTS
        assert config.parse_config(None) == config.DEFAULTS

    def test_file_value_applies(self, tmp_path):
        cfg = config.parse_config(write_cfg(tmp_path, {"grid": {"paout_step_db": 2.0}}))
        assert cfg["grid"]["paout_step_db"] == 2.0
        assert cfg["grid"]["gnb_ntx_step"] == 4

    def test_flag_beats_file(self, tmp_path):
        path = write_cfg(tmp_path, {"pa_model": "varying", "seed": 3})
        cfg = config.parse_config(path, {"pa_model": "fixed"})
        assert cfg["pa_model"] == "fixed" and cfg["seed"] == 3

    @pytest.mark.parametrize("doc, where", [
        ({"grid": {"paout_max_dbm": 12.0}}, "grid.paout_max_dbm"),
        ({"compare": {"sc_paout_dbm": -1.0}}, "compare.sc_paout_dbm"),
        ({"grid": {"bogus": 1}}, "grid"),
        ({"nonsense": True}, "<root>"),
        ({"pa_model": "legacy"}, "pa_model"),
        ({"constants": {"alpha": 0}}, "constants.alpha"),
    ])
    def test_rejections_name_path(self, tmp_path, doc, where):
        with pytest.raises(config.ConfigError, match=f"^{where}"):
            config.parse_config(write_cfg(tmp_path, doc))

    def test_inverted_paout_range(self, tmp_path):
        with pytest.raises(config.ConfigError, match="paout_min_dbm"):
            config.parse_config(write_cfg(tmp_path, {"grid": {"paout_min_dbm": 8.0, "paout_max_dbm": 2.0}}))

    def test_unreadable(self, tmp_path):
        with pytest.raises(config.ConfigError):
            config.parse_config(str(tmp_path / "missing.json"))
        with pytest.raises(config.ConfigError):
            config.parse_config(write_cfg(tmp_path, "{not json"))

    def test_linear_conversions(self):
        cfg = config.parse_config(None)
        g = config.grid(cfg)
        assert g.gnb_paout_values[0] == pytest.approx(1.0) and g.gnb_paout_values[-1] == pytest.approx(10.0)
        assert g.bw_values[-1] == 400e6
        assert config.pa_model(cfg).paout_ref_mw == pytest.approx(10.0)
        assert config.compare_inputs(cfg)["target_snr"] == pytest.approx(1.0)


class TestRun:
    def test_direct_sweep_defaults(self, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["direct-sweep", "--out", str(out)]) == 0
        rows = list(csv.DictReader((out / "direct_sweep.csv").read_text().splitlines()))
        assert len(rows) == config.DEFAULTS["sweep"]["n_points"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert keys(manifest["config"]) == keys(config.DEFAULTS)
        assert manifest["seed"] == 0 and manifest["study"] == "direct-sweep"
        assert {"numpy", "python"} <= set(manifest["versions"])

    def test_repeat_identical_bytes(self, tmp_path):
        for name in ("a", "b"):
            assert cli.main(["direct-sweep", "--out", str(tmp_path / name), "--pa-model", "varying",
                             "--seed", "11", "--paout-step-db", "1.0"]) == 0
        for f in ("direct_sweep.csv", "direct_strategy.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        m = json.loads((tmp_path / "a" / "manifest.json").read_text())
        assert m["config"]["grid"]["paout_step_db"] == 1.0 and m["config"]["pa_model"] == "varying"

    def test_indirect_sweep(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_INDIRECT)
        assert cli.main(["indirect-sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        rows = list(csv.DictReader((tmp_path / "o" / "indirect_sweep.csv").read_text().splitlines()))
        assert len(rows) == 4 and "opt_ncr_n_rx" in rows[0]

    def test_compare(self, tmp_path):
        assert cli.main(["compare-mc", "--out", str(tmp_path)]) == 0
        rows = list(csv.DictReader((tmp_path / "compare_mc.csv").read_text().splitlines()))
        assert 59 <= len(rows) <= 60   # a sample landing exactly on d_BH is skipped
        assert {r["region"] for r in rows} == {"sc", "ncr"}

    def test_system(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SYSTEM)
        assert cli.main(["system", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "4"]) == 0
        assert cli.main(["system", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "4"]) == 0
        for metric in ("sector_throughput", "sector_power", "sector_ee", "ue_rate"):
            a = (tmp_path / "a" / f"{metric}.csv").read_bytes()
            assert a == (tmp_path / "b" / f"{metric}.csv").read_bytes()
            regimes = {ln.split(",")[0] for ln in a.decode().splitlines()[1:]}
            assert len(regimes) == 6
        assert (tmp_path / "a" / "deployment.json").exists()

    def test_system_from_deployment_file(self, tmp_path):
        cfg = write_cfg(tmp_path, FAST_SYSTEM)
        assert cli.main(["system", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
        doc = {**FAST_SYSTEM, "system": {**FAST_SYSTEM["system"],
                                         "deployment_file": str(tmp_path / "a" / "deployment.json")}}
        cfg2 = write_cfg(tmp_path, doc, "cfg2.json")
        assert cli.main(["system", "--config", cfg2, "--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / "ue_rate.csv").read_bytes() == (tmp_path / "b" / "ue_rate.csv").read_bytes()

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cli.main(["compare-mc", "--out", str(blocker / "sub")]) != 0
        assert "cannot write output" in capsys.readouterr().err

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"grid": {"paout_max_dbm": 11.0}})
        assert cli.main(["direct-sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "grid.paout_max_dbm" in capsys.readouterr().err

    def test_bad_flag_value(self, tmp_path):
        with pytest.raises(SystemExit):
            cli.main(["direct-sweep", "--out", str(tmp_path), "--pa-model", "legacy"])

    def test_module_entry_point(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "ncrnes", "compare-mc", "--out", str(tmp_path)],
                           capture_output=True, text=True)
        assert r.returncode == 0 and json.loads(r.stdout)["mc_n_tx"] == 256
