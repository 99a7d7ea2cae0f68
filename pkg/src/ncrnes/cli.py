"""Command-line front end.

    ncrnes direct-sweep   --out DIR [--config PATH] [--pa-model fixed|varying] ...
    ncrnes indirect-sweep ...
    ncrnes compare-mc     ...
    ncrnes system         ...

Each study writes its CSVs plus ``manifest.json`` into ``--out``.
"""

import argparse
from importlib import metadata
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, config
from .scenarios import (
    compare_sc_mc,
    direct_sweep,
    extract_strategy,
    indirect_sweep,
    write_csv,
    write_sweep_csv,
)
from .syslevel import generate_deployment, load_deployment, run_system, save_deployment, write_system_csvs


def _strategy_csv(rows, path):
    events = extract_strategy(rows)
    recs = [{"order": str(i), "parameter": e.parameter, "distance_m": repr(e.distance_m)}
            for i, e in enumerate(events)]
    if recs:
        write_csv(recs, path)
    else:
        with open(path, "w", newline="") as fh:
            fh.write("order,parameter,distance_m\n")
    return events


def _sweep(cfg, out, topology):
    spec = config.sweep_spec(cfg)
    rows = (direct_sweep if topology == "direct" else indirect_sweep)(spec)
    write_sweep_csv(rows, os.path.join(out, f"{topology}_sweep.csv"))
    events = _strategy_csv(rows, os.path.join(out, f"{topology}_strategy.csv"))
    nes = [r.distance_m for r in rows if r.rel_ee > 1.0]
    summary = {
        "rows": len(rows),
        "max_rel_ee": max(r.rel_ee for r in rows),
        "nes_region_max_distance_m": max(nes) if nes else None,
        "strategy": [[e.parameter, e.distance_m] for e in events],
    }
    return summary


def _compare(cfg, out):
    res = compare_sc_mc(**config.compare_inputs(cfg))
    write_csv(res.table(), os.path.join(out, "compare_mc.csv"))
    ncr = res.region("ncr")
    return {
        "d_bh_m": res.d_bh_m,
        "d_ac_m": res.d_ac_m,
        "mc_n_tx": int(res.mc_config.n_tx),
        "mc_paout_dbm": float(10 * np.log10(res.mc_config.paout_mw)),
        "mean_rate_ratio_ncr_region": float(np.mean([r.rate_sc_path / r.rate_mc for r in ncr])),
        "mean_ee_ratio_ncr_region": float(np.mean([r.ee_sc_path / r.ee_mc for r in ncr])),
    }


def _system(cfg, out):
    s = cfg["system"]
    if s["deployment_file"]:
        dep = load_deployment(s["deployment_file"])
    else:
        dep = generate_deployment(config.deployment_params(cfg), seed=cfg["seed"])
    save_deployment(dep, os.path.join(out, "deployment.json"))
    report = run_system(dep, config.system_setup(cfg), config.pa_model(cfg), config.constants(cfg),
                        config.system_grid(cfg))
    write_system_csvs(report, out)
    return {
        "n_sectors": len(dep.sector_ids),
        "n_ncrs": len(dep.ncr_ids),
        "n_ues": len(dep.ue_ids),
        "n_shared_ues": len(report.shared_ues),
        "mean_sector_ee": {r: float(np.mean(report.cdf("sector_ee", r))) for r in report.regimes},
        "mean_sector_power": {r: float(np.mean(report.cdf("sector_power", r))) for r in report.regimes},
    }


STUDY_RUNNERS = {
    "direct-sweep": lambda cfg, out: _sweep(cfg, out, "direct"),
    "indirect-sweep": lambda cfg, out: _sweep(cfg, out, "indirect"),
    "compare-mc": _compare,
    "system": _system,
}


def _versions():
    return {"ncrnes": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "jsonschema": metadata.version("jsonschema")}


def run(study, cfg, out):
    """Run one study. Returns the summary dict; raises OSError if ``out`` is unusable."""
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    t0 = time.perf_counter()
    summary = STUDY_RUNNERS[study](cfg, out)
    manifest = {
        "study": study,
        "seed": cfg["seed"],
        "config": cfg,
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - t0,
        "summary": summary,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def build_parser():
    p = argparse.ArgumentParser(prog="ncrnes", description="Energy-saving studies for gNBs with NCRs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="study", required=True)
    for name in config.STUDIES:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="JSON run config")
        sp.add_argument("--out", metavar="DIR", required=True, help="output directory")
        sp.add_argument("--pa-model", choices=("fixed", "varying"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--paout-step-db", type=float, metavar="F")
    return p


def _flag_overrides(args):
    over = {}
    if args.pa_model is not None:
        over["pa_model"] = args.pa_model
    if args.seed is not None:
        over["seed"] = args.seed
    if args.paout_step_db is not None:
        over["grid"] = {"paout_step_db": args.paout_step_db}
    return over


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config.parse_config(args.config, _flag_overrides(args))
    except config.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        summary = run(args.study, cfg, args.out)
    except OSError as e:
        print(f"cannot write output: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps({"study": args.study, "out": args.out, **summary}, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
