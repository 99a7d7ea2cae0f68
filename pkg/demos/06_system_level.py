"""Small multi-site deployment: per-sector power and EE under each repeater
mode, with and without per-sector EE optimization."""

import numpy as np

from ncrnes.syslevel import DeploymentParams, generate_deployment, run_system

dep = generate_deployment(DeploymentParams(n_sites=6, n_ncrs=18, n_ues=180, area_m=(600.0, 600.0)), seed=1)
rep = run_system(dep)
print(f"{len(dep.sector_ids)} sectors, {len(dep.ncr_ids)} NCRs, {len(rep.shared_ues)} UEs served without repeaters")
print(f"{'regime':28s} {'power':>8s} {'EE (Mbit/s/unit)':>18s} {'median UE Mbit/s':>18s}")
for regime in rep.regimes:
    power = np.mean(rep.cdf("sector_power", regime))
    ee = np.mean(rep.cdf("sector_ee", regime)) / 1e6
    ue = np.median(rep.cdf("ue_rate", regime)) / 1e6
    print(f"{regime:28s} {power:8.2f} {ee:18.1f} {ue:18.1f}")
