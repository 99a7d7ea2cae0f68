"""Repeater-assisted link with the backhaul fixed and the UE moving away
from the NCR. Uses a coarse grid so it runs in seconds."""

from ncrnes.optimizer import ParameterGrid
from ncrnes.scenarios import SweepSpec, default_distances, extract_strategy, indirect_sweep

grid = ParameterGrid.default(paout_step_db=1.0, gnb_ntx_step=8, ncr_ant_step=4)
rows = indirect_sweep(SweepSpec(distances_m=default_distances(5, 200, 12), grid=grid))
for r in rows:
    c = r.opt.config
    print(f"{r.distance_m:6.1f} m  EE x{r.rel_ee:5.3f}  rate x{r.rel_rate:5.3f}  "
          f"gNB {c.gnb_n_tx:3d} elem  NCR rx {c.ncr_n_rx:2d} tx {c.ncr_n_tx:2d}  "
          f"NCR out {r.opt.ncr_paout_actual_mw:5.2f} mW")
print("back-off order:", ", ".join(f"{e.parameter}@{e.distance_m:.0f} m" for e in extract_strategy(rows)))
# A 94 m free-space backhaul leaves so much margin that the gNB backs off at every distance.
