"""Direct gNB-UE link: how much energy the optimizer saves with distance,
and in which order it backs parameters off."""

from ncrnes.powermodel import PaEfficiencyModel
from ncrnes.scenarios import SweepSpec, default_distances, direct_sweep, extract_strategy

for kind in ("fixed", "varying"):
    rows = direct_sweep(SweepSpec(distances_m=default_distances(5, 200, 40), pa_model=PaEfficiencyModel(kind)))
    print(f"\n{kind} PA efficiency")
    for r in rows[::6]:
        c = r.opt.config
        print(f"  {r.distance_m:6.1f} m  EE x{r.rel_ee:5.3f}  rate x{r.rel_rate:5.3f}  "
              f"n_tx {c.gnb_n_tx:3d}  PAout {c.gnb_paout_mw:5.2f} mW")
    print("  back-off order:", ", ".join(f"{e.parameter} from {e.distance_m:.0f} m" for e in extract_strategy(rows)))
