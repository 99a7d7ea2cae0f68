"""A small cell plus one repeater against a macro cell sized to cover the
same range."""

import math

from ncrnes.linkbudget import GnbConfig, NcrConfig
from ncrnes.scenarios import compare_sc_mc

res = compare_sc_mc(1.0, GnbConfig(192, 10.0, 400e6), NcrConfig(32, 32, 10.0), n_points=20)
mc = res.mc_config
print(f"NCR placed at {res.d_bh_m:.0f} m, covers {res.d_ac_m:.0f} m beyond it")
print(f"macro: {mc.n_tx} elements at {10 * math.log10(mc.paout_mw):.1f} dBm")
for r in res.rows:
    print(f"{r.distance_m:6.1f} m  [{r.region:3s}]  rate x{r.rate_sc_path / r.rate_mc:5.2f}  "
          f"EE x{r.ee_sc_path / r.ee_mc:5.2f}")
