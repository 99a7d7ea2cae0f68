"""Where the power goes, and why the PA-efficiency model matters."""

from ncrnes.linkbudget import GnbConfig, NcrConfig
from ncrnes.powermodel import PaEfficiencyModel, PowerConstants, gnb_power, ncr_power

k = PowerConstants()
fixed, varying = PaEfficiencyModel("fixed"), PaEfficiencyModel("varying")

print("gNB, 192 elements:")
for p in (10.0, 5.0, 2.5, 1.0):
    f = gnb_power(GnbConfig(192, p, 400e6), fixed, k)
    v = gnb_power(GnbConfig(192, p, 400e6), varying, k)
    print(f"  {p:4.1f} mW/elem  fixed {f.total:6.2f}  varying {v.total:6.2f}")

# Halving the array or halving the output saves the same under a fixed efficiency.
print("fixed: 96 x 10 mW =", gnb_power(GnbConfig(96, 10.0, 4e8), fixed, k).total,
      " 192 x 5 mW =", gnb_power(GnbConfig(192, 5.0, 4e8), fixed, k).total)

b = ncr_power(NcrConfig(32, 32, 10.0), 10.0, fixed, k)
print(f"NCR at full config: const {b.const_part}, rx {b.rx_part}, tx {b.tx_part}, total {b.total}")
