"""Walk one repeater link through the budget: backhaul SNR, the NCR's
gain-clamped output power, access SNR and the end-to-end SNR."""

from ncrnes.linkbudget import (
    GnbConfig, LinkGeometry, NcrConfig, NoiseModel, UeConfig,
    effective_snr, ncr_pa_output, snr_access, snr_backhaul, snr_direct,
)
from ncrnes.units import linear_to_db

BW = 400e6
gnb = GnbConfig(n_tx=192, paout_mw=10.0, bandwidth_hz=BW)
ncr = NcrConfig(n_tx=32, n_rx=32, paout_max_mw=10.0)
ue = UeConfig()
ue_noise, ncr_noise = NoiseModel.from_db(10.0), NoiseModel.from_db(7.0)

bh = snr_backhaul(gnb, ncr, LinkGeometry(94.0, 2.0), ncr_noise)
print(f"backhaul at 94 m (free space): {linear_to_db(bh):6.1f} dB")

for d_ac in (15.0, 48.0, 150.0):
    p_ncr = ncr_pa_output(ncr, bh, ncr_noise, BW)
    ac = snr_access(ncr, ue, LinkGeometry(d_ac, 3.2), ue_noise, p_ncr, BW)
    eff = effective_snr(bh, ac)
    direct = snr_direct(gnb, ue, LinkGeometry(94.0 + d_ac, 3.2), ue_noise)
    print(f"UE {d_ac:5.0f} m behind the NCR: NCR output {p_ncr:5.2f} mW/elem, "
          f"access {linear_to_db(ac):6.1f} dB, end-to-end {linear_to_db(eff):6.1f} dB, "
          f"direct from the gNB {linear_to_db(direct):6.1f} dB")

# With a strong backhaul the access hop alone sets the end-to-end SNR.
