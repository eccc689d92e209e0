"""Floating-point GFDM transceiver, channel models and BER harness."""
from hmiwlan.phy.ber import ber_run, ber_sweep, theoretical_ber
from hmiwlan.phy.estimation import ls_channel_estimate
from hmiwlan.phy.framing import build_frame
from hmiwlan.phy.modem import (SHIPPED_CONFIGS, GfdmModem, gfdm_demodulate, gfdm_modulate, latency_report,
                               map_resources)
from hmiwlan.phy.sync import schmidl_cox_sync
