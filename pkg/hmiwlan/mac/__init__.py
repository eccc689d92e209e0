"""802.11 channel access simulation: DCF, PCF and HCCA."""
from hmiwlan.mac.dcf import DcfSimulator, run_dcf
from hmiwlan.mac.hcca import EdfHcca, ReferenceHcca, run_hcca
from hmiwlan.mac.pcf import PcfSimulator, run_pcf
from hmiwlan.mac.schedulers import edf_scheduler, reference_scheduler
from hmiwlan.mac.sweep import first_failure, last_suitable, run, sweep, sweep_stats
