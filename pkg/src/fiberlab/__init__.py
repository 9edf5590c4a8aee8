"""fiberlab: desk-scale coherent optical-fiber transmission laboratory.

Simulate WDM propagation through a nonlinear dispersive amplified link, then
compensate at the receiver with classical DSP (EDC, DBP, FDBP, DDLMS) or the
meta-learned pipeline (hypernetwork-driven Meta-DBP plus an EGRU learned
optimizer for the adaptive filter), reporting quality against complexity.
"""

from .core import C_LIGHT, PLANCK, FiberParams, TaskInfo, Waveform
from .constellation import Constellation, SymbolFrame, decide
from .channel import (LinkOutput, SimStepPlan, build_tx_waveform, choose_dz, choose_sps,
                      edfa_amplify, propagate_link, receiver_frontend, ssfm_span)
from .dsp import DbpConfig, DispersionKernel, dbp, dispersion_kernel, edc, fdbp, kernel_length
from .adf import AdfRunConfig, AdfWeights, OptimizerState, adf_gradient, adf_run, \
    filter_apply, optimizer_step
from .metrics import QualityReport, ber_count, effective_snr_db, erfc_inv, mpq, q_from_ber
from .signal import dbm_to_watts, dispersion_to_beta2, frequency_shift, resample_decimate, \
    rrc_taps

__version__ = "0.1.0"
