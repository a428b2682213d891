"""LS-code generation, transmit-chain synthesis and 2x2 CDM channel sounding."""

from .golay import GolayPair, aperiodic_xcorr, generate_pair, mate, verify_complementary
from .lscode import CodeId, LsCode, LsCodeSet, LsCodeTree, assemble, code_set, expand, predicted_ifw
from .correlation import combined_corr, corr_profile, correlation_report, measure_ifw
from .txchain import RrcSpec, design_rrc, quantize_q15, shape, spectrum, upconvert_fs4
from .channel import MimoChannel, NoiseSpec, PathTap, add_awgn, apply_mimo
from .sounder import estimate_mimo, evaluate, matched_cir, run_sounding

__version__ = "0.1.0"
