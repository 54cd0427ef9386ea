"""QC-LDPC joint source-channel coding: construction, codec, and harness."""

from .channel import ChannelParams, add_noise, demodulate_llr, hard_decision, modulate
from .construction import (
    BaseGraph,
    ConstructionInfeasible,
    ParseError,
    QcCode,
    assign_shifts,
    build_code,
    check_girth,
    default_base_graph,
    expand,
    parse,
    serialize,
)
from .decoder import (
    BatchDecodeResult,
    DecodeConfig,
    DecodeResult,
    DecoderGraph,
    decode,
    decode_batch,
)
from .encoder import EncoderContext
from .fixedpoint import Q6, FixedFormat, build_tanh_lut, lut_from_hex, lut_to_hex, quantize, quantize_to_code
from .gf2 import ZERO, SingularMatrixError, expand_circulant, gf2_invert, gf2_rank, mat_mat_mul, mat_vec_mul
from .interleaver import InterleaverSpec, deinterleave, interleave, permutation
from .sweep import BerRecord, SweepConfig, records_to_csv, run_sweep

__version__ = "0.1.0"
