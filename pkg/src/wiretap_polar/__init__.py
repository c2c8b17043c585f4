"""Wiretap polar coding: secure codes for degraded symmetric binary-input channels."""

from .channel import (
    SymmetricChannel,
    bhattacharyya,
    binary_entropy,
    capacity,
    cascade,
    channel_from_descriptor,
    channel_to_descriptor,
    find_involution,
    make_bec,
    make_bsc,
    sample,
    transmit,
    verify_output_symmetric,
)
from .construction import (
    BitChannelQuality,
    SetReport,
    brute_force_bitchannels,
    degradation_inclusion_check,
    evolve_bec,
    evolve_quantized,
    select_sets,
)
from .decoding import FrozenPattern, multipath_decode, sc_decode, sc_decode_genie
from .evaluation import (
    SecrecyReport,
    attack_trial,
    build_induced_channel,
    check_induced_symmetry,
    exact_leakage,
    induced_capacity_check,
    noiseless_main_identity,
    reliability_trial,
    secrecy_report,
    strong_bound,
    weak_bound,
)
from .transform import apply_transform, bit_reversal_permutation, transform_matrix
from .wiretap import (
    CodewordFrame,
    SecureBits,
    SeededBits,
    WiretapCodeSpec,
    build_spec,
    decode,
    encode,
    eve_attack,
)

__version__ = "0.1.0"
