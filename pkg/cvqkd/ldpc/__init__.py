from .adaptation import (
    FrameBatch,
    RateAdaptation,
    achievable_range,
    adapt_rate,
    build_frames,
    clamp_rate,
    default_constant,
)
from .catalog import Catalog, CatalogEntry, load_catalog, parse_catalog
from .code import SparseParityCheck, compute_syndrome, format_alist, load_code, parse_alist, save_code
from .construction import PROFILES, MultiEdgeProfile, build_code
from .decoder import DecodeResult, bp_decode, bp_decode_batch, read_llrs, write_llrs
from .efficiency import OperatingPoint, measure_efficiency
from .verification import HASH_BITS, hash_key, poly_hash, verify_blocks

__all__ = [
    # codes
    "SparseParityCheck", "load_code", "save_code", "parse_alist", "format_alist", "compute_syndrome",
    "MultiEdgeProfile", "PROFILES", "build_code",
    "Catalog", "CatalogEntry", "load_catalog", "parse_catalog",
    # decoding
    "DecodeResult", "bp_decode", "bp_decode_batch", "read_llrs", "write_llrs",
    # rate adaptation
    "RateAdaptation", "adapt_rate", "achievable_range", "clamp_rate", "default_constant",
    "FrameBatch", "build_frames",
    # operating point and verification
    "OperatingPoint", "measure_efficiency",
    "HASH_BITS", "hash_key", "poly_hash", "verify_blocks",
]
