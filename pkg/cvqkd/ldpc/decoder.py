"""Flooding-schedule sum-product decoding with the target syndrome folded into check signs."""
from __future__ import annotations

import logging
import pathlib
import time
from dataclasses import dataclass
from typing import List, Optional, Union

import numba as nb
import numpy as np

from ..errors import DomainError, FrameFormatError
from .adaptation import RateAdaptation
from .code import SparseParityCheck, compute_syndrome

LOG = logging.getLogger("cvqkd.ldpc")

LLR_CLAMP = 50.0
MAX_ITERS = 200
MIN_THROUGHPUT_MBPS = 0.5
_TANH_MAX = 1.0 - 1e-15
LLR_DTYPE = np.dtype("<f4")


@nb.njit(cache=True)
def _syndrome_ok(row_ptr, edge_var, hard, syndrome):
    for c in range(row_ptr.size - 1):
        acc = syndrome[c]
        for e in range(row_ptr[c], row_ptr[c + 1]):
            acc ^= hard[edge_var[e]]
        if acc:
            return False
    return True


@nb.njit(cache=True)
def _flood(row_ptr, edge_var, col_ptr, col_edges, prior, syndrome, max_iters, clamp):
    n = prior.size
    m = row_ptr.size - 1
    n_edges = edge_var.size
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    t = np.empty(n_edges)
    hard = np.empty(n, dtype=np.uint8)

    for v in range(n):
        hard[v] = 1 if prior[v] < 0 else 0
    if _syndrome_ok(row_ptr, edge_var, hard, syndrome):
        return hard, 0, True
    for e in range(n_edges):
        v2c[e] = min(max(prior[edge_var[e]], -clamp), clamp)

    for it in range(1, max_iters + 1):
        # check nodes: leave-one-out tanh products from prefix/suffix sweeps
        for c in range(m):
            lo = row_ptr[c]
            hi = row_ptr[c + 1]
            for e in range(lo, hi):
                t[e] = np.tanh(0.5 * v2c[e])
            acc = -1.0 if syndrome[c] else 1.0
            for e in range(lo, hi):
                c2v[e] = acc
                acc *= t[e]
            acc = 1.0
            for e in range(hi - 1, lo - 1, -1):
                p = c2v[e] * acc
                acc *= t[e]
                if p > _TANH_MAX:
                    p = _TANH_MAX
                elif p < -_TANH_MAX:
                    p = -_TANH_MAX
                c2v[e] = 2.0 * np.arctanh(p)
        # variable nodes
        for v in range(n):
            total = prior[v]
            for j in range(col_ptr[v], col_ptr[v + 1]):
                total += c2v[col_edges[j]]
            hard[v] = 1 if total < 0 else 0
            for j in range(col_ptr[v], col_ptr[v + 1]):
                e = col_edges[j]
                x = total - c2v[e]
                v2c[e] = min(max(x, -clamp), clamp)
        if _syndrome_ok(row_ptr, edge_var, hard, syndrome):
            return hard, it, True
    return hard, max_iters, False


@nb.njit(cache=True, parallel=True)
def _flood_batch(row_ptr, edge_var, col_ptr, col_edges, priors, syndromes, max_iters, clamp):
    batch = priors.shape[0]
    hard = np.empty(priors.shape, dtype=np.uint8)
    iters = np.empty(batch, dtype=np.int64)
    ok = np.empty(batch, dtype=np.bool_)
    for b in nb.prange(batch):
        h, i, k = _flood(row_ptr, edge_var, col_ptr, col_edges, priors[b], syndromes[b], max_iters, clamp)
        hard[b] = h
        iters[b] = i
        ok[b] = k
    return hard, iters, ok


@dataclass
class DecodeResult:
    bits: np.ndarray
    converged: bool
    iterations: int
    syndrome_ok: bool
    codeword: np.ndarray


def prepare_llrs(llrs: np.ndarray, code: SparseParityCheck, adaptation: Optional[RateAdaptation]) -> np.ndarray:
    """Copy llrs as float64 with punctured positions zeroed and shortened ones pinned to +inf."""
    out = np.array(llrs, dtype=np.float64)
    if out.shape[-1] != code.n:
        raise DomainError(f"llr length {out.shape[-1]} does not match code length {code.n}")
    if adaptation is not None:
        out[..., adaptation.punctured] = 0.0
        out[..., adaptation.shortened] = np.inf
    if np.isnan(out).any():
        raise DomainError("llrs contain NaN")
    return out


def _result(hard: np.ndarray, iters: int, ok: bool, syndrome: np.ndarray, code, adaptation) -> DecodeResult:
    key = adaptation.key_positions if adaptation is not None else slice(None)
    return DecodeResult(
        bits=hard[key].copy(),
        converged=bool(ok),
        iterations=int(iters),
        syndrome_ok=bool(np.array_equal(compute_syndrome(hard, code), syndrome)),
        codeword=hard,
    )


def _check_syndromes(syndromes: np.ndarray, code: SparseParityCheck) -> np.ndarray:
    syndromes = np.asarray(syndromes, dtype=np.uint8)
    if syndromes.shape[-1] != code.m_rows:
        raise DomainError(f"syndrome length {syndromes.shape[-1]} does not match {code.m_rows} checks")
    return syndromes


def bp_decode(
    llrs: np.ndarray,
    syndrome: np.ndarray,
    code: SparseParityCheck,
    adaptation: Optional[RateAdaptation] = None,
    max_iters: int = MAX_ITERS,
    clamp: float = LLR_CLAMP,
) -> DecodeResult:
    """Decode one frame. Positive llr favours bit 0; bits excludes shortened positions."""
    prior = prepare_llrs(llrs, code, adaptation)
    syndrome = _check_syndromes(syndrome, code)
    hard, iters, ok = _flood(
        code.row_ptr, code.edge_var, code.col_ptr, code.col_edges, prior, syndrome, int(max_iters), float(clamp)
    )
    return _result(hard, iters, ok, syndrome, code, adaptation)


def bp_decode_batch(
    llrs: np.ndarray,
    syndromes: np.ndarray,
    code: SparseParityCheck,
    adaptation: Optional[RateAdaptation] = None,
    max_iters: int = MAX_ITERS,
    clamp: float = LLR_CLAMP,
) -> List[DecodeResult]:
    """Decode independent frames in parallel, one row per frame."""
    priors = prepare_llrs(np.atleast_2d(llrs), code, adaptation)
    syndromes = _check_syndromes(np.atleast_2d(syndromes), code)
    if priors.shape[0] != syndromes.shape[0]:
        raise DomainError("llr and syndrome batches differ in size")
    start = time.perf_counter()
    hard, iters, ok = _flood_batch(
        code.row_ptr, code.edge_var, code.col_ptr, code.col_edges, priors, syndromes, int(max_iters), float(clamp)
    )
    elapsed = time.perf_counter() - start
    key_bits = priors.shape[0] * (code.n - (adaptation.s_count if adaptation is not None else 0))
    if elapsed > 0 and key_bits:
        mbps = key_bits / elapsed / 1e6
        LOG.info("decoded %d frames in %.2fs (%.3f Mbit/s)", priors.shape[0], elapsed, mbps)
        if mbps < MIN_THROUGHPUT_MBPS:
            LOG.warning("decoder throughput %.3f Mbit/s below %.1f Mbit/s", mbps, MIN_THROUGHPUT_MBPS)
    results = [_result(hard[b], iters[b], ok[b], syndromes[b], code, adaptation) for b in range(hard.shape[0])]
    for b, res in enumerate(results):
        LOG.debug("frame %d: converged=%s iterations=%d", b, res.converged, res.iterations)
    return results


def write_llrs(path: Union[str, pathlib.Path], llrs: np.ndarray) -> int:
    """Flat little-endian f32 llrs, frames concatenated."""
    data = np.ascontiguousarray(llrs, dtype=LLR_DTYPE).tobytes()
    pathlib.Path(path).write_bytes(data)
    return len(data)


def read_llrs(path: Union[str, pathlib.Path], n: int) -> np.ndarray:
    path = pathlib.Path(path)
    raw = path.read_bytes()
    frame_bytes = n * LLR_DTYPE.itemsize
    if not raw or len(raw) % frame_bytes:
        raise FrameFormatError(f"{path}: {len(raw)} bytes is not a whole number of {n}-llr frames")
    return np.frombuffer(raw, dtype=LLR_DTYPE).astype(np.float64).reshape(-1, n)
