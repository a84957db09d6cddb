"""Multi-edge degree profiles and progressive-edge-growth code construction."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numba as nb
import numpy as np

from ..errors import DomainError
from ..keyrate import CodeDescriptor
from ..randomness import STREAM_CONSTRUCTION, derive_seed
from .code import SparseParityCheck

LOG = logging.getLogger("cvqkd.ldpc")

PEG_DEPTH = 2
PEG_TRIES = 64

NodeType = Tuple[float, Mapping[int, int]]


@dataclass(frozen=True)
class MultiEdgeProfile:
    """Node types as (fraction of n, {edge type: degree}).

    Variable fractions sum to 1; check fractions sum to m/n.
    """

    name: str
    variables: Tuple[NodeType, ...]
    checks: Tuple[NodeType, ...]

    def __post_init__(self) -> None:
        total = sum(f for f, _ in self.variables)
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"{self.name}: variable fractions sum to {total}, expected 1")
        for t in self.edge_types:
            v = sum(f * d.get(t, 0) for f, d in self.variables)
            c = sum(f * d.get(t, 0) for f, d in self.checks)
            if abs(v - c) > 1e-9:
                raise DomainError(f"{self.name}: edge type {t} has {v} variable and {c} check sockets per node")

    @property
    def edge_types(self) -> Tuple[int, ...]:
        types = set()
        for _, degs in self.variables + self.checks:
            types.update(degs)
        return tuple(sorted(types))

    @property
    def design_rate(self) -> float:
        return 1.0 - sum(f for f, _ in self.checks)

    def node_degrees(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Per-node degree matrices (n x T, m x T) with socket counts balanced per edge type."""
        types = self.edge_types
        var_deg = _expand(self.variables, n, types, exact_total=n)
        m = int(round(n * (1.0 - self.design_rate)))
        chk_deg = _expand(self.checks, n, types, exact_total=m)
        for t in range(len(types)):
            diff = int(var_deg[:, t].sum() - chk_deg[:, t].sum())
            if diff == 0:
                continue
            carriers = np.flatnonzero(chk_deg[:, t] > 0)
            if carriers.size == 0:
                raise DomainError(f"{self.name}: no check carries edge type {types[t]}")
            step = 1 if diff > 0 else -1
            for i in range(abs(diff)):
                chk_deg[carriers[i % carriers.size], t] += step
            if (chk_deg[:, t] < 0).any():
                raise DomainError(f"{self.name}: cannot balance edge type {types[t]} at n={n}")
        return var_deg, chk_deg


def _expand(nodes: Tuple[NodeType, ...], n: int, types: Tuple[int, ...], exact_total: int) -> np.ndarray:
    counts = [int(round(f * n)) for f, _ in nodes]
    counts[-1] += exact_total - sum(counts)
    if counts[-1] < 0:
        raise DomainError(f"profile cannot be realised at n={n}")
    out = np.zeros((exact_total, len(types)), dtype=np.int64)
    row = 0
    for count, (_, degs) in zip(counts, nodes):
        for t, d in degs.items():
            out[row:row + count, types.index(t)] = d
        row += count
    return out


PROFILES: Dict[str, MultiEdgeProfile] = {
    "regular-3-6": MultiEdgeProfile(
        name="regular-3-6",
        variables=((1.0, {1: 3}),),
        checks=((0.5, {1: 6}),),
    ),
    # fewer degree-2 variables than checks
    "irregular-0.50": MultiEdgeProfile(
        name="irregular-0.50",
        variables=((0.49, {1: 2}), (0.335, {1: 3}), (0.175, {1: 8})),
        checks=((0.115, {1: 6}), (0.385, {1: 7})),
    ),
    "met-0.10": MultiEdgeProfile(
        name="met-0.10",
        variables=(
            (0.08, {1: 2, 2: 20}),
            (0.045, {1: 3, 2: 25}),
            (0.875, {3: 1}),
        ),
        checks=(
            (0.005, {1: 11}),
            (0.02, {1: 12}),
            (0.775, {2: 3, 3: 1}),
            (0.1, {2: 4, 3: 1}),
        ),
    ),
    "met-0.05": MultiEdgeProfile(
        name="met-0.05",
        variables=(
            (0.05, {1: 2, 2: 25}),
            (0.05, {1: 3, 2: 29}),
            (0.9, {3: 1}),
        ),
        checks=(
            (0.05, {1: 5}),
            (0.9, {2: 3, 3: 1}),
        ),
    ),
}


@nb.njit(cache=True)
def _peg(var_deg, chk_deg, order, seed, depth, tries):
    n, n_types = var_deg.shape
    m = chk_deg.shape[0]
    np.random.seed(seed)

    var_total = var_deg.sum(axis=1)
    chk_total = chk_deg.sum(axis=1)
    var_ptr = np.zeros(n + 1, dtype=np.int64)
    chk_ptr = np.zeros(m + 1, dtype=np.int64)
    for v in range(n):
        var_ptr[v + 1] = var_ptr[v] + var_total[v]
    for c in range(m):
        chk_ptr[c + 1] = chk_ptr[c] + chk_total[c]
    n_edges = var_ptr[n]
    var_adj = np.empty(n_edges, dtype=np.int64)
    chk_adj = np.empty(n_edges, dtype=np.int64)
    var_fill = np.zeros(n, dtype=np.int64)
    chk_fill = np.zeros(m, dtype=np.int64)

    # socket pools: one check id per free socket, grouped by edge type
    pool_start = np.zeros(n_types + 1, dtype=np.int64)
    for t in range(n_types):
        pool_start[t + 1] = pool_start[t] + chk_deg[:, t].sum()
    pool = np.empty(pool_start[n_types], dtype=np.int64)
    pool_len = np.zeros(n_types, dtype=np.int64)
    for t in range(n_types):
        pos = pool_start[t]
        for c in range(m):
            for _ in range(chk_deg[c, t]):
                pool[pos] = c
                pos += 1
        pool_len[t] = pos - pool_start[t]

    reach = np.zeros(m, dtype=np.int64)
    adjacent = np.full(m, -1, dtype=np.int64)
    seen_var = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    stamp = 0

    out_chk = np.empty(n_edges, dtype=np.int64)
    out_var = np.empty(n_edges, dtype=np.int64)
    n_out = 0

    for v in order:
        for t in range(n_types):
            for _ in range(var_deg[v, t]):
                if pool_len[t] == 0:
                    return out_chk[:n_out], out_var[:n_out], False
                stamp += 1
                # bounded breadth-first search from v over the partial graph
                if var_fill[v] > 0:
                    head = 0
                    tail = 1
                    queue[0] = v
                    seen_var[v] = stamp
                    for _lvl in range(depth):
                        level_end = tail
                        while head < level_end:
                            u = queue[head]
                            head += 1
                            for j in range(var_ptr[u], var_ptr[u] + var_fill[u]):
                                c = var_adj[j]
                                if reach[c] == stamp:
                                    continue
                                reach[c] = stamp
                                for i in range(chk_ptr[c], chk_ptr[c] + chk_fill[c]):
                                    w = chk_adj[i]
                                    if seen_var[w] != stamp and tail < n:
                                        seen_var[w] = stamp
                                        queue[tail] = w
                                        tail += 1
                base = pool_start[t]
                pick = -1
                fallback = -1
                for _try in range(tries):
                    idx = base + np.random.randint(0, pool_len[t])
                    c = pool[idx]
                    if adjacent[c] == v:
                        continue
                    if reach[c] == stamp:
                        if fallback < 0:
                            fallback = idx
                        continue
                    pick = idx
                    break
                if pick < 0:
                    pick = fallback
                if pick < 0:
                    for idx in range(base, base + pool_len[t]):
                        if adjacent[pool[idx]] != v:
                            pick = idx
                            break
                if pick < 0:
                    return out_chk[:n_out], out_var[:n_out], False
                c = pool[pick]
                last = base + pool_len[t] - 1
                pool[pick] = pool[last]
                pool_len[t] -= 1

                adjacent[c] = v
                var_adj[var_ptr[v] + var_fill[v]] = c
                var_fill[v] += 1
                chk_adj[chk_ptr[c] + chk_fill[c]] = v
                chk_fill[c] += 1
                out_chk[n_out] = c
                out_var[n_out] = v
                n_out += 1
    return out_chk[:n_out], out_var[:n_out], True


def build_code(
    profile: MultiEdgeProfile,
    n: int,
    seed: int = 0,
    metadata: Optional[CodeDescriptor] = None,
    depth: int = PEG_DEPTH,
) -> SparseParityCheck:
    """Deterministic code of length n realising the profile."""
    if n < 64:
        raise DomainError(f"code length must be at least 64 (got {n})")
    var_deg, chk_deg = profile.node_degrees(n)
    # lowest-degree variables first
    order = np.argsort(var_deg.sum(axis=1), kind="stable").astype(np.int64)
    checks, variables, ok = _peg(
        var_deg, chk_deg, order, derive_seed(seed, STREAM_CONSTRUCTION) % (1 << 32), depth, PEG_TRIES
    )
    if not ok:
        raise DomainError(f"{profile.name}: edge placement failed at n={n}, seed={seed}")
    code = SparseParityCheck.from_edges(n, chk_deg.shape[0], checks, variables, metadata)
    LOG.info("built %s (seed %d): %s", profile.name, seed, code.describe())
    return code
