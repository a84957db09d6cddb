"""Sparse parity-check matrices, alist I/O and syndromes."""
from __future__ import annotations

import logging
import pathlib
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import CodeParseError, DomainError
from ..keyrate import CodeDescriptor

LOG = logging.getLogger("cvqkd.ldpc")


@dataclass(frozen=True, eq=False)
class SparseParityCheck:
    """m_rows x n parity-check matrix held as check-major edge lists.

    Edge e joins check ``edge_check[e]`` and variable ``edge_var[e]``; edges
    are sorted by check, so ``row_ptr`` delimits each check's edges.
    ``col_ptr``/``col_edges`` give the same edges grouped by variable.
    """

    n: int
    m_rows: int
    row_ptr: np.ndarray
    edge_var: np.ndarray
    col_ptr: np.ndarray
    col_edges: np.ndarray
    metadata: Optional[CodeDescriptor] = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        m_rows: int,
        checks: np.ndarray,
        variables: np.ndarray,
        metadata: Optional[CodeDescriptor] = None,
    ) -> "SparseParityCheck":
        checks = np.asarray(checks, dtype=np.int64)
        variables = np.asarray(variables, dtype=np.int64)
        if checks.shape != variables.shape:
            raise DomainError("edge arrays differ in length")
        if n <= 0 or m_rows <= 0 or m_rows >= n:
            raise DomainError(f"need 0 < m_rows < n (got m_rows={m_rows}, n={n})")
        if checks.size and (checks.min() < 0 or checks.max() >= m_rows or variables.min() < 0 or variables.max() >= n):
            raise DomainError("edge endpoint out of range")
        order = np.lexsort((variables, checks))
        checks, variables = checks[order], variables[order]
        dup = (np.diff(checks) == 0) & (np.diff(variables) == 0)
        if np.any(dup):
            i = int(np.flatnonzero(dup)[0])
            raise DomainError(f"duplicate edge between check {checks[i]} and variable {variables[i]}")
        row_ptr = np.zeros(m_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(checks, minlength=m_rows), out=row_ptr[1:])
        col_edges = np.argsort(variables, kind="stable").astype(np.int64)
        col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(variables, minlength=n), out=col_ptr[1:])
        return cls(
            n=int(n),
            m_rows=int(m_rows),
            row_ptr=row_ptr,
            edge_var=variables,
            col_ptr=col_ptr,
            col_edges=col_edges,
            metadata=metadata,
        )

    @property
    def k(self) -> int:
        return self.n - self.m_rows

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def n_edges(self) -> int:
        return int(self.edge_var.size)

    @cached_property
    def edge_check(self) -> np.ndarray:
        return np.repeat(np.arange(self.m_rows, dtype=np.int64), np.diff(self.row_ptr))

    @property
    def var_degrees(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def check_vars(self, c: int) -> np.ndarray:
        return self.edge_var[self.row_ptr[c]:self.row_ptr[c + 1]]

    def var_checks(self, v: int) -> np.ndarray:
        return self.edge_check[self.col_edges[self.col_ptr[v]:self.col_ptr[v + 1]]]

    def matrix(self) -> sp.csr_matrix:
        data = np.ones(self.n_edges, dtype=np.uint8)
        return sp.csr_matrix((data, self.edge_var, self.row_ptr), shape=(self.m_rows, self.n))

    def degree_profile(self) -> Tuple[Dict[int, float], Dict[int, float]]:
        """Node-perspective degree distributions (variables, checks)."""
        var = Counter(self.var_degrees.tolist())
        chk = Counter(self.check_degrees.tolist())
        return (
            {d: c / self.n for d, c in sorted(var.items())},
            {d: c / self.m_rows for d, c in sorted(chk.items())},
        )

    def describe(self) -> str:
        var, chk = self.degree_profile()
        fmt = lambda prof: " ".join(f"{d}:{f:.4f}" for d, f in prof.items())
        return (
            f"n={self.n} m={self.m_rows} rate={self.rate:.5f} edges={self.n_edges} "
            f"var[{fmt(var)}] check[{fmt(chk)}]"
        )


def _numbered_lines(text: str) -> Iterator[Tuple[int, List[int]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            yield lineno, [int(tok) for tok in raw.split()]
        except ValueError:
            raise CodeParseError(f"non-integer token in {raw!r}", lineno) from None


def parse_alist(text: str, metadata: Optional[CodeDescriptor] = None) -> SparseParityCheck:
    """Parse MacKay's alist format (1-based indices, zero padding allowed)."""
    lines = list(_numbered_lines(text))
    if len(lines) < 4:
        raise CodeParseError("alist needs at least 4 header lines", lines[-1][0] if lines else 1)

    def header(idx: int, count: int) -> List[int]:
        lineno, vals = lines[idx]
        if len(vals) != count:
            raise CodeParseError(f"expected {count} values, found {len(vals)}", lineno)
        return vals

    n, m = header(0, 2)
    if n <= 0 or m <= 0 or m >= n:
        raise CodeParseError(f"invalid dimensions n={n} m={m}", lines[0][0])
    max_col, max_row = header(1, 2)
    col_deg = header(2, n)
    row_deg = header(3, m)
    if len(lines) != 4 + n + m:
        raise CodeParseError(
            f"expected {n} column and {m} row lines, found {len(lines) - 4} adjacency lines",
            lines[-1][0],
        )
    if sum(col_deg) != sum(row_deg):
        raise CodeParseError("column and row degree sums differ", lines[3][0])
    if max(col_deg) != max_col or max(row_deg) != max_row:
        raise CodeParseError("maximum degrees do not match the degree lists", lines[1][0])

    checks: List[int] = []
    variables: List[int] = []
    for v in range(n):
        lineno, vals = lines[4 + v]
        nz = [x for x in vals if x != 0]
        if len(nz) != col_deg[v]:
            raise CodeParseError(f"column {v + 1} lists {len(nz)} checks, degree says {col_deg[v]}", lineno)
        if len(set(nz)) != len(nz):
            raise CodeParseError(f"duplicate edge in column {v + 1}", lineno)
        for c in nz:
            if not 1 <= c <= m:
                raise CodeParseError(f"check index {c} out of range", lineno)
            checks.append(c - 1)
            variables.append(v)

    col_edges = set(zip(checks, variables))
    row_edges = set()
    for c in range(m):
        lineno, vals = lines[4 + n + c]
        nz = [x for x in vals if x != 0]
        if len(nz) != row_deg[c]:
            raise CodeParseError(f"row {c + 1} lists {len(nz)} variables, degree says {row_deg[c]}", lineno)
        if len(set(nz)) != len(nz):
            raise CodeParseError(f"duplicate edge in row {c + 1}", lineno)
        for v in nz:
            if not 1 <= v <= n:
                raise CodeParseError(f"variable index {v} out of range", lineno)
            row_edges.add((c, v - 1))
    if row_edges != col_edges:
        raise CodeParseError("row lists are not the transpose of the column lists", lines[4 + n][0])

    return SparseParityCheck.from_edges(n, m, np.array(checks), np.array(variables), metadata)


def load_code(path: Union[str, pathlib.Path], metadata: Optional[CodeDescriptor] = None) -> SparseParityCheck:
    path = pathlib.Path(path)
    code = parse_alist(path.read_text(encoding="ascii"), metadata)
    LOG.info("loaded %s: %s", path.name, code.describe())
    return code


def format_alist(code: SparseParityCheck) -> str:
    var_deg = code.var_degrees
    chk_deg = code.check_degrees
    max_v, max_c = int(var_deg.max()), int(chk_deg.max())
    out = [
        f"{code.n} {code.m_rows}",
        f"{max_v} {max_c}",
        " ".join(map(str, var_deg.tolist())),
        " ".join(map(str, chk_deg.tolist())),
    ]
    for v in range(code.n):
        checks = sorted((code.var_checks(v) + 1).tolist())
        out.append(" ".join(map(str, checks + [0] * (max_v - len(checks)))))
    for c in range(code.m_rows):
        variables = sorted((code.check_vars(c) + 1).tolist())
        out.append(" ".join(map(str, variables + [0] * (max_c - len(variables)))))
    return "\n".join(out) + "\n"


def save_code(code: SparseParityCheck, path: Union[str, pathlib.Path]) -> None:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_alist(code), encoding="ascii")


def compute_syndrome(bits: np.ndarray, code: SparseParityCheck) -> np.ndarray:
    """H*bits mod 2. A 2-D input is treated as one frame per row."""
    bits = np.asarray(bits)
    if bits.shape[-1] != code.n:
        raise DomainError(f"bit vector length {bits.shape[-1]} does not match code length {code.n}")
    h = code.matrix().astype(np.int64)
    x = (bits.astype(np.int64) & 1)
    if x.ndim == 1:
        return (h @ x % 2).astype(np.uint8)
    return np.asarray((h @ x.T) % 2, dtype=np.uint8).T
