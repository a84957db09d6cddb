"""Code catalog manifest.

One code per line, whitespace separated::

    code_id  path  rate  snr_threshold  [profile  block_len  seed]

Paths are relative to the manifest. When the alist file is missing and a
built-in profile is named, the code is generated and saved on first use.
"""
from __future__ import annotations

import logging
import pathlib
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Union

from ..errors import CodeParseError, DomainError
from ..keyrate import CodeDescriptor
from .code import SparseParityCheck, load_code, save_code
from .construction import PROFILES, build_code

LOG = logging.getLogger("cvqkd.ldpc")


@dataclass(frozen=True)
class CatalogEntry:
    descriptor: CodeDescriptor
    path: pathlib.Path
    profile: Optional[str] = None
    seed: int = 0

    @property
    def code_id(self) -> str:
        return self.descriptor.code_id

    def load(self, generate: bool = True) -> SparseParityCheck:
        if self.path.exists():
            code = load_code(self.path, self.descriptor)
        elif generate and self.profile is not None:
            code = self.generate()
        else:
            raise FileNotFoundError(f"code file {self.path} not found and no profile to generate it")
        if code.n != self.descriptor.block_len:
            raise CodeParseError(f"{self.path}: length {code.n}, catalog says {self.descriptor.block_len}")
        return code

    def generate(self) -> SparseParityCheck:
        if self.profile not in PROFILES:
            raise DomainError(f"unknown profile {self.profile!r} for {self.code_id}")
        code = build_code(PROFILES[self.profile], self.descriptor.block_len, self.seed, self.descriptor)
        save_code(code, self.path)
        LOG.info("generated %s -> %s", self.code_id, self.path)
        return code


class Catalog:
    """Ordered set of codes; parsed codes are cached per entry."""

    def __init__(self, entries: List[CatalogEntry]) -> None:
        ids = [e.code_id for e in entries]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate code_id in catalog")
        self.entries = entries
        self._codes: Dict[str, SparseParityCheck] = {}

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def descriptors(self) -> List[CodeDescriptor]:
        return [e.descriptor for e in self.entries]

    def entry(self, code_id: str) -> CatalogEntry:
        for e in self.entries:
            if e.code_id == code_id:
                return e
        raise KeyError(code_id)

    def code(self, code_id: str) -> SparseParityCheck:
        if code_id not in self._codes:
            self._codes[code_id] = self.entry(code_id).load()
        return self._codes[code_id]


def parse_catalog(text: str, base: Union[str, pathlib.Path] = ".") -> Catalog:
    base = pathlib.Path(base)
    entries: List[CatalogEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (4, 5, 7):
            raise CodeParseError(f"expected 4 or 7 fields, found {len(fields)}", lineno)
        try:
            rate = float(fields[2])
            threshold = float(fields[3])
            block_len = int(fields[5]) if len(fields) == 7 else None
            seed = int(fields[6]) if len(fields) == 7 else 0
        except ValueError as exc:
            raise CodeParseError(str(exc), lineno) from None
        profile = fields[4] if len(fields) >= 5 else None
        path = base / fields[1]
        if block_len is None:
            if not path.exists():
                raise CodeParseError(f"{fields[1]} missing and no block length given", lineno)
            block_len = int(path.read_text(encoding="ascii").split(None, 1)[0])
        try:
            descriptor = CodeDescriptor(code_id=fields[0], rate=rate, snr_threshold=threshold, block_len=block_len)
        except DomainError as exc:
            raise CodeParseError(str(exc), lineno) from None
        entries.append(CatalogEntry(descriptor=descriptor, path=path, profile=profile, seed=seed))
    return Catalog(entries)


def load_catalog(path: Union[str, pathlib.Path]) -> Catalog:
    path = pathlib.Path(path)
    catalog = parse_catalog(path.read_text(encoding="utf-8"), path.parent)
    LOG.info("catalog %s: %d codes", path, len(catalog))
    return catalog
