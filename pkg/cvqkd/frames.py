"""Pulse frame records and their flat binary file format."""
from __future__ import annotations

import pathlib
import struct
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import FrameFormatError

ROLE_KEY = 0
ROLE_PARAM_EST = 1
ROLE_SHOT_NOISE = 2
ROLE_NAMES = {ROLE_KEY: "key", ROLE_PARAM_EST: "param_est", ROLE_SHOT_NOISE: "shot_noise"}

PHI_Q = 0
PHI_P = 1

FRAME_MAGIC = b"CVQKDFRM"
FRAME_VERSION = 1
_HEADER = struct.Struct("<8sII")

# packed little-endian record: u64 index, f64 alice_q, f64 alice_p, u8 phi, f64 bob_value, u8 role
FRAME_DTYPE = np.dtype(
    [
        ("index", "<u8"),
        ("alice_q", "<f8"),
        ("alice_p", "<f8"),
        ("phi", "u1"),
        ("bob_value", "<f8"),
        ("role", "u1"),
    ],
    align=False,
)


@dataclass(frozen=True)
class PulseFrame:
    """One simulated pulse."""

    index: int
    alice_q: float
    alice_p: float
    phi_choice: str
    bob_value: float
    role: str

    @classmethod
    def from_record(cls, rec: np.void) -> "PulseFrame":
        return cls(
            index=int(rec["index"]),
            alice_q=float(rec["alice_q"]),
            alice_p=float(rec["alice_p"]),
            phi_choice="q" if int(rec["phi"]) == PHI_Q else "p",
            bob_value=float(rec["bob_value"]),
            role=ROLE_NAMES[int(rec["role"])],
        )


def empty_frames(n: int) -> np.ndarray:
    return np.zeros(n, dtype=FRAME_DTYPE)


def iter_frames(frames: np.ndarray) -> Iterator[PulseFrame]:
    for rec in frames:
        yield PulseFrame.from_record(rec)


def save_frames(path: Union[str, pathlib.Path], frames: np.ndarray) -> int:
    """Write frames with the 16-byte header; returns the number of bytes written."""
    if frames.dtype != FRAME_DTYPE:
        frames = frames.astype(FRAME_DTYPE)
    path = pathlib.Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, FRAME_DTYPE.itemsize))
        fh.write(frames.tobytes())
    return _HEADER.size + frames.nbytes


def load_frames(path: Union[str, pathlib.Path]) -> np.ndarray:
    path = pathlib.Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FrameFormatError(f"{path}: file shorter than header")
    magic, version, record_size = _HEADER.unpack_from(raw)
    if magic != FRAME_MAGIC:
        raise FrameFormatError(f"{path}: bad magic {magic!r}")
    if version != FRAME_VERSION:
        raise FrameFormatError(f"{path}: unsupported frame file version {version}")
    if record_size != FRAME_DTYPE.itemsize:
        raise FrameFormatError(f"{path}: record size {record_size}, expected {FRAME_DTYPE.itemsize}")
    body = raw[_HEADER.size:]
    if len(body) % record_size:
        raise FrameFormatError(f"{path}: truncated record at byte {_HEADER.size + len(body) - len(body) % record_size}")
    return np.frombuffer(body, dtype=FRAME_DTYPE).copy()


def save_bits(path: Union[str, pathlib.Path], bits: np.ndarray) -> int:
    """Raw bit file: bits packed MSB-first, zero padded to a whole byte. Returns bytes written."""
    data = np.packbits(np.asarray(bits, dtype=np.uint8) & 1).tobytes()
    pathlib.Path(path).write_bytes(data)
    return len(data)


def load_bits(path: Union[str, pathlib.Path], n_bits: Union[int, None] = None) -> np.ndarray:
    path = pathlib.Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
    bits = np.unpackbits(raw)
    if n_bits is None:
        return bits
    if n_bits > bits.size or n_bits <= bits.size - 8:
        raise FrameFormatError(f"{path}: holds {bits.size} bits, cannot contain exactly {n_bits}")
    return bits[:n_bits].copy()
