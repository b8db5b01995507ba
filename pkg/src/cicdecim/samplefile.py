"""Binary sample files.

Layout (little endian)::

    offset  size  field
    0       4     magic b"CICS"
    4       2     version (u16, currently 1)
    6       1     sample width in bits (u8)
    7       1     reserved, 0
    8       8     sample rate in Hz (u64)
    16      4*n   samples, signed 32-bit
"""

from __future__ import annotations

import os
import struct
from typing import NamedTuple

import numpy as np

from .errors import ContractError, SampleIOError
from .fixed_point import max_value, min_value

MAGIC = b"CICS"
VERSION = 1
HEADER = struct.Struct("<4sHBBQ")


class SampleFile(NamedTuple):
    samples: np.ndarray
    width: int
    fs: int


def encode(samples, width: int, fs: int) -> bytes:
    x = np.asarray(samples, dtype=np.int64).reshape(-1)
    if not 1 <= width <= 32:
        raise ContractError(f"sample files hold widths 1..32, got {width}")
    if x.size and (x.min() < min_value(width) or x.max() > max_value(width)):
        raise ContractError(f"samples exceed the declared {width}-bit width")
    return HEADER.pack(MAGIC, VERSION, width, 0, int(fs)) + x.astype("<i4").tobytes()


def decode(data: bytes) -> SampleFile:
    if len(data) < HEADER.size:
        raise ContractError("sample file shorter than its header")
    magic, version, width, _, fs = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ContractError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ContractError(f"unsupported sample file version {version}")
    body = data[HEADER.size:]
    if len(body) % 4:
        raise ContractError("sample payload is not a whole number of int32 words")
    x = np.frombuffer(body, dtype="<i4").astype(np.int64)
    return SampleFile(x, width, fs)


def write_samples(path, samples, width: int, fs: int) -> None:
    blob = encode(samples, width, fs)
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise SampleIOError(f"cannot write samples to {os.fspath(path)!r}: {exc}") from exc


def read_samples(path) -> SampleFile:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise SampleIOError(f"cannot read samples from {os.fspath(path)!r}: {exc}") from exc
    return decode(data)
