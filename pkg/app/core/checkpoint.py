"""Binary checkpoints of the basis state.

Layout (all little-endian):

    magic      4 bytes  b"OMRX"
    version    u16
    mode tag   u8       0 = l1, 1 = l2 column, 2 = completion
    p, d       u32, u32
    t          u64
    L          p*d binary64, row-major
    A          d*d binary64, row-major
    B          p*d binary64, row-major
    constant   binary64 (running L-free part of the surrogate)
    crc        u32      CRC-32C of every preceding byte
"""
import logging
import os
import struct
from pathlib import Path

import google_crc32c
import numpy as np

from app.core.exceptions import (
    CheckpointChecksumError,
    CheckpointFormatError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)
from app.models.basis import BasisState

logger = logging.getLogger(__name__)

MAGIC = b"OMRX"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBIIQ")
_CRC = struct.Struct("<I")
_FLOAT = np.dtype("<f8")


def encode_checkpoint(state: BasisState, mode_tag: int = 0) -> bytes:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, mode_tag, state.p, state.d, state.t)
    payload = b"".join(
        [
            header,
            np.ascontiguousarray(state.L, dtype=_FLOAT).tobytes(),
            np.ascontiguousarray(state.A, dtype=_FLOAT).tobytes(),
            np.ascontiguousarray(state.B, dtype=_FLOAT).tobytes(),
            struct.pack("<d", state.loss_constant),
        ]
    )
    return payload + _CRC.pack(google_crc32c.value(payload))


def decode_checkpoint(data: bytes) -> tuple[BasisState, int]:
    """Parse checkpoint bytes into the state and its mode tag.

    Raises:
        CheckpointTruncatedError: If the file is shorter than its header declares.
        CheckpointFormatError: If the magic bytes are missing.
        CheckpointVersionError: If the format version is not supported.
        CheckpointChecksumError: If the CRC-32C does not match.
    """
    if len(data) < _HEADER.size + _CRC.size:
        raise CheckpointTruncatedError(f"checkpoint has only {len(data)} bytes")
    magic, version, mode_tag, p, d, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"checkpoint version {version}, expected {FORMAT_VERSION}")

    expected = _HEADER.size + 8 * (2 * p * d + d * d + 1) + _CRC.size
    if len(data) < expected:
        raise CheckpointTruncatedError(f"checkpoint has {len(data)} bytes, header declares {expected}")
    if len(data) > expected:
        raise CheckpointChecksumError(f"checkpoint has {len(data) - expected} trailing bytes")

    payload, (stored_crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if google_crc32c.value(payload) != stored_crc:
        raise CheckpointChecksumError()

    offset = _HEADER.size
    arrays = []
    for shape in ((p, d), (d, d), (p, d)):
        count = shape[0] * shape[1]
        arrays.append(np.frombuffer(payload, dtype=_FLOAT, count=count, offset=offset).reshape(shape).astype(np.float64))
        offset += 8 * count
    (loss_constant,) = struct.unpack_from("<d", payload, offset)
    L, A, B = arrays
    return BasisState(L=L, A=A, B=B, t=t, loss_constant=loss_constant), mode_tag


def save_checkpoint(state: BasisState, path: Path | str, mode_tag: int = 0) -> Path:
    """Write the state atomically (temporary file then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    tmp_path.write_bytes(encode_checkpoint(state, mode_tag))
    os.replace(tmp_path, path)
    logger.debug("Saved checkpoint at t=%d to %s", state.t, path)
    return path


def load_checkpoint_with_mode(path: Path | str) -> tuple[BasisState, int]:
    return decode_checkpoint(Path(path).read_bytes())


def load_checkpoint(path: Path | str) -> BasisState:
    state, _ = load_checkpoint_with_mode(path)
    return state
