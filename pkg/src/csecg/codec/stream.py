"""Byte layout of an encoded measurement stream (all integers little-endian).

Header::

    magic          4s   b"CSEB"
    version        u8   1
    N              u32  segment length
    M              u32  measurements per segment
    L              u8   wavelet levels
    K_total        u16  model sparsity
    segment_count  u32
    matrix         21 bytes: kind u8, M u32, N u32, q u32, seed u64
    codebook       256 x f64 reproduction levels, ascending
    code lengths   256 x u8 canonical Huffman lengths
    crc            u32  CRC-32 of every preceding header byte

Each frame::

    payload_bits   u32
    payload        ceil(payload_bits / 8) bytes, MSB-first, zero padded
    crc            u32  CRC-32 of payload_bits and payload
"""

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..sensing import DESCRIPTOR_FORMAT, DESCRIPTOR_SIZE, MatrixKind

MAGIC = b"CSEB"
VERSION = 1
NUM_LEVELS = 256
_FIXED = struct.Struct("<4sBIIBHI")
_CRC = struct.Struct("<I")
HEADER_SIZE = _FIXED.size + DESCRIPTOR_SIZE + 8 * NUM_LEVELS + NUM_LEVELS + _CRC.size


class StreamError(ValueError):
    pass


class BadMagicError(StreamError):
    pass


class VersionMismatchError(StreamError):
    pass


class CorruptStreamError(StreamError):
    def __init__(self, message: str, frame: int | None = None):
        where = "header" if frame is None else f"frame {frame}"
        super().__init__(f"{where}: {message}")
        self.frame = frame


class ChecksumError(CorruptStreamError):
    pass


@dataclass(frozen=True, eq=False)
class StreamHeader:
    n: int
    m: int
    levels: int
    k_total: int
    segment_count: int
    matrix_kind: MatrixKind
    q: int
    seed: int
    codebook: np.ndarray = field(repr=False)
    code_lengths: np.ndarray = field(repr=False)
    version: int = VERSION

    def __eq__(self, other):
        if not isinstance(other, StreamHeader):
            return NotImplemented
        scalars = ("n", "m", "levels", "k_total", "segment_count", "matrix_kind", "q", "seed", "version")
        return (all(getattr(self, k) == getattr(other, k) for k in scalars)
                and np.array_equal(self.codebook, other.codebook)
                and np.array_equal(self.code_lengths, other.code_lengths))

    def pack(self) -> bytes:
        codebook = np.asarray(self.codebook, dtype="<f8")
        lengths = np.asarray(self.code_lengths)
        if codebook.shape != (NUM_LEVELS,) or lengths.shape != (NUM_LEVELS,):
            raise StreamError(f"codebook and code table must both have {NUM_LEVELS} entries")
        body = (
            _FIXED.pack(MAGIC, self.version, self.n, self.m, self.levels, self.k_total, self.segment_count)
            + struct.pack(DESCRIPTOR_FORMAT, int(self.matrix_kind), self.m, self.n, self.q, self.seed)
            + codebook.tobytes()
            + lengths.astype(np.uint8).tobytes()
        )
        return body + _CRC.pack(zlib.crc32(body))


@dataclass(frozen=True)
class Frame:
    nbits: int
    payload: bytes

    def pack(self) -> bytes:
        if len(self.payload) != (self.nbits + 7) // 8:
            raise StreamError("payload length does not match its bit count")
        body = struct.pack("<I", self.nbits) + self.payload
        return body + _CRC.pack(zlib.crc32(body))


def serialize(header: StreamHeader, frames) -> bytes:
    frames = list(frames)
    if len(frames) != header.segment_count:
        raise StreamError(f"header declares {header.segment_count} frames, got {len(frames)}")
    return header.pack() + b"".join(f.pack() for f in frames)


def _unpack_header(blob: bytes) -> StreamHeader:
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError("not a CSEB stream (bad magic)")
    if len(blob) < 5:
        raise CorruptStreamError("truncated")
    if blob[4] != VERSION:
        raise VersionMismatchError(f"unsupported stream version {blob[4]} (expected {VERSION})")
    if len(blob) < HEADER_SIZE:
        raise CorruptStreamError("truncated")
    body = blob[:HEADER_SIZE - _CRC.size]
    (crc,) = _CRC.unpack_from(blob, HEADER_SIZE - _CRC.size)
    if zlib.crc32(body) != crc:
        raise ChecksumError("CRC mismatch")
    _, version, n, m, levels, k_total, count = _FIXED.unpack_from(body)
    kind, dm, dn, q, seed = struct.unpack_from(DESCRIPTOR_FORMAT, body, _FIXED.size)
    if (dm, dn) != (m, n):
        raise CorruptStreamError("matrix descriptor disagrees with stream dimensions")
    try:
        kind = MatrixKind(kind)
    except ValueError:
        raise CorruptStreamError(f"unknown matrix kind {kind}") from None
    off = _FIXED.size + DESCRIPTOR_SIZE
    codebook = np.frombuffer(body, dtype="<f8", count=NUM_LEVELS, offset=off).astype(float)
    lengths = np.frombuffer(body, dtype=np.uint8, count=NUM_LEVELS, offset=off + 8 * NUM_LEVELS).copy()
    return StreamHeader(n, m, levels, k_total, count, kind, q, seed, codebook, lengths, version)


def deserialize(blob: bytes) -> tuple[StreamHeader, list[Frame]]:
    blob = bytes(blob)
    header = _unpack_header(blob)
    frames = []
    pos = HEADER_SIZE
    for t in range(header.segment_count):
        if pos + 4 > len(blob):
            raise ChecksumError("truncated before frame length", t)
        (nbits,) = struct.unpack_from("<I", blob, pos)
        end = pos + 4 + (nbits + 7) // 8
        if end + _CRC.size > len(blob):
            raise ChecksumError("truncated payload", t)
        (crc,) = _CRC.unpack_from(blob, end)
        if zlib.crc32(blob[pos:end]) != crc:
            raise ChecksumError("CRC mismatch", t)
        frames.append(Frame(nbits, blob[pos + 4:end]))
        pos = end + _CRC.size
    if pos != len(blob):
        raise CorruptStreamError(f"{len(blob) - pos} trailing bytes after last frame", header.segment_count)
    return header, frames


def frame_overhead_bits() -> int:
    return 8 * (4 + _CRC.size)
