"""Measurement coding chain: closed-loop differencing, Lloyd-Max quantization,
canonical Huffman coding and the CSEB container format."""

from dataclasses import dataclass

import numpy as np

from .huffman import (HuffmanDecodeError, HuffmanTable, entropy_bits, huffman_build,
                      huffman_decode, huffman_encode)
from .quantizer import QuantizerCodebook, lloyd_max_train, sqnr_db
from .stream import (HEADER_SIZE, NUM_LEVELS, BadMagicError, ChecksumError, CorruptStreamError,
                     Frame, StreamError, StreamHeader, VersionMismatchError, deserialize,
                     serialize)

__all__ = [
    "BadMagicError", "ChecksumError", "ClosedLoopDecoder", "ClosedLoopEncoder",
    "CorruptStreamError", "EncodeReport", "Frame", "HuffmanDecodeError", "HuffmanTable",
    "QuantizerCodebook", "StreamError", "StreamHeader", "VersionMismatchError",
    "decode_stream", "deserialize", "diff_encode", "encode_measurements", "entropy_bits",
    "huffman_build", "huffman_decode", "huffman_encode", "lloyd_max_train", "serialize",
    "sqnr_db",
]


def diff_encode(y_t, y_prev=None) -> np.ndarray:
    """Prediction residual of a measurement vector against the previous
    decoder-side reconstruction; the first frame passes through unchanged."""
    y_t = np.asarray(y_t, dtype=float)
    if y_prev is None:
        return y_t.copy()
    y_prev = np.asarray(y_prev, dtype=float)
    if y_prev.shape != y_t.shape:
        raise ValueError(f"length mismatch: {y_t.shape} vs {y_prev.shape}")
    return y_t - y_prev


class ClosedLoopEncoder:
    """Quantizes each difference against what the decoder will reconstruct,
    so quantization error never accumulates across frames."""

    def __init__(self, codebook: QuantizerCodebook):
        self.codebook = codebook
        self.reconstruction = None

    def encode(self, y) -> np.ndarray:
        symbols = self.codebook.quantize(diff_encode(y, self.reconstruction))
        step = self.codebook.dequantize(symbols)
        self.reconstruction = step if self.reconstruction is None else self.reconstruction + step
        return symbols


class ClosedLoopDecoder:
    def __init__(self, codebook: QuantizerCodebook):
        self.codebook = codebook
        self.reconstruction = None

    def decode(self, symbols) -> np.ndarray:
        step = self.codebook.dequantize(symbols)
        self.reconstruction = step if self.reconstruction is None else self.reconstruction + step
        return self.reconstruction.copy()


@dataclass
class EncodeReport:
    header: StreamHeader
    stream: bytes
    frame_bits: np.ndarray        # Huffman payload bits per segment
    encoder_states: np.ndarray    # closed-loop reconstructions, one row per segment
    codebook: QuantizerCodebook   # trained codebook before padding

    @property
    def total_bits(self) -> int:
        return 8 * len(self.stream)

    @property
    def header_bits(self) -> int:
        return 8 * HEADER_SIZE


def encode_measurements(measurements, *, n: int, levels: int, k_total: int, matrix_kind,
                        q: int, seed: int, num_levels: int = NUM_LEVELS) -> EncodeReport:
    """Two-pass encoder for a ``(segments, M)`` array of measurement vectors.

    Pass one trains the codebook on open-loop differences; pass two runs the
    closed-loop quantizer, builds the Huffman code from the resulting symbols
    and writes the frames.
    """
    y = np.asarray(measurements, dtype=float)
    if y.ndim != 2:
        raise ValueError("measurements must be a (segments, M) array")
    count, m = y.shape
    if count:
        training = np.concatenate([y[:1], np.diff(y, axis=0)]).ravel()
        codebook = lloyd_max_train(training, num_levels)
    else:
        codebook = QuantizerCodebook(np.zeros(1), degenerate=True)
    wire_codebook = codebook.padded(NUM_LEVELS)

    encoder = ClosedLoopEncoder(wire_codebook)
    symbols = np.zeros((count, m), dtype=np.uint8)
    states = np.zeros((count, m))
    for t in range(count):
        symbols[t] = encoder.encode(y[t])
        states[t] = encoder.reconstruction
    hist = np.bincount(symbols.ravel(), minlength=NUM_LEVELS)
    if not hist.any():
        hist[0] = 1  # empty stream still ships a valid one-symbol table
    table = huffman_build(hist)
    frames = []
    for t in range(count):
        payload, nbits = huffman_encode(symbols[t], table)
        frames.append(Frame(nbits, payload))
    header = StreamHeader(n=n, m=m, levels=levels, k_total=k_total, segment_count=count,
                          matrix_kind=matrix_kind, q=q, seed=seed,
                          codebook=wire_codebook.levels, code_lengths=table.lengths)
    return EncodeReport(header, serialize(header, frames),
                        np.array([f.nbits for f in frames], dtype=np.int64), states, codebook)


def decode_stream(blob: bytes) -> tuple[StreamHeader, np.ndarray]:
    """Parse a stream and return its header and the ``(segments, M)`` decoded measurements."""
    header, frames = deserialize(blob)
    codebook = QuantizerCodebook(header.codebook)
    table = HuffmanTable(header.code_lengths)
    decoder = ClosedLoopDecoder(codebook)
    out = np.zeros((header.segment_count, header.m))
    for t, frame in enumerate(frames):
        try:
            symbols = huffman_decode(frame.payload, frame.nbits, table, count=header.m)
        except HuffmanDecodeError as exc:
            raise CorruptStreamError(str(exc), t) from exc
        out[t] = decoder.decode(symbols)
    return header, out
