"""Canonical Huffman coding over a byte alphabet.

Only the code lengths travel with a stream; codes are rebuilt canonically
(shorter codes first, then by symbol value) and written MSB first.
"""

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

ALPHABET = 256


class HuffmanDecodeError(ValueError):
    def __init__(self, message: str, bit_offset: int):
        super().__init__(f"{message} at bit {bit_offset}")
        self.bit_offset = bit_offset


@dataclass(frozen=True, eq=False)
class HuffmanTable:
    lengths: np.ndarray
    codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=np.int64)
        if lengths.shape != (ALPHABET,):
            raise ValueError(f"expected {ALPHABET} code lengths")
        if lengths.min() < 0 or lengths.max() > 255:
            raise ValueError("code lengths must fit in one byte")
        used = lengths[lengths > 0]
        if used.size == 0:
            raise ValueError("code table has no symbols")
        kraft = sum(2.0 ** -int(n) for n in used)
        if kraft > 1.0 + 1e-12:
            raise ValueError("code lengths violate the Kraft inequality")
        lengths.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "codes", _canonical_codes(lengths))

    def mean_length(self, histogram) -> float:
        h = np.asarray(histogram, dtype=float)
        return float(np.sum(h * self.lengths) / np.sum(h))

    def to_bytes(self) -> bytes:
        return self.lengths.astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "HuffmanTable":
        return cls(np.frombuffer(blob, dtype=np.uint8, count=ALPHABET))


def _canonical_codes(lengths) -> np.ndarray:
    codes = np.zeros(ALPHABET, dtype=object)
    code = 0
    prev = 0
    for sym in sorted((s for s in range(ALPHABET) if lengths[s]), key=lambda s: (lengths[s], s)):
        code <<= int(lengths[sym]) - prev
        prev = int(lengths[sym])
        codes[sym] = code
        code += 1
    return codes


def huffman_build(histogram) -> HuffmanTable:
    """Code lengths from symbol counts; a lone symbol gets a 1-bit code."""
    hist = np.asarray(histogram, dtype=np.int64)
    if hist.shape != (ALPHABET,):
        raise ValueError(f"histogram must have {ALPHABET} bins")
    present = np.flatnonzero(hist > 0)
    if present.size == 0:
        raise ValueError("cannot build a code from an empty histogram")
    lengths = np.zeros(ALPHABET, dtype=np.int64)
    if present.size == 1:
        lengths[present[0]] = 1
        return HuffmanTable(lengths)
    tiebreak = itertools.count()
    heap = [(int(hist[s]), next(tiebreak), [int(s)]) for s in present]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, _, a = heapq.heappop(heap)
        w2, _, b = heapq.heappop(heap)
        for s in a + b:
            lengths[s] += 1
        heapq.heappush(heap, (w1 + w2, next(tiebreak), a + b))
    return HuffmanTable(lengths)


def huffman_encode(symbols, table: HuffmanTable) -> tuple[bytes, int]:
    """Pack ``symbols`` into bytes; returns the payload and its exact bit count."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    if symbols.size and (symbols.min() < 0 or symbols.max() >= ALPHABET):
        raise ValueError("symbol outside the byte alphabet")
    missing = np.flatnonzero(table.lengths[symbols] == 0) if symbols.size else []
    if len(missing):
        raise ValueError(f"symbol {symbols[missing[0]]} has no code in this table")
    words = [format(table.codes[s], f"0{table.lengths[s]}b") for s in symbols.tolist()]
    bits = "".join(words)
    nbits = len(bits)
    if not nbits:
        return b"", 0
    pad = -nbits % 8
    payload = int(bits + "0" * pad, 2).to_bytes((nbits + pad) // 8, "big")
    return payload, nbits


def huffman_decode(payload: bytes, nbits: int, table: HuffmanTable, count: int | None = None) -> np.ndarray:
    """Decode exactly ``nbits`` bits (and, if given, check the symbol count)."""
    if nbits > 8 * len(payload):
        raise HuffmanDecodeError("payload shorter than declared bit length", 8 * len(payload))
    lengths = table.lengths
    max_len = int(lengths.max())
    # canonical decoding tables: first code and first symbol slot per length
    order = sorted((s for s in range(ALPHABET) if lengths[s]), key=lambda s: (lengths[s], s))
    per_length = np.bincount(lengths[order], minlength=max_len + 1)
    first_code = [0] * (max_len + 2)
    first_index = [0] * (max_len + 2)
    code = idx = 0
    for n in range(1, max_len + 1):
        code = (code + int(per_length[n - 1])) << 1 if n > 1 else 0
        first_code[n] = code
        first_index[n] = idx
        idx += int(per_length[n])

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8)).tolist()
    out = []
    pos = 0
    while pos < nbits:
        start = pos
        code = 0
        n = 0
        while True:
            if pos >= nbits:
                raise HuffmanDecodeError("stream ends inside a codeword", start)
            code = (code << 1) | bits[pos]
            pos += 1
            n += 1
            offset = code - first_code[n]
            if 0 <= offset < per_length[n]:
                out.append(order[first_index[n] + offset])
                break
            if n >= max_len:
                raise HuffmanDecodeError("invalid codeword", start)
    if count is not None and len(out) != count:
        raise HuffmanDecodeError(f"decoded {len(out)} symbols, expected {count}", nbits)
    return np.array(out, dtype=np.uint8)


def entropy_bits(histogram) -> float:
    h = np.asarray(histogram, dtype=float)
    p = h[h > 0] / h.sum()
    return float(-np.sum(p * np.log2(p)))
