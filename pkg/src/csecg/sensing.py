"""Seeded measurement matrices and the composed coefficient-domain operator.

Random bits come from Philox4x64-10 (numpy's ``Philox`` bit generator) keyed
with ``(seed, kind code)`` and a zero counter, so a matrix is reproducible from
its descriptor on any platform with a Philox implementation:

* ``dense_bernoulli``: entry ``(i, j)`` consumes raw word ``j * M + i``
  (column-major); the top bit set means ``-1/sqrt(M)``, clear means ``+1/sqrt(M)``.
* sparse kinds: columns in order; each column draws words until ``q`` distinct
  rows are found, ``row = ((w >> 32) * M) >> 32``, repeats rejected.  Kind II
  then draws ``q`` more words, one sign bit (top bit) per selected row in
  draw order.  Nonzeros are ``1/sqrt(q)`` in magnitude.
"""

import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .wavelet import analysis, check_layout, synthesis, synthesis_matrix

DESCRIPTOR_FORMAT = "<BIIIQ"
DESCRIPTOR_SIZE = struct.calcsize(DESCRIPTOR_FORMAT)
DENSE_THETA_LIMIT = 2 ** 22


class SensingError(ValueError):
    pass


class MatrixKind(IntEnum):
    DENSE_BERNOULLI = 0
    SPARSE_BINARY_I = 1
    SPARSE_BINARY_II = 2

    @classmethod
    def parse(cls, value) -> "MatrixKind":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        aliases = {
            "dense_bernoulli": cls.DENSE_BERNOULLI, "bernoulli": cls.DENSE_BERNOULLI,
            "sparse_binary_i": cls.SPARSE_BINARY_I, "matrix_i": cls.SPARSE_BINARY_I,
            "sparse_binary_ii": cls.SPARSE_BINARY_II, "matrix_ii": cls.SPARSE_BINARY_II,
        }
        key = str(value).strip().lower().replace("-", "_")
        if key not in aliases:
            raise SensingError(f"unknown matrix kind {value!r}")
        return aliases[key]

    @property
    def label(self) -> str:
        return self.name.lower()


def default_q(n: int) -> int:
    """Nonzeros per column for sparse kinds: ``floor(0.025 N)``, at least 1."""
    return max(1, int(np.floor(0.025 * n)))


class _WordStream:
    def __init__(self, seed: int, kind: MatrixKind, chunk: int = 4096):
        self._bits = np.random.Philox(key=np.array([seed & (2 ** 64 - 1), int(kind)], dtype=np.uint64))
        self._chunk = chunk
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def take(self, count: int) -> np.ndarray:
        out = []
        while count:
            if self._pos == self._buf.size:
                self._buf = self._bits.random_raw(self._chunk)
                self._pos = 0
            n = min(count, self._buf.size - self._pos)
            out.append(self._buf[self._pos:self._pos + n])
            self._pos += n
            count -= n
        return np.concatenate(out) if out else np.empty(0, np.uint64)

    def next(self) -> int:
        return int(self.take(1)[0])


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    kind: MatrixKind
    m: int
    n: int
    q: int
    seed: int
    dense: np.ndarray | None = field(default=None, repr=False)
    rows: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def is_sparse(self) -> bool:
        return self.kind is not MatrixKind.DENSE_BERNOULLI

    def apply(self, x) -> np.ndarray:
        """``Phi @ x``; ``x`` may be a vector or an ``(N, k)`` stack of columns."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise SensingError(f"expected leading dimension {self.n}, got {x.shape[0]}")
        if not self.is_sparse:
            return self.dense @ x
        out = np.zeros((self.m,) + x.shape[1:])
        contrib = self.values.reshape(self.values.shape + (1,) * (x.ndim - 1)) * x[:, None, ...]
        np.add.at(out, self.rows, contrib)
        return out

    def apply_transpose(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape[0] != self.m:
            raise SensingError(f"expected leading dimension {self.m}, got {r.shape[0]}")
        if not self.is_sparse:
            return self.dense.T @ r
        gathered = r[self.rows]
        return np.einsum("nq,nq...->n...", self.values, gathered)

    def to_dense(self) -> np.ndarray:
        if not self.is_sparse:
            return self.dense.copy()
        out = np.zeros((self.m, self.n))
        cols = np.repeat(np.arange(self.n), self.q)
        out[self.rows.ravel(), cols] = self.values.ravel()
        return out

    def descriptor(self) -> bytes:
        return struct.pack(DESCRIPTOR_FORMAT, int(self.kind), self.m, self.n, self.q, self.seed)


def generate(kind, m: int, n: int, q: int | None = None, seed: int = 0) -> SensingMatrix:
    kind = MatrixKind.parse(kind)
    if m < 1 or n < 1:
        raise SensingError("matrix dimensions must be positive")
    if m >= n:
        raise SensingError(f"M={m} >= N={n}: no compression; choose M < N")
    if not 0 <= seed < 2 ** 64:
        raise SensingError("seed must fit in 64 unsigned bits")
    stream = _WordStream(seed, kind)
    if kind is MatrixKind.DENSE_BERNOULLI:
        words = stream.take(m * n).reshape(n, m).T
        negative = (words >> np.uint64(63)).astype(bool)
        dense = np.where(negative, -1.0, 1.0) / np.sqrt(m)
        dense.setflags(write=False)
        return SensingMatrix(kind, m, n, 0, seed, dense=dense)

    q = default_q(n) if q is None else int(q)
    if not 1 <= q <= m:
        raise SensingError(f"q={q} must lie in [1, M={m}]")
    rows = np.empty((n, q), dtype=np.int64)
    signs = np.ones((n, q))
    for j in range(n):
        picked: list[int] = []
        while len(picked) < q:
            w = stream.next()
            row = ((w >> 32) * m) >> 32
            if row not in picked:
                picked.append(row)
        rows[j] = picked
        if kind is MatrixKind.SPARSE_BINARY_II:
            bits = stream.take(q) >> np.uint64(63)
            signs[j] = np.where(bits.astype(bool), -1.0, 1.0)
    values = signs / np.sqrt(q)
    rows.setflags(write=False)
    values.setflags(write=False)
    return SensingMatrix(kind, m, n, q, seed, rows=rows, values=values)


def from_descriptor(blob: bytes) -> SensingMatrix:
    kind, m, n, q, seed = struct.unpack(DESCRIPTOR_FORMAT, blob[:DESCRIPTOR_SIZE])
    return generate(MatrixKind(kind), m, n, q if kind else None, seed)


def apply(phi: SensingMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise SensingError("apply expects a vector")
    return phi.apply(x)


def apply_transpose(phi: SensingMatrix, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise SensingError("apply_transpose expects a vector")
    return phi.apply_transpose(r)


class ThetaOperator:
    """``Theta = Phi Psi`` acting on wavelet coefficient vectors.

    Small operators are materialised once; larger ones run matrix-free
    through the fast transform.  Both paths give the same products.
    """

    def __init__(self, phi: SensingMatrix, levels: int, materialize: bool | None = None):
        check_layout(phi.n, levels)
        self.phi = phi
        self.levels = levels
        if materialize is None:
            materialize = phi.m * phi.n <= DENSE_THETA_LIMIT
        self._dense = None
        if materialize:
            dense = phi.apply(synthesis_matrix(phi.n, levels))
            dense.setflags(write=False)
            self._dense = dense

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.m, self.phi.n

    @property
    def is_materialized(self) -> bool:
        return self._dense is not None

    def matrix(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        return self.phi.apply(synthesis_matrix(self.phi.n, self.levels))

    def matvec(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape[0] != self.phi.n:
            raise SensingError(f"coefficient vector length {s.shape[0]} != {self.phi.n}")
        if self._dense is not None:
            return self._dense @ s
        return self.phi.apply(synthesis(s, self.levels))

    def rmatvec(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape[0] != self.phi.m:
            raise SensingError(f"measurement vector length {r.shape[0]} != {self.phi.m}")
        if self._dense is not None:
            return self._dense.T @ r
        return analysis(self.phi.apply_transpose(r), self.levels)

    def columns(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.phi.n):
            raise IndexError(f"column index outside [0, {self.phi.n})")
        if self._dense is not None:
            return self._dense[:, idx]
        basis = synthesis_matrix(self.phi.n, self.levels)[:, idx]
        return self.phi.apply(basis)


def theta_column(theta: ThetaOperator, i: int) -> np.ndarray:
    if not 0 <= i < theta.phi.n:
        raise IndexError(f"column index {i} outside [0, {theta.phi.n})")
    return theta.columns([i])[:, 0]
