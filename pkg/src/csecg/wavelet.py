"""Orthogonal Daubechies-4 wavelet transform with periodic boundaries.

Coefficient vectors are laid out as ``[d1 d2 ... dL aL]``: the finest detail
subband first and the coarsest approximation last, so ``len(d_j) = N / 2**j``
and ``len(aL) = N / 2**L``.  Every other module indexes coefficients through
:func:`subband_bounds` rather than raw offsets.

The raw array functions (:func:`analysis`, :func:`synthesis`) transform along
the last axis and accept stacked inputs.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT3 = np.sqrt(3.0)

# 4-tap Daubechies scaling filter (two vanishing moments), unit l2 norm:
#   h0 = (1 + sqrt3) / (4 sqrt2) = 0.482962913144534
#   h1 = (3 + sqrt3) / (4 sqrt2) = 0.836516303737808
#   h2 = (3 - sqrt3) / (4 sqrt2) = 0.224143868042013
#   h3 = (1 - sqrt3) / (4 sqrt2) = -0.129409522551260
DB4_LOWPASS = np.array([1 + SQRT3, 3 + SQRT3, 3 - SQRT3, 1 - SQRT3]) / (4 * np.sqrt(2.0))
# quadrature mirror: g[m] = (-1)**m h[3 - m]
DB4_HIGHPASS = DB4_LOWPASS[::-1] * np.array([1.0, -1.0, 1.0, -1.0])

_TAPS = np.arange(4)


class WaveletLayoutError(ValueError):
    """Raised when a length/level combination has no valid subband layout."""


def check_layout(n: int, levels: int) -> None:
    if levels < 1:
        raise WaveletLayoutError(f"decomposition level must be >= 1, got {levels}")
    if n < 2 ** levels:
        raise WaveletLayoutError(f"level {levels} too large for length {n}")
    if n % (2 ** levels):
        raise WaveletLayoutError(f"length {n} is not divisible by 2**{levels}")


@lru_cache(maxsize=None)
def subband_bounds(n: int, levels: int) -> tuple[tuple[int, int], ...]:
    """Half-open index ranges of ``d1, ..., dL, aL`` inside a coefficient vector."""
    check_layout(n, levels)
    bounds = []
    start = 0
    for j in range(1, levels + 1):
        size = n >> j
        bounds.append((start, start + size))
        start += size
    bounds.append((start, n))
    return tuple(bounds)


def detail_range(n: int, levels: int, j: int) -> range:
    """Indices of detail subband ``d_j`` (1-based scale)."""
    if not 1 <= j <= levels:
        raise IndexError(f"detail scale {j} outside 1..{levels}")
    lo, hi = subband_bounds(n, levels)[j - 1]
    return range(lo, hi)


def approx_range(n: int, levels: int) -> range:
    lo, hi = subband_bounds(n, levels)[-1]
    return range(lo, hi)


@lru_cache(maxsize=None)
def _periodic_index(n: int) -> np.ndarray:
    k = np.arange(n // 2)
    return (2 * k[:, None] + _TAPS[None, :]) % n


def _analysis_step(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    idx = _periodic_index(c.shape[-1])
    block = c[..., idx]
    return block @ DB4_LOWPASS, block @ DB4_HIGHPASS


def _synthesis_step(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    n = 2 * a.shape[-1]
    idx = _periodic_index(n)
    out = np.zeros(a.shape[:-1] + (n,))
    # for a fixed tap the target positions are distinct, so += is safe
    for m in range(4):
        out[..., idx[:, m]] += DB4_LOWPASS[m] * a + DB4_HIGHPASS[m] * d
    return out


def analysis(x, levels: int) -> np.ndarray:
    """Forward transform of ``x`` along its last axis; returns the raw layout."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    check_layout(n, levels)
    out = np.empty_like(x)
    approx = x
    for lo, hi in subband_bounds(n, levels)[:-1]:
        approx, detail = _analysis_step(approx)
        out[..., lo:hi] = detail
    out[..., n - approx.shape[-1]:] = approx
    return out


def synthesis(s, levels: int) -> np.ndarray:
    """Inverse of :func:`analysis`."""
    s = np.asarray(s, dtype=float)
    n = s.shape[-1]
    bounds = subband_bounds(n, levels)
    lo, hi = bounds[-1]
    approx = s[..., lo:hi]
    for lo, hi in reversed(bounds[:-1]):
        approx = _synthesis_step(approx, s[..., lo:hi])
    return approx


@dataclass(frozen=True)
class WaveletCoeffs:
    data: np.ndarray
    levels: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 1:
            raise WaveletLayoutError("coefficient vector must be one-dimensional")
        check_layout(data.shape[0], self.levels)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def subband_bounds(self) -> tuple[tuple[int, int], ...]:
        return subband_bounds(self.n, self.levels)

    def detail(self, j: int) -> np.ndarray:
        r = detail_range(self.n, self.levels, j)
        return self.data[r.start:r.stop]

    @property
    def approx(self) -> np.ndarray:
        r = approx_range(self.n, self.levels)
        return self.data[r.start:r.stop]


def dwt(x, levels: int) -> WaveletCoeffs:
    """Orthonormal Daubechies-4 analysis ``s = Psi^T x`` with circular extension."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise WaveletLayoutError("dwt expects a one-dimensional signal")
    return WaveletCoeffs(analysis(x, levels), levels)


def idwt(s: WaveletCoeffs) -> np.ndarray:
    if not isinstance(s, WaveletCoeffs):
        raise TypeError("idwt expects WaveletCoeffs; use synthesis() for raw arrays")
    return synthesis(s.data, s.levels)


def synthesis_column(i: int, n: int, levels: int) -> np.ndarray:
    """Column ``Psi e_i`` of the synthesis basis."""
    if not 0 <= i < n:
        raise IndexError(f"coefficient index {i} outside [0, {n})")
    e = np.zeros(n)
    e[i] = 1.0
    return synthesis(e, levels)


@lru_cache(maxsize=16)
def _basis(n: int, levels: int) -> np.ndarray:
    psi = synthesis(np.eye(n), levels).T
    psi.setflags(write=False)
    return psi


def synthesis_matrix(n: int, levels: int) -> np.ndarray:
    """Dense ``Psi`` (columns are basis functions). Read-only, cached."""
    check_layout(n, levels)
    return _basis(n, levels)
