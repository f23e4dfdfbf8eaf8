"""Lloyd-Max scalar quantizer trained on empirical samples."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class QuantizerCodebook:
    levels: np.ndarray
    degenerate: bool = False
    mse_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size == 0:
            raise ValueError("codebook needs at least one level")
        if levels.size > 1 and not np.all(np.diff(levels) > 0):
            raise ValueError("codebook levels must be strictly increasing")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def thresholds(self) -> np.ndarray:
        return 0.5 * (self.levels[:-1] + self.levels[1:])

    def __len__(self):
        return self.levels.size

    def quantize(self, v) -> np.ndarray:
        """Nearest-level index; values beyond the outer levels saturate."""
        idx = np.searchsorted(self.thresholds, np.asarray(v, dtype=float), side="left")
        return idx.astype(np.uint8) if self.levels.size <= 256 else idx

    def dequantize(self, symbols) -> np.ndarray:
        return self.levels[np.asarray(symbols, dtype=np.int64)]

    def padded(self, size: int = 256) -> "QuantizerCodebook":
        """Extend a short (degenerate) codebook to ``size`` levels above its top."""
        if self.levels.size >= size:
            return self
        gap = float(np.mean(np.diff(self.levels))) if self.levels.size > 1 else 1.0
        extra = self.levels[-1] + gap * np.arange(1, size - self.levels.size + 1)
        return QuantizerCodebook(np.concatenate([self.levels, extra]), self.degenerate, self.mse_history)


def _centroids(sorted_x, levels):
    # cells are (t_{k-1}, t_k], matching the quantizer's tie rule; empty cells keep their level
    thresholds = 0.5 * (levels[:-1] + levels[1:])
    starts = np.concatenate([[0], np.searchsorted(sorted_x, thresholds, side="right")])
    counts = np.diff(np.append(starts, sorted_x.size))
    filled = counts > 0
    out = levels.copy()
    out[filled] = np.add.reduceat(sorted_x, starts[filled]) / counts[filled]
    return out


def _mse(x, levels):
    idx = np.searchsorted(0.5 * (levels[:-1] + levels[1:]), x, side="left")
    return float(np.mean((x - levels[idx]) ** 2))


def _companded_start(sorted_x, num_levels, bins=4096):
    # asymptotically optimal level density is proportional to p(x)**(1/3)
    hist, edges = np.histogram(sorted_x, bins=bins)
    mass = np.concatenate([[0.0], np.cumsum(hist ** (1.0 / 3.0))])
    mass /= mass[-1]
    return np.interp((np.arange(num_levels) + 0.5) / num_levels, mass, edges)


def lloyd_max_train(samples, num_levels: int = 256, max_iters: int = 300,
                    tol: float = 1e-10, init: str = "companded") -> QuantizerCodebook:
    """Minimum-MSE codebook by alternating nearest-neighbour and centroid updates.

    ``init="percentile"`` starts the levels at evenly spaced sample
    percentiles; ``"companded"`` spaces them by the cube root of a histogram
    density estimate, which avoids the poor local optima the percentile start
    settles into on peaked data.  Iteration stops once the relative MSE
    improvement drops below ``tol`` or after ``max_iters``.  With fewer
    distinct samples than levels the distinct values themselves form the
    (flagged, shorter) codebook.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("cannot train a quantizer on no samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("training samples must be finite")
    uniq = np.unique(x)
    if uniq.size <= num_levels:
        return QuantizerCodebook(uniq, degenerate=uniq.size < num_levels, mse_history=(0.0,))

    if init == "percentile":
        levels = np.quantile(x, (np.arange(num_levels) + 0.5) / num_levels)
    elif init == "companded":
        levels = _companded_start(x, num_levels)
    else:
        raise ValueError(f"unknown initialisation {init!r}")
    if not np.all(np.diff(levels) > 0):
        levels = uniq[np.round(np.linspace(0, uniq.size - 1, num_levels)).astype(np.int64)]

    # work around the sample mean to limit cancellation in the centroid sums
    centre = float(np.mean(x))
    xc = x - centre
    levels = levels - centre
    history = []
    for _ in range(max_iters):
        history.append(_mse(xc, levels))
        levels = _centroids(xc, levels)
        if len(history) > 1 and history[-2] - history[-1] <= tol * max(history[-2], np.finfo(float).tiny):
            break
    history.append(_mse(xc, levels))
    return QuantizerCodebook(levels + centre, mse_history=tuple(history))


def sqnr_db(samples, codebook: QuantizerCodebook) -> float:
    x = np.asarray(samples, dtype=float)
    err = x - codebook.dequantize(codebook.quantize(x))
    return float(10 * np.log10(np.sum(x * x) / np.sum(err * err)))
