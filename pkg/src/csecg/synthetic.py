"""Synthetic test signals: ECG-like streams and exact model-sparse segments."""

import numpy as np

from .treemodel import SupportSet, tree_index
from .wavelet import approx_range, synthesis

# (amplitude mV, width s, offset from R peak s) for P, Q, R, S, T
_WAVES = (
    (0.15, 0.025, -0.20),
    (-0.12, 0.010, -0.035),
    (1.10, 0.011, 0.0),
    (-0.28, 0.012, 0.035),
    (0.32, 0.045, 0.28),
)


def ecg_like(num_samples: int, fs: float = 250.0, seed: int = 0, heart_rate: float = 72.0,
             noise: float = 0.002, wander: float = 0.06) -> np.ndarray:
    """Gaussian-bump PQRST beats with jittered RR intervals and baseline wander."""
    rng = np.random.default_rng(seed)
    t = np.arange(num_samples) / fs
    x = np.zeros(num_samples)
    rr = 60.0 / heart_rate
    peak = rng.uniform(0.2, 0.2 + rr)
    end = num_samples / fs + 1.0
    while peak < end:
        gain = rng.normal(1.0, 0.05)
        for amp, width, offset in _WAVES:
            centre = peak + offset * rng.normal(1.0, 0.03)
            w = width * rng.normal(1.0, 0.05)
            x += gain * amp * np.exp(-0.5 * ((t - centre) / w) ** 2)
        peak += rr * rng.normal(1.0, 0.04)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    x += wander * np.sin(2 * np.pi * 0.25 * t + phase[0]) + 0.5 * wander * np.sin(2 * np.pi * 0.07 * t + phase[1])
    if noise:
        x += rng.normal(0.0, noise, num_samples)
    return x


def random_subtree(n: int, levels: int, k_detail: int, rng) -> np.ndarray:
    """Uniformly grown parent-closed detail set of ``k_detail`` nodes."""
    tree = tree_index(n, levels)
    if k_detail > tree.num_selectable:
        raise ValueError("detail budget exceeds selectable nodes")
    frontier = list(tree.roots)
    chosen = []
    for _ in range(k_detail):
        node = frontier.pop(int(rng.integers(len(frontier))))
        chosen.append(node)
        frontier.extend(tree.children_of(node))
    return np.sort(np.array(chosen, dtype=np.int64))


def model_sparse(n: int, levels: int, k_total: int, rng) -> tuple[np.ndarray, np.ndarray, SupportSet]:
    """Draw ``(x, s, support)`` with ``s`` exactly in the tree model.

    All scaling coefficients are active plus a random connected subtree of
    ``k_total - N/2**L`` details; active values are standard normal.
    """
    scaling = np.arange(approx_range(n, levels).start, n)
    detail = random_subtree(n, levels, k_total - scaling.size, rng)
    s = np.zeros(n)
    s[scaling] = rng.standard_normal(scaling.size)
    s[detail] = rng.standard_normal(detail.size)
    return synthesis(s, levels), s, SupportSet(scaling, detail)
