"""Connected-subtree sparsity model over wavelet detail coefficients.

The model keeps every coarse approximation coefficient and a parent-closed set
of detail coefficients drawn from subbands ``d2 .. dL``; the finest subband
``d1`` is never selected.  Parents live one scale coarser: node ``(j, i)`` has
parent ``(j + 1, i // 2)`` and the ``dL`` nodes are the roots, so a segment of
length ``N`` carries ``N / 2**L`` disjoint binary trees.

:func:`tree_approx` returns the exact best approximation (maximum retained
energy) for a detail budget, computed by a max-plus knapsack over the forest.
:func:`condensing_sort_select` is the classic greedy alternative kept for
comparison.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .wavelet import WaveletCoeffs, approx_range, check_layout, subband_bounds

NEG_INF = -np.inf


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SupportSet:
    """Coefficient support split into the approximation part and the detail part."""

    scaling: np.ndarray
    detail: np.ndarray

    def __post_init__(self):
        for name in ("scaling", "detail"):
            arr = np.unique(np.asarray(getattr(self, name), dtype=np.int64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def indices(self) -> np.ndarray:
        return np.union1d(self.scaling, self.detail)

    def __len__(self):
        return self.scaling.size + self.detail.size

    def __eq__(self, other):
        if not isinstance(other, SupportSet):
            return NotImplemented
        return np.array_equal(self.scaling, other.scaling) and np.array_equal(self.detail, other.detail)

    __hash__ = None

    @classmethod
    def empty(cls) -> "SupportSet":
        return cls(np.empty(0, np.int64), np.empty(0, np.int64))

    @classmethod
    def from_indices(cls, indices, n: int, levels: int) -> "SupportSet":
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= n):
            raise ModelError(f"support index outside [0, {n})")
        a0 = approx_range(n, levels).start
        return cls(idx[idx >= a0], idx[idx < a0])


@dataclass(frozen=True)
class TreeIndex:
    """Parent/child relations for the selectable detail nodes of one layout."""

    n: int
    levels: int
    parent: np.ndarray = field(init=False, repr=False)
    selectable: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        check_layout(self.n, self.levels)
        bounds = subband_bounds(self.n, self.levels)
        parent = np.full(self.n, -1, dtype=np.int64)
        for j in range(2, self.levels):
            lo, hi = bounds[j - 1]
            parent[lo:hi] = bounds[j][0] + np.arange(hi - lo) // 2
        sel = np.arange(bounds[1][0], bounds[self.levels - 1][1]) if self.levels >= 2 else np.empty(0, np.int64)
        parent.setflags(write=False)
        sel.setflags(write=False)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "selectable", sel)

    @property
    def num_selectable(self) -> int:
        return int(self.selectable.size)

    @property
    def roots(self) -> range:
        lo, hi = subband_bounds(self.n, self.levels)[self.levels - 1]
        return range(lo, hi) if self.levels >= 2 else range(0)

    def scale_of(self, idx: int) -> int:
        for j, (lo, hi) in enumerate(subband_bounds(self.n, self.levels), start=1):
            if lo <= idx < hi:
                return j
        raise IndexError(idx)

    def parent_of(self, idx: int) -> int | None:
        self._check_node(idx)
        p = int(self.parent[idx])
        return None if p < 0 else p

    def children_of(self, idx: int) -> tuple[int, ...]:
        self._check_node(idx)
        j = self.scale_of(idx)
        if j == 2:
            return ()
        bounds = subband_bounds(self.n, self.levels)
        i = idx - bounds[j - 1][0]
        lo = bounds[j - 2][0]
        return (lo + 2 * i, lo + 2 * i + 1)

    def is_parent_closed(self, detail) -> bool:
        members = set(int(i) for i in detail)
        for i in members:
            if not 2 <= self.scale_of(i) <= self.levels:
                return False
            p = self.parent[i]
            if p >= 0 and int(p) not in members:
                return False
        return True

    def _check_node(self, idx):
        if not (self.selectable.size and self.selectable[0] <= idx <= self.selectable[-1]):
            raise IndexError(f"{idx} is not a selectable detail node")


@lru_cache(maxsize=32)
def tree_index(n: int, levels: int) -> TreeIndex:
    return TreeIndex(n, levels)


def _maxplus_pairs(left: np.ndarray, right: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise max-plus convolution of equal-width tables.

    Returns the combined table and, per output size, the budget given to
    ``left``; among equal optima the largest such budget wins, which favours
    the lower-indexed sibling.
    """
    rows, w = left.shape
    total = left[:, :, None] + right[:, None, :]
    out = np.empty((rows, 2 * w - 1))
    split = np.empty((rows, 2 * w - 1), dtype=np.int64)
    for k in range(2 * w - 1):
        a = np.arange(max(0, k - w + 1), min(k, w - 1) + 1)
        cand = total[:, a, k - a]
        pick = cand.shape[1] - 1 - np.argmax(cand[:, ::-1], axis=1)
        out[:, k] = cand[np.arange(rows), pick]
        split[:, k] = a[pick]
    return out, split


def _solve(energy: np.ndarray, tree: TreeIndex, k_detail: int) -> tuple[float, np.ndarray]:
    """Exact max-energy parent-closed detail set of size ``k_detail``."""
    n, levels = tree.n, tree.levels
    if k_detail == 0:
        return 0.0, np.empty(0, np.int64)
    bounds = subband_bounds(n, levels)
    splits = {}
    lo, hi = bounds[1]
    table = np.stack([np.zeros(hi - lo), energy[lo:hi]], axis=1)
    for j in range(3, levels + 1):
        combined, split = _maxplus_pairs(table[0::2], table[1::2])
        splits[j] = split
        lo, hi = bounds[j - 1]
        table = np.concatenate([np.zeros((hi - lo, 1)), energy[lo:hi, None] + combined], axis=1)

    # knapsack across the roots, capped at the requested budget
    width = table.shape[1]
    forest = np.full(k_detail + 1, NEG_INF)
    forest[0] = 0.0
    root_take = []
    for r in range(table.shape[0]):
        padded = np.concatenate([np.full(width - 1, NEG_INF), forest])
        # window[k, a] = forest[k - a] for a = 0..width-1
        window = sliding_window_view(padded, width)[:, ::-1]
        cand = window + table[r][None, :]
        pick = width - 1 - np.argmax(cand[:, ::-1], axis=1)
        forest = cand[np.arange(k_detail + 1), pick]
        root_take.append(pick)

    chosen = []
    budget = k_detail
    stack = []
    for r in range(len(root_take) - 1, -1, -1):
        take = int(root_take[r][budget])
        budget -= take
        if take:
            stack.append((levels, r, take))
    while stack:
        j, i, take = stack.pop()
        chosen.append(bounds[j - 1][0] + i)
        rest = take - 1
        if rest and j > 2:
            a = int(splits[j][i, rest])
            if a:
                stack.append((j - 1, 2 * i, a))
            if rest - a:
                stack.append((j - 1, 2 * i + 1, rest - a))
    return float(forest[k_detail]), np.sort(np.array(chosen, dtype=np.int64))


def _validate_budget(tree: TreeIndex, k_detail: int):
    if k_detail < 0:
        raise ModelError("detail budget must be non-negative")
    if k_detail > tree.num_selectable:
        raise ModelError(f"detail budget {k_detail} exceeds {tree.num_selectable} selectable nodes")


def project(coeffs, levels: int, k_detail: int) -> tuple[np.ndarray, SupportSet]:
    """Array-level model projection; see :func:`tree_approx`."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = coeffs.shape[0]
    tree = tree_index(n, levels)
    _validate_budget(tree, k_detail)
    _, detail = _solve(coeffs * coeffs, tree, k_detail)
    scaling = np.arange(approx_range(n, levels).start, n)
    keep = np.concatenate([detail, scaling])
    out = np.zeros(n)
    out[keep] = coeffs[keep]
    return out, SupportSet(scaling, detail)


def tree_approx(s: WaveletCoeffs, k_detail: int) -> tuple[WaveletCoeffs, SupportSet]:
    """Best approximation of ``s`` with all scaling coefficients plus a
    connected detail subtree of exactly ``k_detail`` nodes (``d1`` excluded).

    Minimises ``||s - s'||_2`` over the model, i.e. maximises the retained
    detail energy.  Equal-energy alternatives resolve toward lower indices.
    """
    out, support = project(s.data, s.levels, k_detail)
    return WaveletCoeffs(out, s.levels), support


def tree_approx_signal(x, levels: int, k_detail: int) -> np.ndarray:
    """Signal-domain projection ``idwt(tree_approx(dwt(x), k_detail))``."""
    from .wavelet import analysis, synthesis

    out, _ = project(analysis(np.asarray(x, dtype=float), levels), levels, k_detail)
    return synthesis(out, levels)


def retained_energy(s: WaveletCoeffs | np.ndarray, detail) -> float:
    data = s.data if isinstance(s, WaveletCoeffs) else np.asarray(s, dtype=float)
    d = np.asarray(detail, dtype=np.int64)
    return float(np.sum(data[d] ** 2))


def brute_force_subtree(s: WaveletCoeffs, k_detail: int) -> SupportSet:
    """Exhaustive search over all parent-closed detail sets (tests only)."""
    tree = tree_index(s.n, s.levels)
    if tree.num_selectable > 24:
        raise ModelError(f"{tree.num_selectable} selectable nodes is too many to enumerate")
    _validate_budget(tree, k_detail)
    energy = s.data ** 2
    nodes = [int(i) for i in tree.selectable]
    best, best_set = NEG_INF, ()
    for combo in itertools.combinations(nodes, k_detail):
        if not tree.is_parent_closed(combo):
            continue
        e = sum(energy[i] for i in combo)
        if e > best:
            best, best_set = e, combo
    scaling = np.arange(approx_range(s.n, s.levels).start, s.n)
    return SupportSet(scaling, np.array(best_set, dtype=np.int64))


def condensing_sort_select(s: WaveletCoeffs, k_detail: int) -> SupportSet:
    """Greedy condensing sort-and-select over the detail forest.

    Child supernodes whose mean energy exceeds their parent's are merged
    upward until means are non-increasing along every branch; supernodes are
    then taken in decreasing mean order.  The first supernode that does not
    fit ends the whole-supernode phase and the remaining slots go to the
    largest single nodes on the selection frontier.  Optimal whenever the
    budget lands on a supernode boundary; otherwise a lower bound.
    """
    tree = tree_index(s.n, s.levels)
    _validate_budget(tree, k_detail)
    energy = s.data ** 2
    nodes = [int(i) for i in tree.selectable]
    owner = {i: i for i in nodes}
    members = {i: [i] for i in nodes}
    total = {i: float(energy[i]) for i in nodes}

    def find(i):
        while owner[i] != i:
            owner[i] = owner[owner[i]]
            i = owner[i]
        return i

    def mean(r):
        return total[r] / len(members[r])

    changed = True
    while changed:
        changed = False
        # each supernode is keyed by its top (coarsest) node
        reps = sorted({find(i) for i in nodes}, key=lambda r: (-mean(r), r))
        for r in reps:
            p = int(tree.parent[r])
            if p < 0:
                continue
            pr = find(p)
            if mean(r) > mean(pr):
                owner[r] = pr
                members[pr].extend(members.pop(r))
                total[pr] += total.pop(r)
                changed = True
                break

    chosen: set[int] = set()
    heap = [(-mean(r), r) for r in {find(i) for i in tree.roots}]
    heapq.heapify(heap)
    budget = k_detail
    while heap and budget:
        _, r = heapq.heappop(heap)
        if len(members[r]) > budget:
            heapq.heappush(heap, (-mean(r), r))
            break
        chosen.update(members[r])
        budget -= len(members[r])
        for m in members[r]:
            for c in tree.children_of(m):
                # a child outside this supernode is the top of its own supernode
                if find(c) != r:
                    heapq.heappush(heap, (-mean(c), c))
    frontier = []
    for i in nodes:
        p = int(tree.parent[i])
        if i not in chosen and (p < 0 or p in chosen):
            frontier.append((-float(energy[i]), i))
    heapq.heapify(frontier)
    while budget:
        _, i = heapq.heappop(frontier)
        chosen.add(i)
        budget -= 1
        for c in tree.children_of(i):
            heapq.heappush(frontier, (-float(energy[c]), c))
    scaling = np.arange(approx_range(s.n, s.levels).start, s.n)
    return SupportSet(scaling, np.array(sorted(chosen), dtype=np.int64))
