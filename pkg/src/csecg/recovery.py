"""Greedy reconstruction from compressive measurements.

All algorithms work on wavelet coefficient vectors through a
:class:`~csecg.sensing.ThetaOperator`.  The model-based variants keep every
scaling coefficient, restrict details to a connected subtree and start from a
least-squares fit on the support of the previous segment.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .sensing import ThetaOperator
from .treemodel import SupportSet, project, tree_index
from .wavelet import WaveletCoeffs, approx_range, synthesis

HALT_RESIDUAL = "residual"
HALT_MAX_ITERS = "max_iters"
HALT_DIRECT = "direct"


class RecoveryError(ValueError):
    pass


@dataclass(frozen=True)
class HaltingRule:
    max_iters: int = 70
    residual_tol: float = 1e-3  # stop once ||r|| <= residual_tol * ||y||

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    s_hat: WaveletCoeffs
    support: SupportSet
    iterations: int
    final_residual_norm: float
    halted_by: str
    residual_history: list[float] = field(default_factory=list)
    rank_deficient: bool = False
    support_shrunk: bool = False


class LeastSquaresFit(NamedTuple):
    coeffs: np.ndarray
    rank: int
    rank_deficient: bool


def lsq_on_support(theta: ThetaOperator, support, y) -> LeastSquaresFit:
    """Minimum-norm least squares restricted to the columns in ``support``.

    Solved through an SVD of the ``M x |T|`` submatrix; entries off the
    support are zero.
    """
    y = np.asarray(y, dtype=float)
    idx = support.indices if isinstance(support, SupportSet) else np.unique(np.asarray(support, dtype=np.int64))
    m, n = theta.shape
    out = np.zeros(n)
    if idx.size == 0:
        return LeastSquaresFit(out, 0, False)
    if idx.size > m:
        raise RecoveryError(f"support of size {idx.size} exceeds {m} measurements; shrink the support")
    sub = theta.columns(idx)
    sol, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
    out[idx] = sol
    return LeastSquaresFit(out, int(rank), int(rank) < idx.size)


def hard_threshold(s: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest magnitudes, ties to the lowest index."""
    order = np.argsort(-np.abs(s), kind="stable")
    return np.sort(order[:k])


def _finish(theta, s, support, iterations, history, halted_by, **flags) -> RecoveryResult:
    levels = theta.levels
    return RecoveryResult(
        x_hat=synthesis(s, levels),
        s_hat=WaveletCoeffs(s, levels),
        support=support,
        iterations=iterations,
        final_residual_norm=history[-1] if history else 0.0,
        halted_by=halted_by,
        residual_history=history,
        **flags,
    )


def _stop(rnorm: float, ynorm: float, j: int, halt: HaltingRule) -> str | None:
    if rnorm <= halt.residual_tol * ynorm:
        return HALT_RESIDUAL
    if j >= halt.max_iters:
        return HALT_MAX_ITERS
    return None


def _plain_support(theta: ThetaOperator, idx) -> SupportSet:
    m, n = theta.shape
    return SupportSet.from_indices(idx, n, theta.levels)


def _model_budget(theta: ThetaOperator, k_total: int) -> int:
    n = theta.shape[1]
    n_scaling = len(approx_range(n, theta.levels))
    if k_total < n_scaling:
        raise RecoveryError(f"K_total={k_total} is below the {n_scaling} scaling coefficients")
    k_detail = k_total - n_scaling
    available = tree_index(n, theta.levels).num_selectable
    if k_detail > available:
        raise RecoveryError(f"K_total={k_total} needs {k_detail} detail nodes, only {available} selectable")
    return k_detail


def _check_y(theta, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (theta.shape[0],):
        raise RecoveryError(f"measurement vector must have length {theta.shape[0]}")
    return y


# normalized-step safeguards: sufficient-decrease margin and shrink factor
_STEP_C = 0.01
_STEP_KAPPA = 2.0


def _gradient_step(theta, s, grad, support, project_fn, step):
    """One thresholded gradient move ``P(s + mu * grad)``.

    ``step="unit"`` is the textbook recursion with ``mu = 1``.  ``"normalized"``
    picks ``mu`` as the exact line-search step on the current support and
    shrinks it whenever the support moves and the move would not decrease the
    residual, which keeps the iteration stable when ``||Theta||_2 > 1``.
    """
    if step == "unit":
        return project_fn(s + grad)
    if step != "normalized":
        raise RecoveryError(f"unknown step rule {step!r}")
    if support.size == 0:
        support = project_fn(grad)[1]
    g = np.zeros_like(grad)
    g[support] = grad[support]
    denom = float(np.sum(theta.matvec(g) ** 2))
    mu = float(np.sum(g * g)) / denom if denom > 0 else 1.0
    for _ in range(60):
        new, new_support = project_fn(s + mu * grad)
        if np.array_equal(new_support, support):
            break
        delta = new - s
        moved = float(np.sum(theta.matvec(delta) ** 2))
        limit = (1 - _STEP_C) * float(np.sum(delta * delta)) / moved if moved > 0 else np.inf
        if mu <= limit:
            break
        mu /= _STEP_KAPPA * (1 - _STEP_C)
    return new, new_support


def iht(y, theta: ThetaOperator, k: int, halt: HaltingRule = HaltingRule(),
        step: str = "normalized") -> RecoveryResult:
    """Iterative hard thresholding started from zero."""
    y = _check_y(theta, y)
    n = theta.shape[1]
    if not 0 < k <= n:
        raise RecoveryError(f"sparsity {k} outside (0, {n}]")

    def threshold(b):
        keep = hard_threshold(b, k)
        out = np.zeros(n)
        out[keep] = b[keep]
        return out, keep

    ynorm = float(np.linalg.norm(y))
    s = np.zeros(n)
    keep = np.empty(0, np.int64)
    r = y
    history = []
    j = 0
    while True:
        j += 1
        s, keep = _gradient_step(theta, s, theta.rmatvec(r), keep, threshold, step)
        r = y - theta.matvec(s)
        history.append(float(np.linalg.norm(r)))
        reason = _stop(history[-1], ynorm, j, halt)
        if reason:
            return _finish(theta, s, _plain_support(theta, keep), j, history, reason)


def cosamp(y, theta: ThetaOperator, k: int, halt: HaltingRule = HaltingRule()) -> RecoveryResult:
    """CoSaMP: merge the ``2k`` largest proxy entries with the current support,
    fit by least squares and prune to ``k``.  With fewer than ``3k``
    measurements the merged set is capped at ``M`` columns."""
    y = _check_y(theta, y)
    m, n = theta.shape
    if not 0 < k <= m:
        raise RecoveryError(f"sparsity {k} outside (0, M={m}]")
    if 3 * k > m:
        warnings.warn(f"CoSaMP with K={k} and M={m}: fewer than 3K measurements", stacklevel=2)
    ynorm = float(np.linalg.norm(y))
    s = np.zeros(n)
    r = y
    keep = np.empty(0, np.int64)
    history = []
    rank_deficient = shrunk = False
    j = 0
    while True:
        j += 1
        proxy = theta.rmatvec(r)
        candidates = np.union1d(hard_threshold(proxy, min(2 * k, n)), keep)
        if candidates.size > m:
            # keep the current support and as many new proxy picks as the measurements allow
            proxy[keep] = 0.0
            candidates = np.union1d(hard_threshold(proxy, m - keep.size), keep)
            shrunk = True
        fit = lsq_on_support(theta, candidates, y)
        rank_deficient |= fit.rank_deficient
        keep = hard_threshold(fit.coeffs, k)
        s = np.zeros(n)
        s[keep] = fit.coeffs[keep]
        r = y - theta.matvec(s)
        history.append(float(np.linalg.norm(r)))
        reason = _stop(history[-1], ynorm, j, halt)
        if reason:
            return _finish(theta, s, _plain_support(theta, keep), j, history, reason,
                           rank_deficient=rank_deficient, support_shrunk=shrunk)


def _warm_start(theta, prior: SupportSet | None, y):
    n = theta.shape[1]
    if prior is None or len(prior) == 0:
        return np.zeros(n), np.empty(0, np.int64), False
    fit = lsq_on_support(theta, prior, y)
    return fit.coeffs, prior.indices, fit.rank_deficient


def mmb_iht(y, theta: ThetaOperator, k_total: int, prior: SupportSet | None = None,
            halt: HaltingRule = HaltingRule(), step: str = "normalized") -> RecoveryResult:
    """Model-based IHT with the previous segment's support as warm start.

    The gradient step ``b = x + Phi^T r`` followed by the signal-domain tree
    projection is carried out on coefficients: with an orthonormal basis,
    ``Psi^T b = s + Theta^T r`` and the projection commutes with the basis.
    """
    y = _check_y(theta, y)
    k_detail = _model_budget(theta, k_total)

    def model(b):
        out, sup = project(b, theta.levels, k_detail)
        return out, sup.indices

    ynorm = float(np.linalg.norm(y))
    s, current, rank_deficient = _warm_start(theta, prior, y)
    r = y - theta.matvec(s)
    history = []
    j = 0
    while True:
        j += 1
        s, current = _gradient_step(theta, s, theta.rmatvec(r), current, model, step)
        r = y - theta.matvec(s)
        history.append(float(np.linalg.norm(r)))
        reason = _stop(history[-1], ynorm, j, halt)
        if reason:
            support = SupportSet.from_indices(current, theta.shape[1], theta.levels)
            return _finish(theta, s, support, j, history, reason, rank_deficient=rank_deficient)


def mmb_cosamp(y, theta: ThetaOperator, k_total: int, prior: SupportSet | None = None,
               halt: HaltingRule = HaltingRule()) -> RecoveryResult:
    y = _check_y(theta, y)
    m, n = theta.shape
    k_detail = _model_budget(theta, k_total)
    wide = min(2 * k_detail, tree_index(n, theta.levels).num_selectable)
    ynorm = float(np.linalg.norm(y))
    s, current, rank_deficient = _warm_start(theta, prior, y)
    r = y - theta.matvec(s)
    history = []
    shrunk = False
    support = prior if prior is not None else SupportSet.empty()
    j = 0
    while True:
        j += 1
        proxy = theta.rmatvec(r)
        budget = wide
        while True:
            _, omega = project(proxy, theta.levels, budget)
            merged = np.union1d(omega.indices, current)
            if merged.size <= m or budget == 0:
                break
            budget -= 1
            shrunk = True
        if merged.size > m:
            raise RecoveryError(f"merged support {merged.size} exceeds {m} measurements even with no new details")
        fit = lsq_on_support(theta, merged, y)
        rank_deficient |= fit.rank_deficient
        s, support = project(fit.coeffs, theta.levels, k_detail)
        current = support.indices
        r = y - theta.matvec(s)
        history.append(float(np.linalg.norm(r)))
        reason = _stop(history[-1], ynorm, j, halt)
        if reason:
            return _finish(theta, s, support, j, history, reason,
                           rank_deficient=rank_deficient, support_shrunk=shrunk)


def oracle_estimate(y, theta: ThetaOperator, support: SupportSet) -> RecoveryResult:
    """Least-squares projection onto the columns of a known support."""
    y = _check_y(theta, y)
    fit = lsq_on_support(theta, support, y)
    r = y - theta.matvec(fit.coeffs)
    return _finish(theta, fit.coeffs, support, 0, [float(np.linalg.norm(r))], HALT_DIRECT,
                   rank_deficient=fit.rank_deficient)


def top_k_support(s, k: int, levels: int) -> SupportSet:
    """Support of the ``k`` largest-magnitude coefficients (oracle support)."""
    s = np.asarray(s, dtype=float)
    return SupportSet.from_indices(hard_threshold(s, k), s.shape[0], levels)


ALGORITHMS = ("mmb-iht", "mmb-cosamp", "iht", "cosamp", "oracle")


def reconstruct(algorithm: str, y, theta: ThetaOperator, k_total: int,
                prior: SupportSet | None = None, halt: HaltingRule = HaltingRule(),
                oracle_support: SupportSet | None = None, step: str = "normalized") -> RecoveryResult:
    """Dispatch by algorithm tag; ``prior`` is ignored by the plain baselines
    and ``step`` only concerns the IHT family."""
    if algorithm == "mmb-iht":
        return mmb_iht(y, theta, k_total, prior, halt, step)
    if algorithm == "mmb-cosamp":
        return mmb_cosamp(y, theta, k_total, prior, halt)
    if algorithm == "iht":
        return iht(y, theta, k_total, halt, step)
    if algorithm == "cosamp":
        return cosamp(y, theta, k_total, halt)
    if algorithm == "oracle":
        if oracle_support is None:
            raise RecoveryError("oracle reconstruction needs the true support")
        return oracle_estimate(y, theta, oracle_support)
    raise RecoveryError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
