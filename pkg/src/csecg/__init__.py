"""Compressed-sensing ECG compression with wavelet tree-sparsity models."""

__version__ = "0.1.0"

from .metrics import prd, prdn, quality_score, rsnr
from .recovery import ALGORITHMS, HaltingRule, RecoveryResult, cosamp, iht, mmb_cosamp, mmb_iht, reconstruct
from .sensing import MatrixKind, SensingMatrix, ThetaOperator, generate
from .treemodel import SupportSet, tree_approx
from .wavelet import WaveletCoeffs, dwt, idwt

__all__ = [
    "ALGORITHMS", "HaltingRule", "MatrixKind", "RecoveryResult", "SensingMatrix", "SupportSet",
    "ThetaOperator", "WaveletCoeffs", "cosamp", "dwt", "generate", "idwt", "iht", "mmb_cosamp",
    "mmb_iht", "prd", "prdn", "quality_score", "reconstruct", "rsnr", "tree_approx",
]
