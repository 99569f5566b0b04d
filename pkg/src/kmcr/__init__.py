"""Choose the number of k-means clusters by description-length compression ratios."""

from .criteria import (
    CriterionInputs,
    QuantizationConfig,
    dl1,
    dl2,
    kmcr1,
    kmcr1_stage2,
    kmcr2,
    kmcr2_stage2,
)
from .engine import ClusteringModel, EngineConfig, InitStrategy, assign, init_centroids, lloyd, residual_matrix, update_centroids
from .estimators import DescriptionLengthKMeans, KMCRSelector, ZScoreGram
from .matrix import DataMatrix, frob_sq, gram, zscore_columns
from .selection import CriterionPoint, Stage2Options, SweepReport, evaluate_k, refine, stage2_check, sweep
from .synth import SyntheticDataset, SyntheticSpec, generate, sample_sphere_centroids

__version__ = "0.1.0"

__all__ = [
    "ClusteringModel",
    "CriterionInputs",
    "CriterionPoint",
    "DataMatrix",
    "DescriptionLengthKMeans",
    "EngineConfig",
    "InitStrategy",
    "KMCRSelector",
    "QuantizationConfig",
    "Stage2Options",
    "SweepReport",
    "SyntheticDataset",
    "SyntheticSpec",
    "ZScoreGram",
    "assign",
    "dl1",
    "dl2",
    "evaluate_k",
    "frob_sq",
    "generate",
    "gram",
    "init_centroids",
    "kmcr1",
    "kmcr1_stage2",
    "kmcr2",
    "kmcr2_stage2",
    "lloyd",
    "refine",
    "residual_matrix",
    "sample_sphere_centroids",
    "stage2_check",
    "sweep",
    "update_centroids",
    "zscore_columns",
]
