"""Causal innovations representation learning and online novelty detection
for stationary time series.

The pipeline: fit an adversarial auto-encoder that maps a series to an
i.i.d.-uniform innovations sequence (`autoencoder`), then score incoming
blocks of innovations with a smooth goodness-of-fit test (`detect`), and
evaluate with Wasserstein and ROC metrics (`evaluate`).
"""

from .autoencoder import (
    Normalization,
    TrainConfig,
    WiaeModel,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .detect import DetectConfig, NoveltyScore, decide, score_stream
from .evaluate import RocReport, WassersteinEstimate, auroc_bruteforce, roc_points, wasserstein_critic
from .stats import GofResult, RunsResult, neyman_statistic, runs_up_down_test

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "WiaeModel",
    "Normalization",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "DetectConfig",
    "NoveltyScore",
    "score_stream",
    "decide",
    "GofResult",
    "RunsResult",
    "neyman_statistic",
    "runs_up_down_test",
    "RocReport",
    "WassersteinEstimate",
    "roc_points",
    "auroc_bruteforce",
    "wasserstein_critic",
    "__version__",
]
