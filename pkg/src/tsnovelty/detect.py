"""Online novelty scoring: encode a stream, block the innovations, and apply
the smooth goodness-of-fit test to each block."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .autoencoder import WiaeModel
from .errors import ContractViolationError, DegenerateDataError
from .stats import neyman_statistic

__all__ = ["DetectConfig", "NoveltyScore", "score_stream", "decide",
           "scores_to_jsonl", "scores_from_jsonl"]


@dataclass
class DetectConfig:
    block_len: int = 500          # innovations per test block
    stride: int | None = None     # default: disjoint blocks (stride = block_len)
    p_threshold: float = 0.05
    neyman_order: int = 4

    def __post_init__(self):
        if self.block_len < 20:
            raise ContractViolationError("block_len must be >= 20")
        if self.stride is None:
            self.stride = self.block_len
        if self.stride < 1:
            raise ContractViolationError("stride must be >= 1")
        if not 0.0 < self.p_threshold < 1.0:
            raise ContractViolationError("p_threshold must be in (0, 1)")


@dataclass
class NoveltyScore:
    block_index: int
    start: int                    # series index of the first sample in the block
    statistic: float
    p_value: float
    decision: str                 # "normal" | "novel"


def score_stream(model: WiaeModel, series, cfg: DetectConfig) -> list[NoveltyScore]:
    """One score per block of consecutive innovations, advancing by stride.

    Each score depends only on samples up to its block end, so appending
    data never changes previously emitted scores.
    """
    x = np.asarray(series, dtype=np.float64)
    m = model.window.m
    n = cfg.block_len
    if x.size < m + n - 1:
        raise DegenerateDataError(
            f"need at least {m + n - 1} samples for one block, got {x.size}")
    nu = model.encode(x)                       # innovations, one per t >= m-1
    u = (nu + 1.0) / 2.0                       # map (-1,1) onto (0,1)
    scores = []
    block = 0
    for start in range(0, u.size - n + 1, cfg.stride):
        gof = neyman_statistic(u[start:start + n], order=cfg.neyman_order)
        p = gof.p_value
        scores.append(NoveltyScore(
            block_index=block,
            start=start + m - 1,               # innovation i sits at series index i+m-1
            statistic=gof.statistic,
            p_value=p,
            decision="novel" if p < cfg.p_threshold else "normal",
        ))
        block += 1
    return scores


def decide(scores, p_threshold: float) -> list[NoveltyScore]:
    """Relabel existing scores under a new threshold (no re-encoding)."""
    if not 0.0 < p_threshold <= 1.0:
        raise ContractViolationError("p_threshold must be in (0, 1]")
    return [NoveltyScore(s.block_index, s.start, s.statistic, s.p_value,
                         "novel" if s.p_value < p_threshold else "normal")
            for s in scores]


def scores_to_jsonl(scores, path):
    with open(path, "w") as fh:
        for s in scores:
            fh.write(json.dumps({
                "block_index": s.block_index,
                "start": s.start,
                "statistic": s.statistic,
                "p_value": s.p_value,
                "decision": s.decision,
            }, sort_keys=True))
            fh.write("\n")


def scores_from_jsonl(path) -> list[NoveltyScore]:
    scores = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            scores.append(NoveltyScore(d["block_index"], d["start"],
                                       d["statistic"], d["p_value"], d["decision"]))
    return scores
