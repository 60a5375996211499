"""Fusion strategies over per-stream outputs.

Late fusion multiplies class-probability vectors (no parameters). The mid
strategies combine feature vectors: plain concatenation, or concatenation
projected back to the feature dim by a dense layer ("mid-dense", whose
fused feature can serve as a hallucination target).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ShapeError
from ..tensor_core import ExprGraph, evaluate
from ..util import params_fingerprint
from .graphs import build_fusion_graph

STRATEGIES = ("late", "mid-concat", "mid-dense")


@dataclass
class FusionModel:
    strategy: str
    num_streams: int
    feature_dim: int
    num_classes: int
    graph: ExprGraph | None = None  # late fusion carries no parameters

    @property
    def fused_dim(self) -> int:
        if self.strategy == "mid-dense":
            return self.feature_dim
        return self.num_streams * self.feature_dim

    def fingerprint(self) -> bytes:
        return params_fingerprint(self.graph.parameters if self.graph else {})

    def with_params(self, params) -> "FusionModel":
        return replace(self, graph=self.graph.with_parameters(params))

    def fuse_batch(self, features: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """(fused features, probs) for per-stream (N, D) feature batches."""
        if self.graph is None:
            raise ShapeError("late fusion has no feature-level path; fuse scores")
        bindings = {f"feature_{i}": f for i, f in enumerate(features)}
        out = evaluate(self.graph, bindings, outputs=["fused", "probs"])
        return out["fused"].data, out["probs"].data

    def head_probs(self, fused: np.ndarray) -> np.ndarray:
        """Score externally produced fused features through the frozen head."""
        fused = np.atleast_2d(np.asarray(fused, np.float32))
        out = evaluate(self.graph, {"fused_in": fused}, outputs=["probs_from_fused"])
        return out["probs_from_fused"].data


def make_fusion_model(strategy: str, num_streams: int, feature_dim: int,
                      num_classes: int, rng) -> FusionModel:
    if strategy not in STRATEGIES:
        raise ShapeError(f"unknown fusion strategy '{strategy}'")
    graph = None
    if strategy != "late":
        graph = build_fusion_graph(strategy, num_streams, feature_dim, num_classes, rng)
    return FusionModel(strategy, num_streams, feature_dim, num_classes, graph)


def fuse_late(scores: list) -> np.ndarray:
    """Product of per-stream probability vectors, renormalized to sum 1.

    Renormalization is for reporting; the argmax is unchanged by it.
    """
    if not scores:
        raise ShapeError("late fusion needs at least one score vector")
    arrs = [np.asarray(s, np.float32) for s in scores]
    first = arrs[0].shape
    for a in arrs[1:]:
        if a.shape != first:
            raise ShapeError(f"score shapes differ: {a.shape} vs {first}")
    prod = arrs[0].astype(np.float64)
    for a in arrs[1:]:
        prod = prod * a
    total = prod.sum(axis=-1, keepdims=True)
    # all-zero products (vanishing confidence) renormalize to uniform
    uniform = np.full_like(prod, 1.0 / prod.shape[-1])
    out = np.where(total > 0, prod / np.where(total > 0, total, 1.0), uniform)
    return out.astype(np.float32)


def fuse_mid_concat(features: list, fusion: FusionModel) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated features and head probabilities."""
    if fusion.strategy != "mid-concat":
        raise ShapeError(f"fusion model is '{fusion.strategy}', expected mid-concat")
    return _fuse_feature_level(features, fusion)


def fuse_mid_dense(features: list, fusion: FusionModel) -> tuple[np.ndarray, np.ndarray]:
    """Dense-projected fused features (width D) and head probabilities."""
    if fusion.strategy != "mid-dense":
        raise ShapeError(f"fusion model is '{fusion.strategy}', expected mid-dense")
    return _fuse_feature_level(features, fusion)


def _fuse_feature_level(features, fusion):
    arrs = []
    squeeze = False
    for f in features:
        a = np.asarray(f, np.float32)
        if a.ndim == 1:
            a = a[None]
            squeeze = True
        if a.shape[-1] != fusion.feature_dim:
            raise ShapeError(
                f"stream feature dim {a.shape[-1]} != fusion dim {fusion.feature_dim}"
            )
        arrs.append(a)
    if len(arrs) != fusion.num_streams:
        raise ShapeError(f"expected {fusion.num_streams} streams, got {len(arrs)}")
    fused, probs = fusion.fuse_batch(arrs)
    if squeeze:
        return fused[0], probs[0]
    return fused, probs
