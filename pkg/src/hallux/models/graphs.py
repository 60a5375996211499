"""Graph builders for stream backbones, fusion networks, and hallucination
networks.

The shared backbone is blocks of (3x3 conv, relu, 2x2 max-pool) with
configurable widths, followed by global average pooling; the feature dim
equals the last width. Hallucination networks reuse the backbone
architecture unchanged (fresh parameters, no classifier head), so a
hallucination net composed with a frozen classifier head executes exactly
the same op sequence as a stream classifier.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GraphError
from ..tensor_core import ExprGraph


@dataclass(frozen=True)
class ArchSpec:
    input_hw: tuple[int, int]
    in_channels: int
    widths: tuple[int, ...] = (16, 32, 64, 128)

    @property
    def feature_dim(self) -> int:
        return self.widths[-1]

    def validate(self):
        shrink = 2 ** len(self.widths)
        if min(self.input_hw) < shrink:
            raise GraphError(
                f"input {self.input_hw} too small for {len(self.widths)} "
                f"pooling stages (needs >= {shrink})"
            )


def he_conv(rng, kh, kw, cin, cout) -> np.ndarray:
    std = np.sqrt(2.0 / (kh * kw * cin))
    return rng.normal(0.0, std, (kh, kw, cin, cout)).astype(np.float32)


def he_dense(rng, din, dout) -> np.ndarray:
    std = np.sqrt(2.0 / din)
    return rng.normal(0.0, std, (din, dout)).astype(np.float32)


def glorot_dense(rng, din, dout) -> np.ndarray:
    limit = np.sqrt(6.0 / (din + dout))
    return rng.uniform(-limit, limit, (din, dout)).astype(np.float32)


def _add_backbone(g: ExprGraph, x, arch: ArchSpec, rng) -> int:
    ch = arch.in_channels
    h = x
    for i, width in enumerate(arch.widths):
        k = g.parameter(f"conv{i + 1}_kernel", he_conv(rng, 3, 3, ch, width))
        b = g.parameter(f"conv{i + 1}_bias", np.zeros(width, np.float32))
        h = g.max_pool(g.relu(g.conv2d(h, k, b, stride=1, padding="same")), size=2)
        ch = width
    return h


def build_stream_graph(arch: ArchSpec, num_classes: int, rng) -> ExprGraph:
    """input -> feature -> probs, plus a head-only path and a CE loss head.

    Named nodes: feature, logits, probs, probs_from_feature, loss.
    The head-only path shares the head parameters, so frozen heads can score
    externally produced (e.g. hallucinated) feature vectors.
    """
    arch.validate()
    g = ExprGraph()
    x = g.placeholder("input", (None, arch.input_hw[0], arch.input_hw[1], arch.in_channels))
    trunk = _add_backbone(g, x, arch, rng)
    feature = g.global_avg_pool(trunk, name="feature")
    d = arch.feature_dim
    hw = g.parameter("head_weight", glorot_dense(rng, d, num_classes))
    hb = g.parameter("head_bias", np.zeros(num_classes, np.float32))
    logits = g.dense(feature, hw, hb, name="logits")
    g.softmax(logits, name="probs")
    fin = g.placeholder("feature_in", (None, d))
    g.softmax(g.dense(fin, hw, hb), name="probs_from_feature")
    labels = g.placeholder("labels", (None, num_classes))
    probs = g.resolve("probs")
    g.mean(g.cross_entropy(probs, labels), name="loss")
    return g


def build_hallucination_graph(arch: ArchSpec, rng, margin: float = 0.2) -> ExprGraph:
    """input -> hallucinated feature, with triplet and regression loss heads.

    Named nodes: halluc, loss_regression, loss_triplet. The trunk is the
    stream backbone architecture with fresh parameters and no classifier.
    """
    arch.validate()
    if margin < 0:
        raise GraphError(f"triplet margin must be >= 0, got {margin}")
    g = ExprGraph()
    x = g.placeholder("input", (None, arch.input_hw[0], arch.input_hw[1], arch.in_channels))
    trunk = _add_backbone(g, x, arch, rng)
    halluc = g.global_avg_pool(trunk, name="halluc")
    d = arch.feature_dim
    target = g.placeholder("target", (None, d))
    g.mean(g.sq_dist(halluc, target), name="loss_regression")
    pos = g.placeholder("positive", (None, d))
    neg = g.placeholder("negative", (None, d))
    gap = g.sub(g.sq_dist(halluc, pos), g.sq_dist(halluc, neg))
    hinge = g.relu(g.add_scalar(gap, margin))
    g.mean(hinge, name="loss_triplet")
    return g


def build_fusion_graph(strategy: str, num_streams: int, feature_dim: int,
                       num_classes: int, rng) -> ExprGraph:
    """Feature-level fusion: concat for mid-concat, concat -> relu(dense)
    for mid-dense. Named nodes: fused, probs, probs_from_fused, loss."""
    if strategy not in ("mid-concat", "mid-dense"):
        raise GraphError(f"no fusion graph for strategy '{strategy}'")
    if num_streams < 1:
        raise GraphError("fusion needs at least one stream")
    g = ExprGraph()
    feats = [g.placeholder(f"feature_{i}", (None, feature_dim))
             for i in range(num_streams)]
    cat = g.concat(feats) if num_streams > 1 else g.identity(feats[0])
    if strategy == "mid-dense":
        fw = g.parameter("fusion_weight",
                         he_dense(rng, num_streams * feature_dim, feature_dim))
        fb = g.parameter("fusion_bias", np.zeros(feature_dim, np.float32))
        fused = g.relu(g.dense(cat, fw, fb), name="fused")
        head_in = feature_dim
    else:
        fused = g.identity(cat, name="fused")
        head_in = num_streams * feature_dim
    hw = g.parameter("head_weight", glorot_dense(rng, head_in, num_classes))
    hb = g.parameter("head_bias", np.zeros(num_classes, np.float32))
    g.softmax(g.dense(fused, hw, hb), name="probs")
    fin = g.placeholder("fused_in", (None, head_in))
    g.softmax(g.dense(fin, hw, hb), name="probs_from_fused")
    labels = g.placeholder("labels", (None, num_classes))
    g.mean(g.cross_entropy(g.resolve("probs"), labels), name="loss")
    return g


def build_head_graph(input_dim: int, num_classes: int, rng) -> ExprGraph:
    """Standalone classifier head over precomputed feature vectors."""
    g = ExprGraph()
    x = g.placeholder("feature_in", (None, input_dim))
    hw = g.parameter("head_weight", glorot_dense(rng, input_dim, num_classes))
    hb = g.parameter("head_bias", np.zeros(num_classes, np.float32))
    g.softmax(g.dense(x, hw, hb), name="probs")
    labels = g.placeholder("labels", (None, num_classes))
    g.mean(g.cross_entropy(g.resolve("probs"), labels), name="loss")
    return g
