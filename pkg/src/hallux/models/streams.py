"""Per-modality stream classifiers: backbone feature extractor plus head."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ShapeError
from ..tensor_core import ExprGraph, Tensor, evaluate
from ..util import params_fingerprint
from .graphs import ArchSpec, build_stream_graph


@dataclass
class StreamModel:
    """A trained (or initialized) single-stream classifier."""

    modality: str
    arch: ArchSpec
    num_classes: int
    graph: ExprGraph

    @property
    def feature_dim(self) -> int:
        return self.arch.feature_dim

    def fingerprint(self) -> bytes:
        return params_fingerprint(self.graph.parameters)

    def with_params(self, params: dict[str, np.ndarray]) -> "StreamModel":
        return replace(self, graph=self.graph.with_parameters(params))

    def forward_batch(self, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(features, probs) for a (N, H, W, C) batch."""
        out = evaluate(self.graph, {"input": inputs}, outputs=["feature", "probs"])
        return out["feature"].data, out["probs"].data

    def head_probs(self, features: np.ndarray) -> np.ndarray:
        """Score externally produced feature vectors through the frozen head."""
        feats = np.atleast_2d(np.asarray(features, np.float32))
        out = evaluate(self.graph, {"feature_in": feats}, outputs=["probs_from_feature"])
        return out["probs_from_feature"].data


def make_stream_model(modality: str, arch: ArchSpec, num_classes: int,
                      rng) -> StreamModel:
    return StreamModel(modality, arch, num_classes,
                       build_stream_graph(arch, num_classes, rng))


def stream_forward(model: StreamModel, x) -> tuple[Tensor, Tensor]:
    """Features and class probabilities for one encoded input (H, W, C)."""
    arr = np.asarray(x, np.float32)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4:
        raise ShapeError(f"stream input must be (H,W,C) or (N,H,W,C), got {arr.shape}")
    feats, probs = model.forward_batch(arr)
    if feats.shape[0] == 1:
        return Tensor(feats[0]), Tensor(probs[0])
    return Tensor(feats), Tensor(probs)
