"""Hallucination networks: backbone-architecture nets that read the
inference modality's encoding and emit another stream's feature vector."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ShapeError
from ..tensor_core import ExprGraph, Tensor, evaluate
from ..util import params_fingerprint
from .graphs import ArchSpec, build_hallucination_graph


@dataclass
class HallucinationModel:
    """Imitates a frozen target feature space from the inference modality.

    fills: which privileged stream slot the output replaces ("fused" for
    the integrated variant). target_modality: whose features it was trained
    toward; differs from fills only for the skeleton-proxy option.
    """

    fills: str
    target_modality: str
    arch: ArchSpec
    margin: float
    graph: ExprGraph

    @property
    def feature_dim(self) -> int:
        return self.arch.feature_dim

    def fingerprint(self) -> bytes:
        return params_fingerprint(self.graph.parameters)

    def with_params(self, params) -> "HallucinationModel":
        return replace(self, graph=self.graph.with_parameters(params))

    def forward_batch(self, inputs: np.ndarray) -> np.ndarray:
        return evaluate(self.graph, {"input": inputs}, outputs=["halluc"])["halluc"].data


def make_hallucination_model(fills: str, target_modality: str, arch: ArchSpec,
                             rng, margin: float = 0.2) -> HallucinationModel:
    return HallucinationModel(
        fills, target_modality, arch, margin,
        build_hallucination_graph(arch, rng, margin=margin))


def hallucinate(model: HallucinationModel, s0_encoded) -> Tensor:
    """Hallucinated feature vector for one encoded inference-modality input."""
    arr = np.asarray(s0_encoded, np.float32)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4:
        raise ShapeError(
            f"hallucination input must be (H,W,C) or (N,H,W,C), got {arr.shape}"
        )
    out = model.forward_batch(arr)
    return Tensor(out[0] if out.shape[0] == 1 else out)
