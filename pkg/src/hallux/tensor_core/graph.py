"""Recorded differentiable computation graphs.

An ExprGraph is built once through the builder methods and is immutable
afterwards: nodes only ever reference earlier nodes, so the node list is
topologically ordered by construction. Parameters carry their current
values; `with_parameters` produces a graph sharing the same nodes with
new values (used to bake trained weights without mutation).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from ..errors import GraphError
from .ops import OPS
from .tensor import Tensor, as_array

Shape = tuple  # ints, or None for a flexible dimension


@dataclass(frozen=True)
class Node:
    nid: int
    op: str
    inputs: tuple[int, ...]
    attrs: Mapping
    name: str | None = None

    def label(self) -> str:
        tag = f" '{self.name}'" if self.name else ""
        return f"node {self.nid} ({self.op}{tag})"


class ExprGraph:
    """Topologically ordered op records plus named parameters and inputs."""

    def __init__(self):
        self._nodes: list[Node] = []
        self._by_name: dict[str, int] = {}
        self._placeholders: dict[str, int] = {}
        self._param_ids: dict[str, int] = {}
        self._param_values: dict[str, np.ndarray] = {}

    # -- introspection -----------------------------------------------------

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(self._nodes)

    @property
    def placeholders(self) -> dict[str, int]:
        return dict(self._placeholders)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(self._param_ids)

    @property
    def parameters(self) -> dict[str, np.ndarray]:
        return dict(self._param_values)

    def node(self, ref) -> Node:
        return self._nodes[self.resolve(ref)]

    def resolve(self, ref) -> int:
        """Map a node id or name to a node id."""
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self._nodes):
                raise GraphError(f"node id {ref} out of range")
            return int(ref)
        if ref in self._by_name:
            return self._by_name[ref]
        raise GraphError(f"unknown node name '{ref}'")

    def parameter_count(self) -> int:
        return sum(v.size for v in self._param_values.values())

    def op_signature(self, output) -> tuple[str, ...]:
        """Op kinds of the subgraph feeding `output`, in execution order."""
        needed = self.ancestors([self.resolve(output)])
        return tuple(self._nodes[i].op for i in sorted(needed))

    def ancestors(self, targets: Iterable[int]) -> set[int]:
        seen: set[int] = set()
        stack = list(targets)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(self._nodes[nid].inputs)
        return seen

    # -- construction --------------------------------------------------------

    def _add(self, op: str, inputs: tuple[int, ...], attrs=None, name=None) -> int:
        nid = len(self._nodes)
        for i in inputs:
            if not 0 <= i < nid:
                raise GraphError(f"op '{op}' references undefined input node {i}")
        if name is not None:
            if name in self._by_name:
                raise GraphError(f"duplicate node name '{name}'")
            self._by_name[name] = nid
        self._nodes.append(Node(nid, op, tuple(inputs), dict(attrs or {}), name))
        return nid

    def placeholder(self, name: str, shape: Shape) -> int:
        nid = self._add("placeholder", (), {"shape": tuple(shape)}, name)
        self._placeholders[name] = nid
        return nid

    def parameter(self, name: str, value) -> int:
        if name in self._param_ids:
            raise GraphError(f"duplicate parameter name '{name}'")
        arr = as_array(value, np.float32)
        nid = self._add("parameter", (), {}, name)
        self._param_ids[name] = nid
        self._param_values[name] = arr
        return nid

    def constant(self, value, name=None) -> int:
        return self._add("const", (), {"value": as_array(value, np.float32)}, name)

    def with_parameters(self, values: Mapping[str, np.ndarray]) -> "ExprGraph":
        """Same nodes, new parameter values. Unlisted parameters keep theirs."""
        unknown = set(values) - set(self._param_ids)
        if unknown:
            raise GraphError(f"unknown parameters: {sorted(unknown)}")
        g = ExprGraph()
        g._nodes = self._nodes
        g._by_name = self._by_name
        g._placeholders = self._placeholders
        g._param_ids = self._param_ids
        g._param_values = dict(self._param_values)
        for k, v in values.items():
            arr = as_array(v, np.float32)
            if arr.shape != self._param_values[k].shape:
                raise GraphError(
                    f"parameter '{k}' shape {arr.shape} != {self._param_values[k].shape}"
                )
            g._param_values[k] = arr
        return g

    # -- op builders ---------------------------------------------------------

    def identity(self, x, name=None) -> int:
        return self._add("identity", (self.resolve(x),), None, name)

    def add(self, a, b, name=None) -> int:
        return self._add("add", (self.resolve(a), self.resolve(b)), None, name)

    def sub(self, a, b, name=None) -> int:
        return self._add("sub", (self.resolve(a), self.resolve(b)), None, name)

    def mul(self, a, b, name=None) -> int:
        return self._add("mul", (self.resolve(a), self.resolve(b)), None, name)

    def add_scalar(self, x, value: float, name=None) -> int:
        return self._add("add_scalar", (self.resolve(x),), {"value": float(value)}, name)

    def scale(self, x, value: float, name=None) -> int:
        return self._add("scale", (self.resolve(x),), {"value": float(value)}, name)

    def relu(self, x, name=None) -> int:
        return self._add("relu", (self.resolve(x),), None, name)

    def mean(self, x, name=None) -> int:
        return self._add("mean", (self.resolve(x),), None, name)

    def dense(self, x, weight, bias, name=None) -> int:
        ids = (self.resolve(x), self.resolve(weight), self.resolve(bias))
        return self._add("dense", ids, None, name)

    def conv2d(self, x, kernel, bias, stride=1, padding="same", name=None) -> int:
        ids = (self.resolve(x), self.resolve(kernel), self.resolve(bias))
        return self._add("conv2d", ids, {"stride": stride, "padding": padding}, name)

    def max_pool(self, x, size=2, name=None) -> int:
        return self._add("max_pool", (self.resolve(x),), {"size": size}, name)

    def global_avg_pool(self, x, name=None) -> int:
        return self._add("global_avg_pool", (self.resolve(x),), None, name)

    def concat(self, xs, axis=-1, name=None) -> int:
        ids = tuple(self.resolve(x) for x in xs)
        if not ids:
            raise GraphError("concat requires at least one input")
        return self._add("concat", ids, {"axis": axis}, name)

    def softmax(self, x, name=None) -> int:
        return self._add("softmax", (self.resolve(x),), None, name)

    def cross_entropy(self, probs, target, name=None) -> int:
        return self._add("cross_entropy", (self.resolve(probs), self.resolve(target)), None, name)

    def sq_dist(self, a, b, name=None) -> int:
        return self._add("sq_dist", (self.resolve(a), self.resolve(b)), None, name)


def validate_bindings_shape(declared: Shape, actual: tuple[int, ...], label: str):
    if len(declared) != len(actual):
        raise GraphError(f"{label}: bound value rank {actual} != declared {declared}")
    for d, a in zip(declared, actual):
        if d is not None and d != a:
            raise GraphError(f"{label}: bound shape {actual} != declared {declared}")


__all__ = ["ExprGraph", "Node", "Tensor", "OPS", "validate_bindings_shape"]
