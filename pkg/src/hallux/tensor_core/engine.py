"""Graph execution: forward evaluation, reverse-mode gradients, and the
finite-difference gradient check.

Evaluation computes only the ancestors of the requested outputs, so one
graph can carry both inference heads and loss heads without forcing
callers to bind training-only placeholders.
"""
from __future__ import annotations

import numpy as np

from ..errors import GraphError, ShapeError
from .graph import ExprGraph, validate_bindings_shape
from .ops import OPS
from .tensor import Tensor, as_array


def _resolve_outputs(graph: ExprGraph, outputs):
    if outputs is None:
        named = [
            n for n in graph.nodes
            if n.name is not None and n.op not in ("placeholder", "parameter")
        ]
        if not named:
            raise GraphError("graph has no named op nodes; pass outputs explicitly")
        return [(n.name, n.nid) for n in named]
    pairs = []
    for ref in outputs:
        nid = graph.resolve(ref)
        node = graph.node(nid)
        key = ref if isinstance(ref, str) else (node.name or str(nid))
        pairs.append((key, nid))
    return pairs


def _forward(graph: ExprGraph, bindings, needed, params, dtype):
    bindings = bindings or {}
    values: dict[int, np.ndarray] = {}
    param_values = graph.parameters
    if params:
        param_values.update(params)
    for node in graph.nodes:
        if node.nid not in needed:
            continue
        if node.op == "placeholder":
            if node.name not in bindings:
                raise GraphError(f"placeholder '{node.name}' is not bound")
            arr = as_array(bindings[node.name], dtype)
            validate_bindings_shape(node.attrs["shape"], arr.shape, node.label())
            values[node.nid] = arr
        elif node.op == "parameter":
            values[node.nid] = as_array(param_values[node.name], dtype)
        elif node.op == "const":
            values[node.nid] = as_array(node.attrs["value"], dtype)
        else:
            args = [values[i] for i in node.inputs]
            try:
                values[node.nid] = OPS[node.op].forward(args, node.attrs)
            except ShapeError as e:
                raise GraphError(f"{node.label()}: {e}") from e
    return values


def evaluate(graph: ExprGraph, bindings=None, outputs=None, params=None,
             dtype=np.float32) -> dict[str, Tensor]:
    """Run the forward pass and return the requested named outputs.

    `bindings` maps placeholder names to values; `params` optionally
    overrides stored parameter values without touching the graph.
    """
    pairs = _resolve_outputs(graph, outputs)
    needed = graph.ancestors([nid for _, nid in pairs])
    values = _forward(graph, bindings, needed, params, dtype)
    return {key: Tensor(values[nid], checked=False) for key, nid in pairs}


def _backward_arrays(graph: ExprGraph, loss, bindings, params, dtype):
    loss_id = graph.resolve(loss)
    needed = graph.ancestors([loss_id])
    values = _forward(graph, bindings, needed, params, dtype)
    loss_val = values[loss_id]
    if loss_val.shape != ():
        raise GraphError(
            f"backward requires a scalar loss, {graph.node(loss_id).label()} "
            f"has shape {loss_val.shape}"
        )
    grads: dict[int, np.ndarray] = {loss_id: np.ones((), dtype=dtype)}
    for node in reversed(graph.nodes):
        if node.nid not in needed or node.nid not in grads:
            continue
        if node.op in ("placeholder", "parameter", "const"):
            continue
        bwd = OPS[node.op].backward
        if bwd is None:
            raise GraphError(f"{node.label()} is not differentiable")
        args = [values[i] for i in node.inputs]
        contribs = bwd(grads[node.nid], args, values[node.nid], node.attrs)
        for inp, contrib in zip(node.inputs, contribs):
            if contrib is None:
                continue
            if inp in grads:
                grads[inp] = grads[inp] + contrib  # fresh array, never in place
            else:
                grads[inp] = contrib
    out: dict[str, np.ndarray] = {}
    param_values = graph.parameters
    if params:
        param_values.update(params)
    for name in graph.parameter_names:
        nid = graph.resolve(name)
        if nid in grads:
            out[name] = np.asarray(grads[nid], dtype=dtype)
        else:
            out[name] = np.zeros(param_values[name].shape, dtype=dtype)
    return out, float(loss_val)


def backward(graph: ExprGraph, loss, bindings=None, params=None) -> dict[str, Tensor]:
    """Reverse-mode gradients of a scalar loss for every parameter.

    Parameters the loss does not depend on get zero tensors.
    """
    grads, _ = _backward_arrays(graph, loss, bindings, params, np.float32)
    return {k: Tensor(v, checked=False) for k, v in grads.items()}


def finite_diff_check(graph: ExprGraph, loss, bindings=None, eps: float = 1e-3,
                      params=None) -> float:
    """Max discrepancy between reverse-mode and central-difference gradients.

    Both sides run in float64. The per-element discrepancy is
    |ad - fd| / max(1, |ad|, |fd|), so it reads as an absolute error for
    small gradients and a relative error for large ones.
    """
    if eps <= 0:
        raise GraphError("finite_diff_check requires eps > 0")
    base = graph.parameters
    if params:
        base.update(params)
    params64 = {k: np.asarray(v, dtype=np.float64) for k, v in base.items()}
    ad, _ = _backward_arrays(graph, loss, bindings, params64, np.float64)
    loss_id = graph.resolve(loss)
    needed = graph.ancestors([loss_id])

    def loss_at(p):
        return float(_forward(graph, bindings, needed, p, np.float64)[loss_id])

    worst = 0.0
    for name, value in params64.items():
        flat = value.reshape(-1)
        fd = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = loss_at(params64)
            flat[i] = orig - eps
            lo = loss_at(params64)
            flat[i] = orig
            fd[i] = (hi - lo) / (2 * eps)
        a = ad[name].reshape(-1)
        denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(fd)))
        worst = max(worst, float(np.max(np.abs(a - fd) / denom)) if flat.size else 0.0)
    return worst
