"""Forward and backward kernels for the graph op vocabulary.

All kernels are pure numpy with fixed accumulation order, so repeated
single-threaded evaluation is bit-reproducible. Layout conventions:
images are NHWC, conv kernels are (kh, kw, c_in, c_out), feature
matrices are (batch, dim).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ShapeError

# Probabilities below this are clamped before the log in cross-entropy.
CE_CLIP = 1e-12


@dataclass(frozen=True)
class OpDef:
    forward: Callable
    backward: Callable


OPS: dict[str, OpDef] = {}


def _register(name, forward, backward):
    OPS[name] = OpDef(forward, backward)


# -- elementwise ------------------------------------------------------------

def _identity_fwd(inputs, attrs):
    return inputs[0]


def _identity_bwd(g, inputs, output, attrs):
    return [g]


def _same_shape(a, b, op):
    if a.shape != b.shape:
        raise ShapeError(f"{op}: operand shapes {a.shape} and {b.shape} differ")


def _add_fwd(inputs, attrs):
    a, b = inputs
    _same_shape(a, b, "add")
    return a + b


def _add_bwd(g, inputs, output, attrs):
    return [g, g]


def _sub_fwd(inputs, attrs):
    a, b = inputs
    _same_shape(a, b, "sub")
    return a - b


def _sub_bwd(g, inputs, output, attrs):
    return [g, -g]


def _mul_fwd(inputs, attrs):
    a, b = inputs
    _same_shape(a, b, "mul")
    return a * b


def _mul_bwd(g, inputs, output, attrs):
    a, b = inputs
    return [g * b, g * a]


def _add_scalar_fwd(inputs, attrs):
    return inputs[0] + inputs[0].dtype.type(attrs["value"])


def _add_scalar_bwd(g, inputs, output, attrs):
    return [g]


def _scale_fwd(inputs, attrs):
    return inputs[0] * inputs[0].dtype.type(attrs["value"])


def _scale_bwd(g, inputs, output, attrs):
    return [g * g.dtype.type(attrs["value"])]


def _relu_fwd(inputs, attrs):
    return np.maximum(inputs[0], 0)


def _relu_bwd(g, inputs, output, attrs):
    # Subgradient at exactly zero is taken as zero.
    return [g * (inputs[0] > 0)]


def _mean_fwd(inputs, attrs):
    return np.asarray(inputs[0].mean(), dtype=inputs[0].dtype)


def _mean_bwd(g, inputs, output, attrs):
    x = inputs[0]
    return [np.full(x.shape, g / x.size, dtype=x.dtype)]


# -- dense / conv / pooling --------------------------------------------------

def _dense_fwd(inputs, attrs):
    x, w, b = inputs
    if x.ndim not in (1, 2):
        raise ShapeError(f"dense: input must be 1-D or 2-D, got {x.shape}")
    if w.ndim != 2 or x.shape[-1] != w.shape[0]:
        raise ShapeError(f"dense: input dim {x.shape} incompatible with weight {w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeError(f"dense: bias {b.shape} incompatible with weight {w.shape}")
    return x @ w + b


def _dense_bwd(g, inputs, output, attrs):
    x, w, b = inputs
    gx = g @ w.T
    if x.ndim == 1:
        gw = np.outer(x, g)
        gb = g.copy()
    else:
        gw = x.T @ g
        gb = g.sum(axis=0)
    return [gx, gw, gb]


def _conv2d_geometry(h, w, kh, kw, stride, padding):
    if padding == "valid":
        pt = pb = pl = pr = 0
    elif padding == "same":
        out_h = -(-h // stride)
        out_w = -(-w // stride)
        pad_h = max((out_h - 1) * stride + kh - h, 0)
        pad_w = max((out_w - 1) * stride + kw - w, 0)
        pt, pb = pad_h // 2, pad_h - pad_h // 2
        pl, pr = pad_w // 2, pad_w - pad_w // 2
    else:
        pt = pb = pl = pr = int(padding)
    out_h = (h + pt + pb - kh) // stride + 1
    out_w = (w + pl + pr - kw) // stride + 1
    if out_h <= 0 or out_w <= 0:
        raise ShapeError(f"conv2d: kernel ({kh},{kw}) too large for input ({h},{w})")
    return pt, pb, pl, pr, out_h, out_w


def _conv2d_fwd(inputs, attrs):
    x, k, b = inputs
    if x.ndim != 4:
        raise ShapeError(f"conv2d: input must be NHWC 4-D, got {x.shape}")
    if k.ndim != 4 or x.shape[3] != k.shape[2]:
        raise ShapeError(f"conv2d: input channels {x.shape} vs kernel {k.shape}")
    stride = int(attrs.get("stride", 1))
    padding = attrs.get("padding", "same")
    n, h, w, _ = x.shape
    kh, kw, _, co = k.shape
    pt, pb, pl, pr, oh, ow = _conv2d_geometry(h, w, kh, kw, stride, padding)
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    out = np.zeros((n, oh, ow, co), dtype=x.dtype)
    flat = out.reshape(-1, co)
    for i in range(kh):
        for j in range(kw):
            xs = xp[:, i : i + (oh - 1) * stride + 1 : stride,
                    j : j + (ow - 1) * stride + 1 : stride, :]
            flat += xs.reshape(-1, xs.shape[3]) @ k[i, j]
    out += b
    return out


def _conv2d_bwd(g, inputs, output, attrs):
    x, k, b = inputs
    stride = int(attrs.get("stride", 1))
    padding = attrs.get("padding", "same")
    n, h, w, ci = x.shape
    kh, kw, _, co = k.shape
    pt, pb, pl, pr, oh, ow = _conv2d_geometry(h, w, kh, kw, stride, padding)
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    gxp = np.zeros_like(xp)
    gk = np.zeros_like(k)
    gb = g.sum(axis=(0, 1, 2))
    gf = g.reshape(-1, co)
    for i in range(kh):
        for j in range(kw):
            rows = slice(i, i + (oh - 1) * stride + 1, stride)
            cols = slice(j, j + (ow - 1) * stride + 1, stride)
            xs = xp[:, rows, cols, :]
            gk[i, j] = xs.reshape(-1, ci).T @ gf
            gxp[:, rows, cols, :] += (gf @ k[i, j].T).reshape(n, oh, ow, ci)
    gx = gxp[:, pt : pt + h, pl : pl + w, :]
    return [gx, gk, gb]


def _pool_windows(x, size):
    n, h, w, c = x.shape
    oh, ow = h // size, w // size
    if oh == 0 or ow == 0:
        raise ShapeError(f"max_pool: window {size} larger than input ({h},{w})")
    xv = x[:, : oh * size, : ow * size, :]
    win = xv.reshape(n, oh, size, ow, size, c)
    win = win.transpose(0, 1, 3, 5, 2, 4).reshape(n, oh, ow, c, size * size)
    return win, oh, ow


def _max_pool_fwd(inputs, attrs):
    x = inputs[0]
    if x.ndim != 4:
        raise ShapeError(f"max_pool: input must be NHWC 4-D, got {x.shape}")
    size = int(attrs.get("size", 2))
    win, _, _ = _pool_windows(x, size)
    return win.max(axis=-1)


def _max_pool_bwd(g, inputs, output, attrs):
    x = inputs[0]
    size = int(attrs.get("size", 2))
    n, h, w, c = x.shape
    win, oh, ow = _pool_windows(x, size)
    idx = win.argmax(axis=-1)  # ties route to the first maximum
    gwin = np.zeros_like(win)
    np.put_along_axis(gwin, idx[..., None], g[..., None], axis=-1)
    gx = np.zeros_like(x)
    blocks = gwin.reshape(n, oh, ow, c, size, size).transpose(0, 1, 4, 2, 5, 3)
    gx[:, : oh * size, : ow * size, :] = blocks.reshape(n, oh * size, ow * size, c)
    return [gx]


def _gap_fwd(inputs, attrs):
    x = inputs[0]
    if x.ndim != 4:
        raise ShapeError(f"global_avg_pool: input must be NHWC 4-D, got {x.shape}")
    return x.mean(axis=(1, 2))


def _gap_bwd(g, inputs, output, attrs):
    x = inputs[0]
    _, h, w, _ = x.shape
    return [np.broadcast_to(g[:, None, None, :] / (h * w), x.shape).astype(x.dtype)]


# -- joins, softmax, losses ---------------------------------------------------

def _concat_fwd(inputs, attrs):
    axis = int(attrs.get("axis", -1))
    ndim = inputs[0].ndim
    for a in inputs[1:]:
        if a.ndim != ndim:
            raise ShapeError("concat: mixed operand ranks")
    return np.concatenate(inputs, axis=axis)


def _concat_bwd(g, inputs, output, attrs):
    axis = int(attrs.get("axis", -1))
    sizes = [a.shape[axis] for a in inputs]
    cuts = np.cumsum(sizes)[:-1]
    return list(np.split(g, cuts, axis=axis))


def _softmax_fwd(inputs, attrs):
    x = inputs[0]
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _softmax_bwd(g, inputs, output, attrs):
    y = output
    dot = (g * y).sum(axis=-1, keepdims=True)
    return [y * (g - dot)]


def _cross_entropy_fwd(inputs, attrs):
    p, y = inputs
    _same_shape(p, y, "cross_entropy")
    pc = np.maximum(p, CE_CLIP)
    return -(y * np.log(pc)).sum(axis=-1)


def _cross_entropy_bwd(g, inputs, output, attrs):
    p, y = inputs
    pc = np.maximum(p, CE_CLIP)
    gp = -(y / pc) * (p > CE_CLIP) * g[..., None]
    gy = -np.log(pc) * g[..., None]
    return [gp, gy]


def _sq_dist_fwd(inputs, attrs):
    a, b = inputs
    _same_shape(a, b, "sq_dist")
    d = a - b
    return (d * d).sum(axis=-1)


def _sq_dist_bwd(g, inputs, output, attrs):
    a, b = inputs
    d = 2 * (a - b) * g[..., None]
    return [d, -d]


def _const_fwd(inputs, attrs):
    return attrs["value"]


_register("identity", _identity_fwd, _identity_bwd)
_register("add", _add_fwd, _add_bwd)
_register("sub", _sub_fwd, _sub_bwd)
_register("mul", _mul_fwd, _mul_bwd)
_register("add_scalar", _add_scalar_fwd, _add_scalar_bwd)
_register("scale", _scale_fwd, _scale_bwd)
_register("relu", _relu_fwd, _relu_bwd)
_register("mean", _mean_fwd, _mean_bwd)
_register("dense", _dense_fwd, _dense_bwd)
_register("conv2d", _conv2d_fwd, _conv2d_bwd)
_register("max_pool", _max_pool_fwd, _max_pool_bwd)
_register("global_avg_pool", _gap_fwd, _gap_bwd)
_register("concat", _concat_fwd, _concat_bwd)
_register("softmax", _softmax_fwd, _softmax_bwd)
_register("cross_entropy", _cross_entropy_fwd, _cross_entropy_bwd)
_register("sq_dist", _sq_dist_fwd, _sq_dist_bwd)
_register("const", _const_fwd, None)
