##############################################################################
#
# Copyright (c) 2026 SalBranch Contributors.
# All Rights Reserved.
#
# This software is subject to the provisions of the Zope Public License,
# Version 2.1 (ZPL).  A copy of the ZPL should accompany this distribution.
# THIS SOFTWARE IS PROVIDED "AS IS" AND ANY AND ALL EXPRESS OR IMPLIED
# WARRANTIES ARE DISCLAIMED, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF TITLE, MERCHANTABILITY, AGAINST INFRINGEMENT, AND FITNESS
# FOR A PARTICULAR PURPOSE.
#
##############################################################################
"""Dense tensors with a minimal reverse-mode tape.

A :class:`Tensor` is an immutable array of 64-bit floats with at most
four dimensions; 4-D tensors use (batch, channels, height, width)
order.  The operations in this module return new tensors which
remember the tensors they were computed from, so that :func:`backward`
can propagate the gradient of a scalar loss to every reachable
:class:`Parameter`.

Nothing is recorded for results that cannot reach a parameter with
``requires_grad`` set, which is how frozen network branches avoid
paying for gradients they would never apply.

"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from SalBranch import ShapeError
from SalBranch import TrainingError


class Tensor:
    """Immutable dense array of 64-bit floats.

    The array is available as :attr:`data`; it is marked read-only so
    that tensors can be shared between threads.

    """

    __slots__ = ("_data", "_parents", "_backward", "_param")

    def __init__(self, data):
        if isinstance(data, Tensor):
            data = data._data
        data = np.array(data, dtype=np.float64)
        if data.ndim > 4:
            raise ShapeError(
                "tensors have at most 4 dimensions, got %d" % data.ndim)
        data.flags.writeable = False
        self._data = data
        self._parents = ()
        self._backward = None
        self._param = None

    @classmethod
    def from_op(cls, data, parents, backward):
        """Wrap the freshly computed array *data* as an operation result.

        *backward* maps the gradient of the result to a sequence of
        gradients, one per tensor in *parents* (``None`` for a parent
        that needs none).  The graph link is only kept if some parent
        requires a gradient.
        """
        self = cls.__new__(cls)
        data = np.asarray(data, dtype=np.float64)
        data.flags.writeable = False
        self._data = data
        self._param = None
        if any(p.requires_grad for p in parents):
            self._parents = tuple(parents)
            self._backward = backward
        else:
            self._parents = ()
            self._backward = None
        return self

    @property
    def data(self):
        return self._data

    @property
    def shape(self):
        return self._data.shape

    @property
    def requires_grad(self):
        if self._param is not None:
            return self._param.requires_grad
        return bool(self._parents)

    def numpy(self):
        return self._data

    def item(self):
        if self._data.size != 1:
            raise ShapeError("item() needs a single value, got shape %s"
                             % (self.shape,))
        return float(self._data.reshape(-1)[0])

    def __repr__(self):
        return "<Tensor shape={}{}>".format(
            self.shape, " requires_grad" if self.requires_grad else "")


class Parameter:
    """Named trainable array with its accumulated gradient.

    ``value`` and ``grad`` are :class:`Tensor` objects of identical
    shape; ``grad`` starts out as zeros.  Setting ``requires_grad`` to
    false freezes the parameter: :func:`backward` no longer computes its
    gradient and :func:`sgd_step` leaves it alone.

    """

    def __init__(self, name, value):
        self.name = name
        self.requires_grad = True
        self._set(value)
        self.zero_grad()

    def _set(self, array):
        value = Tensor(array)
        value._param = self
        self.value = value

    @property
    def shape(self):
        return self.value.shape

    def assign(self, array):
        array = np.asarray(array, dtype=np.float64)
        if array.shape != self.shape:
            raise ShapeError(
                "parameter %s has shape %s, got %s"
                % (self.name, self.shape, array.shape))
        self._set(array)

    def zero_grad(self):
        self.grad = Tensor(np.zeros(self.shape))

    def accumulate(self, grad):
        self.grad = Tensor(self.grad.data + grad)

    def __repr__(self):
        return "<Parameter {} shape={}>".format(self.name, self.shape)


def _check_rank(opname, argname, array, rank):
    if array.ndim != rank:
        raise ShapeError(
            "%s: %s must have %d dimensions, got shape %s"
            % (opname, argname, rank, array.shape))


def conv2d(input, weight, bias, stride=1, pad=0):
    """Cross-correlate *input* [N,Cin,H,W] with *weight* [Cout,Cin,kh,kw].

    The kernel is not flipped.  Output spatial size is
    ``floor((H + 2*pad - kh) / stride) + 1`` (likewise for the width).
    """
    x, w, b = input.data, weight.data, bias.data
    _check_rank("conv2d", "input", x, 4)
    _check_rank("conv2d", "weight", w, 4)
    n, cin, h, wd = x.shape
    cout, wcin, kh, kw = w.shape
    if wcin != cin:
        raise ShapeError(
            "conv2d: input has %d channels but weight expects %d"
            % (cin, wcin), dimension="channels")
    if b.shape != (cout,):
        raise ShapeError(
            "conv2d: bias has shape %s, expected (%d,)" % (b.shape, cout),
            dimension="bias")
    if stride < 1 or pad < 0:
        raise ValueError("conv2d: stride must be positive and pad "
                         "nonnegative, got stride=%r pad=%r" % (stride, pad))
    if kh > h + 2 * pad:
        raise ShapeError(
            "conv2d: kernel height %d exceeds padded input height %d"
            % (kh, h + 2 * pad), dimension="height")
    if kw > wd + 2 * pad:
        raise ShapeError(
            "conv2d: kernel width %d exceeds padded input width %d"
            % (kw, wd + 2 * pad), dimension="width")

    if pad:
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    else:
        xp = x
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    oh, ow = windows.shape[2:4]
    # bias first, then one product per (channel, row, column) of the
    # kernel in that order, so every output is summed like a plain loop
    out = np.empty((n, cout, oh, ow))
    out[...] = b[None, :, None, None]
    term = np.empty_like(out)
    for c in range(cin):
        for i in range(kh):
            for j in range(kw):
                np.multiply(windows[:, c, :, :, i, j][:, None],
                            w[None, :, c, i, j, None, None], out=term)
                out += term

    def grads(g):
        gx = gw = gb = None
        if weight.requires_grad:
            gw = np.einsum("nohw,nchwij->ocij", g, windows, optimize=True)
        if bias.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        if input.requires_grad:
            gxp = np.zeros(xp.shape)
            for i in range(kh):
                for j in range(kw):
                    gxp[:, :,
                        i:i + stride * oh:stride,
                        j:j + stride * ow:stride] += np.einsum(
                            "nohw,oc->nchw", g, w[:, :, i, j], optimize=True)
            gx = gxp[:, :, pad:pad + h, pad:pad + wd]
        return gx, gw, gb

    return Tensor.from_op(out, (input, weight, bias), grads)


def relu(x):
    a = x.data
    positive = a > 0
    out = np.where(positive, a, 0.0)

    def grads(g):
        return (g * positive,)

    return Tensor.from_op(out, (x,), grads)


def maxpool2d(x, k, stride=None):
    """Windowed maximum over k×k windows.

    On ties the gradient goes to the first maximal element in
    row-major order within the window.
    """
    if stride is None:
        stride = k
    a = x.data
    _check_rank("maxpool2d", "input", a, 4)
    n, c, h, w = a.shape
    if k > h or k > w:
        raise ShapeError(
            "maxpool2d: window %d exceeds input size %dx%d" % (k, h, w),
            dimension="height" if k > h else "width")
    windows = sliding_window_view(a, (k, k), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    oh, ow = windows.shape[2:4]
    flat = windows.reshape(n, c, oh, ow, k * k)
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    def grads(g):
        gx = np.zeros(a.shape)
        nn, cc, ii, jj = np.indices((n, c, oh, ow), sparse=True)
        rows = ii * stride + arg // k
        cols = jj * stride + arg % k
        np.add.at(gx, (nn, cc, rows, cols), g)
        return (gx,)

    return Tensor.from_op(out, (x,), grads)


def linear(x, weight, bias):
    """Affine map ``x @ weight.T + bias`` for x [N,D] and weight [K,D]."""
    a, w, b = x.data, weight.data, bias.data
    _check_rank("linear", "input", a, 2)
    _check_rank("linear", "weight", w, 2)
    if w.shape[1] != a.shape[1]:
        raise ShapeError(
            "linear: input has %d features but weight expects %d"
            % (a.shape[1], w.shape[1]), dimension="features")
    if b.shape != (w.shape[0],):
        raise ShapeError(
            "linear: bias has shape %s, expected (%d,)"
            % (b.shape, w.shape[0]), dimension="bias")
    out = np.empty((a.shape[0], w.shape[0]))
    out[...] = b
    for d in range(a.shape[1]):
        out += a[:, d, None] * w[None, :, d]

    def grads(g):
        return g @ w, g.T @ a, g.sum(axis=0)

    return Tensor.from_op(out, (x, weight, bias), grads)


def interpolation_matrix(src, dst):
    """Return the [dst, src] bilinear weight matrix for one axis.

    Destination sample *i* reads source coordinate
    ``(i + 0.5) * src / dst - 0.5``, clamped to the source grid.
    """
    pos = (np.arange(dst) + 0.5) * (src / dst) - 0.5
    pos = np.clip(pos, 0.0, src - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, src - 1)
    frac = pos - lo
    rows = np.arange(dst)
    m = np.zeros((dst, src))
    np.add.at(m, (rows, lo), 1.0 - frac)
    np.add.at(m, (rows, hi), frac)
    return m


def _resample(a, ay, ax):
    # one matrix product per image and channel
    return np.matmul(np.matmul(ay, a), ax.T)


def resize(x, out_h, out_w):
    """Bilinearly resample the last two axes of *x* to out_h×out_w."""
    a = x.data
    _check_rank("resize", "input", a, 4)
    ay = interpolation_matrix(a.shape[2], out_h)
    ax = interpolation_matrix(a.shape[3], out_w)
    out = _resample(a, ay, ax)

    def grads(g):
        return (_resample(g, ay.T, ax.T),)

    return Tensor.from_op(out, (x,), grads)


def bilinear_upsample(x, out_h, out_w):
    _check_rank("bilinear_upsample", "input", x.data, 4)
    h, w = x.shape[2:4]
    if out_h < h or out_w < w:
        raise ShapeError(
            "bilinear_upsample: target %dx%d is smaller than input %dx%d"
            % (out_h, out_w, h, w),
            dimension="height" if out_h < h else "width")
    return resize(x, out_h, out_w)


def global_avg_pool(x):
    a = x.data
    _check_rank("global_avg_pool", "input", a, 4)
    n, c, h, w = a.shape
    out = a.mean(axis=(2, 3))

    def grads(g):
        return (np.ones(a.shape) * (g[:, :, None, None] / (h * w)),)

    return Tensor.from_op(out, (x,), grads)


def sum_all(x):
    a = x.data

    def grads(g):
        return (np.ones(a.shape) * g,)

    return Tensor.from_op(np.array(a.sum()), (x,), grads)


def squared_error(x, target):
    """Return ``0.5 * sum((x - target)**2)`` as a scalar tensor."""
    a = x.data
    t = np.asarray(getattr(target, "data", target), dtype=np.float64)
    if t.shape != a.shape:
        raise ShapeError("squared_error: shapes %s and %s differ"
                         % (a.shape, t.shape))
    diff = a - t

    def grads(g):
        return (g * diff,)

    return Tensor.from_op(np.array(0.5 * (diff ** 2).sum()), (x,), grads)


def _log_softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits):
    """Row-wise softmax of a [N,K] tensor, as a plain array."""
    return np.exp(_log_softmax(logits.data))


def softmax_cross_entropy(logits, labels):
    """Mean over the batch of ``-log softmax(logits)[label]``."""
    z = logits.data
    _check_rank("softmax_cross_entropy", "logits", z, 2)
    labels = np.asarray(labels, dtype=int).reshape(-1)
    n, k = z.shape
    if labels.shape[0] != n:
        raise ShapeError(
            "softmax_cross_entropy: %d labels for a batch of %d"
            % (labels.shape[0], n), dimension="batch")
    bad = (labels < 0) | (labels >= k)
    if bad.any():
        raise ValueError("label %d out of range for %d classes"
                         % (labels[bad][0], k))
    logp = _log_softmax(z)
    rows = np.arange(n)
    loss = -logp[rows, labels].mean()

    def grads(g):
        d = np.exp(logp)
        d[rows, labels] -= 1.0
        return (g * d / n,)

    return Tensor.from_op(np.array(loss), (logits,), grads)


def _graph_order(root):
    # iterative post-order; the result lists inputs before consumers
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss):
    """Accumulate d(loss)/d(parameter) into every reachable parameter."""
    if not isinstance(loss, Tensor) or not loss.requires_grad:
        raise TrainingError(
            "backward() needs a loss recorded by a forward pass")
    if loss.data.size != 1:
        raise ShapeError("backward() needs a scalar loss, got shape %s"
                         % (loss.shape,))
    grads = {id(loss): np.ones(loss.shape)}
    for node in reversed(_graph_order(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if node._param is not None:
            node._param.accumulate(grad)
            continue
        for parent, g in zip(node._parents, node._backward(grad)):
            if g is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g


def sgd_step(params, lr):
    """Apply one plain SGD update, then zero the gradients.

    Frozen parameters are skipped.
    """
    if lr < 0:
        raise ValueError("learning rate must not be negative: %r" % (lr,))
    for param in params:
        if not param.requires_grad:
            continue
        if lr:
            param._set(param.value.data - lr * param.grad.data)
        param.zero_grad()


def _as_float(value):
    if isinstance(value, Tensor):
        return float(value.data.reshape(-1)[0])
    return float(value)


def finite_diff_grad(fn, input, eps=1e-5):
    """Central-difference estimate of the gradient of scalar *fn* at *input*.

    *fn* is called with a :class:`Tensor` and may return a scalar
    tensor or a number.
    """
    x = np.array(getattr(input, "data", input), dtype=np.float64)
    grad = np.zeros(x.shape)
    for idx in np.ndindex(*x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        plus = _as_float(fn(Tensor(x)))
        x[idx] = orig - eps
        minus = _as_float(fn(Tensor(x)))
        x[idx] = orig
        grad[idx] = (plus - minus) / (2 * eps)
    return Tensor(grad)
