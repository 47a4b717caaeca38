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
"""The two-branch classification network.

An RGB branch computes feature maps *R*; a saliency branch computes a
single-channel map *S* at a coarser resolution, which is bilinearly
upsampled to the resolution of *R*.  The modulation layer combines the
two as ``R * (S + 1)`` and a shared head classifies the result::

    image --+-- rgb branch ---------------- R --+
            |                                   modulate -- head -- p(y|I)
            +-- saliency branch -- upsample - S +

Branch geometry at the default 64 pixel input:

=========  =====================================  ==========
branch     stages                                 output
=========  =====================================  ==========
rgb        conv5/2, pool2, conv3, conv3           C×16×16
saliency   conv5/2, pool2, conv3, pool2, conv3,   1×8×8
           conv1 (one channel)
head       conv3/2, global average pool, linear   classes
=========  =====================================  ==========

Every convolution is followed by a ReLU.
"""

import logging

import numpy as np

from SalBranch import ShapeError
from SalBranch import seeding
from SalBranch.maps import SaliencyMap
from SalBranch.priors import blur_map
from SalBranch.tensor import Parameter
from SalBranch.tensor import Tensor
from SalBranch.tensor import bilinear_upsample
from SalBranch.tensor import conv2d
from SalBranch.tensor import global_avg_pool
from SalBranch.tensor import linear
from SalBranch.tensor import maxpool2d
from SalBranch.tensor import relu
from SalBranch.tensor import resize
from SalBranch.tensor import softmax


logger = logging.getLogger(__name__)


def _conv_out(size, k, stride, pad):
    return (size + 2 * pad - k) // stride + 1


def rgb_output_size(input_size):
    return _conv_out(input_size, 5, 2, 2) // 2


def saliency_output_size(input_size):
    return _conv_out(input_size, 5, 2, 2) // 2 // 2


class NetworkConfig:
    """Geometry and seed of a :class:`TwoBranchNet`.

    ``modulation_resolution`` defaults to the spatial size of the RGB
    features; an explicit value must agree with it.
    """

    def __init__(self, input_size=64, rgb_channels=(16, 32, 32),
                 saliency_channels=(16, 32, 48, 1), head_channels=32,
                 num_classes=8, modulation_resolution=None, seed=0):
        self.input_size = int(input_size)
        self.rgb_channels = tuple(int(c) for c in rgb_channels)
        self.saliency_channels = tuple(int(c) for c in saliency_channels)
        self.head_channels = int(head_channels)
        self.num_classes = int(num_classes)
        self.seed = int(seed)
        if self.input_size < 8:
            raise ShapeError("input size must be at least 8 pixels, got %d"
                             % self.input_size, dimension="input_size")
        if len(self.rgb_channels) != 3:
            raise ShapeError("the rgb branch has 3 convolutions, got %d "
                             "channel counts" % len(self.rgb_channels))
        if len(self.saliency_channels) != 4:
            raise ShapeError("the saliency branch has 4 convolutions, got %d "
                             "channel counts" % len(self.saliency_channels))
        if self.saliency_channels[-1] != 1:
            raise ShapeError("the saliency branch must end in exactly one "
                             "channel, got %d" % self.saliency_channels[-1],
                             dimension="channels")
        if min(self.rgb_channels + self.saliency_channels
               + (self.head_channels, self.num_classes)) < 1:
            raise ValueError("channel and class counts must be positive")
        size = rgb_output_size(self.input_size)
        if modulation_resolution is None:
            modulation_resolution = (size, size)
        modulation_resolution = tuple(int(v) for v in modulation_resolution)
        if modulation_resolution != (size, size):
            raise ShapeError(
                "modulation resolution %dx%d does not match the %dx%d rgb "
                "features of a %d pixel input"
                % (modulation_resolution + (size, size, self.input_size)),
                dimension="modulation_resolution")
        self.modulation_resolution = modulation_resolution

    @property
    def saliency_resolution(self):
        size = saliency_output_size(self.input_size)
        return (size, size)

    def replace(self, **kw):
        values = self.as_dict()
        values.update(kw)
        return NetworkConfig(**values)

    def as_dict(self):
        return {
            "input_size": self.input_size,
            "rgb_channels": list(self.rgb_channels),
            "saliency_channels": list(self.saliency_channels),
            "head_channels": self.head_channels,
            "num_classes": self.num_classes,
            "modulation_resolution": list(self.modulation_resolution),
            "seed": self.seed,
        }

    def __eq__(self, other):
        return (isinstance(other, NetworkConfig)
                and self.as_dict() == other.as_dict())

    def __repr__(self):
        return "<NetworkConfig %r>" % (self.as_dict(),)


def parameter_shapes(config):
    """Return ``{branch: [(name, shape), ...]}`` for *config*."""
    c1, c2, c3 = config.rgb_channels
    s1, s2, s3, s4 = config.saliency_channels
    h, k = config.head_channels, config.num_classes
    return {
        "rgb": [
            ("rgb.conv1.weight", (c1, 3, 5, 5)), ("rgb.conv1.bias", (c1,)),
            ("rgb.conv2.weight", (c2, c1, 3, 3)), ("rgb.conv2.bias", (c2,)),
            ("rgb.conv3.weight", (c3, c2, 3, 3)), ("rgb.conv3.bias", (c3,)),
        ],
        "saliency": [
            ("saliency.conv1.weight", (s1, 3, 5, 5)),
            ("saliency.conv1.bias", (s1,)),
            ("saliency.conv2.weight", (s2, s1, 3, 3)),
            ("saliency.conv2.bias", (s2,)),
            ("saliency.conv3.weight", (s3, s2, 3, 3)),
            ("saliency.conv3.bias", (s3,)),
            ("saliency.conv4.weight", (s4, s3, 1, 1)),
            ("saliency.conv4.bias", (s4,)),
        ],
        "head": [
            ("head.conv.weight", (h, c3, 3, 3)), ("head.conv.bias", (h,)),
            ("head.fc.weight", (k, h)), ("head.fc.bias", (k,)),
        ],
    }


class TwoBranchNet:
    """Parameters of the two-branch network plus its training state.

    ``phase`` is ``"initialized"`` after construction, ``"pretrained"``
    once the rgb branch and head have been trained and
    ``"selective"`` once the saliency branch has been trained.
    ``frozen`` holds the names of parameters excluded from updates.
    """

    def __init__(self, config=None):
        if config is None:
            config = NetworkConfig()
        self.config = config
        shapes = parameter_shapes(config)
        self.rgb_params = self._make(shapes["rgb"])
        self.saliency_params = self._make(shapes["saliency"])
        self.head_params = self._make(shapes["head"])
        self.frozen = set()
        self.phase = "initialized"
        init_xavier(self.parameters(), config.seed)
        logger.debug("built network with %d parameters",
                     sum(p.value.data.size for p in self.parameters()))

    @staticmethod
    def _make(shapes):
        return {name: Parameter(name, np.zeros(shape))
                for name, shape in shapes}

    def parameters(self):
        """All parameters in checkpoint order."""
        return (list(self.rgb_params.values())
                + list(self.saliency_params.values())
                + list(self.head_params.values()))

    def named_parameters(self):
        return {p.name: p for p in self.parameters()}

    def freeze(self, names):
        params = self.named_parameters()
        for name in names:
            params[name].requires_grad = False
            self.frozen.add(name)

    def unfreeze(self):
        for param in self.parameters():
            param.requires_grad = True
        self.frozen = set()

    def freeze_for_selective_training(self):
        self.unfreeze()
        self.freeze(list(self.rgb_params) + list(self.head_params))

    def state(self):
        """Copies of every parameter value, keyed by name."""
        return {p.name: p.value.data.copy() for p in self.parameters()}


def init_xavier(params, seed):
    """Xavier-uniform weights and zero biases, drawn per parameter name.

    Each parameter gets its own generator, so re-initializing one
    branch reproduces the values it had in a whole-network init.
    """
    for param in params:
        shape = param.shape
        if len(shape) == 1:
            param.assign(np.zeros(shape))
            continue
        receptive = int(np.prod(shape[2:])) if len(shape) > 2 else 1
        fan_in = shape[1] * receptive
        fan_out = shape[0] * receptive
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        gen = seeding.rng(seed, "xavier", param.name)
        param.assign(gen.uniform(-limit, limit, size=shape))
    return params


def _conv(x, params, prefix, stride=1, pad=0):
    return conv2d(x, params[prefix + ".weight"].value,
                  params[prefix + ".bias"].value, stride=stride, pad=pad)


def _check_image(image, net):
    if not isinstance(image, Tensor):
        image = Tensor(image)
    size = net.config.input_size
    if image.data.ndim != 4 or image.shape[1] != 3:
        raise ShapeError("images must be [N,3,H,W], got shape %s"
                         % (image.shape,))
    if image.shape[2:] != (size, size):
        raise ShapeError(
            "network expects %dx%d images, got %dx%d"
            % (size, size, image.shape[3], image.shape[2]),
            dimension="height" if image.shape[2] != size else "width")
    return image


def rgb_branch_forward(image, net):
    p = net.rgb_params
    image = _check_image(image, net)
    x = maxpool2d(relu(_conv(image, p, "rgb.conv1", stride=2, pad=2)), 2)
    x = relu(_conv(x, p, "rgb.conv2", pad=1))
    return relu(_conv(x, p, "rgb.conv3", pad=1))


def saliency_branch_forward(image, net):
    """Native-resolution saliency map [N,1,h,w], after the final ReLU."""
    p = net.saliency_params
    image = _check_image(image, net)
    x = maxpool2d(relu(_conv(image, p, "saliency.conv1", stride=2, pad=2)),
                  2)
    x = maxpool2d(relu(_conv(x, p, "saliency.conv2", pad=1)), 2)
    x = relu(_conv(x, p, "saliency.conv3", pad=1))
    return relu(_conv(x, p, "saliency.conv4"))


def modulate(R, S):
    """Modulation layer with skip connection: ``R * (S + 1)``.

    *S* has one channel and is broadcast over the channels of *R*.
    """
    r, s = R.data, S.data
    if r.ndim != 4 or s.ndim != 4 or s.shape[1] != 1:
        raise ShapeError("modulate needs R [N,C,h,w] and S [N,1,h,w], got "
                         "%s and %s" % (r.shape, s.shape))
    if r.shape[0] != s.shape[0]:
        raise ShapeError("modulate: batch sizes %d and %d differ"
                         % (r.shape[0], s.shape[0]), dimension="batch")
    if r.shape[2:] != s.shape[2:]:
        raise ShapeError(
            "modulate: R is %dx%d but S is %dx%d"
            % (r.shape[3], r.shape[2], s.shape[3], s.shape[2]),
            dimension="height" if r.shape[2] != s.shape[2] else "width")
    scale = s + 1.0
    out = r * scale

    def grads(g):
        return g * scale, (g * r).sum(axis=1, keepdims=True)

    return Tensor.from_op(out, (R, S), grads)


def head_forward(features, net):
    p = net.head_params
    x = relu(_conv(features, p, "head.conv", stride=2, pad=1))
    return linear(global_avg_pool(x), p["head.fc.weight"].value,
                  p["head.fc.bias"].value)


def logits(image, net, use_saliency=True):
    """Class logits; with *use_saliency* false the modulation is skipped."""
    image = _check_image(image, net)
    features = rgb_branch_forward(image, net)
    if use_saliency:
        h, w = net.config.modulation_resolution
        S = bilinear_upsample(saliency_branch_forward(image, net), h, w)
        features = modulate(features, S)
    return head_forward(features, net)


def forward(image, net, use_saliency=True):
    """Class probabilities p(y|I), one row per image."""
    return softmax(logits(image, net, use_saliency))


def predict_saliency(net, image, blur=0.0):
    """Saliency map for one [3,H,W] image at the image's resolution.

    Images of another size are resampled to the network input size
    first.  A positive *blur* smooths the result with a Gaussian of
    that many pixels.
    """
    data = np.asarray(getattr(image, "data", image), dtype=np.float64)
    if data.ndim == 3:
        data = data[None]
    if data.ndim != 4 or data.shape[:2] != (1, 3):
        raise ShapeError("predict_saliency needs one [3,H,W] image, got %s"
                         % (data.shape,))
    height, width = data.shape[2:]
    x = Tensor(data)
    size = net.config.input_size
    if (height, width) != (size, size):
        x = resize(x, size, size)
    s = saliency_branch_forward(x, net)
    values = resize(s, height, width).data[0, 0]
    values = np.maximum(values, 0.0)
    if blur:
        values = blur_map(values, blur)
    return SaliencyMap(values)
