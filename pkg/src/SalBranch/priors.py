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
"""Center-bias priors and their fusion with saliency maps.

Unsupervised priors are Gaussians centred on the image whose width is
given in degrees of visual angle (DVA) and converted to pixels with
the display's pixels-per-degree (pxva).  Supervised priors average the
ground-truth density maps of one half of a dataset and are applied to
the images of the other half.
"""

import collections
import logging
import math

import numpy as np
from scipy import ndimage

from SalBranch import SalBranchError
from SalBranch import ShapeError
from SalBranch import netpbm
from SalBranch import seeding
from SalBranch.maps import SaliencyMap
from SalBranch.maps import as_array
from SalBranch.tensor import interpolation_matrix


logger = logging.getLogger(__name__)

FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Gaussian support is cut off this many sigmas from the centre.
TRUNCATE = 3.0


class CenterBiasSpec:
    """Parameters that fully determine an unsupervised center-bias map."""

    SHAPES = ("circular", "ellipsoid")

    def __init__(self, dva_factor=14.0, pxva=35.0, shape="circular",
                 horizontal_stretch=1.5, width=64, height=64):
        self.dva_factor = float(dva_factor)
        self.pxva = float(pxva)
        self.shape = shape
        self.horizontal_stretch = float(horizontal_stretch)
        self.width = int(width)
        self.height = int(height)
        if not (self.dva_factor > 0 and self.pxva > 0):
            raise ValueError("dva_factor and pxva must be positive, got "
                             "%r and %r" % (dva_factor, pxva))
        if not self.horizontal_stretch >= 1:
            raise ValueError("horizontal_stretch must be at least 1, got %r"
                             % (horizontal_stretch,))
        if shape not in self.SHAPES:
            raise ValueError("unknown center-bias shape: %r" % (shape,))
        if self.width < 1 or self.height < 1:
            raise ShapeError("center-bias map must have pixels, got %dx%d"
                             % (self.width, self.height))

    @property
    def sigma_y(self):
        return dva_to_sigma(self.dva_factor, self.pxva)

    @property
    def sigma_x(self):
        if self.shape == "ellipsoid":
            return self.sigma_y * self.horizontal_stretch
        return self.sigma_y

    def replace(self, **kw):
        values = self.as_dict()
        values.update(kw)
        return CenterBiasSpec(**values)

    def as_dict(self):
        return {
            "dva_factor": self.dva_factor,
            "pxva": self.pxva,
            "shape": self.shape,
            "horizontal_stretch": self.horizontal_stretch,
            "width": self.width,
            "height": self.height,
        }

    def __repr__(self):
        return "<CenterBiasSpec %r>" % (self.as_dict(),)


class FusionSpec:

    MODES = ("sum", "mult")
    NORMALIZATIONS = ("minmax",)

    def __init__(self, mode="sum", normalization="minmax"):
        if mode not in self.MODES:
            raise ValueError("unknown fusion mode: %r" % (mode,))
        if normalization not in self.NORMALIZATIONS:
            raise ValueError("unknown normalization: %r" % (normalization,))
        self.mode = mode
        self.normalization = normalization

    def as_dict(self):
        return {"mode": self.mode, "normalization": self.normalization}

    def __repr__(self):
        return "<FusionSpec %s/%s>" % (self.mode, self.normalization)


def dva_to_sigma(dva_factor, pxva):
    """Gaussian sigma in pixels for a full width of dva_factor degrees."""
    if not (dva_factor > 0 and pxva > 0):
        raise ValueError("dva_factor and pxva must be positive, got %r "
                         "and %r" % (dva_factor, pxva))
    return dva_factor * pxva / FWHM_FACTOR


def make_gaussian_cb(spec):
    """Peak-normalized Gaussian centred at ((W-1)/2, (H-1)/2)."""
    x = np.arange(spec.width) - (spec.width - 1) / 2.0
    y = np.arange(spec.height) - (spec.height - 1) / 2.0
    ax = x ** 2 / (2.0 * spec.sigma_x ** 2)
    ay = y ** 2 / (2.0 * spec.sigma_y ** 2)
    values = np.exp(-(ay[:, None] + ax[None, :]))
    return SaliencyMap(values / values.max())


SupervisedCenterBias = collections.namedtuple(
    "SupervisedCenterBias", ["cb_a", "cb_b", "assignment"])
SupervisedCenterBias.__doc__ = """Split-based center bias.

``assignment[i]`` is ``"a"`` or ``"b"``: the prior image *i* must be
evaluated with, which is the one built from the other half.
"""


def make_supervised_cb(density_maps, split_seed):
    """Build a prior from each half of a random split of *density_maps*."""
    arrays = [as_array(m) for m in density_maps]
    if len(arrays) < 2:
        raise SalBranchError(
            "a supervised center bias needs at least 2 density maps, got %d"
            % len(arrays))
    height, width = arrays[0].shape
    for i, a in enumerate(arrays):
        if a.shape[0] != height:
            raise ShapeError("density map %d has height %d, expected %d"
                             % (i, a.shape[0], height), dimension="height")
        if a.shape[1] != width:
            raise ShapeError("density map %d has width %d, expected %d"
                             % (i, a.shape[1], width), dimension="width")
    order = seeding.rng(split_seed, "supervised-cb").permutation(len(arrays))
    half = len(arrays) // 2
    part_a, part_b = sorted(order[:half]), sorted(order[half:])
    cb_a = _peak_normalized(np.mean([arrays[i] for i in part_a], axis=0))
    cb_b = _peak_normalized(np.mean([arrays[i] for i in part_b], axis=0))
    assignment = ["b"] * len(arrays)
    for i in part_b:
        assignment[i] = "a"
    logger.debug("supervised center bias: %d maps in split a, %d in b",
                 len(part_a), len(part_b))
    return SupervisedCenterBias(cb_a, cb_b, assignment)


def _peak_normalized(values):
    peak = values.max()
    if peak > 0:
        values = values / peak
    return SaliencyMap(values)


def normalize_map(m, method="minmax"):
    """Rescale to [0, 1] by (v - min) / (max - min); constant maps give 0."""
    if method != "minmax":
        raise ValueError("unknown normalization: %r" % (method,))
    values = as_array(m)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros(values.shape)
    return (values - lo) / (hi - lo)


def _fusion_operand(m, method):
    # a constant positive operand is neutral for both fusion regimes
    values = as_array(m)
    if values.max() == values.min() and values.max() > 0:
        return np.ones(values.shape)
    return normalize_map(values, method)


def fuse(sal, cb, spec):
    """Combine a saliency map with a prior; the result lies in [0, 1]."""
    s = as_array(sal)
    c = as_array(cb)
    if s.shape != c.shape:
        raise ShapeError(
            "cannot fuse a %dx%d map with a %dx%d prior"
            % (s.shape[1], s.shape[0], c.shape[1], c.shape[0]),
            dimension="height" if s.shape[0] != c.shape[0] else "width")
    s = _fusion_operand(s, spec.normalization)
    c = _fusion_operand(c, spec.normalization)
    if spec.mode == "sum":
        fused = (s + c) / 2.0
    else:
        fused = s * c
    return SaliencyMap(normalize_map(fused, spec.normalization))


def resize_map(m, height, width):
    """Bilinear resample of a 2-D map, half-pixel centres, edges clamped."""
    values = as_array(m)
    if values.shape == (height, width):
        return values.copy()
    ay = interpolation_matrix(values.shape[0], height)
    ax = interpolation_matrix(values.shape[1], width)
    return ay @ values @ ax.T


def blur_map(m, sigma):
    """Gaussian blur with the window cut off at 3 sigma on each side."""
    values = as_array(m)
    if sigma < 0:
        raise ValueError("blur sigma must not be negative: %r" % (sigma,))
    if sigma == 0:
        return values.copy()
    return ndimage.gaussian_filter(values, sigma, mode="constant",
                                   truncate=TRUNCATE)


def second_moments(m):
    """Return (sigma_x, sigma_y) of a map treated as a distribution."""
    values = as_array(m)
    total = values.sum()
    if total <= 0:
        raise ValueError("an all-zero map has no moments")
    p = values / total
    ys, xs = np.indices(values.shape)
    mx, my = (p * xs).sum(), (p * ys).sum()
    return (math.sqrt((p * (xs - mx) ** 2).sum()),
            math.sqrt((p * (ys - my) ** 2).sum()))


def export_pgm(m, path):
    """Write a map, scaled by 65535, as a 16-bit PGM."""
    netpbm.write_map(path, as_array(m))
