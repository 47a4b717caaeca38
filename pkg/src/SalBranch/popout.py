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
"""Synthetic pop-out stimuli.

Each image shows one target object among distractors on a gray
background.  The distractors differ from the target in exactly one
feature (color, orientation or size); color distractors take a faded
version of another palette color, so only the target is fully
saturated.  The class label encodes the target's shape and color::

    label = shape_index * len(PALETTE) + color_index

Synthetic fixations are drawn inside the target, optionally mixed with
center-biased noise fixations.  Every image is generated from its own
named sub-seed, so a dataset is a pure function of its PopoutSpec.
"""

import logging
import math
import os

import numpy as np

from SalBranch import GeneratorError
from SalBranch import netpbm
from SalBranch import seeding
from SalBranch.data import DatasetManifest
from SalBranch.data import ManifestEntry
from SalBranch.data import fixations_to_density
from SalBranch.data import write_fixations
from SalBranch.data import write_manifest
from SalBranch.maps import FixationSet
from SalBranch.training import ClassificationSet


logger = logging.getLogger(__name__)

BACKGROUND = 0.5

PALETTE = (
    (1.0, 0.0, 0.0),
    (0.0, 0.8, 0.0),
    (0.0, 0.0, 1.0),
    (1.0, 1.0, 0.0),
    (1.0, 0.0, 1.0),
    (0.0, 1.0, 1.0),
    (1.0, 0.5, 0.0),
    (0.5, 0.0, 1.0),
)

SHAPES = ("square", "triangle", "bar", "cross")

MAX_CLASSES = len(SHAPES) * len(PALETTE)

# free pixels kept between any two objects
GAP = 2

DISTRACTOR_SCALE = 0.6
DISTRACTOR_ANGLE = math.pi / 4
# share of a palette color kept when color distractors fade toward gray
DISTRACTOR_SATURATION = 0.4


class PopoutSpec:
    """Parameters of a generated pop-out dataset."""

    FEATURES = ("color", "orientation", "size")
    PLACEMENTS = ("uniform", "center")

    def __init__(self, canvas=64, num_classes=8, count=256, distractors=6,
                 feature="color", placement="uniform", fixations_per_image=10,
                 center_noise=0.0, pxva=8.0, test_fraction=0.2, seed=0):
        self.canvas = int(canvas)
        self.num_classes = int(num_classes)
        self.count = int(count)
        self.distractors = int(distractors)
        self.feature = feature
        self.placement = placement
        self.fixations_per_image = int(fixations_per_image)
        self.center_noise = float(center_noise)
        self.pxva = float(pxva)
        self.test_fraction = float(test_fraction)
        self.seed = int(seed)
        if not 1 <= self.num_classes <= MAX_CLASSES:
            raise GeneratorError(
                "%d classes requested but only %d shape/color combinations "
                "exist" % (self.num_classes, MAX_CLASSES))
        if self.canvas < 16:
            raise GeneratorError("canvas must be at least 16 pixels")
        if self.count < 0 or self.distractors < 0:
            raise GeneratorError("image and distractor counts must not be "
                                 "negative")
        if feature not in self.FEATURES:
            raise GeneratorError("unknown pop-out feature: %r" % (feature,))
        if placement not in self.PLACEMENTS:
            raise GeneratorError("unknown placement: %r" % (placement,))
        if self.fixations_per_image < 1:
            raise GeneratorError("at least one fixation per image is needed")
        if not 0 <= self.center_noise <= 1:
            raise GeneratorError("center_noise must lie in [0, 1]")
        if not 0 <= self.test_fraction <= 1:
            raise GeneratorError("test_fraction must lie in [0, 1]")
        if not self.pxva > 0:
            raise GeneratorError("pxva must be positive")

    @property
    def radius(self):
        return self.canvas / 12.0

    def as_dict(self):
        return {
            "canvas": self.canvas,
            "num_classes": self.num_classes,
            "count": self.count,
            "distractors": self.distractors,
            "feature": self.feature,
            "placement": self.placement,
            "fixations_per_image": self.fixations_per_image,
            "center_noise": self.center_noise,
            "pxva": self.pxva,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
        }


def class_identity(label):
    """Return ``(shape, color)`` for a class label."""
    return SHAPES[label // len(PALETTE)], PALETTE[label % len(PALETTE)]


def desaturated(color, amount=DISTRACTOR_SATURATION):
    """Blend *color* toward the background gray, keeping *amount* of it."""
    return tuple(BACKGROUND + amount * (c - BACKGROUND) for c in color)


def shape_mask(shape, cx, cy, radius, angle, size):
    """Rasterize one object on a size×size grid."""
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    dx, dy = xs - cx, ys - cy
    c, s = math.cos(angle), math.sin(angle)
    u = np.abs(c * dx + s * dy)
    v = -s * dx + c * dy
    r = radius
    if shape == "square":
        return (u <= 0.75 * r) & (np.abs(v) <= 0.75 * r)
    if shape == "bar":
        return (u <= 0.3 * r) & (np.abs(v) <= r)
    if shape == "cross":
        return (((u <= 0.25 * r) & (np.abs(v) <= r))
                | ((np.abs(v) <= 0.25 * r) & (u <= r)))
    if shape == "triangle":
        return ((v >= -0.75 * r) & (v <= 0.75 * r)
                & (u <= (v + 0.75 * r) / 2.0))
    raise ValueError("unknown shape: %r" % (shape,))


def placement_region(spec):
    """Interval of object centres that keeps every object on the canvas."""
    margin = 1.1 * spec.radius + 1
    return margin, spec.canvas - 1 - margin


def _place(gen, spec, taken, centered=False):
    lo, hi = placement_region(spec)
    spacing = 2 * 1.1 * spec.radius + GAP
    for _ in range(1000):
        if centered:
            cx, cy = gen.normal((spec.canvas - 1) / 2.0, spec.canvas / 6.0, 2)
            if not (lo <= cx <= hi and lo <= cy <= hi):
                continue
        else:
            cx, cy = gen.uniform(lo, hi, 2)
        if all(math.hypot(cx - x, cy - y) >= spacing for x, y in taken):
            return float(cx), float(cy)
    raise GeneratorError(
        "cannot place %d non-overlapping objects on a %d pixel canvas"
        % (spec.distractors + 1, spec.canvas))


def _center_fixations(gen, spec, n):
    mid = (spec.canvas - 1) / 2.0
    xy = np.rint(gen.normal(mid, spec.canvas / 6.0, (n, 2))).astype(int)
    return np.clip(xy, 0, spec.canvas - 1)


class PopoutDataset:
    """Images [N,3,S,S], labels, target masks, boxes and fixations.

    ``boxes[i]`` is ``(x0, y0, x1, y1)``, inclusive, around the target.
    """

    def __init__(self, spec, images, labels, masks, boxes, fixations):
        self.spec = spec
        self.images = images
        self.labels = labels
        self.masks = masks
        self.boxes = boxes
        self.fixations = fixations

    def __len__(self):
        return len(self.labels)

    def ids(self):
        width = max(4, len(str(max(len(self) - 1, 0))))
        return ["img%0*d" % (width, i) for i in range(len(self))]

    def classification_set(self):
        return ClassificationSet(self.images, self.labels)


def _generate_one(spec, index):
    gen = seeding.rng(spec.seed, "popout", index)
    size = spec.canvas
    label = int(gen.integers(0, spec.num_classes))
    shape, color = class_identity(label)
    image = np.full((3, size, size), BACKGROUND)
    target_center = _place(gen, spec, [],
                           centered=spec.placement == "center")
    taken = [target_center]
    for _ in range(spec.distractors):
        taken.append(_place(gen, spec, taken))

    other = color
    if spec.feature == "color":
        choices = [c for c in PALETTE if c != color]
        other = desaturated(choices[int(gen.integers(0, len(choices)))])
    for cx, cy in taken[1:]:
        radius, angle = spec.radius, 0.0
        if spec.feature == "size":
            radius *= DISTRACTOR_SCALE
        elif spec.feature == "orientation":
            angle = DISTRACTOR_ANGLE
        m = shape_mask(shape, cx, cy, radius, angle, size)
        image[:, m] = np.asarray(other)[:, None]
    mask = shape_mask(shape, target_center[0], target_center[1],
                      spec.radius, 0.0, size)
    image[:, mask] = np.asarray(color)[:, None]

    ys, xs = np.nonzero(mask)
    box = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    n_noise = int(round(spec.center_noise * spec.fixations_per_image))
    picks = gen.integers(0, len(xs), spec.fixations_per_image - n_noise)
    points = np.stack([xs[picks], ys[picks]], axis=1)
    if n_noise:
        points = np.concatenate([points,
                                 _center_fixations(gen, spec, n_noise)])
    return image, label, mask, box, FixationSet(points, size, size)


def gen_popout_dataset(spec):
    """Generate ``spec.count`` pop-out images."""
    parts = [_generate_one(spec, i) for i in range(spec.count)]
    size = spec.canvas
    if parts:
        images, labels, masks, boxes, fixations = zip(*parts)
    else:
        images, labels, masks, boxes, fixations = (), (), (), (), ()
    logger.debug("generated %d pop-out images", len(parts))
    return PopoutDataset(
        spec,
        np.array(images, dtype=np.float64).reshape(-1, 3, size, size),
        np.array(labels, dtype=np.int64),
        np.array(masks, dtype=bool).reshape(-1, size, size),
        np.array(boxes, dtype=np.int64).reshape(-1, 4),
        list(fixations))


def save_dataset(dataset, directory, name="popout"):
    """Write images, fixations, masks and densities plus a manifest.

    Returns the :class:`DatasetManifest` written to
    ``directory/manifest.json``.
    """
    os.makedirs(directory, exist_ok=True)
    entries = []
    for i, image_id in enumerate(dataset.ids()):
        path = os.path.join(directory, image_id)
        netpbm.write_image(path + ".ppm", dataset.images[i])
        write_fixations(path + ".csv", image_id, dataset.fixations[i])
        netpbm.write_map(path + "_mask.pgm", dataset.masks[i])
        density = fixations_to_density(dataset.fixations[i],
                                       dataset.spec.pxva)
        netpbm.write_map(path + "_density.pgm", density.as_peak().values)
        entries.append(ManifestEntry(
            image_id, path + ".ppm", path + ".csv",
            density=path + "_density.pgm", mask=path + "_mask.pgm",
            label=int(dataset.labels[i])))
    manifest = DatasetManifest(os.path.abspath(directory), entries,
                               dataset.spec.pxva, name)
    write_manifest(manifest, os.path.join(directory, "manifest.json"))
    return manifest
