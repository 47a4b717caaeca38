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
"""Value types for maps defined on an image's pixel grid.

All maps are indexed ``values[y, x]``; fixations are stored as
``(x, y)`` pairs.
"""

import numpy as np

from SalBranch import ShapeError


def _frozen(values):
    values = np.array(values, dtype=np.float64)
    values.flags.writeable = False
    return values


class SaliencyMap:
    """Single-channel nonnegative map tied to an image's pixel grid."""

    def __init__(self, values):
        values = _frozen(values)
        if values.ndim != 2:
            raise ShapeError("saliency maps are 2-D, got shape %s"
                             % (values.shape,))
        if not np.isfinite(values).all():
            raise ValueError("saliency map contains non-finite values")
        if (values < 0).any():
            raise ValueError("saliency map contains negative values")
        self.values = values

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def __repr__(self):
        return "<SaliencyMap %dx%d>" % (self.width, self.height)


class DensityMap(SaliencyMap):
    """Fixation density map.

    ``form`` is ``"distribution"`` (values sum to 1) or ``"peak"``
    (maximum is 1, or the map is all zeros).
    """

    FORMS = ("distribution", "peak")

    def __init__(self, values, form="distribution"):
        SaliencyMap.__init__(self, values)
        if form not in self.FORMS:
            raise ValueError("unknown density map form: %r" % (form,))
        if form == "distribution" and abs(self.values.sum() - 1.0) > 1e-9:
            raise ValueError("distribution-form density map sums to %r"
                             % float(self.values.sum()))
        self.form = form

    def as_distribution(self):
        if self.form == "distribution":
            return self
        total = self.values.sum()
        if total <= 0:
            raise ValueError("an all-zero density map has no distribution")
        return DensityMap(self.values / total, "distribution")

    def as_peak(self):
        if self.form == "peak":
            return self
        return DensityMap(self.values / self.values.max(), "peak")

    def __repr__(self):
        return "<DensityMap %dx%d %s>" % (self.width, self.height, self.form)


class FixationSet:
    """Integer pixel coordinates of the fixations recorded for one image."""

    def __init__(self, points, width, height):
        points = np.array(points, dtype=np.int64).reshape(-1, 2)
        if width <= 0 or height <= 0:
            raise ShapeError("image size must be positive, got %dx%d"
                             % (width, height))
        xs, ys = points[:, 0], points[:, 1]
        bad = (xs < 0) | (xs >= width) | (ys < 0) | (ys >= height)
        if bad.any():
            x, y = points[np.argmax(bad)]
            raise ValueError("fixation (%d, %d) outside a %dx%d image"
                             % (x, y, width, height))
        points.flags.writeable = False
        self.points = points
        self.width = width
        self.height = height

    @property
    def xs(self):
        return self.points[:, 0]

    @property
    def ys(self):
        return self.points[:, 1]

    def __len__(self):
        return len(self.points)

    def mask(self):
        m = np.zeros((self.height, self.width), dtype=bool)
        m[self.ys, self.xs] = True
        return m

    def values_at(self, values):
        """Return ``values[y, x]`` for every fixation, duplicates kept."""
        return np.asarray(values)[self.ys, self.xs]

    def rescaled(self, width, height):
        """Map the points onto a width×height grid of the same extent."""
        if (width, height) == (self.width, self.height):
            return self
        xs = np.floor((self.xs + 0.5) * width / self.width).astype(int)
        ys = np.floor((self.ys + 0.5) * height / self.height).astype(int)
        points = np.stack([np.clip(xs, 0, width - 1),
                           np.clip(ys, 0, height - 1)], axis=1)
        return FixationSet(points, width, height)

    def __repr__(self):
        return "<FixationSet %d points on %dx%d>" % (
            len(self), self.width, self.height)


def as_array(m):
    """Return the 2-D float array behind a map or array-like."""
    values = getattr(m, "values", m)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError("maps are 2-D, got shape %s" % (values.shape,))
    return values
