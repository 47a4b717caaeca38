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
"""Dataset ingestion.

A dataset is described by a JSON manifest::

    {"name": "toronto", "pxva": 32,
     "entries": [{"id": "img001", "image": "img001.png",
                  "fixations": "img001.csv",
                  "density": "img001_density.pgm",
                  "mask": "img001_mask.pgm",
                  "label": 3}]}

Paths are relative to the manifest's directory; ``density``, ``mask``
and ``label`` are optional.  Fixation files are CSV with the header
``image_id,participant_id,x,y``.
"""

import collections
import csv
import json
import logging
import os

import numpy as np
import png

from SalBranch import DataFormatError
from SalBranch import MetricError
from SalBranch import netpbm
from SalBranch import seeding
from SalBranch.maps import DensityMap
from SalBranch.maps import FixationSet
from SalBranch.priors import blur_map
from SalBranch.priors import dva_to_sigma
from SalBranch.tensor import Tensor


logger = logging.getLogger(__name__)

FIXATION_HEADER = ["image_id", "participant_id", "x", "y"]

# Pixels per degree of visual angle of common eye-tracking setups.
PXVA = {
    "toronto": 32,
    "mit1003": 35,
    "kth": 34,
    "cat2000": 38,
    "sid4vam": 40,
}


class ManifestEntry:

    OPTIONAL = ("density", "mask")

    def __init__(self, id, image, fixations, density=None, mask=None,
                 label=None):
        self.id = id
        self.image = image
        self.fixations = fixations
        self.density = density
        self.mask = mask
        self.label = label

    def as_dict(self, root):
        d = {"id": self.id,
             "image": os.path.relpath(self.image, root),
             "fixations": os.path.relpath(self.fixations, root)}
        for key in self.OPTIONAL:
            path = getattr(self, key)
            if path is not None:
                d[key] = os.path.relpath(path, root)
        if self.label is not None:
            d["label"] = self.label
        return d

    def __repr__(self):
        return "<ManifestEntry %s>" % self.id


class DatasetManifest:
    """Named collection of entries whose file paths are absolute."""

    def __init__(self, root, entries, pxva, name):
        self.root = root
        self.entries = list(entries)
        self.pxva = pxva
        self.name = name

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def subset(self, indices):
        return DatasetManifest(self.root, [self.entries[i] for i in indices],
                               self.pxva, self.name)

    def as_dict(self):
        return {"name": self.name, "pxva": self.pxva,
                "entries": [e.as_dict(self.root) for e in self.entries]}


def _require(cond, msg, url):
    if not cond:
        raise DataFormatError(msg, url)


def load_manifest(path):
    """Read and validate a manifest; every referenced file must exist."""
    url = str(path)
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise DataFormatError("cannot read manifest: %s" % e.strerror, url)
    except json.JSONDecodeError as e:
        raise DataFormatError("malformed manifest: %s" % e.msg, url,
                              e.lineno)
    _require(isinstance(doc, dict), "manifest must be a JSON object", url)
    for key in ("name", "pxva", "entries"):
        _require(key in doc, "manifest lacks %r" % key, url)
    _require(isinstance(doc["name"], str), "manifest name must be a string",
             url)
    pxva = doc["pxva"]
    _require(isinstance(pxva, (int, float)) and not isinstance(pxva, bool)
             and pxva > 0, "manifest pxva must be a positive number", url)
    _require(isinstance(doc["entries"], list),
             "manifest entries must be a list", url)
    root = os.path.dirname(os.path.abspath(path))
    entries = []
    seen = set()
    for i, item in enumerate(doc["entries"]):
        where = "entry %d" % i
        _require(isinstance(item, dict), "%s is not an object" % where, url)
        for key in ("id", "image", "fixations"):
            _require(isinstance(item.get(key), str),
                     "%s lacks a string %r" % (where, key), url)
        where = "entry %r" % item["id"]
        _require(item["id"] not in seen, "duplicate %s" % where, url)
        seen.add(item["id"])
        unknown = set(item) - {"id", "image", "fixations", "density",
                               "mask", "label"}
        _require(not unknown, "%s has unknown keys %s"
                 % (where, ", ".join(sorted(unknown))), url)
        files = {}
        for key in ("image", "fixations") + ManifestEntry.OPTIONAL:
            if item.get(key) is None:
                continue
            _require(isinstance(item[key], str),
                     "%s: %r must be a path" % (where, key), url)
            full = os.path.join(root, item[key])
            _require(os.path.isfile(full), "%s: %s file %s does not exist"
                     % (where, key, item[key]), url)
            files[key] = full
        label = item.get("label")
        _require(label is None or (isinstance(label, int)
                                   and not isinstance(label, bool)
                                   and label >= 0),
                 "%s: label must be a nonnegative integer" % where, url)
        entries.append(ManifestEntry(item["id"], label=label, **files))
    logger.debug("loaded manifest %s with %d entries", url, len(entries))
    return DatasetManifest(root, entries, pxva, doc["name"])


def write_manifest(manifest, path):
    with open(path, "w") as f:
        json.dump(manifest.as_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def _load_png(path):
    try:
        width, height, rows, info = png.Reader(filename=path).asRGBA()
        samples = np.array([np.asarray(row) for row in rows],
                           dtype=np.float64)
    except (png.Error, EOFError, ValueError) as e:
        raise DataFormatError("unreadable PNG: %s" % e, path)
    samples = samples.reshape(height, width, 4)[:, :, :3]
    return samples / (2 ** info["bitdepth"] - 1)


def load_image(path):
    """Read a PPM (P6) or PNG image as a [3,H,W] tensor in [0, 1]."""
    url = str(path)
    with open(path, "rb") as f:
        magic = f.read(8)
    if magic.startswith(png.signature):
        rgb = _load_png(url)
    elif magic[:2] == b"P6":
        samples, maxval = netpbm.read_pnm(path)
        rgb = samples / maxval
    else:
        raise DataFormatError("unsupported image format", url)
    return Tensor(np.moveaxis(rgb, -1, 0))


def load_fixations(path, width, height, image_id=None):
    """Read a fixation CSV for an image of width×height pixels.

    With *image_id* only the rows for that image are kept.
    """
    url = str(path)
    points = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return FixationSet(points, width, height)
        if [h.strip() for h in header] != FIXATION_HEADER:
            raise DataFormatError("fixation file header must be %s"
                                  % ",".join(FIXATION_HEADER), url, 1)
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            lineno = reader.line_num
            if len(row) != 4:
                raise DataFormatError("expected 4 fields, found %d"
                                      % len(row), url, lineno)
            if image_id is not None and row[0].strip() != image_id:
                continue
            try:
                x, y = (int(np.floor(float(v))) for v in row[2:])
            except ValueError:
                raise DataFormatError("malformed coordinates %r, %r"
                                      % (row[2], row[3]), url, lineno)
            if not (0 <= x < width and 0 <= y < height):
                raise DataFormatError(
                    "fixation (%d, %d) is outside the %dx%d image"
                    % (x, y, width, height), url, lineno)
            points.append((x, y))
    return FixationSet(points, width, height)


def write_fixations(path, image_id, fix, participant="synthetic"):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FIXATION_HEADER)
        for x, y in fix.points:
            writer.writerow([image_id, participant, int(x), int(y)])


def fixations_to_density(fix, pxva, sigma_dva=1.0):
    """Smooth the fixations into a density map that sums to 1.

    The Gaussian's full width at half maximum is *sigma_dva* degrees.
    """
    if len(fix) == 0:
        raise MetricError("cannot build a density map from no fixations")
    impulses = np.zeros((fix.height, fix.width))
    np.add.at(impulses, (fix.ys, fix.xs), 1.0)
    density = blur_map(impulses, dva_to_sigma(sigma_dva, pxva))
    return DensityMap(density / density.sum(), "distribution")


def load_density(path):
    values = netpbm.read_map(path)
    if values.sum() <= 0:
        raise DataFormatError("density map is all zeros", str(path))
    return DensityMap(values / values.sum(), "distribution")


def load_mask(path):
    return netpbm.read_map(path) >= 0.5


Partition = collections.namedtuple("Partition", ["train", "test"])


def split(items, fractions, seed):
    """Randomly partition *items* into train and test parts.

    *fractions* is the train share or a ``(train, test)`` pair.
    Manifests and classification sets are split into objects of their
    own type; any other sequence into lists in original order.
    """
    if isinstance(fractions, (tuple, list)):
        train_share = fractions[0] / float(sum(fractions))
    else:
        train_share = float(fractions)
    if not 0 <= train_share <= 1:
        raise ValueError("train share must lie in [0, 1]: %r" % (fractions,))
    n = len(items)
    order = seeding.rng(seed, "split").permutation(n)
    n_train = int(round(train_share * n))
    train = sorted(int(i) for i in order[:n_train])
    test = sorted(int(i) for i in order[n_train:])
    if hasattr(items, "subset"):
        return Partition(items.subset(train), items.subset(test))
    items = list(items)
    return Partition([items[i] for i in train], [items[i] for i in test])
