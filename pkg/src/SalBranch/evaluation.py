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
"""Dataset-level evaluation and the center-bias fusion ablation.

Predictions live in a directory holding one ``<id>.pgm`` per manifest
entry.  Each prediction may be fused with a center-bias prior before
scoring:

- a :class:`MapPrior` applies one map to every image,
- a :class:`GaussianPrior` builds an unsupervised prior per image size,
- a :class:`SupervisedPrior` gives every image the map built from the
  half of the dataset it does not belong to.
"""

import csv
import io
import json
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from SalBranch import DataFormatError
from SalBranch import netpbm
from SalBranch import seeding
from SalBranch.data import fixations_to_density
from SalBranch.data import load_density
from SalBranch.data import load_fixations
from SalBranch.data import load_image
from SalBranch.maps import SaliencyMap
from SalBranch.maps import as_array
from SalBranch.metrics import MetricSettings
from SalBranch.metrics import auc_judd
from SalBranch.metrics import evaluate_all
from SalBranch.metrics import other_fixation_pool
from SalBranch.priors import FusionSpec
from SalBranch.priors import export_pgm
from SalBranch.priors import fuse
from SalBranch.priors import make_gaussian_cb
from SalBranch.priors import make_supervised_cb
from SalBranch.priors import resize_map


logger = logging.getLogger(__name__)


class AblationSettings:
    """Axes of the unsupervised part of the ablation grid."""

    def __init__(self, dva_factors=(2.0, 5.0, 14.0),
                 shapes=("circular", "ellipsoid"), modes=("sum", "mult")):
        self.dva_factors = tuple(float(d) for d in dva_factors)
        self.shapes = tuple(shapes)
        self.modes = tuple(modes)
        if not (self.dva_factors and self.shapes and self.modes):
            raise ValueError("every ablation axis needs at least one value")

    def as_dict(self):
        return {"dva_factors": list(self.dva_factors),
                "shapes": list(self.shapes),
                "modes": list(self.modes)}


class MapPrior:
    """One prior map, resampled to each image."""

    def __init__(self, cb):
        self.cb = as_array(cb)

    def for_entry(self, entry_id, height, width):
        return resize_map(self.cb, height, width)


class GaussianPrior:
    """Unsupervised prior built at each image's own size.

    Maps are cached per size; worker threads share one instance.
    """

    def __init__(self, spec):
        self.spec = spec
        self._cache = {}
        self._lock = threading.Lock()

    def for_entry(self, entry_id, height, width):
        key = (height, width)
        with self._lock:
            if key not in self._cache:
                spec = self.spec.replace(width=width, height=height)
                self._cache[key] = as_array(make_gaussian_cb(spec))
            return self._cache[key]


class SupervisedPrior:
    """Two split priors plus the map each image is fused with."""

    def __init__(self, cb_a, cb_b, assignment):
        self.maps = {"a": as_array(cb_a), "b": as_array(cb_b)}
        self.assignment = dict(assignment)

    def for_entry(self, entry_id, height, width):
        try:
            which = self.assignment[entry_id]
        except KeyError:
            raise DataFormatError("no supervised prior assigned to entry %r"
                                  % entry_id)
        return resize_map(self.maps[which], height, width)

    def write(self, directory):
        """Write ``cb_a.pgm``, ``cb_b.pgm`` and ``assignment.json``."""
        for which, values in sorted(self.maps.items()):
            export_pgm(values, os.path.join(directory, "cb_%s.pgm" % which))
        doc = {"cb_a": "cb_a.pgm", "cb_b": "cb_b.pgm",
               "assignment": self.assignment}
        with open(os.path.join(directory, "assignment.json"), "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")


def load_prior(path):
    """Read a prior written by ``salbranch centerbias``.

    *path* is either a single PGM map or the ``assignment.json`` of a
    supervised pair.
    """
    url = str(path)
    if not url.endswith(".json"):
        return MapPrior(netpbm.read_map(path))
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise DataFormatError("cannot read prior: %s" % e.strerror, url)
    except json.JSONDecodeError as e:
        raise DataFormatError("malformed prior: %s" % e.msg, url, e.lineno)
    if not isinstance(doc, dict) or not isinstance(doc.get("assignment"),
                                                   dict):
        raise DataFormatError("supervised prior lacks an assignment", url)
    bad = sorted(k for k, v in doc["assignment"].items()
                 if v not in ("a", "b"))
    if bad:
        raise DataFormatError("entries %s are assigned neither 'a' nor 'b'"
                              % ", ".join(bad), url)
    here = os.path.dirname(os.path.abspath(url))
    maps = [netpbm.read_map(os.path.join(here, doc.get(key, key + ".pgm")))
            for key in ("cb_a", "cb_b")]
    return SupervisedPrior(maps[0], maps[1], doc["assignment"])


def supervised_prior(manifest, seed, sigma_dva=1.0, ground_truths=None):
    """Split the manifest's ground-truth maps into a supervised prior.

    Maps of differing sizes are resampled to the size of the first.
    *ground_truths* may supply the maps already loaded, in manifest
    order.
    """
    entries = list(manifest)
    if ground_truths is None:
        ground_truths = [ground_truth(e, fixations_for(e), manifest.pxva,
                                      sigma_dva) for e in entries]
    maps = [as_array(gt) for gt in ground_truths]
    if maps:
        height, width = maps[0].shape
        maps = [m if m.shape == (height, width)
                else resize_map(m, height, width) for m in maps]
    cb = make_supervised_cb(maps, seeding.derive_seed(seed, "supervised"))
    return SupervisedPrior(cb.cb_a, cb.cb_b,
                           {e.id: a for e, a in zip(entries, cb.assignment)})


def image_size(entry):
    """Return ``(height, width)`` of an entry's image."""
    return load_image(entry.image).shape[1:]


def fixations_for(entry):
    height, width = image_size(entry)
    return load_fixations(entry.fixations, width, height, image_id=entry.id)


def ground_truth(entry, fix, pxva, sigma_dva=1.0):
    """The entry's density map, smoothed from its fixations if absent."""
    if entry.density is not None:
        return load_density(entry.density)
    return fixations_to_density(fix, pxva, sigma_dva)


def load_prediction(pred_dir, entry):
    path = os.path.join(pred_dir, entry.id + ".pgm")
    if not os.path.isfile(path):
        raise DataFormatError("no prediction for entry %r" % entry.id, path)
    return SaliencyMap(netpbm.read_map(path))


def apply_prior(sal, prior, fusion, entry_id):
    if prior is None:
        return sal
    values = as_array(sal)
    cb = prior.for_entry(entry_id, *values.shape)
    return fuse(values, cb, fusion)


class _Item:
    """Everything known about one manifest entry before scoring."""

    def __init__(self, entry, prediction, fixations, gt):
        self.entry = entry
        self.prediction = prediction
        self.fixations = fixations
        self.gt = gt


def _load_items(manifest, pred_dir, sigma_dva, pool):
    def load(entry):
        fix = fixations_for(entry)
        return _Item(entry, load_prediction(pred_dir, entry), fix,
                     ground_truth(entry, fix, manifest.pxva, sigma_dva))
    return list(pool.map(load, manifest))


def evaluate_dataset(manifest, pred_dir, settings=None, seed=0, prior=None,
                     fusion=None, workers=1, heatmap_dir=None):
    """Score every prediction in *pred_dir* against *manifest*.

    Returns the :class:`~SalBranch.metrics.MetricRow` list in manifest
    order.  With *heatmap_dir* the fused maps are written there as
    ``<id>.pgm``.
    """
    if settings is None:
        settings = MetricSettings()
    if fusion is None:
        fusion = FusionSpec()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        items = _load_items(manifest, pred_dir, settings.sigma_dva, pool)
        fixation_sets = [item.fixations for item in items]

        def score(index):
            item = items[index]
            fix = item.fixations
            sal = apply_prior(item.prediction, prior, fusion, item.entry.id)
            if heatmap_dir is not None:
                export_pgm(sal, os.path.join(heatmap_dir,
                                             item.entry.id + ".pgm"))
            others = other_fixation_pool(
                fixation_sets, index, fix.width, fix.height,
                settings.pool_images, seed)
            return evaluate_all(
                sal, fix, item.gt, pool=others,
                seed=seeding.derive_seed(seed, "eval", item.entry.id),
                settings=settings, image_id=item.entry.id)

        rows = list(pool.map(score, range(len(items))))
    logger.info("evaluated %d predictions from %s", len(rows), pred_dir)
    return rows


def ablation_rows(settings):
    """Row labels and priors' parameters of the ablation grid."""
    rows = []
    for shape in settings.shapes:
        for dva in settings.dva_factors:
            for mode in settings.modes:
                rows.append(("UCB %s dva=%g %s" % (shape, dva, mode),
                             ("ucb", shape, dva, mode)))
    for mode in ("sum", "mult"):
        rows.append(("SCB %s" % mode, ("scb", None, None, mode)))
    return rows


def ablation_column(manifest, pred_dir, settings, cb_settings, seed=0,
                    sigma_dva=1.0, workers=1, thresholds="all"):
    """Mean AUC-Judd of every grid row for one dataset.

    *thresholds* selects the AUC-Judd variant, as in
    :class:`~SalBranch.metrics.MetricSettings`.
    """
    with ThreadPoolExecutor(max_workers=workers) as pool:
        items = _load_items(manifest, pred_dir, sigma_dva, pool)
    scb = supervised_prior(manifest, seed,
                           ground_truths=[item.gt for item in items])
    column = []
    for label, (kind, shape, dva, mode) in ablation_rows(settings):
        if kind == "ucb":
            spec = cb_settings.spec(pxva=manifest.pxva, shape=shape,
                                    dva_factor=dva)
            prior = GaussianPrior(spec)
        else:
            prior = scb
        fusion = FusionSpec(mode=mode)
        scores = [auc_judd(apply_prior(item.prediction, prior, fusion,
                                       item.entry.id), item.fixations,
                           thresholds)
                  for item in items]
        column.append(float(np.mean(scores)))
        logger.debug("%s %s: %.4f", manifest.name, label, column[-1])
    return column


def ablation_table(datasets, settings, cb_settings, seed=0, sigma_dva=1.0,
                   workers=1, thresholds="all"):
    """Run the grid over ``(manifest, pred_dir)`` pairs.

    Returns ``(header, rows)`` with one column per dataset.
    """
    labels = [label for label, _ in ablation_rows(settings)]
    columns = [ablation_column(m, d, settings, cb_settings, seed,
                               sigma_dva, workers, thresholds)
               for m, d in datasets]
    header = ["prior"] + [m.name for m, _ in datasets]
    rows = [[label] + [c[i] for c in columns]
            for i, label in enumerate(labels)]
    return header, rows


def ablation_csv(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([row[0]] + [repr(v) for v in row[1:]])
    return out.getvalue()

