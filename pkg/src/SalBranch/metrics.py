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
"""Fixation-prediction metrics.

Location-based metrics (the three AUC variants and NSS) score a
saliency map against the fixated pixels of a :class:`FixationSet`;
the map is resampled to the fixations' grid when the sizes differ.
Distribution-based metrics (CC, KL, SIM) compare a map with a
ground-truth density map, resampling the prediction to the
ground-truth resolution.

Degenerate inputs (constant or all-zero maps) never raise.  The metric
returns its chance or zero value as a :class:`Score` whose ``flagged``
attribute is true.

All AUCs count ties between a positive and a negative sample as one
half, so they are invariant under strictly increasing transforms of
the map.
"""

import logging
import math

import numpy as np
from scipy import integrate
from scipy import stats

from SalBranch import MetricError
from SalBranch import ShapeError
from SalBranch import seeding
from SalBranch.maps import FixationSet
from SalBranch.maps import as_array
from SalBranch.priors import resize_map


logger = logging.getLogger(__name__)

METRICS = ("auc_judd", "auc_borji", "sauc", "nss", "cc", "kl", "sim")

EPSILON = 1e-12


class Score(float):
    """A metric value; ``flagged`` marks a degenerate evaluation."""

    def __new__(cls, value, flagged=False):
        self = float.__new__(cls, value)
        self.flagged = flagged
        return self

    def __repr__(self):
        r = float.__repr__(self)
        return r + " (flagged)" if self.flagged else r


class MetricSettings:

    THRESHOLDS = ("all", "fixations")

    def __init__(self, n_splits=100, auc_judd_thresholds="all",
                 sigma_dva=1.0, pool_images=None):
        if int(n_splits) < 1:
            raise ValueError("n_splits must be positive: %r" % (n_splits,))
        if auc_judd_thresholds not in self.THRESHOLDS:
            raise ValueError("unknown AUC-Judd thresholds: %r"
                             % (auc_judd_thresholds,))
        if not sigma_dva > 0:
            raise ValueError("sigma_dva must be positive: %r" % (sigma_dva,))
        self.n_splits = int(n_splits)
        self.auc_judd_thresholds = auc_judd_thresholds
        self.sigma_dva = float(sigma_dva)
        if pool_images is not None and int(pool_images) < 1:
            raise ValueError("pool_images must be positive: %r"
                             % (pool_images,))
        self.pool_images = None if pool_images is None else int(pool_images)

    def as_dict(self):
        return {"n_splits": self.n_splits,
                "auc_judd_thresholds": self.auc_judd_thresholds,
                "sigma_dva": self.sigma_dva,
                "pool_images": self.pool_images}


def _on_grid(sal, fix):
    if not isinstance(fix, FixationSet):
        raise TypeError("expected a FixationSet, got %r" % (fix,))
    if len(fix) == 0:
        raise MetricError("cannot evaluate against an empty fixation set")
    values = as_array(sal)
    if values.shape != (fix.height, fix.width):
        values = resize_map(values, fix.height, fix.width)
    return values


def _is_constant(values):
    return values.max() == values.min()


def rank_auc(positives, negatives):
    """Area under the ROC curve of *positives* against *negatives*.

    Computed from the Mann-Whitney U statistic with mid-ranks, which
    equals the trapezoidal area of the ROC curve swept over every
    distinct value.
    """
    positives = np.asarray(positives, dtype=np.float64).ravel()
    negatives = np.asarray(negatives, dtype=np.float64).ravel()
    n_pos, n_neg = len(positives), len(negatives)
    if not n_pos or not n_neg:
        raise MetricError("an AUC needs positive and negative samples")
    ranks = stats.rankdata(np.concatenate([positives, negatives]))
    u = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _fixated_threshold_auc(values, fix):
    # thresholds at the fixated values only, linear between them
    n_pixels = values.size
    n_fix = len(fix)
    at_fix = np.sort(fix.values_at(values))[::-1]
    tp = [0.0]
    fp = [0.0]
    for i, threshold in enumerate(at_fix):
        above = np.count_nonzero(values >= threshold)
        tp.append((i + 1) / n_fix)
        fp.append(min(1.0, max(0.0, (above - i - 1) / (n_pixels - n_fix))))
    tp.append(1.0)
    fp.append(1.0)
    return integrate.trapezoid(tp, fp)


def auc_judd(sal, fix, thresholds="all"):
    """AUC with fixated pixels as positives and all others as negatives.

    With *thresholds* ``"all"`` every distinct map value is a
    threshold, giving the exact ROC area.  ``"fixations"`` uses only
    the values at fixated pixels, as common benchmark code does.
    """
    values = _on_grid(sal, fix)
    if _is_constant(values):
        return Score(0.5, flagged=True)
    mask = fix.mask()
    if mask.all():
        return Score(0.5, flagged=True)
    if thresholds == "fixations":
        return Score(_fixated_threshold_auc(values, fix))
    if thresholds != "all":
        raise ValueError("unknown AUC-Judd thresholds: %r" % (thresholds,))
    return Score(rank_auc(fix.values_at(values), values[~mask]))


def auc_borji(sal, fix, n_splits=100, seed=0):
    """Mean AUC against |fix| uniformly drawn pixels, over *n_splits*."""
    values = _on_grid(sal, fix)
    flagged = _is_constant(values)
    positives = fix.values_at(values)
    flat = values.ravel()
    gen = seeding.rng(seed, "auc-borji")
    aucs = [rank_auc(positives,
                     flat[gen.integers(0, flat.size, size=len(positives))])
            for _ in range(n_splits)]
    return Score(np.mean(aucs), flagged=flagged)


def sauc(sal, fix, other_fix, n_splits=100, seed=0):
    """Shuffled AUC: negatives are fixations of other images."""
    values = _on_grid(sal, fix)
    if other_fix is None or len(other_fix) == 0:
        raise MetricError("shuffled AUC needs a nonempty pool of other "
                          "images' fixations")
    pool = other_fix.rescaled(fix.width, fix.height).values_at(values)
    positives = fix.values_at(values)
    count = min(len(positives), len(pool))
    gen = seeding.rng(seed, "sauc")
    aucs = [rank_auc(positives, pool[gen.permutation(len(pool))[:count]])
            for _ in range(n_splits)]
    return Score(np.mean(aucs), flagged=_is_constant(values))


def other_fixation_pool(fixation_sets, index, width, height,
                        max_images=None, seed=0):
    """Pool the fixations of every set except ``fixation_sets[index]``.

    Points are mapped onto a width×height grid.  With *max_images* a
    seeded random subset of the other images contributes.
    """
    others = [i for i in range(len(fixation_sets)) if i != index]
    if max_images is not None and len(others) > max_images:
        gen = seeding.rng(seed, "sauc-pool", index)
        others = sorted(gen.choice(others, size=max_images, replace=False))
    points = [fixation_sets[i].rescaled(width, height).points
              for i in others]
    if points:
        points = np.concatenate(points)
    return FixationSet(points, width, height)


def nss(sal, fix):
    """Mean z-scored saliency at the fixated pixels."""
    values = _on_grid(sal, fix)
    std = values.std()
    if std == 0:
        return Score(0.0, flagged=True)
    z = (values - values.mean()) / std
    return Score(fix.values_at(z).mean())


def _resized_to(sal, gt):
    g = as_array(gt)
    s = as_array(sal)
    if s.shape != g.shape:
        s = resize_map(s, *g.shape)
    return s, g


def cc(sal, gt):
    """Pearson correlation of the two maps as flat vectors."""
    s, g = _resized_to(sal, gt)
    if _is_constant(s) or _is_constant(g):
        return Score(0.0, flagged=True)
    a = s - s.mean()
    b = g - g.mean()
    r = (a * b).sum() / math.sqrt((a * a).sum() * (b * b).sum())
    return Score(min(1.0, max(-1.0, r)))


def _distribution(values):
    total = values.sum()
    if total <= 0:
        return np.full(values.shape, 1.0 / values.size), True
    return values / total, False


def kl_div(gt, sal):
    """KL(gt || sal) with both maps normalized to sum 1."""
    s, g = _resized_to(sal, gt)
    p, flag_g = _distribution(g)
    q, flag_s = _distribution(s)
    kl = (p * np.log(EPSILON + p / (q + EPSILON))).sum()
    return Score(max(0.0, kl), flagged=flag_g or flag_s)


def sim(sal, gt):
    """Histogram intersection of the two maps as distributions."""
    s, g = _resized_to(sal, gt)
    p, flag_g = _distribution(g)
    q, flag_s = _distribution(s)
    return Score(min(1.0, np.minimum(p, q).sum()),
                 flagged=flag_g or flag_s)


class MetricRow:
    """The seven metric values for one image.

    ``values`` maps metric names to floats (NaN when a metric could not
    be computed); ``flagged`` lists the metrics evaluated on degenerate
    input.
    """

    def __init__(self, image_id, values, flagged=()):
        self.image_id = image_id
        self.values = {name: float(values[name]) for name in METRICS}
        self.flagged = sorted(flagged)

    def __getitem__(self, name):
        return self.values[name]

    def as_dict(self):
        d = {"image_id": self.image_id, "flagged": list(self.flagged)}
        for name in METRICS:
            v = self.values[name]
            d[name] = None if math.isnan(v) else v
        return d

    def __repr__(self):
        return "<MetricRow %s %r>" % (self.image_id, self.values)


def evaluate_all(sal, fix, gt, pool=None, seed=0, settings=None,
                 image_id=None):
    """Compute every metric for one image.

    Without a *pool* of other images' fixations the shuffled AUC is
    NaN.
    """
    if settings is None:
        settings = MetricSettings()
    if as_array(gt).shape != (fix.height, fix.width):
        raise ShapeError("ground truth and fixations are on different "
                         "grids: %s and %dx%d"
                         % (as_array(gt).shape, fix.height, fix.width))
    scores = {
        "auc_judd": auc_judd(sal, fix, settings.auc_judd_thresholds),
        "auc_borji": auc_borji(sal, fix, settings.n_splits, seed),
        "nss": nss(sal, fix),
        "cc": cc(sal, gt),
        "kl": kl_div(gt, sal),
        "sim": sim(sal, gt),
    }
    if pool is not None and len(pool):
        scores["sauc"] = sauc(sal, fix, pool, settings.n_splits, seed)
    else:
        scores["sauc"] = Score(float("nan"))
    flagged = [name for name, score in scores.items() if score.flagged]
    if flagged:
        logger.warning("degenerate input for %s: %s",
                       image_id or "image", ", ".join(sorted(flagged)))
    return MetricRow(image_id, scores, flagged)
