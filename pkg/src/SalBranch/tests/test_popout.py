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
"""Tests of the pop-out stimulus generator."""

import os
import unittest

import numpy as np
from scipy import stats

from SalBranch import GeneratorError
from SalBranch.data import load_fixations
from SalBranch.data import load_image
from SalBranch.data import load_manifest
from SalBranch.data import load_mask
from SalBranch.popout import BACKGROUND
from SalBranch.popout import MAX_CLASSES
from SalBranch.popout import PALETTE
from SalBranch.popout import PopoutSpec
from SalBranch.popout import class_identity
from SalBranch.popout import desaturated
from SalBranch.popout import gen_popout_dataset
from SalBranch.popout import placement_region
from SalBranch.popout import shape_mask
from SalBranch.tests import support


def small(**kw):
    values = dict(canvas=32, num_classes=4, count=8, distractors=3)
    values.update(kw)
    return PopoutSpec(**values)


class PopoutSpecTestCase(unittest.TestCase):

    def test_class_limits(self):
        PopoutSpec(num_classes=MAX_CLASSES)
        with self.assertRaises(GeneratorError) as cm:
            PopoutSpec(num_classes=MAX_CLASSES + 1)
        self.assertIn("combinations", cm.exception.message)
        self.assertRaises(GeneratorError, PopoutSpec, num_classes=0)

    def test_validation(self):
        self.assertRaises(GeneratorError, PopoutSpec, canvas=8)
        self.assertRaises(GeneratorError, PopoutSpec, feature="texture")
        self.assertRaises(GeneratorError, PopoutSpec, placement="edge")
        self.assertRaises(GeneratorError, PopoutSpec, fixations_per_image=0)
        self.assertRaises(GeneratorError, PopoutSpec, center_noise=1.5)
        self.assertRaises(GeneratorError, PopoutSpec, pxva=0)

    def test_class_identity(self):
        self.assertEqual(class_identity(0), ("square", PALETTE[0]))
        self.assertEqual(class_identity(len(PALETTE) + 2),
                         ("triangle", PALETTE[2]))

    def test_shapes_rasterize(self):
        for shape in ("square", "triangle", "bar", "cross"):
            m = shape_mask(shape, 15.5, 15.5, 8, 0.0, 32)
            self.assertTrue(m.any(), shape)
            self.assertFalse(m[0].any() or m[:, 0].any(), shape)
        self.assertRaises(ValueError, shape_mask, "star", 5, 5, 2, 0, 10)


class GeneratorTestCase(unittest.TestCase):

    def test_deterministic(self):
        a = gen_popout_dataset(small(seed=4))
        b = gen_popout_dataset(small(seed=4))
        np.testing.assert_array_equal(a.images, b.images)
        np.testing.assert_array_equal(a.labels, b.labels)
        for fa, fb in zip(a.fixations, b.fixations):
            np.testing.assert_array_equal(fa.points, fb.points)
        c = gen_popout_dataset(small(seed=5))
        self.assertFalse(np.array_equal(a.images, c.images))

    def test_images_do_not_depend_on_count(self):
        a = gen_popout_dataset(small(count=3))
        b = gen_popout_dataset(small(count=6))
        np.testing.assert_array_equal(a.images, b.images[:3])

    def test_shapes_and_ids(self):
        ds = gen_popout_dataset(small())
        self.assertEqual(len(ds), 8)
        self.assertEqual(ds.images.shape, (8, 3, 32, 32))
        self.assertEqual(ds.masks.shape, (8, 32, 32))
        self.assertEqual(ds.ids()[:2], ["img0000", "img0001"])
        self.assertTrue(((ds.labels >= 0) & (ds.labels < 4)).all())
        self.assertEqual(ds.classification_set().images.shape,
                         ds.images.shape)

    def test_empty(self):
        ds = gen_popout_dataset(small(count=0))
        self.assertEqual(len(ds), 0)
        self.assertEqual(ds.images.shape, (0, 3, 32, 32))

    def test_labels_are_uniform(self):
        ds = gen_popout_dataset(small(count=400, distractors=1, seed=1))
        counts = np.bincount(ds.labels, minlength=4)
        self.assertGreater(stats.chisquare(counts).pvalue, 0.001)

    def test_uniform_placement(self):
        spec = PopoutSpec(canvas=32, num_classes=1, count=1000,
                          distractors=0, seed=11)
        ds = gen_popout_dataset(spec)
        lo, hi = placement_region(spec)
        edges = np.linspace(lo, hi, 5)[1:-1]
        # the centroid of a square target is a step function of its centre
        half = 0.75 * spec.radius
        centres = np.linspace(lo, hi, 200001)
        centroids = (np.ceil(centres - half) + np.floor(centres + half)) / 2
        p = np.bincount(np.digitize(centroids, edges), minlength=4)
        p = p / p.sum()
        observed = np.zeros((4, 4))
        for mask in ds.masks:
            ys, xs = np.nonzero(mask)
            observed[np.digitize(ys.mean(), edges),
                     np.digitize(xs.mean(), edges)] += 1
        expected = len(ds) * np.outer(p, p)
        self.assertGreater(
            stats.chisquare(observed.ravel(), expected.ravel()).pvalue, 0.01)

    def test_target_carries_class_color(self):
        ds = gen_popout_dataset(small(seed=2))
        for i in range(len(ds)):
            _, color = class_identity(int(ds.labels[i]))
            target = ds.images[i][:, ds.masks[i]]
            np.testing.assert_array_equal(
                target, np.broadcast_to(np.asarray(color)[:, None],
                                        target.shape))
            x0, y0, x1, y1 = ds.boxes[i]
            ys, xs = np.nonzero(ds.masks[i])
            self.assertEqual((x0, y0, x1, y1),
                             (xs.min(), ys.min(), xs.max(), ys.max()))

    def test_fixations_inside_target(self):
        ds = gen_popout_dataset(small(seed=3, fixations_per_image=12))
        for fix, mask in zip(ds.fixations, ds.masks):
            self.assertEqual(len(fix), 12)
            self.assertTrue(fix.values_at(mask).all())

    def test_center_noise(self):
        ds = gen_popout_dataset(small(seed=3, center_noise=0.5,
                                      fixations_per_image=10))
        for fix in ds.fixations:
            self.assertEqual(len(fix), 10)

    def test_color_distractors(self):
        ds = gen_popout_dataset(small(seed=6, feature="color"))
        for i in range(len(ds)):
            _, color = class_identity(int(ds.labels[i]))
            other = ~ds.masks[i] & (ds.images[i] != BACKGROUND).any(axis=0)
            self.assertTrue(other.any())
            colors = {tuple(c) for c in ds.images[i][:, other].T}
            self.assertEqual(len(colors), 1)
            faded = {desaturated(c) for c in PALETTE if c != color}
            self.assertLessEqual(colors, faded)

    def test_desaturated(self):
        self.assertEqual(desaturated((1.0, 0.5, 0.0), 0.5),
                         (0.75, 0.5, 0.25))
        self.assertEqual(desaturated((0.0, 0.0, 1.0), 1.0), (0.0, 0.0, 1.0))
        for color in PALETTE:
            faded = np.asarray(desaturated(color))
            self.assertLess(np.abs(faded - BACKGROUND).max(),
                            np.abs(np.asarray(color) - BACKGROUND).max())

    def test_other_features_keep_the_color(self):
        for feature in ("orientation", "size"):
            ds = gen_popout_dataset(small(seed=7, feature=feature))
            for i in range(len(ds)):
                painted = (ds.images[i] != BACKGROUND).any(axis=0)
                colors = {tuple(c) for c in ds.images[i][:, painted].T}
                self.assertEqual(len(colors), 1, feature)

    def test_too_crowded(self):
        with self.assertRaises(GeneratorError) as cm:
            gen_popout_dataset(PopoutSpec(canvas=16, count=1,
                                          distractors=20))
        self.assertIn("non-overlapping", cm.exception.message)


class SaveTestCase(support.TempDirMixin, unittest.TestCase):

    def test_saved_dataset_loads_back(self):
        spec = small(count=3, seed=8)
        ds = gen_popout_dataset(spec)
        saved = self.make_popout("out", **spec.as_dict())
        manifest = load_manifest(self.path("out", "manifest.json"))
        self.assertEqual(manifest.pxva, spec.pxva)
        self.assertEqual([e.id for e in manifest], ds.ids())
        self.assertEqual([e.label for e in manifest], ds.labels.tolist())
        self.assertEqual(len(saved), 3)
        for i, entry in enumerate(manifest):
            np.testing.assert_allclose(load_image(entry.image).data,
                                       ds.images[i], atol=0.5 / 255)
            fix = load_fixations(entry.fixations, 32, 32, entry.id)
            np.testing.assert_array_equal(fix.points, ds.fixations[i].points)
            np.testing.assert_array_equal(load_mask(entry.mask), ds.masks[i])
            self.assertTrue(os.path.isfile(entry.density))
