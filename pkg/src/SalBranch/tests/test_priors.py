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
"""Tests of center-bias priors and fusion."""

import math
import unittest

import numpy as np

from SalBranch import SalBranchError
from SalBranch import ShapeError
from SalBranch import netpbm
from SalBranch.priors import CenterBiasSpec
from SalBranch.priors import FusionSpec
from SalBranch.priors import blur_map
from SalBranch.priors import dva_to_sigma
from SalBranch.priors import export_pgm
from SalBranch.priors import fuse
from SalBranch.priors import make_gaussian_cb
from SalBranch.priors import make_supervised_cb
from SalBranch.priors import normalize_map
from SalBranch.priors import resize_map
from SalBranch.priors import second_moments
from SalBranch.tests import support


class DvaToSigmaTestCase(unittest.TestCase):

    def test_closed_form(self):
        self.assertAlmostEqual(dva_to_sigma(2, 36), 30.5755, places=3)
        self.assertAlmostEqual(dva_to_sigma(14, 35), 208.0838, places=3)

    def test_linear_in_dva(self):
        self.assertAlmostEqual(dva_to_sigma(10, 32), 5 * dva_to_sigma(2, 32))

    def test_nonpositive(self):
        self.assertRaises(ValueError, dva_to_sigma, 0, 35)
        self.assertRaises(ValueError, dva_to_sigma, 2, -1)


class CenterBiasSpecTestCase(unittest.TestCase):

    def test_validation(self):
        self.assertRaises(ValueError, CenterBiasSpec, dva_factor=0)
        self.assertRaises(ValueError, CenterBiasSpec, horizontal_stretch=0.5)
        self.assertRaises(ValueError, CenterBiasSpec, shape="square")

    def test_ellipsoid_keeps_vertical_sigma(self):
        spec = CenterBiasSpec(dva_factor=5, pxva=32, shape="ellipsoid")
        self.assertEqual(spec.sigma_y, dva_to_sigma(5, 32))
        self.assertAlmostEqual(spec.sigma_x, 1.5 * spec.sigma_y)
        self.assertEqual(spec.replace(shape="circular").sigma_x,
                         spec.sigma_y)


class GaussianCenterBiasTestCase(unittest.TestCase):

    def test_peak_at_center(self):
        cb = make_gaussian_cb(CenterBiasSpec(dva_factor=2, pxva=8,
                                             width=33, height=21))
        self.assertEqual(cb.shape, (21, 33))
        self.assertEqual(cb.values[10, 16], 1.0)
        self.assertEqual(cb.values.max(), 1.0)

    def test_circular_symmetry(self):
        cb = make_gaussian_cb(CenterBiasSpec(dva_factor=2, pxva=8,
                                             width=31, height=31)).values
        np.testing.assert_array_equal(cb, cb[::-1, :])
        np.testing.assert_array_equal(cb, cb[:, ::-1])
        np.testing.assert_array_equal(cb, cb.T)

    def test_profile(self):
        spec = CenterBiasSpec(dva_factor=2, pxva=8, width=41, height=41)
        cb = make_gaussian_cb(spec).values
        for d in (1, 4, 9):
            self.assertAlmostEqual(
                cb[20, 20 + d],
                math.exp(-d * d / (2 * spec.sigma_x ** 2)), places=12)

    def test_ellipsoid_stretch(self):
        spec = CenterBiasSpec(dva_factor=2, pxva=8, shape="ellipsoid",
                              width=61, height=61)
        cb = make_gaussian_cb(spec).values
        # three columns out reads like two rows out
        self.assertAlmostEqual(cb[30, 33], cb[32, 30], places=12)

    def test_second_moments_recover_sigma(self):
        spec = CenterBiasSpec(dva_factor=2, pxva=36, width=301, height=301)
        sx, sy = second_moments(make_gaussian_cb(spec))
        self.assertLess(abs(sx / spec.sigma_x - 1), 0.01)
        self.assertLess(abs(sy / spec.sigma_y - 1), 0.01)

    def test_ellipsoid_moment_ratio(self):
        spec = CenterBiasSpec(dva_factor=2, pxva=36, shape="ellipsoid",
                              width=401, height=301)
        sx, sy = second_moments(make_gaussian_cb(spec))
        self.assertLess(abs(sx / sy - 1.5), 0.03)

    def test_wider_prior_is_flatter(self):
        narrow = make_gaussian_cb(CenterBiasSpec(2, 8, width=41, height=41))
        wide = make_gaussian_cb(CenterBiasSpec(5, 8, width=41, height=41))
        off = np.ones((41, 41), dtype=bool)
        off[20, 20] = False
        self.assertTrue((wide.values[off] > narrow.values[off]).all())


class SupervisedCenterBiasTestCase(unittest.TestCase):

    def maps(self, n, seed=0):
        gen = support.random_generator(seed)
        return [gen.uniform(0, 1, (5, 6)) for _ in range(n)]

    def test_identical_maps(self):
        m = self.maps(1)[0]
        cb = make_supervised_cb([m] * 4, split_seed=1)
        np.testing.assert_allclose(cb.cb_a.values, m / m.max())
        np.testing.assert_allclose(cb.cb_b.values, m / m.max())

    def test_two_maps_use_the_other_one(self):
        maps = self.maps(2)
        cb = make_supervised_cb(maps, split_seed=3)
        self.assertEqual(sorted(cb.assignment), ["a", "b"])
        for i, which in enumerate(cb.assignment):
            other = maps[1 - i]
            prior = cb.cb_a if which == "a" else cb.cb_b
            np.testing.assert_allclose(prior.values, other / other.max())

    def test_half_means(self):
        maps = self.maps(4, seed=1)
        cb = make_supervised_cb(maps, split_seed=5)
        self.assertEqual(cb.assignment.count("a"), 2)
        # images assigned "b" make up the first half
        half_a = np.mean([m for m, w in zip(maps, cb.assignment)
                          if w == "b"], axis=0)
        half_b = np.mean([m for m, w in zip(maps, cb.assignment)
                          if w == "a"], axis=0)
        np.testing.assert_allclose(cb.cb_a.values, half_a / half_a.max())
        np.testing.assert_allclose(cb.cb_b.values, half_b / half_b.max())

    def test_seeded(self):
        maps = self.maps(9, seed=2)
        first = make_supervised_cb(maps, split_seed=7)
        second = make_supervised_cb(maps, split_seed=7)
        self.assertEqual(first.assignment, second.assignment)
        np.testing.assert_array_equal(first.cb_a.values, second.cb_a.values)

    def test_needs_two_maps(self):
        with self.assertRaises(SalBranchError):
            make_supervised_cb(self.maps(1), split_seed=0)

    def test_sizes_must_agree(self):
        maps = self.maps(2) + [np.ones((5, 7))]
        with self.assertRaises(ShapeError) as cm:
            make_supervised_cb(maps, split_seed=0)
        self.assertEqual(cm.exception.dimension, "width")


class FusionTestCase(unittest.TestCase):

    def setUp(self):
        gen = support.random_generator(4)
        self.s = gen.uniform(0, 5, (6, 7))

    def test_normalize(self):
        np.testing.assert_array_equal(normalize_map(np.array([[1.0, 3.0]])),
                                      [[0.0, 1.0]])
        self.assertFalse(normalize_map(np.full((2, 2), 4.0)).any())
        unit = np.array([[0.0, 0.3], [1.0, 0.5]])
        np.testing.assert_array_equal(normalize_map(unit), unit)

    def test_mult_with_ones_is_identity(self):
        fused = fuse(self.s, np.ones(self.s.shape), FusionSpec("mult"))
        np.testing.assert_allclose(fused.values, normalize_map(self.s))

    def test_sum_with_itself(self):
        fused = fuse(self.s, self.s, FusionSpec("sum"))
        np.testing.assert_allclose(fused.values, normalize_map(self.s))

    def test_hand_case_hits_constant_rule(self):
        s = np.array([[0.0, 1.0], [0.5, 0.5]])
        c = np.array([[1.0, 0.0], [0.5, 0.5]])
        fused = fuse(s, c, FusionSpec("sum"))
        self.assertFalse(fused.values.any())

    def test_output_in_unit_interval(self):
        gen = support.random_generator(5)
        for mode in FusionSpec.MODES:
            for _ in range(10):
                fused = fuse(gen.uniform(0, 3, (4, 4)),
                             gen.uniform(0, 9, (4, 4)), FusionSpec(mode))
                self.assertGreaterEqual(fused.values.min(), 0.0)
                self.assertLessEqual(fused.values.max(), 1.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError) as cm:
            fuse(np.ones((3, 4)), np.ones((3, 5)), FusionSpec())
        self.assertEqual(cm.exception.dimension, "width")

    def test_unknown_mode(self):
        self.assertRaises(ValueError, FusionSpec, "max")


class MapToolsTestCase(support.TempDirMixin, unittest.TestCase):

    def test_blur(self):
        impulse = np.zeros((21, 21))
        impulse[10, 10] = 1.0
        np.testing.assert_array_equal(blur_map(impulse, 0), impulse)
        blurred = blur_map(impulse, 2.0)
        self.assertEqual(np.unravel_index(blurred.argmax(), blurred.shape),
                         (10, 10))
        np.testing.assert_allclose(blurred, blurred.T, atol=1e-15)
        # nothing beyond three sigma
        self.assertEqual(blurred[10, 17], 0.0)
        self.assertRaises(ValueError, blur_map, impulse, -1)

    def test_resize(self):
        m = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(resize_map(m, 3, 4), m)
        self.assertEqual(resize_map(m, 6, 2).shape, (6, 2))

    def test_export(self):
        cb = make_gaussian_cb(CenterBiasSpec(2, 8, width=9, height=7))
        path = self.path("cb.pgm")
        export_pgm(cb, path)
        samples, maxval = netpbm.read_pnm(path)
        self.assertEqual(maxval, 65535)
        self.assertEqual(samples.shape, (7, 9))
        np.testing.assert_allclose(samples / 65535.0, cb.values,
                                   atol=1 / 65535.0)
