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
"""Tests of the checkpoint format."""

import unittest

import numpy as np

from SalBranch import CheckpointError
from SalBranch import checkpoint
from SalBranch.network import TwoBranchNet
from SalBranch.tests import support


class CheckpointTestCase(support.TempDirMixin, unittest.TestCase):

    def test_values_survive_exactly(self):
        net = TwoBranchNet(support.TINY_NETWORK)
        path = self.path("net.salf")
        checkpoint.save(net, path)
        other = TwoBranchNet(support.TINY_NETWORK.replace(seed=9))
        checkpoint.load_into(other, path)
        for name, value in net.state().items():
            np.testing.assert_array_equal(other.state()[name], value)

    def test_layout(self):
        data = checkpoint.dumps([("w", np.array([[1.0, 2.0]]))])
        self.assertEqual(data[:4], b"SALF")
        self.assertEqual(len(data), 4 + 4 + 4 + 1 + 4 + 2 * 4 + 2 * 8)
        [(name, value)] = checkpoint.loads(data)
        self.assertEqual(name, "w")
        self.assertEqual(value.tolist(), [[1.0, 2.0]])

    def test_bad_magic(self):
        with self.assertRaises(CheckpointError):
            checkpoint.loads(b"PNG\x00\x01\x00\x00\x00")

    def test_truncated(self):
        data = checkpoint.dumps([("w", np.zeros(4))])
        with self.assertRaises(CheckpointError) as cm:
            checkpoint.loads(data[:-3], "net.salf")
        self.assertIn("truncated", cm.exception.message)
        self.assertEqual(cm.exception.url, "net.salf")

    def test_unsupported_version(self):
        data = b"SALF" + (7).to_bytes(4, "little")
        with self.assertRaises(CheckpointError):
            checkpoint.loads(data)

    def test_shape_mismatch_names_parameter(self):
        net = TwoBranchNet(support.TINY_NETWORK)
        path = self.path("net.salf")
        checkpoint.save(net, path)
        wider = TwoBranchNet(support.TINY_NETWORK.replace(head_channels=5))
        with self.assertRaises(CheckpointError) as cm:
            checkpoint.load_into(wider, path)
        self.assertIn("head.conv", str(cm.exception))

    def test_missing_parameter(self):
        net = TwoBranchNet(support.TINY_NETWORK)
        path = self.path("partial.salf")
        with open(path, "wb") as f:
            f.write(checkpoint.dumps(
                (p.name, p.value.data) for p in net.parameters()[:-1]))
        with self.assertRaises(CheckpointError) as cm:
            checkpoint.load_into(net, path)
        self.assertIn("head.fc.bias", str(cm.exception))
