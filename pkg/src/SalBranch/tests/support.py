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
"""Support code shared among the tests."""

import contextlib
import os
import shutil
import sys
import tempfile
from io import StringIO

import numpy as np

from SalBranch.network import NetworkConfig
from SalBranch.popout import PopoutSpec
from SalBranch.popout import gen_popout_dataset
from SalBranch.popout import save_dataset


# Small enough for gradient checks, big enough for every layer.
TINY_NETWORK = NetworkConfig(input_size=32, rgb_channels=(3, 4, 4),
                             saliency_channels=(3, 4, 4, 1),
                             head_channels=4, num_classes=3)


@contextlib.contextmanager
def attribute_replaced(obj, name, value):
    old_value = getattr(obj, name)
    setattr(obj, name, value)
    try:
        yield value
    finally:
        setattr(obj, name, old_value)


def _replaced_stream(name, buf=None):
    if buf is None:
        buf = StringIO()
    return attribute_replaced(sys, name, buf)


def stderr_replaced(buf=None):
    return _replaced_stream('stderr', buf)


def stdout_replaced(buf=None):
    return _replaced_stream('stdout', buf)


def random_generator(seed=0):
    return np.random.default_rng(seed)


class TempDirMixin:
    """Gives every test a fresh directory, removed afterwards."""

    def setUp(self):
        super().setUp()
        self.tmpdir = tempfile.mkdtemp(prefix="salbranch-test-")
        self.addCleanup(shutil.rmtree, self.tmpdir, True)

    def path(self, *names):
        return os.path.join(self.tmpdir, *names)

    def read_bytes(self, *names):
        with open(self.path(*names), "rb") as f:
            return f.read()

    def write_text(self, name, text):
        path = self.path(name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def make_popout(self, directory="data", **kw):
        """Generate and save a small pop-out dataset; return its manifest."""
        values = dict(canvas=32, num_classes=3, count=6, distractors=2)
        values.update(kw)
        dataset = gen_popout_dataset(PopoutSpec(**values))
        return save_dataset(dataset, self.path(directory))
