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
"""Tests of the run configuration."""

import json
import unittest

import ZConfig

from SalBranch import DataFormatError
from SalBranch import datatypes
from SalBranch.config import CenterBiasSettings
from SalBranch.config import config_as_dict
from SalBranch.config import flatten
from SalBranch.config import load_run_config
from SalBranch.tests import support


class DatatypesTestCase(unittest.TestCase):

    def test_channel_list(self):
        self.assertEqual(datatypes.channel_list("16 32, 48"), (16, 32, 48))
        self.assertRaises(ValueError, datatypes.channel_list, "")
        self.assertRaises(ValueError, datatypes.channel_list, "4 0")

    def test_resolution(self):
        self.assertEqual(datatypes.resolution("16x12"), (16, 12))
        self.assertEqual(datatypes.resolution(" 8 X 8 "), (8, 8))
        self.assertRaises(ValueError, datatypes.resolution, "16")
        self.assertRaises(ValueError, datatypes.resolution, "0x4")

    def test_choices(self):
        self.assertEqual(datatypes.cb_shape("Ellipsoid"), "ellipsoid")
        self.assertRaises(ValueError, datatypes.fusion_mode, "max")
        self.assertEqual(datatypes.fusion_mode_list("sum,mult"),
                         ("sum", "mult"))

    def test_ranges(self):
        self.assertRaises(ValueError, datatypes.seed, "-1")
        self.assertEqual(datatypes.seed(str(2 ** 64 - 1)), 2 ** 64 - 1)
        self.assertRaises(ValueError, datatypes.positive_float, "0")
        self.assertRaises(ValueError, datatypes.held_out_fraction, "1")
        self.assertRaises(ValueError, datatypes.stretch, "0.9")
        self.assertEqual(datatypes.probability("1"), 1.0)


class LoadRunConfigTestCase(support.TempDirMixin, unittest.TestCase):

    def test_defaults(self):
        config = load_run_config()
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.workers, 1)
        self.assertEqual(config.network.input_size, 64)
        self.assertEqual(config.network.saliency_channels, (16, 32, 48, 1))
        self.assertEqual(config.training.batch_size, 32)
        self.assertEqual(config.popout.num_classes, 8)
        self.assertEqual(config.popout.pxva, 8.0)
        self.assertIsNone(config.centerbias.pxva)
        self.assertEqual(config.centerbias.dva_factor, 14)
        self.assertEqual(config.fusion.mode, "sum")
        self.assertEqual(config.metrics.n_splits, 100)
        self.assertIsNone(config.metrics.pool_images)
        self.assertEqual(config.ablation.dva_factors, (2.0, 5.0, 14.0))
        self.assertEqual(config.prediction.blur, 0.0)

    def test_options(self):
        config = load_run_config(options=[
            "seed=7",
            "network/rgb-channels=8 8 8",
            "network/modulation-resolution=16x16",
            "centerbias/shape=ellipsoid",
            "metrics/pool-images=5",
        ])
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.network.rgb_channels, (8, 8, 8))
        self.assertEqual(config.network.modulation_resolution, (16, 16))
        self.assertEqual(config.centerbias.shape, "ellipsoid")
        self.assertEqual(config.metrics.pool_images, 5)

    def test_last_option_wins(self):
        config = load_run_config(options=["training/epochs=1",
                                          "training/lr=0.5",
                                          "training/epochs=3"])
        self.assertEqual(config.training.epochs, 3)
        self.assertEqual(config.training.lr, 0.5)

    def test_bad_value(self):
        with self.assertRaises(ZConfig.ConfigurationError):
            load_run_config(options=["training/batch-size=0"])
        with self.assertRaises(ZConfig.ConfigurationError):
            load_run_config(options=["fusion/mode=max"])
        with self.assertRaises(ZConfig.ConfigurationError):
            load_run_config(options=["network/no-such-key=1"])

    def test_bad_value_names_the_specifier(self):
        with self.assertRaises(ZConfig.ConfigurationError) as cm:
            load_run_config(options=["seed=2", "fusion/mode=max"])
        self.assertNotIsInstance(cm.exception, ZConfig.DataConversionError)
        self.assertTrue(str(cm.exception).startswith("fusion/mode=max: "),
                        str(cm.exception))
        with self.assertRaises(ZConfig.ConfigurationError) as cm:
            load_run_config(options=["popout/count=-1"])
        self.assertTrue(str(cm.exception).startswith("popout/count=-1: "))
        with self.assertRaises(ZConfig.ConfigurationError) as cm:
            load_run_config(options=["seed=-3"])
        self.assertTrue(str(cm.exception).startswith("seed=-3: "))

    def test_bad_value_from_json_names_the_file(self):
        path = self.write_text("run.json", json.dumps(
            {"training": {"batch_size": 0}}))
        with self.assertRaises(ZConfig.ConfigurationError) as cm:
            load_run_config(path)
        self.assertIn("training/batch-size=0 (from %s)" % path,
                      str(cm.exception))

    def test_bad_value_in_file_names_the_line(self):
        path = self.write_text("run.conf", "<fusion>\n"
                                           "  mode max\n"
                                           "</fusion>\n")
        with self.assertRaises(ZConfig.ConfigurationError) as cm:
            load_run_config(path, options=["seed=1"])
        self.assertIn("(line 2 in %s)" % path, str(cm.exception))

    def test_malformed_specifier(self):
        with self.assertRaises(ZConfig.ConfigurationSyntaxError):
            load_run_config(options=["fusion/mode"])
        with self.assertRaises(ZConfig.ConfigurationSyntaxError):
            load_run_config(options=["fusion//mode=sum"])

    def test_inconsistent_section(self):
        with self.assertRaises(ZConfig.ConfigurationError):
            load_run_config(options=["network/saliency-channels=4 4 4 2"])

    def test_json_file(self):
        path = self.write_text("run.json", json.dumps({
            "seed": 4,
            "training": {"pretrain_epochs": 1, "batch_size": 8},
            "network": {"rgb_channels": [4, 4, 4],
                        "modulation_resolution": [16, 16]},
            "metrics": {"pool_images": None},
        }))
        config = load_run_config(path, options=["training/batch-size=2"])
        self.assertEqual(config.seed, 4)
        self.assertEqual(config.training.pretrain_epochs, 1)
        self.assertEqual(config.training.batch_size, 2)
        self.assertEqual(config.network.rgb_channels, (4, 4, 4))
        self.assertEqual(config.network.modulation_resolution, (16, 16))

    def test_malformed_json(self):
        path = self.write_text("run.json", '{\n"seed": }')
        with self.assertRaises(DataFormatError) as cm:
            load_run_config(path)
        self.assertEqual(cm.exception.lineno, 2)
        path = self.write_text("list.json", "[1, 2]")
        self.assertRaises(DataFormatError, load_run_config, path)

    def test_zconfig_file(self):
        path = self.write_text("run.conf", "seed 9\n"
                                           "<popout>\n"
                                           "  canvas 32\n"
                                           "  feature size\n"
                                           "</popout>\n")
        config = load_run_config(path, options=["popout/canvas=48"])
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.popout.canvas, 48)
        self.assertEqual(config.popout.feature, "size")
        # sections missing from the file take their defaults
        self.assertEqual(config.training.epochs, 4)

    def test_as_dict_is_json(self):
        doc = config_as_dict(load_run_config(options=["seed=3"]))
        self.assertEqual(doc["seed"], 3)
        self.assertEqual(doc["fusion"], {"mode": "sum",
                                         "normalization": "minmax"})
        json.dumps(doc)


class FlattenTestCase(unittest.TestCase):

    def test_flatten(self):
        self.assertEqual(
            flatten({"seed": 1,
                     "network": {"num_classes": 4,
                                 "rgb_channels": [2, 3, 4],
                                 "modulation_resolution": [8, 8]},
                     "flag": True, "unset": None}),
            ["seed=1", "network/num-classes=4", "network/rgb-channels=2 3 4",
             "network/modulation-resolution=8x8", "flag=true"])


class CenterBiasSettingsTestCase(unittest.TestCase):

    def test_pxva_precedence(self):
        settings = CenterBiasSettings()
        self.assertEqual(settings.spec().pxva, 35.0)
        self.assertEqual(settings.spec(pxva=32).pxva, 32)
        pinned = CenterBiasSettings(pxva=40.0)
        self.assertEqual(pinned.spec(pxva=32).pxva, 40.0)

    def test_overrides(self):
        spec = CenterBiasSettings(width=10, height=8).spec(
            width=20, shape="ellipsoid", dva_factor=2)
        self.assertEqual((spec.width, spec.height), (20, 8))
        self.assertEqual(spec.shape, "ellipsoid")
        self.assertEqual(spec.dva_factor, 2)

    def test_validated(self):
        self.assertRaises(ValueError, CenterBiasSettings, dva_factor=0)


def test_suite():
    return unittest.defaultTestLoader.loadTestsFromName(__name__)
