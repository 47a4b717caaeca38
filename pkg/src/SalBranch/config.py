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
"""Run configuration.

The configuration is described by the ZConfig schema in
``schema.xml``.  It is assembled from three sources, later ones
winning:

1. a configuration file, either ZConfig syntax or JSON
   (``{"training": {"epochs": 2}}``),
2. value specifiers derived from command-line flags,
3. explicit ``section/key=value`` specifiers (``-X`` options).

Each section of the loaded configuration is converted into the
library's own settings object by the section datatypes below.
"""

import json
import os
import re
from io import StringIO

import ZConfig
import ZConfig.cmdline

from SalBranch import DataFormatError
from SalBranch.evaluation import AblationSettings
from SalBranch.metrics import MetricSettings
from SalBranch.network import NetworkConfig
from SalBranch.popout import PopoutSpec
from SalBranch.priors import CenterBiasSpec
from SalBranch.priors import FusionSpec
from SalBranch.training import TrainingConfig


SECTIONS = ("network", "training", "popout", "centerbias", "fusion",
            "metrics", "ablation", "prediction")

SKELETON = "".join("<%s>\n</%s>\n" % (name, name) for name in SECTIONS)

DEFAULT_PXVA = 35.0

DEFAULTS_URL = "<defaults>"
OPTION_ORIGIN = "<command-line option>"

_schema = None


def get_schema():
    global _schema
    if _schema is None:
        here = os.path.dirname(os.path.abspath(__file__))
        _schema = ZConfig.loadSchema(os.path.join(here, "schema.xml"))
    return _schema


def network_section(section):
    return NetworkConfig(
        input_size=section.input_size,
        rgb_channels=section.rgb_channels,
        saliency_channels=section.saliency_channels,
        head_channels=section.head_channels,
        num_classes=section.num_classes,
        modulation_resolution=section.modulation_resolution)


def training_section(section):
    return TrainingConfig(
        pretrain_epochs=section.pretrain_epochs,
        epochs=section.epochs,
        pretrain_lr=section.pretrain_lr,
        lr=section.lr,
        batch_size=section.batch_size,
        held_out_fraction=section.held_out_fraction)


def popout_section(section):
    return PopoutSpec(
        canvas=section.canvas,
        num_classes=section.classes,
        count=section.count,
        distractors=section.distractors,
        feature=section.feature,
        placement=section.placement,
        fixations_per_image=section.fixations_per_image,
        center_noise=section.center_noise,
        pxva=section.pxva,
        test_fraction=section.test_fraction)


class CenterBiasSettings:
    """Center-bias section; ``pxva`` may be left to the dataset."""

    def __init__(self, dva_factor=14.0, pxva=None, shape="circular",
                 horizontal_stretch=1.5, width=64, height=64):
        self.dva_factor = dva_factor
        self.pxva = pxva
        self.shape = shape
        self.horizontal_stretch = horizontal_stretch
        self.width = width
        self.height = height
        # validate eagerly
        self.spec()

    def spec(self, width=None, height=None, pxva=None, **kw):
        """Build a :class:`CenterBiasSpec`.

        An explicitly configured pxva wins over the *pxva* argument,
        which in turn wins over the default.
        """
        if self.pxva is not None:
            pxva = self.pxva
        elif pxva is None:
            pxva = DEFAULT_PXVA
        values = dict(dva_factor=self.dva_factor, pxva=pxva,
                      shape=self.shape,
                      horizontal_stretch=self.horizontal_stretch,
                      width=width or self.width,
                      height=height or self.height)
        values.update(kw)
        return CenterBiasSpec(**values)

    def as_dict(self):
        return {"dva_factor": self.dva_factor, "pxva": self.pxva,
                "shape": self.shape,
                "horizontal_stretch": self.horizontal_stretch,
                "width": self.width, "height": self.height}


def centerbias_section(section):
    return CenterBiasSettings(
        dva_factor=section.dva_factor,
        pxva=section.pxva,
        shape=section.shape,
        horizontal_stretch=section.horizontal_stretch,
        width=section.width,
        height=section.height)


def fusion_section(section):
    return FusionSpec(mode=section.mode, normalization=section.normalization)


def metrics_section(section):
    return MetricSettings(
        n_splits=section.n_splits,
        auc_judd_thresholds=section.auc_judd_thresholds,
        sigma_dva=section.sigma_dva,
        pool_images=section.pool_images)


def ablation_section(section):
    return AblationSettings(dva_factors=section.dva_factors,
                            shapes=section.shapes, modes=section.modes)


class PredictionSettings:

    def __init__(self, blur=0.0):
        self.blur = blur

    def as_dict(self):
        return {"blur": self.blur}


def prediction_section(section):
    return PredictionSettings(blur=section.blur)


def _scalar(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        if len(value) == 2 and all(isinstance(v, int) for v in value):
            # resolutions are written HxW
            return "%dx%d" % tuple(value)
        return " ".join(str(v) for v in value)
    return str(value)


def flatten(doc, prefix=""):
    """Turn a nested mapping into ``section/key=value`` specifiers."""
    specs = []
    for key, value in doc.items():
        name = prefix + str(key).replace("_", "-")
        if isinstance(value, dict):
            specs.extend(flatten(value, name + "/"))
        elif value is not None:
            specs.append("%s=%s" % (name, _scalar(value)))
    return specs


def load_json_options(path):
    url = str(path)
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise DataFormatError("cannot read configuration: %s" % e.strerror,
                              url)
    except json.JSONDecodeError as e:
        raise DataFormatError("malformed configuration: %s" % e.msg, url,
                              e.lineno)
    if not isinstance(doc, dict):
        raise DataFormatError("configuration must be a JSON object", url)
    return flatten(doc)


def _last_wins(specs):
    latest = {}
    for spec, origin in specs:
        path = spec.split("=", 1)[0].strip().lower()
        latest.pop(path, None)
        latest[path] = (spec, origin)
    return list(latest.values())


def _with_all_sections(text):
    for name in SECTIONS:
        if not re.search(r"^\s*<%s(\s|>)" % name, text,
                         re.IGNORECASE | re.MULTILINE):
            text += "\n<%s>\n</%s>\n" % (name, name)
    return text


def _add_options(loader, specs):
    for index, (spec, origin) in enumerate(specs, 1):
        path = spec.split("=", 1)[0]
        if "=" not in spec or "//" in path:
            # raises ZConfig's own syntax error
            loader.addOption(spec)
        else:
            # a DataConversionError unpacks this as (lineno, colno, url)
            loader.addOption(spec, (index, None, origin))


def _conversion_message(e, specs, url):
    lineno = e.lineno if isinstance(e.lineno, int) else -1
    if 0 < lineno <= len(specs) and specs[lineno - 1][1] == e.url:
        spec, origin = specs[e.lineno - 1]
        if origin == OPTION_ORIGIN:
            return "%s: %s" % (spec, e.message)
        return "%s (from %s): %s" % (spec, origin, e.message)
    if url != DEFAULTS_URL and lineno > 0:
        return "%s (line %d in %s)" % (e.message, e.lineno, url)
    return e.message


def load_run_config(config_file=None, options=()):
    """Load the run configuration.

    *config_file* is a ``.json`` file or a ZConfig configuration file;
    *options* are ``section/key=value`` specifiers applied on top of
    it.  Later specifiers for the same key replace earlier ones.

    Invalid values raise :exc:`ZConfig.ConfigurationError` naming the
    offending specifier or file line.
    """
    specs = []
    text, url = SKELETON, DEFAULTS_URL
    if config_file is not None:
        if str(config_file).endswith(".json"):
            specs.extend((spec, str(config_file))
                         for spec in load_json_options(config_file))
        else:
            url = str(config_file)
            with open(config_file) as f:
                text = _with_all_sections(f.read())
    specs.extend((spec, OPTION_ORIGIN) for spec in options)
    specs = _last_wins(specs)
    loader = ZConfig.cmdline.ExtendedConfigLoader(get_schema())
    _add_options(loader, specs)
    try:
        config, _ = loader.loadFile(StringIO(text), url)
    except ZConfig.DataConversionError as e:
        raise ZConfig.ConfigurationError(
            _conversion_message(e, specs, url)) from e
    return config


def config_as_dict(config):
    d = {"seed": config.seed, "workers": config.workers}
    for name in SECTIONS:
        d[name] = getattr(config, name).as_dict()
    return d
