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
"""Metric reports and their JSON and CSV renderings.

Reports contain no timestamps, so identical runs give identical bytes.
"""

import csv
import hashlib
import io
import json
import math

import numpy as np

import SalBranch
from SalBranch.metrics import METRICS


CSV_HEADER = ("image_id",) + METRICS


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class MetricReport:
    """Per-image metric rows plus dataset means.

    ``means`` averages the finite values of each metric; ``counts``
    says how many values went into each mean.
    """

    def __init__(self, rows, config=None, seed=0, command=None,
                 inputs=None):
        self.rows = list(rows)
        self.config = config or {}
        self.seed = seed
        self.command = command
        self.inputs = dict(inputs or {})

    @property
    def means(self):
        means = {}
        for name in METRICS:
            values = [row.values[name] for row in self.rows
                      if math.isfinite(row.values[name])]
            means[name] = float(np.mean(values)) if values else float("nan")
        return means

    @property
    def counts(self):
        counts = {"images": len(self.rows)}
        for name in METRICS:
            counts[name] = sum(1 for row in self.rows
                               if math.isfinite(row.values[name]))
        counts["flagged"] = sum(1 for row in self.rows if row.flagged)
        return counts

    def provenance(self):
        return {
            "tool": "salbranch",
            "version": SalBranch.__version__,
            "seed": self.seed,
            "command": self.command,
            "inputs": {name: file_digest(path)
                       for name, path in sorted(self.inputs.items())},
        }

    def as_dict(self):
        means = {name: (None if math.isnan(v) else v)
                 for name, v in self.means.items()}
        return {
            "rows": [row.as_dict() for row in self.rows],
            "means": means,
            "counts": self.counts,
            "config": self.config,
            "provenance": self.provenance(),
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2,
                          allow_nan=False) + "\n"

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([row.image_id] + [
                _csv_value(row.values[name]) for name in METRICS])
        return out.getvalue()

    def write(self, json_path, csv_path):
        with open(json_path, "w") as f:
            f.write(self.to_json())
        with open(csv_path, "w") as f:
            f.write(self.to_csv())


def _csv_value(v):
    return "" if math.isnan(v) else repr(float(v))
