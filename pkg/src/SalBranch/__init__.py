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
"""Saliency maps learned by a classification network's attention branch.

SalBranch trains a small two-branch convolutional classifier.  One
branch extracts RGB features, the other produces a single-channel map
that modulates those features before a shared classification head.
The modulation branch only ever sees the classification loss, yet the
map it produces can be evaluated as a fixation prediction.

Around the network the package provides center-bias priors, fusion of
priors with predictions, the usual fixation-prediction metrics, a
synthetic pop-out dataset generator and the ``salbranch`` command
line harness.

"""
__docformat__ = "reStructuredText"


version_info = (1, 0)
__version__ = ".".join([str(n) for n in version_info])


class SalBranchError(Exception):
    """Base class for exceptions specific to the :mod:`SalBranch` package.

    All instances provide a ``message`` attribute that describes the
    specific error, and a ``url`` attribute that names the file the
    error was located in, or ``None``.

    """

    def __init__(self, msg, url=None):
        self.message = msg
        self.url = url
        Exception.__init__(self, msg)

    def __str__(self):
        if self.url:
            return "{} ({})".format(self.message, self.url)
        return self.message


class ShapeError(SalBranchError, ValueError):
    """Raised when array shapes are inconsistent.

    The ``dimension`` attribute names the offending dimension, or is
    ``None`` when the mismatch concerns the rank.
    """

    def __init__(self, msg, dimension=None):
        self.dimension = dimension
        SalBranchError.__init__(self, msg)


class DataFormatError(SalBranchError):
    """Raised when an input file does not conform to its format.

    In addition to ``message`` and ``url``, exceptions of this type
    offer ``lineno``, the line at which the problem was detected (or
    ``None`` for binary formats).
    """

    def __init__(self, msg, url=None, lineno=None):
        self.lineno = lineno
        SalBranchError.__init__(self, msg, url)

    def __str__(self):
        s = self.message
        if self.lineno is not None:
            s += " (line %d" % self.lineno
            if self.url:
                s += " in %s" % self.url
            s += ")"
        elif self.url:
            s += " (%s)" % self.url
        return s


class CheckpointError(SalBranchError):
    """Raised when a checkpoint cannot be read or does not fit a network."""


class TrainingError(SalBranchError):
    """Raised when training is started out of order or diverges."""


class MetricError(SalBranchError, ValueError):
    """Raised when a metric's preconditions are not met."""


class GeneratorError(SalBranchError, ValueError):
    """Raised when a pop-out dataset cannot be generated as requested."""
