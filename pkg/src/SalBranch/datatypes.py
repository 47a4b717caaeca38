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
"""Key datatypes used by the run configuration schema.

These are referenced from ``schema.xml`` and follow the conventions of
:mod:`ZConfig.datatypes`: each is a callable taking the string from
the configuration and returning the converted value or raising
:exc:`ValueError`.
"""

from ZConfig.datatypes import RangeCheckedConversion
from ZConfig.datatypes import RegularExpressionConversion
from ZConfig.datatypes import float_conversion
from ZConfig.datatypes import integer

from SalBranch.seeding import MAX_SEED


seed = RangeCheckedConversion(integer, min=0, max=MAX_SEED).__call__
positive_integer = RangeCheckedConversion(integer, min=1).__call__
nonnegative_integer = RangeCheckedConversion(integer, min=0).__call__
nonnegative_float = RangeCheckedConversion(float_conversion, min=0.0).__call__
probability = RangeCheckedConversion(float_conversion,
                                     min=0.0, max=1.0).__call__
stretch = RangeCheckedConversion(float_conversion, min=1.0).__call__


def positive_float(value):
    v = float_conversion(value)
    if not v > 0:
        raise ValueError("%s is not positive" % v)
    return v


def held_out_fraction(value):
    v = probability(value)
    if v >= 1:
        raise ValueError("held-out fraction must be below 1")
    return v


class Choice:
    """Conversion accepting one of a fixed set of lower-case words."""

    def __init__(self, *choices):
        self.choices = choices

    def __call__(self, value):
        v = value.strip().lower()
        if v not in self.choices:
            raise ValueError("%r is not one of %s"
                             % (value, ", ".join(self.choices)))
        return v


cb_shape = Choice("circular", "ellipsoid")
fusion_mode = Choice("sum", "mult")
normalization = Choice("minmax")
popout_feature = Choice("color", "orientation", "size")
placement = Choice("uniform", "center")
auc_thresholds = Choice("all", "fixations")


def _list_of(conversion, value):
    items = value.replace(",", " ").split()
    if not items:
        raise ValueError("expected at least one value")
    return tuple(conversion(item) for item in items)


def channel_list(value):
    """Whitespace- or comma-separated positive integers."""
    return _list_of(positive_integer, value)


def positive_float_list(value):
    return _list_of(positive_float, value)


def cb_shape_list(value):
    return _list_of(cb_shape, value)


def fusion_mode_list(value):
    return _list_of(fusion_mode, value)


_resolution = RegularExpressionConversion(r"^\s*\d+\s*[xX]\s*\d+\s*$")


def resolution(value):
    """``HxW``, for example ``16x16``; returns ``(h, w)``."""
    h, w = _resolution(value).lower().split("x")
    h, w = int(h), int(w)
    if h < 1 or w < 1:
        raise ValueError("resolution must be positive: %r" % value)
    return (h, w)
