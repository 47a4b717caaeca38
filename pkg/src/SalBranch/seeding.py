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
"""Named sub-seeds derived from a single run seed.

Every random draw in SalBranch goes through a generator obtained from
:func:`rng`, keyed by the run seed and a purpose path such as
``("train", "shuffle")``.  Components therefore stay reproducible when
run in isolation or in a different order.
"""

import hashlib

import numpy as np


MAX_SEED = 2 ** 64 - 1


def derive_seed(seed, *purpose):
    """Return a 64-bit seed for *purpose* under the run seed *seed*."""
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError("seed must be an unsigned 64-bit integer: %r"
                         % (seed,))
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(8, "little"))
    for part in purpose:
        h.update(b"\x00")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def rng(seed, *purpose):
    return np.random.default_rng(derive_seed(seed, *purpose))
