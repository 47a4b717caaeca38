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
"""Binary network checkpoints.

Layout, all integers u32 little-endian::

    b"SALF" version
    repeated until end of file:
        name-length name-bytes(utf-8) rank dim*rank float64-le*prod(dims)

Parameters are written in network order.  Reading restores the exact
float values.
"""

import struct

import numpy as np

from SalBranch import CheckpointError


MAGIC = b"SALF"
VERSION = 1

_U32 = struct.Struct("<I")
_F64 = np.dtype("<f8")


def dumps(params):
    """Serialize ``(name, array)`` pairs."""
    parts = [MAGIC, _U32.pack(VERSION)]
    for name, value in params:
        value = np.asarray(value, dtype=np.float64)
        encoded = name.encode("utf-8")
        parts.append(_U32.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_U32.pack(value.ndim))
        parts.extend(_U32.pack(d) for d in value.shape)
        parts.append(value.astype(_F64).tobytes())
    return b"".join(parts)


def loads(data, url=None):
    """Return the ``(name, array)`` pairs stored in *data*."""
    if data[:4] != MAGIC:
        raise CheckpointError("not a SALF checkpoint", url)
    pos = 4

    def u32():
        nonlocal pos
        if pos + 4 > len(data):
            raise CheckpointError("truncated checkpoint", url)
        (value,) = _U32.unpack_from(data, pos)
        pos += 4
        return value

    version = u32()
    if version != VERSION:
        raise CheckpointError("unsupported checkpoint version %d" % version,
                              url)
    params = []
    while pos < len(data):
        length = u32()
        if pos + length > len(data):
            raise CheckpointError("truncated checkpoint", url)
        try:
            name = data[pos:pos + length].decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError("malformed parameter name at byte %d"
                                  % pos, url)
        pos += length
        shape = tuple(u32() for _ in range(u32()))
        nbytes = int(np.prod(shape, dtype=np.int64)) * _F64.itemsize
        if pos + nbytes > len(data):
            raise CheckpointError("truncated data for parameter %s" % name,
                                  url)
        value = np.frombuffer(data, dtype=_F64, count=nbytes // 8,
                              offset=pos).reshape(shape)
        pos += nbytes
        params.append((name, value.astype(np.float64)))
    return params


def save(net, path):
    with open(path, "wb") as f:
        f.write(dumps((p.name, p.value.data) for p in net.parameters()))


def load_into(net, path):
    """Replace every parameter of *net* with the values stored at *path*.

    Names and shapes must match the network exactly.
    """
    with open(path, "rb") as f:
        data = f.read()
    url = str(path)
    stored = loads(data, url)
    params = net.named_parameters()
    seen = set()
    for name, value in stored:
        if name not in params:
            raise CheckpointError("unknown parameter %s" % name, url)
        if value.shape != params[name].shape:
            raise CheckpointError(
                "parameter %s has shape %s in the checkpoint but %s in the "
                "network" % (name, value.shape, params[name].shape), url)
        seen.add(name)
    missing = [name for name in params if name not in seen]
    if missing:
        raise CheckpointError("checkpoint lacks parameter %s" % missing[0],
                              url)
    for name, value in stored:
        params[name].assign(value)
    return net
