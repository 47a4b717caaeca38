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
"""Binary PGM (P5) and PPM (P6) files.

Samples are one byte when maxval < 256 and two big-endian bytes
otherwise.  Maps are stored with maxval 65535; images with maxval 255.
"""

import numpy as np

from SalBranch import DataFormatError


CHANNELS = {b"P5": 1, b"P6": 3}


def _header(data, url):
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise DataFormatError("truncated PNM header", url)
        c = data[pos:pos + 1]
        if c == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise DataFormatError("truncated PNM header", url)
            pos = end + 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while (pos < len(data) and not data[pos:pos + 1].isspace()
                   and data[pos:pos + 1] != b"#"):
                pos += 1
            tokens.append(data[start:pos])
            if len(tokens) == 1 and tokens[0] not in CHANNELS:
                raise DataFormatError(
                    "not a binary PGM or PPM file (magic %r)"
                    % tokens[0][:2], url)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise DataFormatError("truncated PNM header", url)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataFormatError("malformed PNM header: %r"
                              % b" ".join(tokens), url)
    if width < 1 or height < 1:
        raise DataFormatError("PNM image has no pixels", url)
    if not 0 < maxval < 65536:
        raise DataFormatError("PNM maxval %d out of range" % maxval, url)
    return tokens[0], width, height, maxval, pos + 1


def parse_pnm(data, url=None):
    """Return ``(samples, maxval)`` for PNM bytes *data*.

    *samples* is an integer array of shape (H, W) for P5 and
    (H, W, 3) for P6.
    """
    magic, width, height, maxval, offset = _header(data, url)
    channels = CHANNELS[magic]
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    body = data[offset:offset + count * dtype.itemsize]
    if len(body) < count * dtype.itemsize:
        raise DataFormatError(
            "truncated PNM data: expected %d bytes, found %d"
            % (count * dtype.itemsize, len(body)), url)
    samples = np.frombuffer(body, dtype=dtype).astype(np.int64)
    if (samples > maxval).any():
        raise DataFormatError("PNM sample exceeds maxval %d" % maxval, url)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return samples.reshape(shape), maxval


def read_pnm(path):
    with open(path, "rb") as f:
        data = f.read()
    return parse_pnm(data, str(path))


def _write(path, magic, samples, maxval):
    samples = np.asarray(samples)
    if samples.min(initial=0) < 0 or samples.max(initial=0) > maxval:
        raise ValueError("samples must lie in [0, %d]" % maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    height, width = samples.shape[:2]
    header = b"%s\n%d %d\n%d\n" % (magic, width, height, maxval)
    with open(path, "wb") as f:
        f.write(header)
        f.write(samples.astype(dtype).tobytes())


def write_pgm(path, samples, maxval=65535):
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("PGM samples are 2-D, got shape %s"
                         % (samples.shape,))
    _write(path, b"P5", samples, maxval)


def write_ppm(path, samples, maxval=255):
    samples = np.asarray(samples)
    if samples.ndim != 3 or samples.shape[2] != 3:
        raise ValueError("PPM samples are (H, W, 3), got shape %s"
                         % (samples.shape,))
    _write(path, b"P6", samples, maxval)


def read_map(path):
    """Read a grayscale map as floats in [0, 1]."""
    samples, maxval = read_pnm(path)
    if samples.ndim != 2:
        raise DataFormatError("expected a grayscale PGM map", str(path))
    return samples / maxval


def write_map(path, values):
    """Write a map with values in [0, 1] as a 16-bit PGM."""
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    write_pgm(path, np.round(values * 65535).astype(np.int64))


def write_image(path, image):
    """Write a [3,H,W] image with values in [0, 1] as an 8-bit PPM."""
    image = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    samples = np.round(np.moveaxis(image, 0, -1) * 255).astype(np.int64)
    write_ppm(path, samples)
