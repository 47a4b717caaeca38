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
"""Two-phase training of the two-branch network.

The first phase trains the rgb branch and the head as a plain
classifier, with the saliency map forced to zero.  The second phase
freezes both and trains only the saliency branch, through the
modulation layer, on the same classification loss.

Training is single-threaded; every shuffle is drawn from a named
sub-seed, so a run is a pure function of seed, configuration and data.
"""

import json
import logging
import math

import numpy as np

from SalBranch import DataFormatError
from SalBranch import TrainingError
from SalBranch import seeding
from SalBranch.data import load_image
from SalBranch.data import split
from SalBranch.network import logits
from SalBranch.tensor import Tensor
from SalBranch.tensor import backward
from SalBranch.tensor import resize
from SalBranch.tensor import sgd_step
from SalBranch.tensor import softmax_cross_entropy


logger = logging.getLogger(__name__)


class TrainingConfig:

    def __init__(self, pretrain_epochs=4, epochs=4, pretrain_lr=0.05,
                 lr=0.05, batch_size=32, held_out_fraction=0.1):
        self.pretrain_epochs = int(pretrain_epochs)
        self.epochs = int(epochs)
        self.pretrain_lr = float(pretrain_lr)
        self.lr = float(lr)
        self.batch_size = int(batch_size)
        self.held_out_fraction = float(held_out_fraction)
        if self.pretrain_epochs < 0 or self.epochs < 0:
            raise ValueError("epoch counts must not be negative")
        if self.pretrain_lr < 0 or self.lr < 0:
            raise ValueError("learning rates must not be negative")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if not 0 <= self.held_out_fraction < 1:
            raise ValueError("held-out fraction must lie in [0, 1)")

    def as_dict(self):
        return {
            "pretrain_epochs": self.pretrain_epochs,
            "epochs": self.epochs,
            "pretrain_lr": self.pretrain_lr,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "held_out_fraction": self.held_out_fraction,
        }


class ClassificationSet:
    """Images [N,3,H,W] with their integer class labels."""

    def __init__(self, images, labels):
        images = np.asarray(images, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if images.ndim != 4 or images.shape[1] != 3:
            raise ValueError("images must be [N,3,H,W], got shape %s"
                             % (images.shape,))
        if len(images) != len(labels):
            raise ValueError("%d images but %d labels"
                             % (len(images), len(labels)))
        self.images = images
        self.labels = labels

    def __len__(self):
        return len(self.labels)

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return ClassificationSet(self.images[indices], self.labels[indices])


def load_classification_set(manifest, size):
    """Read every labelled image of *manifest*, resampled to size×size."""
    images, labels = [], []
    for entry in manifest:
        if entry.label is None:
            raise DataFormatError("entry %r has no class label" % entry.id,
                                  entry.image)
        data = load_image(entry.image).data
        if data.shape[1:] != (size, size):
            data = resize(Tensor(data[None]), size, size).data[0]
        images.append(data)
        labels.append(entry.label)
    return ClassificationSet(np.array(images).reshape(-1, 3, size, size),
                             labels)


class TrainingLog:
    """Per-batch losses and phase boundaries of a training run."""

    def __init__(self):
        self.records = []
        self.phases = []

    def __len__(self):
        return len(self.records)

    def start_phase(self, name, epochs, batches):
        self.phases.append({"phase": name, "start": len(self.records),
                            "epochs": epochs, "batches": batches})

    def end_phase(self, **info):
        self.phases[-1]["end"] = len(self.records)
        self.phases[-1].update(info)

    def record(self, phase, epoch, batch, loss):
        self.records.append({"phase": phase, "epoch": epoch,
                             "batch": batch, "loss": loss})

    def losses(self, phase=None):
        return [r["loss"] for r in self.records
                if phase is None or r["phase"] == phase]

    def epoch_means(self, phase):
        by_epoch = {}
        for r in self.records:
            if r["phase"] == phase:
                by_epoch.setdefault(r["epoch"], []).append(r["loss"])
        return [float(np.mean(by_epoch[e])) for e in sorted(by_epoch)]

    def as_dict(self):
        return {"phases": self.phases, "records": self.records}

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def batches(n, batch_size, gen):
    order = gen.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def _run_phase(net, data, params, phase, epochs, lr, seed, batch_size,
               use_saliency, log):
    n_batches = math.ceil(len(data) / batch_size)
    log.start_phase(phase, epochs, n_batches)
    logger.info("starting %s phase: %d epochs of %d batches",
                phase, epochs, n_batches)
    for epoch in range(epochs):
        gen = seeding.rng(seed, "train", phase, "shuffle", epoch)
        total = 0.0
        for b, indices in enumerate(batches(len(data), batch_size, gen)):
            out = logits(Tensor(data.images[indices]), net, use_saliency)
            loss = softmax_cross_entropy(out, data.labels[indices])
            value = float(loss.data)
            if not math.isfinite(value):
                raise TrainingError(
                    "non-finite loss %r in %s phase, epoch %d, batch %d"
                    % (value, phase, epoch, b))
            backward(loss)
            sgd_step(params, lr)
            log.record(phase, epoch, b, value)
            total += value
            logger.debug("%s epoch %d batch %d: loss %.6f",
                         phase, epoch, b, value)
        logger.info("%s epoch %d/%d: mean loss %.6f",
                    phase, epoch + 1, epochs, total / n_batches)


def accuracy(net, data, use_saliency=True, batch_size=64):
    """Fraction of *data* classified correctly."""
    if not len(data):
        raise TrainingError("cannot measure accuracy on an empty set")
    correct = 0
    for start in range(0, len(data), batch_size):
        images = Tensor(data.images[start:start + batch_size])
        predicted = logits(images, net, use_saliency).data.argmax(axis=1)
        correct += int((predicted == data.labels[start:start + batch_size])
                       .sum())
    return correct / len(data)


def pretrain_rgb(net, dataset, epochs, lr, seed, batch_size=32,
                 held_out=None, log=None):
    """Train the rgb branch and head with the saliency map forced to 0."""
    if not len(dataset):
        raise TrainingError("cannot train on an empty dataset")
    if log is None:
        log = TrainingLog()
    net.unfreeze()
    net.freeze(net.saliency_params)
    params = list(net.rgb_params.values()) + list(net.head_params.values())
    try:
        _run_phase(net, dataset, params, "pretrain", epochs, lr, seed,
                   batch_size, False, log)
    finally:
        net.unfreeze()
    info = {}
    if held_out is not None and len(held_out):
        info["accuracy"] = accuracy(net, held_out, use_saliency=False)
        logger.info("pretrained held-out accuracy: %.4f", info["accuracy"])
    log.end_phase(**info)
    net.phase = "pretrained"
    return net


def train_selective(net, dataset, epochs, lr, seed, batch_size=32,
                    held_out=None, log=None):
    """Train only the saliency branch; rgb branch and head stay frozen."""
    if net.phase not in ("pretrained", "selective"):
        raise TrainingError(
            "the saliency branch can only be trained on a pretrained "
            "network; run pretrain_rgb() first")
    if not len(dataset):
        raise TrainingError("cannot train on an empty dataset")
    if log is None:
        log = TrainingLog()
    net.freeze_for_selective_training()
    params = list(net.saliency_params.values())
    _run_phase(net, dataset, params, "selective", epochs, lr, seed,
               batch_size, True, log)
    info = {}
    if held_out is not None and len(held_out):
        info["accuracy"] = accuracy(net, held_out)
        logger.info("held-out accuracy with saliency: %.4f",
                    info["accuracy"])
    log.end_phase(**info)
    net.phase = "selective"
    return net


def train(net, dataset, config, seed):
    """Run both phases; a held-out share of *dataset* measures accuracy."""
    held_out = None
    if config.held_out_fraction > 0 and len(dataset) > 1:
        parts = split(range(len(dataset)),
                      1.0 - config.held_out_fraction, seed)
        if parts.test and parts.train:
            held_out = dataset.subset(parts.test)
            dataset = dataset.subset(parts.train)
    log = TrainingLog()
    pretrain_rgb(net, dataset, config.pretrain_epochs, config.pretrain_lr,
                 seed, config.batch_size, held_out, log)
    train_selective(net, dataset, config.epochs, config.lr, seed,
                    config.batch_size, held_out, log)
    return log
