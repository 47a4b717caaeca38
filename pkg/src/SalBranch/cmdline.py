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
"""The ``salbranch`` command.

Subcommands:

gen
    generate a pop-out dataset and its manifest
train
    pretrain the rgb branch, then train the saliency branch
predict
    write one saliency map per manifest entry
centerbias
    write an unsupervised or supervised center-bias prior
eval
    score predictions, optionally fused with a prior
ablate
    AUC-Judd over the grid of priors and fusion modes

Every subcommand resolves its settings through the run configuration
schema; see :mod:`SalBranch.config`.
"""

import argparse
import json
import logging
import os
import sys

import ZConfig

import SalBranch
from SalBranch import SalBranchError
from SalBranch import checkpoint
from SalBranch import seeding
from SalBranch.config import config_as_dict
from SalBranch.config import load_run_config
from SalBranch.data import load_image
from SalBranch.data import load_manifest
from SalBranch.data import split
from SalBranch.data import write_manifest
from SalBranch.evaluation import GaussianPrior
from SalBranch.evaluation import ablation_csv
from SalBranch.evaluation import ablation_table
from SalBranch.evaluation import evaluate_dataset
from SalBranch.evaluation import load_prior
from SalBranch.evaluation import supervised_prior
from SalBranch.maps import as_array
from SalBranch.network import TwoBranchNet
from SalBranch.network import predict_saliency
from SalBranch.popout import PopoutSpec
from SalBranch.popout import gen_popout_dataset
from SalBranch.popout import save_dataset
from SalBranch.priors import export_pgm
from SalBranch.priors import make_gaussian_cb
from SalBranch.report import MetricReport
from SalBranch.training import load_classification_set
from SalBranch.training import train


logger = logging.getLogger(__name__)

LOGGING = """\
<logger>
  level %s
  <logfile>
    path STDERR
    format %%(asctime)s %%(levelname)s %%(name)s %%(message)s
  </logfile>
</logger>
"""

_installed_handlers = []


def configure_logging(options):
    root = logging.getLogger()
    for handler in _installed_handlers:
        root.removeHandler(handler)
    del _installed_handlers[:]
    before = list(root.handlers)
    if options.log_config:
        with open(options.log_config) as f:
            text = f.read()
    else:
        level = "INFO"
        if options.quiet:
            level = "WARNING"
        elif options.verbose:
            level = "DEBUG"
        text = LOGGING % level
    ZConfig.configureLoggers(text)
    _installed_handlers.extend(h for h in root.handlers if h not in before)


# Flags that map onto run configuration keys.  The key is the
# argparse destination, the value the configuration paths it sets.
FLAG_KEYS = {
    "seed": ("seed",),
    "workers": ("workers",),
    # gen
    "classes": ("popout/classes", "network/num-classes"),
    "n": ("popout/count",),
    "canvas": ("popout/canvas",),
    "distractors": ("popout/distractors",),
    "feature": ("popout/feature",),
    "placement": ("popout/placement",),
    "fixations": ("popout/fixations-per-image",),
    "center_noise": ("popout/center-noise",),
    "test_fraction": ("popout/test-fraction",),
    # train
    "epochs": ("training/pretrain-epochs", "training/epochs"),
    "lr": ("training/pretrain-lr", "training/lr"),
    "batch_size": ("training/batch-size",),
    # predict
    "blur": ("prediction/blur",),
    # centerbias
    "dva": ("centerbias/dva-factor",),
    "pxva": ("centerbias/pxva",),
    "shape": ("centerbias/shape",),
    "width": ("centerbias/width",),
    "height": ("centerbias/height",),
    # eval
    "fusion": ("fusion/mode",),
    "n_splits": ("metrics/n-splits",),
}


def flag_options(options):
    specs = []
    for dest, paths in FLAG_KEYS.items():
        value = getattr(options, dest, None)
        if value is not None:
            specs.extend("%s=%s" % (path, value) for path in paths)
    return specs


def resolve_config(options):
    return load_run_config(options.config,
                           flag_options(options) + list(options.overrides))


def _output_dir(options):
    os.makedirs(options.out, exist_ok=True)
    return options.out


def _write_json(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_gen(options, config):
    out = _output_dir(options)
    values = config.popout.as_dict()
    values["seed"] = seeding.derive_seed(config.seed, "gen")
    spec = PopoutSpec(**values)
    dataset = gen_popout_dataset(spec)
    manifest = save_dataset(dataset, out, name=options.name)
    logger.info("wrote %d images to %s", len(manifest), out)
    if 0 < spec.test_fraction < 1 and len(manifest) > 1:
        parts = split(manifest, 1.0 - spec.test_fraction,
                      seeding.derive_seed(config.seed, "gen", "split"))
        write_manifest(parts.train, os.path.join(out, "train.json"))
        write_manifest(parts.test, os.path.join(out, "test.json"))
        logger.info("split into %d training and %d test images",
                    len(parts.train), len(parts.test))
    return 0


def _network(config):
    return TwoBranchNet(config.network.replace(
        seed=seeding.derive_seed(config.seed, "train", "init")))


def cmd_train(options, config):
    manifest = load_manifest(options.manifest)
    net = _network(config)
    dataset = load_classification_set(manifest, net.config.input_size)
    if len(dataset) and dataset.labels.max() >= net.config.num_classes:
        raise SalBranchError(
            "label %d does not fit a network with %d classes"
            % (dataset.labels.max(), net.config.num_classes),
            options.manifest)
    out = _output_dir(options)
    log = train(net, dataset, config.training,
                seeding.derive_seed(config.seed, "train"))
    checkpoint.save(net, os.path.join(out, "checkpoint.salf"))
    with open(os.path.join(out, "losses.json"), "w") as f:
        f.write(log.to_json())
    logger.info("wrote checkpoint and %d loss records to %s", len(log), out)
    return 0


def cmd_predict(options, config):
    manifest = load_manifest(options.manifest)
    net = _network(config)
    checkpoint.load_into(net, options.checkpoint)
    out = _output_dir(options)
    failed = []
    for entry in manifest:
        try:
            sal = as_array(predict_saliency(net, load_image(entry.image),
                                            config.prediction.blur))
        except SalBranchError as e:
            logger.error("cannot predict %s: %s", entry.id, e)
            failed.append(entry.id)
            continue
        peak = sal.max()
        export_pgm(sal / peak if peak > 0 else sal,
                   os.path.join(out, entry.id + ".pgm"))
    logger.info("wrote %d saliency maps to %s",
                len(manifest) - len(failed), out)
    if failed:
        logger.error("failed entries: %s", ", ".join(failed))
        return 1
    return 0


def cmd_centerbias(options, config):
    out = _output_dir(options)
    if options.supervised:
        manifest = load_manifest(options.supervised)
        prior = supervised_prior(
            manifest, seeding.derive_seed(config.seed, "centerbias"),
            config.metrics.sigma_dva)
        prior.write(out)
        logger.info("wrote supervised prior pair for %d images to %s",
                    len(manifest), out)
        return 0
    spec = config.centerbias.spec()
    export_pgm(make_gaussian_cb(spec), os.path.join(out, "cb.pgm"))
    logger.info("wrote %s center bias (sigma %.3f x %.3f px) to %s",
                spec.shape, spec.sigma_x, spec.sigma_y, out)
    return 0


def _prior(options, config, manifest):
    if options.cb:
        return load_prior(options.cb)
    if options.ucb:
        return GaussianPrior(config.centerbias.spec(pxva=manifest.pxva))
    return None


def cmd_eval(options, config):
    manifest = load_manifest(options.manifest)
    prior = _prior(options, config, manifest)
    out = _output_dir(options)
    heatmaps = None
    if options.heatmaps:
        heatmaps = os.path.join(out, "heatmaps")
        os.makedirs(heatmaps, exist_ok=True)
    rows = evaluate_dataset(
        manifest, options.predictions, config.metrics,
        seeding.derive_seed(config.seed, "eval"), prior, config.fusion,
        config.workers, heatmaps)
    inputs = {"manifest": options.manifest}
    if options.cb:
        inputs["cb"] = options.cb
    for entry in manifest:
        inputs["prediction/" + entry.id] = os.path.join(
            options.predictions, entry.id + ".pgm")
    report = MetricReport(rows, config_as_dict(config), config.seed,
                          "eval", inputs)
    report.write(os.path.join(out, "report.json"),
                 os.path.join(out, "report.csv"))
    logger.info("mean AUC-Judd %.4f over %d images",
                report.means["auc_judd"], len(rows))
    return 0


def cmd_ablate(options, config):
    datasets = [(load_manifest(m), d) for m, d in options.dataset]
    out = _output_dir(options)
    header, rows = ablation_table(
        datasets, config.ablation, config.centerbias,
        seeding.derive_seed(config.seed, "ablate"),
        config.metrics.sigma_dva, config.workers,
        config.metrics.auc_judd_thresholds)
    with open(os.path.join(out, "ablation.csv"), "w") as f:
        f.write(ablation_csv(header, rows))
    _write_json(os.path.join(out, "ablation.json"),
                {"config": config_as_dict(config),
                 "header": header, "rows": rows,
                 "version": SalBranch.__version__})
    logger.info("wrote %d ablation rows for %d datasets to %s",
                len(rows), len(datasets), out)
    return 0


def _common(parser):
    parser.add_argument("--seed", type=int, metavar="N",
                        help="seed all randomness derives from")
    parser.add_argument("--config", metavar="FILE",
                        help="JSON or ZConfig run configuration")
    parser.add_argument("--out", metavar="DIR", default=".",
                        help="output directory (default: current)")
    parser.add_argument("-X", dest="overrides", action="append",
                        default=[], metavar="SECTION/KEY=VALUE",
                        help="override a configuration value")
    parser.add_argument("--workers", type=int, metavar="N",
                        help="evaluation worker threads")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true",
                           help="only log warnings and errors")
    verbosity.add_argument("-v", "--verbose", action="store_true",
                           help="log debugging output")
    parser.add_argument("--log-config", metavar="FILE",
                        help="ZConfig <logger> configuration to use")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="salbranch",
        description="Train and benchmark a classification network's "
                    "saliency branch.")
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + SalBranch.__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("gen", help="generate a pop-out dataset")
    _common(p)
    p.add_argument("--name", default="popout", help="dataset name")
    p.add_argument("--classes", type=int, metavar="K")
    p.add_argument("--n", type=int, metavar="N", help="number of images")
    p.add_argument("--canvas", type=int, metavar="PX")
    p.add_argument("--distractors", type=int, metavar="N")
    p.add_argument("--feature", choices=PopoutSpec.FEATURES)
    p.add_argument("--placement", choices=PopoutSpec.PLACEMENTS)
    p.add_argument("--fixations", type=int, metavar="N",
                   help="fixations per image")
    p.add_argument("--center-noise", type=float, metavar="RATE")
    p.add_argument("--test-fraction", type=float, metavar="F")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train both phases")
    _common(p)
    p.add_argument("manifest")
    p.add_argument("--epochs", type=int, metavar="N",
                   help="epochs of each phase")
    p.add_argument("--lr", type=float, help="learning rate of each phase")
    p.add_argument("--batch-size", type=int, metavar="N")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write saliency maps")
    _common(p)
    p.add_argument("checkpoint")
    p.add_argument("manifest")
    p.add_argument("--blur", type=float, metavar="SIGMA",
                   help="Gaussian blur in pixels")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("centerbias", help="write a center-bias prior")
    _common(p)
    p.add_argument("--dva", type=float, metavar="DEGREES",
                   help="full width at half maximum in degrees")
    p.add_argument("--pxva", type=float, help="pixels per degree")
    p.add_argument("--shape", choices=("circular", "ellipsoid"))
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--supervised", metavar="MANIFEST",
                   help="build a split pair from the manifest's maps")
    p.set_defaults(func=cmd_centerbias)

    p = sub.add_parser("eval", help="score predictions")
    _common(p)
    p.add_argument("predictions", help="directory of <id>.pgm maps")
    p.add_argument("manifest")
    prior = p.add_mutually_exclusive_group()
    prior.add_argument("--cb", metavar="FILE",
                       help="prior map or supervised assignment.json")
    prior.add_argument("--ucb", action="store_true",
                       help="fuse with the configured Gaussian prior")
    p.add_argument("--fusion", choices=("sum", "mult"))
    p.add_argument("--n-splits", type=int, metavar="N")
    p.add_argument("--heatmaps", action="store_true",
                   help="also write the fused maps")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="prior and fusion ablation")
    _common(p)
    p.add_argument("--dataset", nargs=2, action="append", required=True,
                   metavar=("MANIFEST", "PREDICTIONS"),
                   help="a manifest and its predictions directory")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(args=None):
    parser = make_parser()
    options = parser.parse_args(args=args)
    configure_logging(options)
    try:
        config = resolve_config(options)
        return options.func(options, config)
    except (SalBranchError, ZConfig.ConfigurationError, OSError) as e:
        print("salbranch %s: %s" % (options.command, e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
