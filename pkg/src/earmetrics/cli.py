"""The ``earmetrics`` command line: one entry point per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every run prints a JSON summary (including its resolved configuration) to
standard output; outputs are written atomically.  Stochastic subcommands
require an explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from ._io import atomic_write_json, atomic_write_text, dump_json
from .augment import augment_dataset, default_plan
from .dataset import (
    AGE_GROUP_LABELS,
    GENDERS,
    SplitManifest,
    assign_age_group,
    ingest,
    split_counts,
    stratified_split,
)
from .errors import DataError, EarMetricsError, NumericalError
from .geometry import (
    FEATURE_NAMES,
    apply_normalizer,
    extract_features,
    fit_normalizer,
    load_landmarks,
    read_features_csv,
    select_features,
    write_features_csv,
)
from .tabular import (
    LabeledDataset,
    evaluate,
    load_model,
    preprocess,
    save_model,
    train_forest,
    train_logreg,
    train_mlp,
    train_svm,
)
from .tinycnn import CnnDataset, SgdConfig, accuracy, save_checkpoint, two_stage_finetune
from .tinycnn.network import init_model


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="earmetrics", description=__doc__)
    parser.add_argument("--version", action="version", version=f"earmetrics {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a labels CSV and emit normalized records")
    p.add_argument("--labels", required=True)
    p.add_argument("--images", default=None, help="directory image paths are relative to")
    p.add_argument("--out", default=None, help="write validated records JSON here")
    p.add_argument("--no-check-files", action="store_true", help="skip file-existence checks")

    p = sub.add_parser("annotate-serve", help="serve the landmark annotation UI and API")
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True, help="directory for landmark JSON files")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui", default=None, help="override the static UI directory")

    p = sub.add_parser("extract", help="compute geometric features from landmark files")
    p.add_argument("--landmarks", required=True, help="directory of landmark JSON files")
    p.add_argument("--out", required=True, help="features CSV path")

    p = sub.add_parser("augment", help="expand images with the deterministic 55-variant plan")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plan", default="default", choices=["default"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--labels", default=None, help="labels CSV to join subject ids and labels")
    p.add_argument("--task", default="gender", choices=["age", "gender"],
                   help="which label the manifest carries when --labels is given")

    p = sub.add_parser("split", help="stratified subject-independent train/val/test split")
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["age", "gender"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--val-frac", type=float, default=0.125)
    p.add_argument("--counts-override", default=None,
                   help='JSON like {"male": [131, 19, 38]} with per-stratum train/val/test counts')

    p = sub.add_parser("train", help="train a classical classifier on geometric features")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["age", "gender"])
    p.add_argument("--model", required=True, choices=["logreg", "forest", "svm", "mlp"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default=None, help="manifest JSON; fit on train+val, report test")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--select-features", action="store_true",
                   help="forest-importance selection at the mean-importance threshold")
    p.add_argument("--l2-lambda", type=float, default=1.0)
    p.add_argument("--n-trees", type=int, default=1000)
    p.add_argument("--svm-c", type=float, default=250.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--hidden", default="32,32,32")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)

    p = sub.add_parser("finetune", help="two-stage fine-tuning of the small convnet")
    p.add_argument("--domain", required=True, help="directory with one subdirectory per class")
    p.add_argument("--target", required=True, help="directory with one subdirectory per class")
    p.add_argument("--classes-domain", type=int, required=True)
    p.add_argument("--classes-target", type=int, required=True)
    p.add_argument("--lr", type=float, default=0.0001)
    p.add_argument("--head-mult", type=float, default=10.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--arch", default="earnet-s")
    p.add_argument("--size", type=int, default=64, help="images are resized to size x size")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs-domain", type=int, default=1)
    p.add_argument("--epochs-target", type=int, default=10)
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.add_argument("--log", default=None, help="training CSV (step, stage, loss, lr)")

    p = sub.add_parser("eval", help="evaluate a trained model file on features")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["age", "gender"])
    p.add_argument("--split", default=None)
    p.add_argument("--subset", default="test", choices=["train", "val", "test"])
    p.add_argument("--out", default=None, help="write the JSON report here too")
    return parser


def _task_labels(records, task):
    names = list(AGE_GROUP_LABELS) if task == "age" else list(GENDERS)
    by_id = {}
    for rec in records:
        by_id[rec.subject_id] = (
            assign_age_group(rec.age).value if task == "age" else GENDERS.index(rec.gender)
        )
    return names, by_id


def _dataset_from_csvs(features_csv, labels_csv, task):
    ids, X = read_features_csv(features_csv)
    records = ingest(labels_csv, check_files=False)
    names, by_id = _task_labels(records, task)
    missing = [s for s in ids if s not in by_id]
    if missing:
        raise DataError(f"feature rows without labels: {missing[:5]}")
    y = np.array([by_id[s] for s in ids])
    return LabeledDataset(X, y, names, subject_ids=list(ids))


def cmd_ingest(args):
    records = ingest(args.labels, image_dir=args.images, check_files=not args.no_check_files)
    payload = [
        {
            "subject_id": r.subject_id,
            "age": r.age,
            "gender": r.gender,
            "image_path": r.image_path,
            "landmarks_path": r.landmarks_path,
            "age_group": r.age_group.label,
        }
        for r in records
    ]
    if args.out:
        atomic_write_json(args.out, payload)
    return {"command": "ingest", "records": len(records), "labels": args.labels, "out": args.out}


def cmd_annotate_serve(args):
    from .server import serve

    serve(args.images, args.out, args.port, args.ui)
    return {"command": "annotate-serve", "stopped": True}


def cmd_extract(args):
    lm_dir = Path(args.landmarks)
    if not lm_dir.is_dir():
        raise DataError(f"not a directory: {lm_dir}")
    rows = []
    for path in sorted(lm_dir.glob("*.json")):
        lm, _image = load_landmarks(path)
        rows.append((path.stem, extract_features(lm)))
    if not rows:
        raise DataError(f"no landmark JSON files in {lm_dir}")
    lines = [",".join(("subject_id",) + FEATURE_NAMES)]
    lines += [",".join([sid] + [repr(float(v)) for v in vec.values]) for sid, vec in rows]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return {
        "command": "extract",
        "landmarks": str(lm_dir),
        "out": args.out,
        "rows": len(rows),
        "columns": ["subject_id"] + list(FEATURE_NAMES),
    }


def cmd_augment(args):
    in_dir = Path(args.in_dir)
    sources = sorted(
        p for p in in_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")
    )
    labels = None
    if args.labels:
        records = ingest(args.labels, check_files=False)
        names, by_id = _task_labels(records, args.task)
        labels = {
            Path(r.image_path).stem: (r.subject_id, names[by_id[r.subject_id]]) for r in records
        }
    plan = default_plan(args.seed)
    summary = augment_dataset(sources, plan, args.out, args.manifest, labels)
    return {
        "command": "augment",
        "plan": args.plan,
        "seed": args.seed,
        "sources": len(sources),
        "outputs": summary["count"],
        "skipped": summary["skipped"],
        "manifest": args.manifest,
    }


def cmd_split(args):
    records = ingest(args.labels, check_files=False)
    override = None
    if args.counts_override:
        try:
            raw = json.loads(args.counts_override)
            override = {k: tuple(int(x) for x in v) for k, v in raw.items()}
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise DataError(f"bad --counts-override: {exc}")
    manifest = stratified_split(
        records, args.task, seed=args.seed, test_frac=args.test_frac,
        val_frac=args.val_frac, counts_override=override,
    )
    if args.out:
        atomic_write_json(args.out, manifest.to_json())
    return {
        "command": "split",
        "task": args.task,
        "seed": args.seed,
        "counts": split_counts(manifest, records),
        "sizes": {"train": len(manifest.train), "val": len(manifest.val), "test": len(manifest.test)},
        "out": args.out,
    }


TRAINERS = {
    "logreg": lambda ds, args: train_logreg(ds, l2_lambda=args.l2_lambda, seed=args.seed),
    "forest": lambda ds, args: train_forest(ds, n_trees=args.n_trees, seed=args.seed),
    "svm": lambda ds, args: train_svm(ds, c=args.svm_c, gamma=args.gamma, seed=args.seed),
    "mlp": lambda ds, args: train_mlp(
        ds,
        hidden=tuple(int(h) for h in args.hidden.split(",")),
        lr=args.lr,
        epochs=args.epochs,
        seed=args.seed,
    ),
}


def cmd_train(args):
    ds = _dataset_from_csvs(args.features, args.labels, args.task)
    if args.split:
        manifest = SplitManifest.load(args.split)
        fit_ids = set(manifest.train) | set(manifest.val)
        fit_idx = [i for i, s in enumerate(ds.subject_ids) if s in fit_ids]
        test_idx = [i for i, s in enumerate(ds.subject_ids) if s in set(manifest.test)]
        if not fit_idx or not test_idx:
            raise DataError("split manifest does not cover the feature rows")
    else:
        fit_idx = list(range(ds.n))
        test_idx = fit_idx
    fit_ds = ds.select(fit_idx)

    stats = None if args.no_normalize else fit_normalizer(fit_ds.features)
    X_fit = fit_ds.features if stats is None else apply_normalizer(fit_ds.features, stats)
    mask = None
    if args.select_features:
        probe = train_forest(
            LabeledDataset(X_fit, fit_ds.labels, fit_ds.class_names), seed=args.seed
        )
        mask = select_features(probe.feature_importances_)
        X_fit = mask.apply(X_fit)

    model = TRAINERS[args.model](
        LabeledDataset(X_fit, fit_ds.labels, fit_ds.class_names, fit_ds.subject_ids), args
    )
    model.feature_mask = mask
    model.norm_stats = stats
    save_model(model, args.out)

    eval_ds = ds.select(test_idx)
    report = evaluate(model, LabeledDataset(
        preprocess(model, eval_ds.features), eval_ds.labels, eval_ds.class_names
    ))
    return {
        "command": "train",
        "model": args.model,
        "task": args.task,
        "seed": args.seed,
        "normalized": stats is not None,
        "selected_features": None if mask is None else mask.names(),
        "fit_rows": len(fit_idx),
        "eval_rows": len(test_idx),
        "eval_on": "test" if args.split else "train",
        "accuracy": report.accuracy,
        "out": args.out,
    }


def _load_image_dir(root, size) -> CnnDataset:
    root = Path(root)
    classes = sorted(p.name for p in root.iterdir() if p.is_dir())
    if len(classes) < 2:
        raise DataError(f"{root}: need at least 2 class subdirectories")
    xs, ys = [], []
    for label, cls in enumerate(classes):
        for file in sorted((root / cls).iterdir()):
            if file.suffix.lower() not in (".png", ".jpg", ".jpeg", ".bmp"):
                continue
            with Image.open(file) as im:
                im = im.convert("L").resize((size, size), Image.BILINEAR)
                xs.append(np.asarray(im, dtype=np.float64)[None, :, :] / 255.0)
            ys.append(label)
    if not xs:
        raise DataError(f"{root}: no images found")
    return CnnDataset(np.stack(xs), np.array(ys), classes)


def cmd_finetune(args):
    domain = _load_image_dir(args.domain, args.size)
    target = _load_image_dir(args.target, args.size)
    if domain.n_classes != args.classes_domain:
        raise DataError(
            f"--classes-domain {args.classes_domain} but found {domain.n_classes} class dirs"
        )
    if target.n_classes != args.classes_target:
        raise DataError(
            f"--classes-target {args.classes_target} but found {target.n_classes} class dirs"
        )
    cfg = SgdConfig(
        global_lr=args.lr, epochs=1, batch_size=args.batch_size, seed=args.seed,
        last_layer_multiplier=args.head_mult,
    )
    base = init_model(args.arch, num_classes=domain.n_classes, seed=args.seed,
                      input_shape=(1, args.size, args.size))
    log_rows: list = []
    model, report = two_stage_finetune(
        base, domain, target, cfg,
        domain_epochs=args.epochs_domain, target_epochs=args.epochs_target, log=log_rows,
    )
    save_checkpoint(model, args.out, cfg)
    if args.log:
        lines = ["step,stage,loss,lr"] + [
            f"{s},{stage},{loss!r},{lr!r}" for s, stage, loss, lr in log_rows
        ]
        atomic_write_text(args.log, "\n".join(lines) + "\n")
    return {
        "command": "finetune",
        "seed": args.seed,
        "lr": args.lr,
        "head_mult": args.head_mult,
        "arch": args.arch,
        "stage_losses": report["stage_losses"],
        "target_train_accuracy": accuracy(model, target.x, target.labels),
        "out": args.out,
        "log": args.log,
    }


def cmd_eval(args):
    model = load_model(args.model)
    ds = _dataset_from_csvs(args.features, args.labels, args.task)
    if args.split:
        manifest = SplitManifest.load(args.split)
        wanted = set(manifest.subset(args.subset))
        idx = [i for i, s in enumerate(ds.subject_ids) if s in wanted]
        if not idx:
            raise DataError(f"no feature rows in split subset {args.subset!r}")
        ds = ds.select(idx)
    report = evaluate(model, LabeledDataset(
        preprocess(model, ds.features), ds.labels, ds.class_names
    ))
    payload = report.to_json()
    if args.out:
        atomic_write_json(args.out, payload)
    return {
        "command": "eval",
        "model": args.model,
        "task": args.task,
        "rows": ds.n,
        "subset": args.subset if args.split else "all",
        **payload,
    }


COMMANDS = {
    "ingest": cmd_ingest,
    "annotate-serve": cmd_annotate_serve,
    "extract": cmd_extract,
    "augment": cmd_augment,
    "split": cmd_split,
    "train": cmd_train,
    "finetune": cmd_finetune,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = COMMANDS[args.command](args)
    except NumericalError as exc:
        print(dump_json({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return 3
    except (EarMetricsError, FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        print(dump_json({"error": str(exc), "kind": "data"}), file=sys.stderr)
        return 2
    summary["config"] = {k: v for k, v in vars(args).items() if k != "command"}
    print(dump_json(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
