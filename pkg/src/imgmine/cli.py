"""imgmine command line: preprocess | features | mine | train | classify | evaluate | synth."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fpm, harc, metrics, pipeline, synth
from .config import ConfigError, ManifestError, load_config, read_manifest
from .prep import average_histogram, equalize, histogram, median3x3, opening_mask
from .raster import GrayImage, PgmError, read_pgm, write_pgm
from .segment import (
    NO_OBJECT_ITEM,
    QuantizationModel,
    TdbError,
    Transaction,
    TransactionDB,
    quantize,
    read_tdb_csv,
    write_tdb_csv,
)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_IO = 2
EXIT_SEMANTIC = 3
EXIT_MODEL = 4


def _err(msg):
    print(f"imgmine: {msg}", file=sys.stderr)


def _read_image(path) -> GrayImage:
    try:
        return read_pgm(Path(path).read_bytes())
    except FileNotFoundError:
        raise FileNotFoundError(f"no such input: {path}") from None


def _config_from_args(args):
    overrides = {}
    for key in ("sigma", "canny_low", "canny_high", "min_area", "minsup", "minconf", "seed"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "no_equalize", False):
        overrides["equalize"] = False
    return load_config(getattr(args, "config", None), overrides)


def cmd_preprocess(args) -> int:
    cfg = _config_from_args(args)
    img = _read_image(args.input)
    stage1 = equalize(img) if cfg.equalize else img
    stage2 = stage1
    if args.avg_hist:
        avg = json.loads(Path(args.avg_hist).read_text())
        from .prep import align_peak

        stage2 = align_peak(stage1, avg)
    stage3 = median3x3(stage2)
    mask = opening_mask(stage3)
    Path(args.output).write_bytes(write_pgm(stage3))
    if args.dump_dir:
        dump = Path(args.dump_dir)
        dump.mkdir(parents=True, exist_ok=True)
        (dump / "stage1_equalized.pgm").write_bytes(write_pgm(stage1))
        (dump / "stage2_aligned.pgm").write_bytes(write_pgm(stage2))
        (dump / "stage3_median.pgm").write_bytes(write_pgm(stage3))
        mask_img = GrayImage(mask.bits.astype("uint8") * 255)
        (dump / "stage4_openmask.pgm").write_bytes(write_pgm(mask_img))
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _config_from_args(args)
    manifest = read_manifest(args.manifest)
    per_image = []  # (entry, fvs or None)
    failed = False
    for entry in manifest.entries:
        try:
            img = _read_image(manifest.resolve(entry))
            fvs = pipeline.image_feature_vectors(img, cfg)
            per_image.append((entry, fvs))
        except (OSError, PgmError, ValueError) as exc:
            _err(f"{entry.path}: {exc}")
            per_image.append((entry, None))
            failed = True
    train_fvs = [fv for entry, fvs in per_image if fvs and entry.split == "train" for fv in fvs]
    qm = QuantizationModel.fit(train_fvs)
    transactions = []
    for entry, fvs in per_image:
        if fvs is None:
            continue
        items = set()
        for fv in fvs:
            items |= quantize(fv, qm)
        if not items:
            items = {NO_OBJECT_ITEM}
        label = entry.label if entry.split == "train" else None
        transactions.append(Transaction(tid=entry.path, items=tuple(sorted(items)), label=label))
    out = Path(args.output)
    out.write_bytes(write_tdb_csv(TransactionDB(transactions=transactions)))
    quant_path = Path(args.quant_out) if args.quant_out else out.with_suffix(out.suffix + ".quant.json")
    quant_path.write_text(json.dumps(qm.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_PARTIAL if failed else EXIT_OK


def _mfi_csv(mfi_with_support_per_level) -> bytes:
    lines = ["level,items,support"]
    for level in sorted(mfi_with_support_per_level, reverse=True):
        rows = sorted(mfi_with_support_per_level[level], key=lambda r: (len(r[0]), r[0]))
        for items, sup in rows:
            lines.append(f"{level},{';'.join(str(i) for i in items)},{sup}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def cmd_mine(args) -> int:
    cfg = _config_from_args(args)
    db = read_tdb_csv(Path(args.tdb).read_bytes())
    minsup = Fraction(cfg.minsup).limit_denominator(10**9)
    count = fpm.minsup_fraction_to_count(minsup, len(db)) if len(db) else 1
    per_level = {}
    level_dbs = {2: db}
    if cfg.levels >= 2:
        level_dbs[1] = fpm.coarse_collapsed(db)
    for level, ldb in level_dbs.items():
        L, tree, mfi, _ = fpm.mine_frequent_family(ldb, count)
        per_level[level] = [
            (tuple(sorted(m)), fpm.itemset_support(tree, m)) for m in mfi
        ]
    Path(args.mfi).write_bytes(_mfi_csv(per_level))
    if args.rules:
        if all(t.label is None for t in db.transactions):
            _err("rules requested but the transaction database has no labels")
            return EXIT_SEMANTIC
        rules, _ = fpm.mine_class_rules(db, cfg.minsup, cfg.minconf, levels=cfg.levels)
        Path(args.rules).write_bytes(fpm.rules_to_csv(rules))
    return EXIT_OK


def _load_quantization(tdb_path, explicit):
    path = Path(explicit) if explicit else Path(str(tdb_path) + ".quant.json")
    if path.exists():
        return QuantizationModel.from_dict(json.loads(path.read_text()))
    return QuantizationModel()


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    if args.tdb:
        db = read_tdb_csv(Path(args.tdb).read_bytes())
        qm = _load_quantization(args.tdb, args.quant)
    else:
        manifest = read_manifest(args.manifest)
        fvs_by_entry = []
        for entry in manifest.split("train"):
            img = _read_image(manifest.resolve(entry))
            fvs_by_entry.append((entry, pipeline.image_feature_vectors(img, cfg)))
        qm = QuantizationModel.fit([fv for _, fvs in fvs_by_entry for fv in fvs])
        rows = []
        for entry, fvs in fvs_by_entry:
            items = set()
            for fv in fvs:
                items |= quantize(fv, qm)
            rows.append(
                Transaction(
                    tid=entry.path,
                    items=tuple(sorted(items or {NO_OBJECT_ITEM})),
                    label=entry.label,
                )
            )
        db = TransactionDB(transactions=rows)
    model = harc.train(
        db,
        minsup=Fraction(cfg.minsup).limit_denominator(10**9),
        minconf=Fraction(cfg.minconf).limit_denominator(10**9),
        attribute_cap=cfg.attribute_cap,
        quantization=qm,
        min_area=cfg.min_area,
    )
    Path(args.output).write_bytes(harc.model_to_json(model))
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _config_from_args(args)
    try:
        model = harc.model_from_json(Path(args.model).read_bytes())
    except FileNotFoundError:
        raise FileNotFoundError(f"no such model: {args.model}") from None
    except harc.ModelError as exc:
        _err(str(exc))
        return EXIT_MODEL
    rows = []
    if args.tdb:
        db = read_tdb_csv(Path(args.tdb).read_bytes())
        for t in db.transactions:
            label, fired = harc.classify(model, t)
            rows.append((t.tid, label, len(fired)))
    else:
        if args.manifest:
            manifest = read_manifest(args.manifest)
            entries = [(e.path, manifest.resolve(e)) for e in manifest.entries]
        else:
            entries = [(args.image, Path(args.image))]
        for name, path in entries:
            img = _read_image(path)
            t = pipeline.image_transaction(img, cfg, model.quantization, tid=name)
            label, fired = harc.classify(model, t)
            rows.append((name, label, len(fired)))
    lines = ["path,predicted,fired_rule_count"]
    lines.extend(f"{p},{lab},{n}" for p, lab, n in rows)
    Path(args.output).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    manifest = read_manifest(args.manifest)
    wanted = None if args.split == "all" else args.split
    labels = {
        e.path: e.label
        for e in manifest.entries
        if wanted is None or e.split == wanted
    }
    pred_lines = Path(args.predictions).read_text().splitlines()
    pairs = []
    for lineno, line in enumerate(pred_lines, start=1):
        if not line.strip() or (lineno == 1 and line.startswith("path,")):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            _err(f"{args.predictions}:{lineno}: bad prediction row")
            return EXIT_SEMANTIC
        path, predicted = parts[0], parts[1]
        if path not in labels:
            continue
        if labels[path] is None:
            _err(f"warning: {path} has no label in manifest; skipped")
            continue
        pairs.append((labels[path], predicted))
    if not pairs:
        _err("no labeled predictions to evaluate")
        return EXIT_SEMANTIC
    m = metrics.MultiClassMatrix.from_pairs(pairs)
    text, csv = metrics.report(m)
    print(text, end="")
    if args.output:
        Path(args.output).write_bytes(csv)
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _config_from_args(args)
    synth.generate_corpus(
        args.out_dir, seed=cfg.seed, per_class=args.per_class, train_frac=args.train_frac
    )
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--sigma", type=float)
    p.add_argument("--canny-low", dest="canny_low", type=float)
    p.add_argument("--canny-high", dest="canny_high", type=float)
    p.add_argument("--min-area", dest="min_area", type=int)
    p.add_argument("--minsup", type=float)
    p.add_argument("--minconf", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-equalize", dest="no_equalize", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="imgmine", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="equalize/align/median one PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--avg-hist", help="JSON file holding 256 average-histogram counts")
    p.add_argument("--dump-dir", help="write stage1..4 intermediate PGMs here")
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("features", help="manifest -> transaction database CSV")
    p.add_argument("manifest")
    p.add_argument("output")
    p.add_argument("--quant-out", help="where to write learned quantization ranges")
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("mine", help="mine maximal itemsets and class rules from a TDB")
    p.add_argument("tdb")
    p.add_argument("--mfi", required=True, help="output CSV of maximal frequent itemsets")
    p.add_argument("--rules", help="output CSV of class association rules")
    _add_common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("train", help="train the hybrid rule/tree classifier")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tdb")
    src.add_argument("--manifest")
    p.add_argument("--quant", help="quantization JSON (with --tdb)")
    p.add_argument("output")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify images or transactions with a model")
    p.add_argument("model")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest")
    src.add_argument("--image")
    src.add_argument("--tdb")
    p.add_argument("output")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="join predictions with manifest labels")
    p.add_argument("predictions")
    p.add_argument("manifest")
    p.add_argument("--split", choices=("train", "test", "all"), default="all")
    p.add_argument("--output", help="metrics CSV path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate the seeded synthetic corpus")
    p.add_argument("out_dir")
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--train-frac", type=float, default=0.7)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError, PgmError) as exc:
        _err(str(exc))
        return EXIT_IO
    except (TdbError, ManifestError, ConfigError, ValueError) as exc:
        _err(str(exc))
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
