import numpy as np
import pytest

from imgmine import harc
from imgmine.cli import main
from imgmine.raster import read_pgm, write_pgm, GrayImage
from imgmine.segment import Transaction, TransactionDB, read_tdb_csv, write_tdb_csv

TDB_HEADER = b"tid,label,items\n"


def write_image(path, pixels):
    path.write_bytes(write_pgm(GrayImage(np.asarray(pixels, dtype=np.uint8))))


def blob_image(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(60, 90, size=(32, 32))
    a[10:22, 10:22] = 220
    return a


def labeled_tdb():
    rows = []
    groups = [("normal", (999,)), ("benign", (111, 211)), ("malignant", (122, 222))]
    for label, items in groups:
        for i in range(10):
            rows.append(Transaction(tid=f"{label}{i}", items=items, label=label))
    return write_tdb_csv(TransactionDB(transactions=rows))


def make_manifest(tmp_path, n=3):
    lines = ["path,label,split"]
    for i in range(n):
        name = f"img{i}.pgm"
        write_image(tmp_path / name, blob_image(i))
        lines.append(f"{name},benign,train")
    man = tmp_path / "manifest.csv"
    man.write_text("\n".join(lines) + "\n")
    return man


# --------------------------------------------------------------- exit codes


def test_missing_input_exits_2(tmp_path):
    assert main(["preprocess", str(tmp_path / "nope.pgm"), str(tmp_path / "out.pgm")]) == 2


def test_bad_minconf_exits_3(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    rc = main(
        ["mine", str(tdb), "--mfi", str(tmp_path / "m.csv"),
         "--rules", str(tmp_path / "r.csv"), "--minconf", "1.5"]
    )
    assert rc == 3


def test_rules_without_labels_exits_3(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(TDB_HEADER + b"a,,1;2\nb,,1\n")
    rc = main(
        ["mine", str(tdb), "--mfi", str(tmp_path / "m.csv"), "--rules", str(tmp_path / "r.csv")]
    )
    assert rc == 3
    assert (tmp_path / "m.csv").exists()


def test_missing_model_exits_2(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    rc = main(
        ["classify", str(tmp_path / "no-model.json"), "--tdb", str(tdb), str(tmp_path / "p.csv")]
    )
    assert rc == 2


def test_model_version_mismatch_exits_4(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    model = harc.train(read_tdb_csv(labeled_tdb()))
    bad = tmp_path / "model.json"
    bad.write_bytes(harc.model_to_json(model).replace(b"harc-1", b"harc-0"))
    rc = main(["classify", str(bad), "--tdb", str(tdb), str(tmp_path / "p.csv")])
    assert rc == 4


def test_malformed_tdb_exits_3(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(TDB_HEADER + b"a,,1;x\n")
    assert main(["mine", str(tdb), "--mfi", str(tmp_path / "m.csv")]) == 3


# --------------------------------------------------------------- preprocess


def test_preprocess_writes_stage_dumps(tmp_path):
    src = tmp_path / "in.pgm"
    write_image(src, blob_image())
    out = tmp_path / "out.pgm"
    dump = tmp_path / "stages"
    rc = main(["preprocess", str(src), str(out), "--dump-dir", str(dump)])
    assert rc == 0
    names = sorted(p.name for p in dump.iterdir())
    assert names == [
        "stage1_equalized.pgm",
        "stage2_aligned.pgm",
        "stage3_median.pgm",
        "stage4_openmask.pgm",
    ]
    assert out.read_bytes() == (dump / "stage3_median.pgm").read_bytes()
    read_pgm(out.read_bytes())  # parses back cleanly


def test_preprocess_no_equalize_keeps_range(tmp_path):
    src = tmp_path / "in.pgm"
    write_image(src, np.full((8, 8), 42))
    out = tmp_path / "out.pgm"
    assert main(["preprocess", str(src), str(out), "--no-equalize"]) == 0
    assert (read_pgm(out.read_bytes()).pixels == 42).all()


# ----------------------------------------------------------------- features


def test_features_one_row_per_image(tmp_path):
    man = make_manifest(tmp_path, n=3)
    out = tmp_path / "tdb.csv"
    assert main(["features", str(man), str(out)]) == 0
    db = read_tdb_csv(out.read_bytes())
    assert len(db.transactions) == 3
    assert {t.label for t in db.transactions} == {"benign"}
    assert (tmp_path / "tdb.csv.quant.json").exists()


def test_features_deterministic(tmp_path):
    man = make_manifest(tmp_path, n=2)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["features", str(man), str(a)]) == 0
    assert main(["features", str(man), str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_features_missing_image_partial(tmp_path):
    man = make_manifest(tmp_path, n=2)
    man.write_text(man.read_text() + "ghost.pgm,normal,train\n")
    out = tmp_path / "tdb.csv"
    assert main(["features", str(man), str(out)]) == 1
    assert len(read_tdb_csv(out.read_bytes()).transactions) == 2


# --------------------------------------------------------------------- mine


def test_mine_empty_tdb_ok(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(TDB_HEADER)
    out = tmp_path / "m.csv"
    assert main(["mine", str(tdb), "--mfi", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "level,items,support"


def test_mine_labeled_tdb_writes_rules(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    mfi, rules = tmp_path / "m.csv", tmp_path / "r.csv"
    assert main(["mine", str(tdb), "--mfi", str(mfi), "--rules", str(rules)]) == 0
    assert rules.read_text().splitlines()[0] == "antecedent,class,support,confidence"
    assert len(rules.read_text().splitlines()) > 1


# ------------------------------------------------------- train and classify


def test_train_classify_evaluate_round_trip(tmp_path, capsys):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    model = tmp_path / "model.json"
    assert main(["train", "--tdb", str(tdb), str(model)]) == 0

    pred = tmp_path / "pred.csv"
    assert main(["classify", str(model), "--tdb", str(tdb), str(pred)]) == 0
    lines = pred.read_text().splitlines()
    assert lines[0] == "path,predicted,fired_rule_count"
    assert len(lines) == 31
    for line in lines[1:]:
        tid, predicted, _ = line.split(",")
        assert predicted == "".join(c for c in tid if not c.isdigit())

    man = tmp_path / "manifest.csv"
    man.write_text(
        "path,label,split\n"
        + "".join(f"{t},{''.join(c for c in t if not c.isdigit())},test\n"
                  for t in (l.split(",")[0] for l in lines[1:]))
    )
    metrics_csv = tmp_path / "metrics.csv"
    rc = main(["evaluate", str(pred), str(man), "--split", "test", "--output", str(metrics_csv)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "accuracy: 100.0%" in out
    assert "sensitivity,100.0" in metrics_csv.read_text()


def test_classify_deterministic_bytes(tmp_path):
    tdb = tmp_path / "t.csv"
    tdb.write_bytes(labeled_tdb())
    model = tmp_path / "model.json"
    main(["train", "--tdb", str(tdb), str(model)])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["classify", str(model), "--tdb", str(tdb), str(a)])
    main(["classify", str(model), "--tdb", str(tdb), str(b)])
    assert a.read_bytes() == b.read_bytes()


# -------------------------------------------------------------------- synth


def test_synth_writes_corpus(tmp_path):
    out = tmp_path / "corpus"
    assert main(["synth", str(out), "--per-class", "2"]) == 0
    assert (out / "manifest.csv").exists()
    assert (out / "config.json").exists()
    images = sorted(p.name for p in (out / "images").iterdir())
    assert len(images) == 6
