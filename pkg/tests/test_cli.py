import csv
import io
import json

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from tensorfd.cli import main
from tensorfd.datagen import gen_scenes
from tensorfd.experiment import CSV_FIELDS
from tensorfd.io import read_tensor, write_tensor
from tensorfd.tfd import tfd_stream


def test_synth_and_sketch(tmp_path, capsys):
    data = tmp_path / "a.tsk"
    assert main(["synth", "--dims", "60x8x4", "--k", "3", "--seed", "1", "--out", str(data)]) == 0
    a = read_tensor(data)
    assert a.shape == (60, 8, 4)
    sk = tmp_path / "b.tsk"
    assert main(["sketch", str(data), "--ell", "5", "--out", str(sk)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["algorithm"] == "tfd" and info["dims"] == [60, 8, 4]
    ref = tfd_stream(a, 5)
    np.testing.assert_allclose(read_tensor(sk), ref.sketch, atol=1e-12)
    assert info["c_value"] == pytest.approx(ref.c_value)


def test_synth_extreme(tmp_path):
    out = tmp_path / "x.tsk"
    assert main(["synth", "--dims", "10x4x3", "--alpha", "0.5", "--out", str(out)]) == 0
    assert read_tensor(out).shape == (10, 4, 3)


@pytest.mark.parametrize("alg", ["mtfd", "srtsvd", "normsamp"])
def test_sketch_baselines(tmp_path, alg, capsys):
    data = tmp_path / "a.tsk"
    write_tensor(data, np.random.default_rng(0).standard_normal((20, 4, 3)))
    assert main(["sketch", str(data), "--alg", alg, "--ell", "4", "--seed", "3",
                 "--out", str(tmp_path / "s.tsk")]) == 0
    assert read_tensor(tmp_path / "s.tsk").shape == (4, 4, 3)


def test_bench_stdout(capsys):
    assert main(["bench", "--dims", "40x6x3", "--alg", "tfd,mtfd", "--ell", "4",
                 "--k", "2", "--repeats", "2"]) == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == CSV_FIELDS
    assert len(rows) == 2 * 2 + 2
    assert "\r\n" in out


def test_bench_to_file(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", "--dims", "30x5x2", "--alg", "tfd", "--ell", "3", "--k", "1",
                 "--out", str(out)]) == 0
    assert out.read_text().startswith("algorithm,")


def test_certify(tmp_path, capsys):
    data = tmp_path / "a.tsk"
    main(["synth", "--dims", "80x10x4", "--k", "3", "--out", str(data)])
    assert main(["certify", str(data), "--ell", "6,12", "--k", "2,3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 4
    assert {r["status"] for r in rows} <= {"pass", "skip"}


def test_classify(tmp_path, capsys):
    a, labels = gen_scenes(seed=0)
    data = tmp_path / "v.tsk"
    write_tensor(data, a)
    out = tmp_path / "labels.csv"
    assert main(["classify", str(data), "--ell", "10", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    pred = [int(r["label"]) for r in rows]
    assert adjusted_rand_score(labels, pred) >= 0.9


def test_classify_rejects_other_frame_mode(tmp_path, capsys):
    data = tmp_path / "v.tsk"
    write_tensor(data, np.ones((4, 3, 5)))
    assert main(["classify", str(data), "--frame-mode", "2"]) == 2
    assert "mode 3" in capsys.readouterr().err


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
