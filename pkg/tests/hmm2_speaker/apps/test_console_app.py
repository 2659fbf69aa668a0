import json

import numpy as np
import pandas as pd
import pytest

from hmm2_speaker.apps import (
    ConsoleApp, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, MANIFEST_FILE, main
)
from hmm2_speaker.features import write_wav
from hmm2_speaker.mlops import CorpusManifest, load_features, load_model


TRAIN_ARGS = ["--states", "3", "--mixtures", "1", "--iterations", "3"]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    rc = main(["synth", "--out", str(out), "--speakers", "3", "--words", "2",
               "--repetitions", "3", "--features", "3",
               "--train-repetitions", "2", "--seed", "1"])
    assert rc == EXIT_OK
    return out


def test_parser_errors():
    assert main([]) == EXIT_USAGE
    assert main(["train"]) == EXIT_USAGE
    assert main(["train", "m.csv", "--out", "db", "--order", "3"]) == \
        EXIT_USAGE
    assert main(["--help"]) == EXIT_OK


def test_bad_app_setup_is_usage_error(tmp_path):
    bench = ["bench", "--states", "2", "--length", "4", "--repeats", "1"]
    assert main(["--app-key", ""] + bench) == EXIT_USAGE
    assert main(["--app-key", "group_def.nothing"] + bench) == EXIT_USAGE
    assert main(["--config-dir", str(tmp_path / "nowhere")] + bench) == \
        EXIT_USAGE


def test_console_app_configs():
    app = ConsoleApp()
    assert app.train_config(n_states=3).n_states == 3
    assert app.train_config().n_mixtures == 5
    assert app.feature_config().n_cepstra == 12
    assert app.synth_config(n_speakers=None).n_speakers == 20
    assert app.bench_config(states="2..4").states == [2, 3, 4]


def test_synth_layout(synth_dir):
    mf = CorpusManifest.load(synth_dir / MANIFEST_FILE)
    assert len(mf) == 3 * 2 * 3 and mf.speakers == ["spk01", "spk02", "spk03"]
    assert (mf.select("test")["repetition"] == 2).all()
    assert len(mf.select("train")) == 12
    o = load_features(mf.records["path"][0])
    assert o.n_features == 3
    gen = load_model(synth_dir / "generators" / "spk02.json")
    assert gen.kind.value == "hmm2" and gen.n_features == 3


def test_train_identify_eval(synth_dir, tmp_path, capsys):
    manifest = str(synth_dir / MANIFEST_FILE)
    db = tmp_path / "db"
    assert main(["train", manifest, "--out", str(db)] + TRAIN_ARGS) == EXIT_OK
    assert (db / "index.json").is_file()

    utterance = synth_dir / "features" / "spk02_w01_r2.csv"
    capsys.readouterr()
    assert main(["identify", str(db), str(utterance)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["speaker", "log_likelihood", "per_frame"]
    assert lines[1].split()[0] == "rank"
    assert sorted(line.split()[1] for line in lines[2:]) == \
        ["spk01", "spk02", "spk03"]

    report = tmp_path / "report.json"
    assert main(["eval", manifest, "--db", str(db), "--report",
                 str(report)]) == EXIT_OK
    d = json.loads(report.read_text())
    assert d["kind"] == "hmm2" and d["total"] == 6
    assert 0 <= d["accuracy"] <= 100
    assert "Recognition performance" in capsys.readouterr().out


def test_eval_paired(synth_dir, tmp_path, capsys):
    report = tmp_path / "paired.json"
    rc = main(["eval", str(synth_dir / MANIFEST_FILE), "--paired",
               "--report", str(report)] + TRAIN_ARGS)
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "HMM1" in out and "HMM2" in out
    assert (tmp_path / "paired.hmm1.json").is_file()
    assert json.loads((tmp_path / "paired.hmm2.json").read_text())["kind"] \
        == "hmm2"


def test_usage_and_runtime_errors(synth_dir, tmp_path):
    manifest = str(synth_dir / MANIFEST_FILE)
    assert main(["identify", str(tmp_path / "no_db"),
                 str(synth_dir / "features" / "spk01_w01_r0.csv")]) == \
        EXIT_USAGE
    assert main(["train", str(tmp_path / "absent.csv"), "--out",
                 str(tmp_path / "db")]) == EXIT_USAGE
    assert main(["eval", manifest]) == EXIT_USAGE

    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "index.json").write_text("{\"format_version\": 1,")
    assert main(["eval", manifest, "--db", str(broken)]) == EXIT_RUNTIME


def test_features_command(tmp_path):
    rng = np.random.default_rng(0)
    rows = []
    for s in ("spk01", "spk02"):
        for r in range(2):
            path = write_wav(tmp_path / "wav" / f"{s}_{r}.wav",
                             rng.uniform(-0.4, 0.4, 2400))
            rows.append((s, "w01", r, "train" if r == 0 else "test",
                         f"wav/{path.name}"))
    pd.DataFrame(rows, columns=CorpusManifest.COLUMNS).to_csv(
        tmp_path / "manifest.csv", index=False)

    out = tmp_path / "out"
    assert main(["features", str(tmp_path / "manifest.csv"), "--out",
                 str(out)]) == EXIT_OK
    mf = CorpusManifest.load(out / MANIFEST_FILE)
    assert list(mf.records["role"]) == ["train", "test", "train", "test"]
    o = load_features(out / "features" / "spk02_w01_r1.csv")
    assert (o.n_frames, o.n_features) == (28, 12)


def test_bench_command(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--states", "2..3", "--length", "8", "--repeats",
                 "1", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert list(df.columns) == ["order", "states", "length", "seconds"]
    assert len(df) == 4
    assert main(["bench", "--states", "9..2"]) == EXIT_USAGE
