import json

import pytest

from hmm2_speaker.common import UsageError, ModelFormatError
from hmm2_speaker.models import ModelKind, TrainConfig
from hmm2_speaker.speakerid import (
    SynthConfig, TrialRecord, EvalReport, PERF_COLUMN, generate_corpus,
    enroll, evaluate
)


def trial(source, true, predicted, score=-100.0, frames=50):
    return TrialRecord(source, true, predicted, score, score + 1.0, 1.0,
                       score / frames, frames)


@pytest.fixture
def report():
    return EvalReport("hmm2", [
        trial("u1", "a", "a"),
        trial("u2", "a", "b", -120.0),
        trial("u3", "b", "b", -80.0, 40),
        trial("u4", "c", "c"),
    ])


def test_accuracy_and_totals(report):
    assert report.total == 4 and report.n_correct == 3
    assert report.accuracy == 75.0
    assert report.mean_per_frame_score == pytest.approx(
        (-2.0 - 2.4 - 2.0 - 2.0) / 4)


def test_confusion_matches_trials(report):
    c = report.confusion()
    assert list(c.index) == ["a", "b", "c"] == list(c.columns)
    assert c.loc["a", "b"] == 1 and c.loc["a", "a"] == 1
    assert c.loc["c", "a"] == 0
    assert c.values.sum() == report.total
    assert sum(c.values.diagonal()) == report.n_correct


def test_accuracy_ignores_trial_order(report):
    shuffled = EvalReport("hmm2", report.trials[::-1])
    assert shuffled.accuracy == report.accuracy
    assert shuffled.confusion().equals(report.confusion())


def test_save_and_load(tmp_path, report):
    path = report.save(tmp_path / "out" / "report.json")
    assert EvalReport.load(path) == report
    assert json.loads(path.read_text())["accuracy"] == 75.0


def test_infinite_margin_saved_as_valid_json(tmp_path):
    single = EvalReport("hmm2", [
        TrialRecord("u1", "a", "a", -50.0, -50.0, float("inf"), -1.0, 50),
        TrialRecord("u2", "a", "a", -60.0, -60.0, float("-inf"), -1.2, 50),
    ])
    path = single.save(tmp_path / "single.json")

    def reject(token):
        raise ValueError(token)

    d = json.loads(path.read_text(), parse_constant=reject)
    assert [t["margin"] for t in d["trials"]] == ["inf", "-inf"]
    loaded = EvalReport.load(path)
    assert loaded == single
    assert loaded.trials[0].margin == float("inf")


def test_load_malformed(tmp_path, report):
    path = tmp_path / "bad.json"
    path.write_text("{\"format_version\": 1, \"kind\": ")
    with pytest.raises(ModelFormatError):
        EvalReport.load(path)
    d = report.to_dict()
    d["format_version"] = 99
    with pytest.raises(ModelFormatError):
        EvalReport.from_dict(d)
    del d["trials"]
    d["format_version"] = 1
    with pytest.raises(ModelFormatError):
        EvalReport.from_dict(d)
    with pytest.raises(ModelFormatError):
        EvalReport.load(tmp_path / "absent.json")


def test_paired_table(report):
    other = EvalReport("hmm1", report.trials[:2])
    table = EvalReport.paired_table({"hmm1": other, "hmm2": report})
    assert list(table.index) == ["HMM1", "HMM2"]
    assert table.loc["HMM1", PERF_COLUMN] == 50.0
    assert table.loc["HMM2", "Trials"] == 4
    assert report.to_table().index.tolist() == ["HMM2"]


def test_empty_report():
    with pytest.raises(UsageError):
        EvalReport("hmm1", [])


def test_evaluate(small_db, small_split):
    _, test = small_split
    report = evaluate(small_db, test)
    assert report.kind == "hmm2" and report.total == len(test)
    assert 0 <= report.accuracy <= 100
    assert report.accuracy >= 75
    assert [t.source_id for t in report.trials] == \
        [o.source_id for _, o in test]
    assert all(t.best_score >= t.true_score for t in report.trials)
    assert evaluate(small_db, test, n_jobs=2) == report


def test_evaluate_errors(small_db, small_split):
    _, test = small_split
    with pytest.raises(UsageError):
        evaluate(small_db, [])
    with pytest.raises(UsageError):
        evaluate(small_db, [("spk99", test[0][1])])


@pytest.mark.slow
def test_second_order_population_favors_hmm2():
    corpus = generate_corpus(SynthConfig())
    train, test = corpus.split(6)
    config = TrainConfig(n_states=5, n_mixtures=5, max_iter=20)
    reports = {kind.value: evaluate(enroll(train, kind, config), test)
               for kind in (ModelKind.Hmm1, ModelKind.Hmm2)}
    assert reports["hmm2"].accuracy >= reports["hmm1"].accuracy
    assert reports["hmm2"].mean_per_frame_score > \
        reports["hmm1"].mean_per_frame_score
