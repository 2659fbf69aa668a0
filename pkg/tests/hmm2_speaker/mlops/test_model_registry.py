import json

import numpy as np
import pytest

from hmm2_speaker.common import (
    UsageError, ModelFormatError, InvariantViolationError
)
from hmm2_speaker.models import (
    Topology, TopologyType, random_hmm1, random_hmm2, forward2
)
from hmm2_speaker.mlops import (
    ModelRegistry, save_model, load_model, save_speaker_db, load_speaker_db,
    DB_INDEX_FILE
)


def ergodic_hmm2():
    return random_hmm2(3, 2, 4, Topology(3, TopologyType.Ergodic.value),
                       seed=11)


def test_model_round_trip_is_exact(tmp_path):
    m = ergodic_hmm2()
    back = load_model(save_model(m, tmp_path / "m.json"))
    np.testing.assert_array_equal(back.a3, m.a3)
    np.testing.assert_array_equal(back.a2, m.a2)
    for a, b in zip(back.states, m.states):
        np.testing.assert_array_equal(a.means, b.means)
        np.testing.assert_array_equal(a.variances, b.variances)
    o = np.random.default_rng(0).normal(size=(12, 4))
    assert forward2(back, o)[0] == forward2(m, o)[0]
    assert back.topology == m.topology


def test_hmm1_round_trip(tmp_path):
    m = random_hmm1(4, 1, 2, seed=2)
    path = save_model(m, tmp_path / "m1.json")
    d = json.loads(path.read_text())
    assert d["kind"] == "hmm1" and "a" in d and "a3" not in d
    np.testing.assert_array_equal(load_model(path).a, m.a)


def test_truncated_file(tmp_path):
    path = save_model(ergodic_hmm2(), tmp_path / "m.json")
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_missing_file(tmp_path):
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "none.json")


def test_broken_a3_row_rejected():
    d = ModelRegistry.model_to_dict(ergodic_hmm2())
    d["a3"][1][0] = [0.9 * p for p in d["a3"][1][0]]
    with pytest.raises(InvariantViolationError) as e:
        ModelRegistry.model_from_dict(d)
    assert e.value.location == (1, 0)


@pytest.mark.parametrize("edit", [
    lambda d: d.update(format_version=2),
    lambda d: d.update(kind="hmm3"),
    lambda d: d.pop("states"),
    lambda d: d.update(n_states=5),
    lambda d: d.update(n_features=7),
])
def test_malformed_model(edit):
    d = ModelRegistry.model_to_dict(ergodic_hmm2())
    edit(d)
    with pytest.raises(ModelFormatError):
        ModelRegistry.model_from_dict(d)
    with pytest.raises(ModelFormatError):
        ModelRegistry.model_from_dict([d])


def test_speaker_db_round_trip(tmp_path, small_db):
    save_speaker_db(small_db, tmp_path / "db")
    back = load_speaker_db(tmp_path / "db")
    assert back.speakers == small_db.speakers
    assert back.kind == small_db.kind
    assert back.train_config == small_db.train_config
    for key, m in small_db.models.items():
        np.testing.assert_array_equal(back.models[key].a3, m.a3)
    files = sorted(p.name for p in (tmp_path / "db" / "models").iterdir())
    assert len(files) == len(small_db.models)
    assert ModelRegistry.to_model_id("spk01") + ".json" in files


def test_load_db_errors(tmp_path, small_db):
    with pytest.raises(UsageError):
        load_speaker_db(tmp_path / "nothing")
    index = save_speaker_db(small_db, tmp_path / "db")
    d = json.loads(index.read_text())
    d["kind"] = "hmm1"
    index.write_text(json.dumps(d))
    with pytest.raises(ModelFormatError):
        load_speaker_db(tmp_path / "db")
    d["format_version"] = 0
    (tmp_path / "db" / DB_INDEX_FILE).write_text(json.dumps(d))
    with pytest.raises(ModelFormatError):
        load_speaker_db(tmp_path / "db")
