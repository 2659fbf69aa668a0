import numpy as np
import pytest

from hmm2_speaker.common import UsageError
from hmm2_speaker.speakerid import SynthConfig, generate_corpus


SMALL = dict(n_speakers=3, n_words=2, n_repetitions=3, min_length=10,
             max_length=12, n_states=3, n_mixtures=1, n_features=2)


def test_layout_and_ids():
    corpus = generate_corpus(SynthConfig(**SMALL))
    assert sorted(corpus.speaker_models) == ["spk01", "spk02", "spk03"]
    assert sorted(corpus.word_offsets) == ["w01", "w02"]
    assert len(corpus.utterances) == 3 * 2 * 3
    u = corpus.utterances[0]
    assert u.utterance_id == "spk01_w01_r0"
    assert u.observations.source_id == u.utterance_id
    assert u.observations.word == "w01"
    assert all(10 <= v.observations.n_frames <= 12 for v in corpus.utterances)
    assert all(len(v.states) == v.observations.n_frames
               for v in corpus.utterances)


def test_deterministic():
    a = generate_corpus(SynthConfig(**SMALL, seed=7))
    b = generate_corpus(SynthConfig(**SMALL, seed=7))
    c = generate_corpus(SynthConfig(**SMALL, seed=8))
    for u, v in zip(a.utterances, b.utterances):
        np.testing.assert_array_equal(u.observations.frames,
                                      v.observations.frames)
        assert u.states == v.states
    assert not np.array_equal(a.utterances[0].observations.frames,
                              c.utterances[0].observations.frames)


def test_left_to_right_paths():
    corpus = generate_corpus(SynthConfig(**SMALL))
    for u in corpus.utterances:
        assert u.states[0] == 0
        assert all(np.diff(u.states) >= 0)


def test_split_by_repetition():
    corpus = generate_corpus(SynthConfig(**SMALL))
    train, test = corpus.split(2)
    assert sorted(train) == ["spk01", "spk02", "spk03"]
    assert all(len(v) == 2 * 2 for v in train.values())
    assert len(test) == 3 * 2
    assert all(o.source_id.endswith("_r2") for _, o in test)
    assert all(o.source_id.startswith(s) for s, o in test)


def test_config_validation(caplog):
    c = SynthConfig.from_dict({"n_speakers": 4, "ignored": 1}, seed=3)
    assert c.n_speakers == 4 and c.seed == 3 and c.n_words == 10
    assert SynthConfig(**c.to_dict()).to_dict() == c.to_dict()
    with pytest.raises(UsageError):
        SynthConfig(min_length=20, max_length=10)
    with pytest.raises(UsageError):
        SynthConfig(n_speakers=0)
    with pytest.raises(UsageError):
        SynthConfig(voices=3)
    assert "SynthConfig.init(): Unknown keys ['voices']" in caplog.text
