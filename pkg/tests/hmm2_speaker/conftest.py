import pytest

from hmm2_speaker.models import ModelKind, TrainConfig
from hmm2_speaker.speakerid import SynthConfig, generate_corpus, enroll


SMALL_SYNTH = dict(n_speakers=4, n_words=2, n_repetitions=4, min_length=30,
                   max_length=40, n_states=3, n_mixtures=1, n_features=4,
                   speaker_spread=2.0, seed=3)

SMALL_TRAIN = dict(n_states=3, n_mixtures=1, max_iter=8)


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(SynthConfig(**SMALL_SYNTH))


@pytest.fixture(scope="session")
def small_split(small_corpus):
    return small_corpus.split(3)


@pytest.fixture(scope="session")
def small_db(small_split):
    train, _ = small_split
    return enroll(train, ModelKind.Hmm2, TrainConfig(**SMALL_TRAIN))


@pytest.fixture
def small_train():
    return TrainConfig(**SMALL_TRAIN)
