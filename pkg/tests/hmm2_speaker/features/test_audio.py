import numpy as np
import pytest
from scipy.io import wavfile

from hmm2_speaker.common import IngestionError
from hmm2_speaker.features import (
    FeatureConfig, load_wav, write_wav, extract, extract_file
)


def test_write_then_load(tmp_path):
    x = 0.5 * np.sin(2 * np.pi * 440 * np.arange(8000) / 8000)
    path = write_wav(tmp_path / "tone.wav", x)
    y = load_wav(path)
    assert y.shape == (8000,)
    np.testing.assert_allclose(y, x, atol=1.0 / 32768)


def test_write_clips(tmp_path):
    y = load_wav(write_wav(tmp_path / "loud.wav", np.array([2.0, -2.0])))
    assert y[0] == pytest.approx(32767 / 32768) and y[1] == -1.0


def test_wrong_rate(tmp_path):
    path = write_wav(tmp_path / "16k.wav", np.zeros(100), 16000)
    with pytest.raises(IngestionError):
        load_wav(path, 8000)


def test_stereo_rejected(tmp_path):
    path = tmp_path / "stereo.wav"
    wavfile.write(str(path), 8000, np.zeros((100, 2), dtype=np.int16))
    with pytest.raises(IngestionError):
        load_wav(path)


def test_float_samples_rejected(tmp_path):
    path = tmp_path / "float.wav"
    wavfile.write(str(path), 8000, np.zeros(100, dtype=np.float32))
    with pytest.raises(IngestionError):
        load_wav(path)


@pytest.mark.parametrize("content", [b"", b"RIFF\x00\x00", b"not a wav file"])
def test_unreadable(tmp_path, content):
    path = tmp_path / "broken.wav"
    path.write_bytes(content)
    with pytest.raises(IngestionError):
        load_wav(path)


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        load_wav(tmp_path / "absent.wav")


def test_extract_file_matches_samples(tmp_path):
    x = np.random.default_rng(4).uniform(-0.5, 0.5, 4000)
    path = write_wav(tmp_path / "u.wav", x)
    config = FeatureConfig()
    o = extract_file(config, path, "w02")
    expected = extract(config, load_wav(path))
    np.testing.assert_array_equal(o.frames, expected.frames)
    assert o.word == "w02" and o.source_id == str(path)
