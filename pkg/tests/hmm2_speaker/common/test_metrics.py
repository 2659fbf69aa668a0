import numpy as np
import pytest

from hmm2_speaker.common import UsageError, Metrics


def test_accuracy():
    assert Metrics.accuracy(["a", "b", "c", "d"], ["a", "b", "c", "x"]) == 75
    assert Metrics.accuracy(["a"] * 20, ["a"] * 18 + ["b"] * 2) == 90.0
    with pytest.raises(UsageError):
        Metrics.accuracy([], [])
    with pytest.raises(UsageError):
        Metrics.accuracy(["a"], ["a", "b"])


def test_loglog_slope():
    x = np.array([2.0, 4.0, 8.0])
    assert Metrics.loglog_slope(x, 3 * x ** 2.5) == pytest.approx(2.5)
    with pytest.raises(UsageError):
        Metrics.loglog_slope([1.0], [1.0])
    with pytest.raises(UsageError):
        Metrics.loglog_slope([1.0, 2.0], [0.0, 1.0])
