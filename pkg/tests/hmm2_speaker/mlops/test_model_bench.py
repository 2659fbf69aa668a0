import numpy as np
import pytest

from hmm2_speaker.common import UsageError
from hmm2_speaker.models import (
    Topology, TopologyType, Hmm1Model, random_hmm2, forward1, forward2
)
from hmm2_speaker.mlops import (
    BenchConfig, BenchImpl, BENCH_COLUMNS, naive_forward1,
    naive_forward2, run_bench, bench_slopes
)


def test_parse_range():
    assert BenchConfig.parse_range("3..6") == [3, 4, 5, 6]
    assert BenchConfig.parse_range("5") == [5]
    for bad in ("6..3", "0..2", "a..b", ""):
        with pytest.raises(UsageError):
            BenchConfig.parse_range(bad)


def test_bench_config(caplog):
    c = BenchConfig.from_dict({"states": "2..3", "other": 0}, length=None,
                              repeats=1)
    assert c.states == [2, 3] and c.length == 200 and c.repeats == 1
    with pytest.raises(UsageError):
        BenchConfig(impl="gpu")
    assert "BenchConfig.init(): Unknown impl [gpu]" in caplog.text
    with pytest.raises(UsageError):
        BenchConfig(length=0)
    with pytest.raises(UsageError):
        BenchConfig(threads=4)


@pytest.mark.parametrize("n_frames", [1, 2, 7])
def test_naive_matches_vectorized(n_frames):
    topo = Topology(3, TopologyType.Ergodic.value)
    m2 = random_hmm2(3, 2, 2, topo, seed=4)
    m1 = Hmm1Model(m2.pi, m2.a2, m2.states, topo)
    o = np.random.default_rng(5).normal(size=(n_frames, 2))
    log_b = m2.log_emissions(o).tolist()
    lp, la2 = m2.log_pi.tolist(), m2.log_a2.tolist()
    assert naive_forward2(lp, la2, m2.log_a3.tolist(), log_b) == \
        pytest.approx(forward2(m2, o)[0], abs=1e-9)
    assert naive_forward1(lp, la2, log_b) == \
        pytest.approx(forward1(m1, o)[0], abs=1e-9)


def test_naive_handles_left_to_right_zeros():
    m2 = random_hmm2(4, 1, 1, Topology(4), seed=6)
    o = np.random.default_rng(6).normal(size=(6, 1))
    got = naive_forward2(m2.log_pi.tolist(), m2.log_a2.tolist(),
                         m2.log_a3.tolist(), m2.log_emissions(o).tolist())
    assert got == pytest.approx(forward2(m2, o)[0], abs=1e-9)


@pytest.mark.parametrize("impl", [BenchImpl.Naive, BenchImpl.Vectorized])
def test_run_bench_frame(impl):
    df = run_bench(BenchConfig(states="2..3", length=10, repeats=1,
                               impl=impl))
    assert list(df.columns) == BENCH_COLUMNS + ["overhead"]
    assert df[["order", "states"]].values.tolist() == \
        [[1, 2], [2, 2], [1, 3], [2, 3]]
    assert (df["overhead"] >= 0).all()
    if impl == BenchImpl.Vectorized:
        assert (df["overhead"] == 0).all() and (df["seconds"] > 0).all()


@pytest.mark.slow
def test_cost_grows_cubically_for_order_two():
    df = run_bench(BenchConfig(states="3..9", length=200, repeats=3))
    slopes = bench_slopes(df)
    assert slopes[2] == pytest.approx(3.0, abs=0.4)
    assert slopes[1] == pytest.approx(2.0, abs=0.4)


def test_skeleton_kernels_do_no_transition_work():
    m2 = random_hmm2(3, 1, 1, Topology(3, TopologyType.Ergodic.value),
                     seed=2)
    o = np.random.default_rng(2).normal(size=(5, 1))
    log_b = m2.log_emissions(o).tolist()
    lp, la2 = m2.log_pi.tolist(), m2.log_a2.tolist()
    assert naive_forward1(lp, la2, log_b, 0) == -np.inf
    assert naive_forward2(lp, la2, m2.log_a3.tolist(), log_b, 0) == -np.inf
    assert naive_forward2(lp, la2, m2.log_a3.tolist(), log_b[:2], 0) == \
        pytest.approx(forward2(m2, o[:2])[0], abs=1e-9)


def test_default_sweep():
    c = BenchConfig()
    assert c.states == list(range(3, 10)) and c.length == 200
