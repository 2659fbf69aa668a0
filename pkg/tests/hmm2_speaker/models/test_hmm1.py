import itertools

import numpy as np
import pytest
from scipy.special import logsumexp

from hmm2_speaker.common import UsageError, StarvedStateError
from hmm2_speaker.models import (
    Topology, TopologyType, GaussianMixture, Hmm1Model, TrainConfig,
    ConvergenceMonitor, forward1, backward1, viterbi1, sample1, baum_welch1,
    random_hmm1, initialize_hmm1
)


ERGODIC = TopologyType.Ergodic.value


def path_log_prob(m, q, log_b):
    lp = m.log_pi[q[0]] + log_b[0, q[0]]
    for t in range(1, len(q)):
        lp += m.log_a[q[t - 1], q[t]] + log_b[t, q[t]]
    return lp


def all_paths(m, o):
    log_b = m.log_emissions(o)
    return {q: path_log_prob(m, q, log_b) for q in
            itertools.product(range(m.n_states), repeat=len(o))}


@pytest.fixture
def model():
    return random_hmm1(3, 2, 2, Topology(3, ERGODIC), seed=11)


@pytest.fixture
def frames():
    return np.random.default_rng(5).normal(size=(5, 2))


def test_forward_matches_enumeration(model, frames):
    ll, alpha = forward1(model, frames)
    expected = logsumexp(list(all_paths(model, frames).values()))
    assert ll == pytest.approx(expected, rel=1e-10)
    assert alpha.shape == (5, 3)


def test_forward_backward_consistent(model, frames):
    ll, alpha = forward1(model, frames)
    beta = backward1(model, frames)
    np.testing.assert_array_equal(beta[-1], 0.0)
    for t in range(len(frames)):
        assert logsumexp(alpha[t] + beta[t]) == pytest.approx(ll, rel=1e-10)


def test_viterbi_matches_enumeration(model, frames):
    path, score = viterbi1(model, frames)
    paths = all_paths(model, frames)
    best = max(paths, key=paths.get)
    assert tuple(path) == best
    assert score == pytest.approx(paths[best], rel=1e-10)


def test_viterbi_ties_take_lowest_state():
    gm = GaussianMixture([1.0], [[0.0]], [[1.0]])
    m = Hmm1Model(np.full(3, 1 / 3), np.full((3, 3), 1 / 3), [gm] * 3,
                  Topology(3, ERGODIC))
    path, _ = viterbi1(m, np.zeros((4, 1)))
    assert path == [0, 0, 0, 0]


def test_left_to_right_never_moves_back():
    m = random_hmm1(4, 1, 1, seed=2)
    q, o = sample1(m, 30, seed=9)
    assert q[0] == 0
    assert all(b >= a for a, b in zip(q, q[1:]))
    path, _ = viterbi1(m, o)
    assert path[0] == 0
    assert all(b >= a for a, b in zip(path, path[1:]))


def test_sample_deterministic(model):
    q1, o1 = sample1(model, 12, seed=4)
    q2, o2 = sample1(model, 12, seed=4)
    assert q1 == q2
    np.testing.assert_array_equal(o1.frames, o2.frames)
    with pytest.raises(UsageError):
        sample1(model, 0)


def test_dimension_mismatch(model):
    with pytest.raises(UsageError):
        forward1(model, np.zeros((4, 3)))


def test_baum_welch_monotone(model):
    corpus = [sample1(model, 40, seed=s)[1] for s in range(10)]
    start = random_hmm1(3, 2, 2, Topology(3, ERGODIC), seed=99)
    monitor = ConvergenceMonitor(tol=0.0, max_iter=15)
    trained = baum_welch1(start, corpus, TrainConfig(max_iter=15, tol=0.0),
                          monitor)
    h = monitor.history
    assert len(h) == monitor.iterations + 1
    for prev, curr in zip(h, h[1:]):
        assert curr >= prev - 1e-8
    assert sum(forward1(trained, o)[0] for o in corpus) == \
        pytest.approx(h[-1])


def test_initialized_training_converges():
    truth = random_hmm1(3, 1, 2, mean_scale=4.0, seed=8)
    corpus = [sample1(truth, 50, seed=s)[1] for s in range(8)]
    config = TrainConfig(n_states=3, n_mixtures=1, max_iter=100, tol=1e-4)
    monitor = ConvergenceMonitor(config.tol, config.max_iter)
    baum_welch1(initialize_hmm1(corpus, config), corpus, config, monitor)
    assert monitor.converged
    assert monitor.history[-1] > monitor.history[0]


def test_starved_state_raises():
    gm = GaussianMixture([1.0], [[0.0]], [[1.0]])
    a = [[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]
    m = Hmm1Model([1.0, 0.0, 0.0], a, [gm] * 3, Topology(3))
    with pytest.raises(StarvedStateError) as e:
        baum_welch1(m, [np.zeros((6, 1))], TrainConfig(max_iter=2))
    assert e.value.state == 1


def test_state_reached_only_through_floors_is_starved():
    gm = GaussianMixture([1.0], [[0.0]], [[1.0]])
    eps = 1e-10
    a = [[1 - 2 * eps, eps, eps, 0.0, 0.0],
         [0.0, 1 - 2 * eps, eps, eps, 0.0],
         [0.0, 0.0, 1 - 2 * eps, eps, eps],
         [0.0, 0.0, 0.0, 1 - eps, eps],
         [0.0, 0.0, 0.0, 0.0, 1.0]]
    m = Hmm1Model([1.0, 0.0, 0.0, 0.0, 0.0], a, [gm] * 5, Topology(5))
    o = np.random.default_rng(1).normal(size=(3, 1))
    with pytest.raises(StarvedStateError) as e:
        baum_welch1(m, [o], TrainConfig(max_iter=1))
    assert e.value.state == 1


def test_empty_corpus(model):
    with pytest.raises(UsageError):
        baum_welch1(model, [])


def test_zero_likelihood_corpus(model):
    with np.errstate(over="ignore"):
        with pytest.raises(UsageError):
            baum_welch1(model, [np.full((4, model.n_features), 1e200)],
                        TrainConfig(max_iter=2))


@pytest.mark.parametrize("seed", range(100))
def test_baum_welch_never_decreases(seed):
    rng = np.random.default_rng(seed)
    n_states, n_mix, n_feat = (int(v) for v in rng.integers([2, 1, 1],
                                                            [4, 3, 3]))
    truth = random_hmm1(n_states, n_mix, n_feat, Topology(n_states, ERGODIC),
                        mean_scale=3.0, seed=seed)
    corpus = [sample1(truth, 25, seed=1000 * seed + s)[1] for s in range(4)]
    config = TrainConfig(n_states=n_states, n_mixtures=n_mix, topology=ERGODIC,
                         max_iter=8, tol=0.0, seed=seed)
    monitor = ConvergenceMonitor(config.tol, config.max_iter)
    baum_welch1(initialize_hmm1(corpus, config), corpus, config, monitor)
    h = monitor.history
    assert len(h) >= 2
    assert all(curr >= prev - 1e-8 for prev, curr in zip(h, h[1:]))
