"""Correlated demand sampling: conditionals, chains, and diagnostics."""

import itertools

import numpy as np
import pytest

from cachecast.core import DemandVector
from cachecast.demand import (
    CorrelationModel,
    DemandStats,
    PopularityDist,
    complete_graph,
    conditional_pmf,
    empirical_stats,
    epsr,
    gibbs_sweep,
    init_chain,
    load_edge_list,
    mean_request_index,
    sample_chains,
    sample_demands,
    zipf_pmf,
)

CHI2_99_DF19 = 36.1909  # upper 1% point of chi-square with 19 degrees of freedom


def uniform_model(K, N, r, adjacency=None):
    adj = complete_graph(K) if adjacency is None else adjacency
    return CorrelationModel(adjacency=adj, r=r, popularity=zipf_pmf(N, 0.0))


def test_zipf_pmf_values():
    uni = zipf_pmf(7, 0.0)
    assert np.allclose(uni.pmf, np.full(7, 1 / 7))

    two = zipf_pmf(2, 1.0)
    assert two.pmf[0] == pytest.approx(2 / 3)
    assert two.pmf[1] == pytest.approx(1 / 3)

    big = zipf_pmf(1000, 0.75)
    assert big.pmf[0] / big.pmf[-1] == pytest.approx(177.8279410038923, rel=1e-12)
    assert np.all(np.diff(big.pmf) <= 0)
    assert big.pmf.sum() == pytest.approx(1.0)


def test_popularity_validation():
    with pytest.raises(ValueError):
        zipf_pmf(0, 1.0)
    with pytest.raises(ValueError):
        zipf_pmf(5, -0.2)
    with pytest.raises(ValueError):
        PopularityDist(N=3, theta=0.0, pmf=np.array([0.5, 0.4, 0.2]))
    with pytest.raises(ValueError):
        PopularityDist(N=3, theta=0.0, pmf=np.array([0.5, 0.6, -0.1]))
    with pytest.raises(ValueError):
        PopularityDist(N=3, theta=0.0, pmf=np.array([0.5, 0.5]))


def test_correlation_model_validation():
    pop = zipf_pmf(4, 0.0)
    good = complete_graph(3)
    CorrelationModel(adjacency=good, r=0.5, popularity=pop)

    loop = good.copy()
    loop[0, 0] = True
    with pytest.raises(ValueError):
        CorrelationModel(adjacency=loop, r=0.5, popularity=pop)

    lop = good.copy()
    lop[0, 1] = False
    with pytest.raises(ValueError):
        CorrelationModel(adjacency=lop, r=0.5, popularity=pop)

    with pytest.raises(ValueError):
        CorrelationModel(adjacency=good, r=1.2, popularity=pop)
    with pytest.raises(ValueError):
        CorrelationModel(adjacency=np.ones((2, 3), dtype=bool), r=0.5, popularity=pop)


def test_conditional_pmf_basics():
    model = uniform_model(4, 10, 0.0)
    d = DemandVector((1, 2, 3, 4))
    out = conditional_pmf(1, d, model)
    assert np.allclose(out, model.popularity.pmf)
    out[0] = 99.0  # must be a copy, not a view into the model
    assert model.popularity.pmf[0] == pytest.approx(0.1)

    rng = np.random.default_rng(3)
    model = uniform_model(5, 12, 0.6)
    for _ in range(10):
        d = DemandVector(tuple(int(v) for v in rng.integers(1, 13, size=5)))
        for k in range(1, 6):
            pmf = conditional_pmf(k, d, model)
            assert np.all(pmf >= 0)
            assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_conditional_pmf_consensus_absorbs_at_full_copying():
    model = uniform_model(4, 10, 1.0)
    d = DemandVector((5, 5, 5, 5))
    for k in range(1, 5):
        pmf = conditional_pmf(k, d, model)
        assert pmf[4] == pytest.approx(1.0)
        assert pmf.sum() == pytest.approx(1.0)


def test_conditional_pmf_copy_set_includes_own_request():
    # cache 1 neighbours caches 2 and 3; its own request joins the copy set
    adj = np.zeros((4, 4), dtype=bool)
    for a, b in ((0, 1), (0, 2), (1, 3)):
        adj[a, b] = adj[b, a] = True
    model = uniform_model(4, 1000, 0.9, adjacency=adj)
    d = DemandVector((4, 2, 7, 9))
    pmf = conditional_pmf(1, d, model)
    member = 0.9 / 3 + 0.1 / 1000
    outsider = 0.1 / 1000
    for f in (2, 4, 7):
        assert pmf[f - 1] == pytest.approx(member, abs=1e-15)
    assert pmf[9 - 1] == pytest.approx(outsider, abs=1e-15)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_conditional_pmf_isolated_cache_uses_base_law():
    adj = np.zeros((3, 3), dtype=bool)
    adj[0, 1] = adj[1, 0] = True  # cache 3 has no neighbours
    model = uniform_model(3, 8, 0.9, adjacency=adj)
    pmf = conditional_pmf(3, DemandVector((1, 1, 5)), model)
    assert np.allclose(pmf, model.popularity.pmf)


def two_cache_consensus_probability(r, N):
    """Stationary probability both caches request the same file.

    With uniform popularity the sweep kernel collapses to a two state
    chain on {equal, unequal}. A cache whose copy set is a single file
    picks it with probability a = r + (1 - r)/N; a two file copy set
    gives each member b = r/2 + (1 - r)/N. Conditioning on the state
    before a sweep and following the two in-order redraws gives the
    transition probabilities below.
    """
    a = r + (1 - r) / N
    b = r / 2 + (1 - r) / N
    t_stay = a * a + (1 - a) * b
    t_enter = b * a + (1 - b) * b
    return t_enter / (1 - t_stay + t_enter)


def test_two_cache_stationary_consensus():
    cases = {(0.9, 20): 0.82727, (0.6, 7): 0.51020, (0.3, 15): 0.23137}
    for (r, N), frozen in cases.items():
        assert two_cache_consensus_probability(r, N) == pytest.approx(frozen, abs=5e-6)
        model = uniform_model(2, N, r)
        samples = sample_demands(model, count=40_000, burn_in=300, seed=2024)
        hit = np.mean([d.requests[0] == d.requests[1] for d in samples])
        assert hit == pytest.approx(two_cache_consensus_probability(r, N), abs=0.015), (r, N)


def test_three_cache_stationary_matches_exact_kernel():
    # exact stationary distribution of the sweep kernel on a small library
    N, K, r = 4, 3, 0.7
    model = uniform_model(K, N, r)
    states = list(itertools.product(range(1, N + 1), repeat=K))
    index = {s: i for i, s in enumerate(states)}
    kernel = np.eye(len(states))
    for k in range(1, K + 1):
        step = np.zeros((len(states), len(states)))
        for s in states:
            pmf = conditional_pmf(k, DemandVector(s), model)
            for f in range(1, N + 1):
                t = list(s)
                t[k - 1] = f
                step[index[s], index[tuple(t)]] = pmf[f - 1]
        kernel = kernel @ step
    # power iteration to the stationary row vector
    pi = np.full(len(states), 1 / len(states))
    for _ in range(400):
        pi = pi @ kernel
    assert pi.sum() == pytest.approx(1.0, abs=1e-9)
    exact_L = float(sum(p * len(set(s)) for p, s in zip(pi, states)))

    samples = sample_demands(model, count=30_000, burn_in=300, seed=11)
    sim_L = np.mean([len(d.distinct()) for d in samples])
    assert sim_L == pytest.approx(exact_L, abs=0.025)


def test_sampling_is_deterministic_per_seed():
    model = uniform_model(4, 30, 0.5)
    a = sample_demands(model, count=50, burn_in=20, seed=9)
    b = sample_demands(model, count=50, burn_in=20, seed=9)
    assert a == b
    c = sample_demands(model, count=50, burn_in=20, seed=10)
    assert a != c


def test_sample_chains_spawns_independent_streams():
    model = uniform_model(3, 25, 0.4)
    chains = sample_chains(model, chains=3, count=40, burn_in=10, seed=7)
    assert len(chains) == 3
    assert all(len(c) == 40 for c in chains)
    assert chains[0] != chains[1]
    again = sample_chains(model, chains=3, count=40, burn_in=10, seed=7)
    assert chains == again


def test_independent_draws_pass_chi_square():
    # r = 0 must reduce to iid draws from the base popularity
    model = uniform_model(4, 20, 0.0)
    samples = sample_demands(model, count=3000, burn_in=0, seed=123)
    draws = np.array([d.requests for d in samples]).ravel()
    observed = np.bincount(draws, minlength=21)[1:]
    expected = len(draws) / 20
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_99_DF19


def test_redundancy_grows_with_copy_probability():
    weak = uniform_model(6, 50, 0.35)
    strong = uniform_model(6, 50, 0.9)
    L_weak = empirical_stats(sample_demands(weak, 4000, 200, seed=5)).L_avg
    L_strong = empirical_stats(sample_demands(strong, 4000, 200, seed=5)).L_avg
    assert L_strong < L_weak - 0.3


def test_chain_bookkeeping():
    model = uniform_model(3, 10, 0.5)
    state = init_chain(model, np.random.default_rng(0))
    assert len(state.history) == 1
    gibbs_sweep(state, model)
    gibbs_sweep(state, model)
    assert len(state.history) == 3
    assert state.history[-1] == state.current
    assert all(1 <= f <= 10 for d in state.history for f in d.requests)

    with pytest.raises(ValueError):
        sample_demands(model, count=0, burn_in=5, seed=1)
    with pytest.raises(ValueError):
        sample_demands(model, count=5, burn_in=-1, seed=1)
    with pytest.raises(ValueError):
        sample_chains(model, chains=0, count=5, burn_in=1, seed=1)


def test_mean_request_index():
    samples = [DemandVector((1, 3, 5)), DemandVector((2, 2, 2))]
    assert np.allclose(mean_request_index(samples), [3.0, 2.0])


def test_epsr_oracle_and_invariance():
    identical = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
    assert epsr(identical) == pytest.approx(0.816496580927726, abs=1e-12)

    rng = np.random.default_rng(42)
    X = rng.normal(size=(4, 50))
    assert epsr(3.5 * X - 2.0) == pytest.approx(epsr(X), rel=1e-12)

    with pytest.raises(ValueError):
        epsr(np.ones((3, 10)))  # zero within-chain variance
    with pytest.raises(ValueError):
        epsr(np.arange(5.0))  # not 2-d
    with pytest.raises(ValueError):
        epsr(np.array([[1.0, 2.0]]))  # single chain


def test_empirical_stats_hand_case():
    samples = [
        DemandVector((1, 1, 2)),
        DemandVector((2, 2, 2)),
        DemandVector((3, 3, 2)),
        DemandVector((4, 4, 2)),
    ]
    stats = empirical_stats(samples)
    assert isinstance(stats, DemandStats)
    assert stats.rho_max == pytest.approx(1.0)
    assert stats.rho_avg == pytest.approx(1.0)
    assert stats.dropped_pairs == 2  # cache 3 is constant
    assert stats.L_avg == pytest.approx((2 + 1 + 2 + 2) / 4)

    with pytest.raises(ValueError):
        empirical_stats([DemandVector((1, 2))])
    with pytest.raises(ValueError):
        empirical_stats([DemandVector((1, 1)), DemandVector((1, 1))])


def test_load_edge_list(tmp_path):
    path = tmp_path / "ring.txt"
    path.write_text("# three cache ring\n1 2\n2,3\n3 1  # closing edge\n\n")
    adj = load_edge_list(path)
    assert adj.shape == (3, 3)
    assert np.array_equal(adj, complete_graph(3))

    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_edge_list(bad)

    bad.write_text("0 2\n")
    with pytest.raises(ValueError, match="1-based"):
        load_edge_list(bad)

    bad.write_text("2 2\n")
    with pytest.raises(ValueError, match="self-loop"):
        load_edge_list(bad)

    bad.write_text("# nothing here\n")
    with pytest.raises(ValueError, match="no edges"):
        load_edge_list(bad)
