"""Correlated demand generation for cache networks.

Requests in a real network are not independent: users who are close to
each other tend to ask for the same content. This module models that with
a Markov random field over the demand vector. Each cache sits on a vertex
of an undirected graph, and when cache k redraws its request it copies,
with probability r, one of the distinct files in its closed neighbourhood
(its neighbours' current requests plus its own last request), or falls
back to the base popularity distribution with probability 1 - r. Sweeping
the caches in ascending order with this conditional is Gibbs sampling;
after a burn-in the sweeps give (dependent) draws from the joint
stationary law.

The base popularity is Zipf with exponent theta (theta = 0 is uniform).
Convergence of the chains is monitored with the estimated potential scale
reduction (R-hat) computed over several independently seeded chains, and
the samples are summarised by pairwise Pearson correlations of the file
index sequences plus the average number of distinct files per demand
vector. Those summaries are what the delivery schemes respond to: fewer
distinct files means more demand redundancy for an adaptive plan to
exploit.

All randomness flows through numpy Generators seeded from a single
SeedSequence, with one spawned child per chain, so every experiment is
reproducible bit for bit from one integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DemandVector

PMF_TOL = 1e-12


@dataclass(frozen=True)
class PopularityDist:
    """Base popularity law over the file library.

    pmf[n - 1] is the probability of file n. Stored dense because every
    conditional evaluation rescales the whole vector anyway.
    """

    N: int
    theta: float
    pmf: np.ndarray

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("library size must be at least 1")
        if self.theta < 0:
            raise ValueError("Zipf exponent must be nonnegative")
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != (self.N,):
            raise ValueError(f"pmf must have shape ({self.N},), got {pmf.shape}")
        if np.any(pmf < 0):
            raise ValueError("pmf entries must be nonnegative")
        if abs(float(pmf.sum()) - 1.0) > PMF_TOL:
            raise ValueError("pmf must sum to 1")
        object.__setattr__(self, "pmf", pmf)


def zipf_pmf(N: int, theta: float) -> PopularityDist:
    """Zipf popularity with p_n proportional to (1/n)**theta.

    theta = 0 gives the uniform distribution. The pmf is non-increasing
    in the file index, so file 1 is always the most popular.
    """
    if N < 1:
        raise ValueError("library size must be at least 1")
    if theta < 0:
        raise ValueError("Zipf exponent must be nonnegative")
    weights = np.arange(1, N + 1, dtype=float) ** (-theta)
    return PopularityDist(N=N, theta=float(theta), pmf=weights / weights.sum())


@dataclass(frozen=True)
class CorrelationModel:
    """Neighbourhood-copy request model on an undirected graph.

    adjacency is a K x K boolean matrix, symmetric with a zero diagonal.
    r is the probability that a cache copies one of its neighbours'
    distinct current files instead of sampling from the base popularity.
    """

    adjacency: np.ndarray
    r: float
    popularity: PopularityDist

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if adj.shape[0] < 1:
            raise ValueError("need at least one cache")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency must have a zero diagonal")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("copy probability r must lie in [0, 1]")
        object.__setattr__(self, "adjacency", adj)

    @property
    def K(self) -> int:
        return self.adjacency.shape[0]

    def neighbor_files(self, k: int, current: DemandVector) -> frozenset:
        """Distinct files currently requested by the neighbours of cache k."""
        if not 1 <= k <= self.K:
            raise ValueError(f"cache index {k} out of range 1..{self.K}")
        row = self.adjacency[k - 1]
        return frozenset(current.requests[j] for j in range(self.K) if row[j])


def complete_graph(K: int) -> np.ndarray:
    """Adjacency matrix of the complete graph on K caches."""
    if K < 1:
        raise ValueError("need at least one cache")
    adj = np.ones((K, K), dtype=bool)
    np.fill_diagonal(adj, False)
    return adj


def load_edge_list(path) -> np.ndarray:
    """Read an undirected edge list file into an adjacency matrix.

    Each non-empty, non-comment line holds two 1-based cache indices
    separated by whitespace or a comma. The matrix size is the largest
    index seen.
    """
    edges = []
    top = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two cache indices")
            a, b = int(parts[0]), int(parts[1])
            if a < 1 or b < 1:
                raise ValueError(f"{path}:{lineno}: cache indices are 1-based")
            if a == b:
                raise ValueError(f"{path}:{lineno}: self-loops are not allowed")
            edges.append((a, b))
            top = max(top, a, b)
    if top == 0:
        raise ValueError(f"{path}: no edges found")
    adj = np.zeros((top, top), dtype=bool)
    for a, b in edges:
        adj[a - 1, b - 1] = True
        adj[b - 1, a - 1] = True
    return adj


def conditional_pmf(k: int, current: DemandVector, model: CorrelationModel) -> np.ndarray:
    """Resampling distribution for cache k given everyone else's requests.

    Mass r is spread uniformly over the copy set of cache k: the distinct
    files in its closed neighbourhood, i.e. its neighbours' current
    requests together with its own last request. The remaining 1 - r
    follows the base popularity. Keeping the cache's own file in the copy
    set gives requests the inertia seen in real traces; dropping it makes
    consensus form noticeably faster and leaves too few distinct files
    per demand vector. A cache with no neighbours (or r = 0) just samples
    the base law.
    """
    base = model.popularity.pmf
    if model.r == 0.0:
        return base.copy()
    files = model.neighbor_files(k, current)
    if not files:
        return base.copy()
    files = files | {current.requests[k - 1]}
    out = base * (1.0 - model.r)
    idx = np.fromiter(files, dtype=np.intp) - 1
    out[idx] += model.r / len(files)
    return out


@dataclass
class ChainState:
    """One Gibbs chain: the current demand vector, its rng, and the trace."""

    current: DemandVector
    rng: np.random.Generator
    history: list = field(default_factory=list)


def _draw_index(pmf: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of a 1-based file index."""
    cdf = np.cumsum(pmf)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(pmf) - 1)) + 1


def init_chain(model: CorrelationModel, rng: np.random.Generator) -> ChainState:
    """Start a chain with independent draws from the base popularity."""
    requests = tuple(_draw_index(model.popularity.pmf, rng) for _ in range(model.K))
    start = DemandVector(requests)
    return ChainState(current=start, rng=rng, history=[start])


def gibbs_sweep(state: ChainState, model: CorrelationModel) -> ChainState:
    """Resample every cache once, in ascending index order.

    Each cache draws from its conditional given the latest values of all
    other coordinates, so updates within a sweep see the sweep's earlier
    redraws. The new demand vector is appended to the history.
    """
    requests = list(state.current.requests)
    for k in range(1, model.K + 1):
        pmf = conditional_pmf(k, DemandVector(tuple(requests)), model)
        requests[k - 1] = _draw_index(pmf, state.rng)
    state.current = DemandVector(tuple(requests))
    state.history.append(state.current)
    return state


def sample_demands(model: CorrelationModel, count: int, burn_in: int, seed) -> list:
    """Run one Gibbs chain and return `count` post-burn-in demand vectors.

    The chain is initialised by independent draws from the base
    popularity, then burn_in sweeps are discarded, then the next `count`
    sweep results are returned. `seed` may be an integer or a
    numpy SeedSequence (the latter lets callers hand out spawned
    substreams for parallel chains).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    state = init_chain(model, np.random.default_rng(seed))
    for _ in range(burn_in + count):
        gibbs_sweep(state, model)
    return state.history[-count:]


def sample_chains(model: CorrelationModel, chains: int, count: int, burn_in: int, seed) -> list:
    """Run several independent chains from spawned substreams of one seed.

    Returns a list of `chains` sample lists, each of length `count`.
    Chain i always sees the same substream regardless of execution order,
    so parallel and serial runs agree.
    """
    if chains < 1:
        raise ValueError("need at least one chain")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [sample_demands(model, count, burn_in, child) for child in seed.spawn(chains)]


def mean_request_index(samples) -> np.ndarray:
    """Scalar summary per demand vector: the mean requested file index.

    This is the statistic the convergence diagnostic runs on; it folds
    all K coordinates into one number per sweep.
    """
    return np.array([sum(d.requests) / d.K for d in samples], dtype=float)


def epsr(chains) -> float:
    """Estimated potential scale reduction (R-hat) across parallel chains.

    chains is an m x T array of a scalar statistic, one row per chain.
    With W the mean within-chain sample variance and B/T the variance of
    the chain means, the pooled posterior variance estimate is
    V = ((T - 1) / T) W + B / T and R-hat is sqrt(V / W). Values near 1
    indicate the chains have forgotten their starting points.
    """
    arr = np.asarray(chains, dtype=float)
    if arr.ndim != 2:
        raise ValueError("chains must be a 2-d array, one row per chain")
    m, T = arr.shape
    if m < 2 or T < 2:
        raise ValueError("need at least 2 chains and 2 samples per chain")
    within = float(np.mean(np.var(arr, axis=1, ddof=1)))
    if within == 0.0:
        raise ValueError("degenerate chains: zero within-chain variance")
    means_var = float(np.var(np.mean(arr, axis=1), ddof=1))
    pooled = (T - 1) / T * within + means_var
    return float(np.sqrt(pooled / within))


@dataclass(frozen=True)
class DemandStats:
    """Pairwise correlation and redundancy summary of a sample set."""

    rho_max: float
    rho_avg: float
    L_avg: float
    dropped_pairs: int


def empirical_stats(samples) -> DemandStats:
    """Pearson correlations between caches plus the mean distinct-file count.

    The file index sequence of each cache is correlated against every
    other cache's sequence; rho_max and rho_avg summarise the unordered
    pairs. Pairs where either sequence is constant have no defined
    correlation and are excluded (counted in dropped_pairs). L_avg is the
    average number of distinct files per demand vector, the quantity that
    drives adaptive delivery gains.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    K = samples[0].K
    X = np.array([d.requests for d in samples], dtype=float).T
    if X.shape[0] != K:
        raise ValueError("inconsistent demand vector lengths")
    centered = X - X.mean(axis=1, keepdims=True)
    scale = np.sqrt((centered**2).sum(axis=1))
    rhos = []
    dropped = 0
    for i in range(K):
        for j in range(i + 1, K):
            if scale[i] == 0.0 or scale[j] == 0.0:
                dropped += 1
                continue
            rhos.append(float(centered[i] @ centered[j] / (scale[i] * scale[j])))
    if not rhos:
        raise ValueError("all cache pairs have constant requests; correlations undefined")
    L_avg = float(np.mean([len(d.distinct()) for d in samples]))
    return DemandStats(
        rho_max=max(rhos),
        rho_avg=float(np.mean(rhos)),
        L_avg=L_avg,
        dropped_pairs=dropped,
    )
