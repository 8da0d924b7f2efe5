"""Cache placement: what fraction of every file sits on which caches.

A symmetric placement is summarized by fractions x_0..x_K where x_s is
the share of each file stored exactly at every size-s subset of caches.
Three constructions are provided:

* ``centralized_profile`` -- the optimal coordinated placement.  With
  t = K * m_ratio, all mass goes on subset size t when t is an integer,
  and splits linearly over floor(t) and ceil(t) otherwise.  This is the
  closed form of the placement linear program below.
* ``decentralized_profile`` -- uncoordinated random caching where every
  cache grabs an m_ratio fraction of each file on its own; a symbol
  lands on a given size-s subset with probability q^s (1-q)^(K-s) for
  q = m_ratio.  (This exponent pairing is the one consistent with the
  standard uncoordinated peak rate; see delivery.peak_rate_decentralized.)
* ``solve_placement_lp`` -- the worst-case-rate LP solved numerically,
  used to cross-check the closed form.

``materialize_partition`` turns a profile into an actual symbol-level
partition of each file for bit-level delivery experiments, along with
deterministic pseudo-random file contents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemConfig, binomial
from .lp import LinearProgram, LpNumericalError, solve

PROFILE_TOL = 1e-9
SUBSET_ENUM_CAP = 12  # bit-level work enumerates all 2^K subsets


@dataclass
class PlacementProfile:
    """Subset-size storage fractions x_0..x_K plus the scheme label."""

    fractions: np.ndarray
    scheme: str

    def __post_init__(self):
        self.fractions = np.asarray(self.fractions, dtype=float).reshape(-1)
        if self.fractions.shape[0] < 2:
            raise ValueError("profile needs entries for sizes 0..K with K >= 1")
        if not np.all(np.isfinite(self.fractions)):
            raise ValueError("profile fractions must be finite")

    @property
    def K(self) -> int:
        return self.fractions.shape[0] - 1


@dataclass(frozen=True)
class ProfileCheck:
    """Residuals of the three placement constraints, plus verdicts."""

    partition_residual: float
    capacity_used: float
    capacity_excess: float
    min_fraction: float
    partition_ok: bool
    capacity_ok: bool
    nonnegative_ok: bool

    @property
    def passed(self) -> bool:
        return self.partition_ok and self.capacity_ok and self.nonnegative_ok


def centralized_profile(K: int, m_ratio: float) -> PlacementProfile:
    """Optimal coordinated placement for cache budget m_ratio.

    Closed form: with t = K * m_ratio, x_t = 1 / C(K, t) for integer t;
    otherwise mass splits over floor(t) and ceil(t) with weights
    (ceil(t) - t) and (t - floor(t)).
    """
    if not 0.0 <= m_ratio <= 1.0:
        raise ValueError("m_ratio must lie in [0, 1]")
    t = K * m_ratio
    x = np.zeros(K + 1)
    tr = round(t)
    if abs(t - tr) <= 1e-9:
        x[tr] = 1.0 / binomial(K, tr)
    else:
        lo = int(np.floor(t))
        x[lo] = (lo + 1 - t) / binomial(K, lo)
        x[lo + 1] = (t - lo) / binomial(K, lo + 1)
    return PlacementProfile(x, "centralized")


def decentralized_profile(K: int, m_ratio: float) -> PlacementProfile:
    """Uncoordinated random placement: x_s = q^s (1-q)^(K-s), q = m_ratio."""
    if not 0.0 <= m_ratio <= 1.0:
        raise ValueError("m_ratio must lie in [0, 1]")
    q = m_ratio
    x = np.zeros(K + 1)
    if q == 0.0:
        x[0] = 1.0
    elif q == 1.0:
        x[K] = 1.0
    else:
        s = np.arange(K + 1)
        x = q ** s * (1.0 - q) ** (K - s)
    return PlacementProfile(x, "decentralized")


def solve_placement_lp(K: int, m_ratio: float) -> PlacementProfile:
    """Worst-case delivery rate placement LP, solved numerically.

    min sum_{s=0}^{K-1} C(K, s+1) x_s
    s.t. sum_s C(K, s) x_s = 1          (files fully partitioned)
         sum_{s>=1} C(K-1, s-1) x_s <= m_ratio   (per-cache capacity)
         x_s >= 0
    """
    if not 0.0 <= m_ratio <= 1.0:
        raise ValueError("m_ratio must lie in [0, 1]")
    n = K + 1
    c = np.array([float(binomial(K, s + 1)) for s in range(n)])
    E = np.array([[float(binomial(K, s)) for s in range(n)]])
    A = np.array([[float(binomial(K - 1, s - 1)) if s >= 1 else 0.0 for s in range(n)]])
    lp = LinearProgram(c=c, E=E, f=[1.0], A=A, b=[m_ratio],
                       lo=np.zeros(n), hi=np.ones(n))
    sol = solve(lp)
    if sol.status != "optimal":
        raise LpNumericalError(f"placement LP ended with status {sol.status}")
    return PlacementProfile(sol.assignment, "lp")


def validate_profile(p: PlacementProfile, K: int, m_ratio: float) -> ProfileCheck:
    """Check partition, capacity and nonnegativity; returns residuals."""
    if p.K != K:
        raise ValueError("profile length disagrees with K")
    x = p.fractions
    weights = np.array([float(binomial(K, s)) for s in range(K + 1)])
    cap_w = np.array([float(binomial(K - 1, s - 1)) if s >= 1 else 0.0 for s in range(K + 1)])
    partition_residual = abs(float(weights @ x) - 1.0)
    capacity_used = float(cap_w @ x)
    capacity_excess = max(0.0, capacity_used - m_ratio)
    min_fraction = float(np.min(x))
    return ProfileCheck(
        partition_residual=partition_residual,
        capacity_used=capacity_used,
        capacity_excess=capacity_excess,
        min_fraction=min_fraction,
        partition_ok=partition_residual <= PROFILE_TOL,
        capacity_ok=capacity_excess <= PROFILE_TOL,
        nonnegative_ok=min_fraction >= -PROFILE_TOL,
    )


def apportion(targets: np.ndarray, total: int, caps: np.ndarray) -> np.ndarray:
    """Round nonnegative targets to integers summing to ``total``.

    Largest-remainder rule with per-entry caps and deterministic
    tie-breaking (larger remainder first, then lower index).  Requires
    sum(caps) >= total and sum(targets) ~ total.
    """
    targets = np.asarray(targets, dtype=float)
    caps = np.asarray(caps, dtype=np.int64)
    if int(caps.sum()) < total:
        raise ValueError("caps cannot absorb the requested total")
    base = np.minimum(np.floor(targets + 1e-9).astype(np.int64), caps)
    deficit = total - int(base.sum())
    if deficit < 0:
        raise ValueError("targets overshoot the total by more than rounding")
    if deficit:
        rem = targets - base
        order = np.lexsort((np.arange(targets.shape[0]), -rem))
        while deficit:
            progressed = False
            for idx in order:
                if deficit == 0:
                    break
                if base[idx] < caps[idx]:
                    base[idx] += 1
                    deficit -= 1
                    progressed = True
            if not progressed:
                raise ValueError("caps cannot absorb the requested total")
    return base


@dataclass
class PartitionMap:
    """Symbol-level realization of a profile for bit-level delivery.

    For each file (1-based) and each cache subset (bitmask), ``pieces``
    holds the ascending symbol indices stored exactly at that subset.
    ``data`` holds the pseudo-random file contents, one row per file.
    """

    config: SystemConfig
    scheme: str
    seed: int
    pieces: list[dict[int, np.ndarray]]
    data: np.ndarray

    def piece(self, file: int, mask: int) -> np.ndarray:
        return self.pieces[file - 1].get(mask, _EMPTY_IDX)

    def cache_view(self, cache: int):
        """What one cache holds: per file, (held flags, masked values)."""
        K, F = self.config.K, self.config.F
        bit = 1 << (cache - 1)
        out = {}
        for fi, per_file in enumerate(self.pieces):
            held = np.zeros(F, dtype=bool)
            for mask, idx in per_file.items():
                if mask & bit:
                    held[idx] = True
            vals = np.where(held, self.data[fi], 0).astype(np.uint8)
            out[fi + 1] = (held, vals)
        return out

    def stored_symbols(self, cache: int) -> int:
        bit = 1 << (cache - 1)
        return sum(
            int(idx.shape[0])
            for per_file in self.pieces
            for mask, idx in per_file.items()
            if mask & bit
        )


_EMPTY_IDX = np.zeros(0, dtype=np.int64)


def materialize_partition(config: SystemConfig, p: PlacementProfile, seed: int) -> PartitionMap:
    """Assign every symbol of every file to exactly one cache subset.

    Subset sizes follow the profile fractions, rounded by largest
    remainder so each file's pieces partition its F symbols exactly.
    The centralized scheme uses contiguous deterministic slices in
    ascending-mask order; the decentralized scheme assigns a seeded
    random permutation of symbols to the same subset sizes, so which
    symbols land where is random while the piece sizes stay exact.
    """
    K, F = config.K, config.F
    if F is None:
        raise ValueError("bit-level materialization needs config.F")
    if K > SUBSET_ENUM_CAP:
        raise ValueError(f"K > {SUBSET_ENUM_CAP} exceeds the subset enumeration cap")
    if p.K != K:
        raise ValueError("profile length disagrees with config.K")

    masks = np.arange(1 << K)
    sizes = np.array([int(m).bit_count() for m in masks])
    targets = p.fractions[sizes] * F
    caps = np.full(masks.shape[0], F, dtype=np.int64)
    counts = apportion(targets, F, caps)

    ss = np.random.SeedSequence(seed)
    children = ss.spawn(config.N + 1)
    data = np.random.default_rng(children[0]).integers(0, 256, size=(config.N, F), dtype=np.uint8)

    bounds = np.concatenate([[0], np.cumsum(counts)])
    pieces: list[dict[int, np.ndarray]] = []
    if p.scheme != "decentralized":
        shared = {
            int(masks[i]): np.arange(bounds[i], bounds[i + 1], dtype=np.int64)
            for i in range(masks.shape[0]) if counts[i]
        }
        for _ in range(config.N):
            pieces.append(shared)
    else:
        for fi in range(config.N):
            rng = np.random.default_rng(children[fi + 1])
            perm = rng.permutation(F)
            per_file = {
                int(masks[i]): np.sort(perm[bounds[i]:bounds[i + 1]]).astype(np.int64)
                for i in range(masks.shape[0]) if counts[i]
            }
            pieces.append(per_file)
    return PartitionMap(config=config, scheme=p.scheme, seed=seed, pieces=pieces, data=data)
