"""Delivery planning: what the server actually multicasts.

With a symmetric placement x_0..x_K in place and a demand vector d, the
baseline scheme sends one XOR-coded message per cache subset S: each
member k contributes the piece of its requested file stored exactly at
S \\ {k}, shorter pieces are zero-padded, and the message length is the
longest constituent.  Every member can XOR out the other terms from its
own cache.  The resulting load, in units of one file, is

    rate = L * x_0 + sum_{s=1}^{K-1} C(K, s+1) * x_s

where L is the number of distinct requested files.  When L < K the
same file appears in several constituents and some coded messages are
poor value; moving ("transferring") selected pieces into the uncoded
part and shipping them once per distinct file can cost less.

Two planners implement that idea:

* ``simplified_plan`` transfers whole subset-size classes: every class
  up to a cutoff size (K - L) // (L + 1) moves into the uncoded part.
  This closed form is optimal among per-size-class transfer choices.
* ``adaptive_plan`` optimizes the kept fraction y of every (file,
  subset) pair by linear programming: minimize the total message load
  where each coded message costs the max of its constituents and each
  distinct file's uncoded part ships once.  The LP is solved exactly in
  a symmetry-reduced form (caches requesting the same file are
  interchangeable, as are files requested equally often), which keeps
  the problem tiny even at the K = 12 enumeration cap.
  ``adaptive_rate_direct`` builds the unreduced LP over all subsets and
  exists to cross-check the reduction.

``build_messages`` / ``decode`` realize a plan at symbol level: kept
pieces are the first round(y*F) symbols of each subset piece (largest
remainder across subsets, so per-file totals stay exactly F) and the
displaced symbols join the uncoded part.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core import DemandVector, RedundancyPattern, binomial, redundancy_pattern
from .lp import LinearProgram, LpNumericalError, solve
from .placement import PartitionMap, PlacementProfile, SUBSET_ENUM_CAP, apportion

PLAN_TOL = 1e-9


class DecodeError(RuntimeError):
    """A cache could not reconstruct its file from schedule + storage."""


@dataclass(frozen=True)
class RateReport:
    """One evaluated scheme: its rate and the demand context."""

    scheme: str
    rate: float
    L: int
    pattern: RedundancyPattern | None
    m_ratio: float


@dataclass
class SimplifiedPlan:
    """Per-size kept fractions after the cutoff-rule transfer."""

    fractions: np.ndarray  # y_0..y_K
    rate: float
    cutoff: int


@dataclass
class TransferPlan:
    """Kept fraction y for every (distinct file, subset mask) pair.

    The uncoded entry is the mask-0 fraction; per file the fractions sum
    to one, and no kept fraction exceeds the placed fraction of its
    subset size.
    """

    demand: DemandVector
    profile: PlacementProfile
    fractions: dict[tuple[int, int], float]

    def __post_init__(self):
        K = self.demand.K
        x = self.profile.fractions
        sums: dict[int, float] = {}
        for (file, mask), y in self.fractions.items():
            s = mask.bit_count()
            cap = 1.0 if mask == 0 else float(x[s])
            if y < -PLAN_TOL or y > cap + 1e-7:
                raise ValueError(f"kept fraction out of range for file {file}, mask {mask}")
            sums[file] = sums.get(file, 0.0) + y
        for file, total in sums.items():
            if abs(total - 1.0) > 1e-6:
                raise ValueError(f"kept fractions for file {file} sum to {total}, not 1")

    def kept(self, file: int, mask: int) -> float:
        return self.fractions.get((file, mask), 0.0)


def rate_nonadaptive(p: PlacementProfile, L: int, K: int) -> float:
    """Baseline rate: every subset message sent, uncoded once per file."""
    _check_L_K(p, L, K)
    x = p.fractions
    coded = sum(binomial(K, s + 1) * x[s] for s in range(1, K))
    return float(L * x[0] + coded)


def peak_rate_centralized(K: int, m_ratio: float) -> float:
    """Worst-case rate of the coordinated placement at integer t = K * m_ratio."""
    t = K * m_ratio
    if abs(t - round(t)) > 1e-9:
        raise ValueError("centralized peak-rate formula needs integer K * m_ratio")
    return K * (1.0 - m_ratio) / (1.0 + K * m_ratio)


def peak_rate_decentralized(K: int, m_ratio: float) -> float:
    """Worst-case rate of the uncoordinated placement; K in the q -> 0 limit."""
    q = m_ratio
    if q == 0.0:
        return float(K)
    return K * (1.0 - q) * (1.0 - (1.0 - q) ** K) / (K * q)


def transfer_cutoff(K: int, L: int) -> int:
    """Largest subset-size class worth moving to the uncoded part."""
    if not 1 <= L <= K:
        raise ValueError("need 1 <= L <= K")
    return (K - L) // (L + 1)


def simplified_plan(p: PlacementProfile, L: int, K: int) -> SimplifiedPlan:
    """Transfer all size classes up to the cutoff into the uncoded part.

    A size-s class costs C(K, s+1) x_s coded but L C(K, s) x_s uncoded,
    so transferring wins exactly when s is at most (K - L) // (L + 1).
    The result is optimal among all per-class keep/transfer choices.
    """
    _check_L_K(p, L, K)
    shat = transfer_cutoff(K, L)
    x = p.fractions
    y = x.copy()
    moved = sum(binomial(K, i) * x[i] for i in range(1, shat + 1))
    y[0] = x[0] + moved
    for s in range(1, shat + 1):
        y[s] = 0.0
    rate = L * y[0] + sum(binomial(K, s + 1) * y[s] for s in range(1, K))
    return SimplifiedPlan(fractions=y, rate=float(rate), cutoff=shat)


def canonical_demand(pattern: RedundancyPattern) -> DemandVector:
    """The representative demand: file i requested by the next counts[i] caches."""
    reqs: list[int] = []
    for i, c in enumerate(pattern.counts, start=1):
        reqs.extend([i] * c)
    return DemandVector(tuple(reqs))


def _check_L_K(p: PlacementProfile, L: int, K: int):
    if p.K != K:
        raise ValueError("profile length disagrees with K")
    if not 1 <= L <= K:
        raise ValueError("need 1 <= L <= K")


def _demand_groups(d: DemandVector):
    """Distinct files with their requester masks, most-requested first."""
    counts = Counter(d.requests)
    files = sorted(counts, key=lambda n: (-counts[n], n))
    masks = []
    for n in files:
        m = 0
        for k, r in enumerate(d.requests, start=1):
            if r == n:
                m |= 1 << (k - 1)
        masks.append(m)
    return files, [counts[n] for n in files], masks


def adaptive_plan(p: PlacementProfile, d: DemandVector):
    """Optimal per-(file, subset) transfer plan by linear programming.

    Returns (TransferPlan, rate).  The LP minimizes

        sum_{n in D} y_n(empty) + sum_{|S| >= 2} max_{k in S} y_{d_k}(S \\ {k})

    subject to each file's fractions summing to one and
    0 <= y_n(S) <= x_{|S|}.  Caches that request the same file are
    interchangeable, and so are files requested equally often, so the LP
    is solved over orbits of (file, subset) pairs under those symmetries;
    the optimum is unchanged and the size collapses from L * 2^K
    variables to a few hundred at most.
    """
    K = d.K
    if p.K != K:
        raise ValueError("profile length disagrees with demand length")
    if K > SUBSET_ENUM_CAP:
        raise ValueError(f"K > {SUBSET_ENUM_CAP} exceeds the subset enumeration cap")
    x = np.maximum(np.asarray(p.fractions, dtype=float), 0.0)

    files, ks, gmasks = _demand_groups(d)
    L = len(files)

    # orbit key of the kept fraction for (group i, composition a):
    # (group size, own count, sorted multiset of the other groups' pairs)
    pair_rows = list(range(L))

    def var_key(i, a):
        others = sorted((ks[j], a[j]) for j in pair_rows if j != i)
        return (ks[i], a[i], tuple(others))

    var_index: dict[tuple, int] = {}
    var_hi: list[float] = []

    def var_id(i, a, size):
        key = var_key(i, a)
        idx = var_index.get(key)
        if idx is None:
            idx = len(var_index)
            var_index[key] = idx
            var_hi.append(1.0 if size == 0 else float(x[size]))
        return idx

    all_types = list(itertools.product(*[range(k + 1) for k in ks]))
    type_weight = {a: _composition_weight(ks, a) for a in all_types}

    # one partition row per distinct group size; groups of equal size are
    # interchangeable so their rows coincide
    class_rep: dict[int, int] = {}
    class_mult: dict[int, int] = {}
    for i, k in enumerate(ks):
        class_rep.setdefault(k, i)
        class_mult[k] = class_mult.get(k, 0) + 1

    rows = []
    for k, rep in sorted(class_rep.items()):
        coeffs: dict[int, float] = {}
        for a in all_types:
            idx = var_id(rep, a, sum(a))
            coeffs[idx] = coeffs.get(idx, 0.0) + type_weight[a]
        rows.append(coeffs)

    # message-cost epigraph: one z per orbit of compositions with |a| >= 2
    orbit_weight: dict[tuple, float] = {}
    orbit_members: dict[tuple, list[int]] = {}
    for a in all_types:
        size = sum(a)
        if size < 2:
            continue
        okey = tuple(sorted(zip(ks, a)))
        w = type_weight[a]
        if okey in orbit_weight:
            orbit_weight[okey] += w
            continue
        orbit_weight[okey] = w
        members = set()
        for i in range(L):
            if a[i] >= 1:
                reduced = tuple(a[j] - (j == i) for j in range(L))
                members.add(var_id(i, reduced, size - 1))
        orbit_members[okey] = sorted(members)

    n_y = len(var_index)
    orbits = sorted(orbit_members)
    n = n_y + len(orbits)
    c = np.zeros(n)
    for k, rep in class_rep.items():
        zero = tuple(0 for _ in ks)
        c[var_id(rep, zero, 0)] += class_mult[k]
    lo = np.zeros(n)
    hi = np.empty(n)
    hi[:n_y] = var_hi
    E = np.zeros((len(rows), n))
    f = np.ones(len(rows))
    for r, coeffs in enumerate(rows):
        for idx, w in coeffs.items():
            E[r, idx] = w
    ineq_rows = []
    for zi, okey in enumerate(orbits):
        c[n_y + zi] = orbit_weight[okey]
        members = orbit_members[okey]
        hi[n_y + zi] = max(var_hi[m] for m in members)
        for midx in members:
            row = np.zeros(n)
            row[midx] = 1.0
            row[n_y + zi] = -1.0
            ineq_rows.append(row)
    A = np.array(ineq_rows) if ineq_rows else np.zeros((0, n))
    b = np.zeros(A.shape[0])

    sol = solve(LinearProgram(c=c, E=E, f=f, A=A, b=b, lo=lo, hi=hi))
    if sol.status != "optimal":
        raise LpNumericalError(f"adaptive plan LP ended with status {sol.status}")

    yvals = sol.assignment[:n_y]
    fractions: dict[tuple[int, int], float] = {}
    for gi, file in enumerate(files):
        for mask in range(1 << K):
            a = tuple((mask & gmasks[j]).bit_count() for j in range(L))
            size = mask.bit_count()
            v = float(yvals[var_index[var_key(gi, a)]])
            cap = 1.0 if size == 0 else float(x[size])
            fractions[(file, mask)] = min(max(v, 0.0), cap)
    plan = TransferPlan(demand=d, profile=p, fractions=fractions)
    return plan, float(sol.value)


def _composition_weight(ks, a) -> float:
    w = 1
    for k, ai in zip(ks, a):
        w *= binomial(k, ai)
    return float(w)


def adaptive_rate_direct(p: PlacementProfile, d: DemandVector) -> float:
    """Reference adaptive rate from the unreduced LP over all subsets.

    Exponential in K; exists to verify the symmetry-reduced solver.
    """
    K = d.K
    if p.K != K:
        raise ValueError("profile length disagrees with demand length")
    x = np.maximum(np.asarray(p.fractions, dtype=float), 0.0)
    files, _, _ = _demand_groups(d)
    L = len(files)
    file_of = {n: i for i, n in enumerate(files)}
    nmask = 1 << K

    def y_id(i, mask):
        return i * nmask + mask

    n_y = L * nmask
    zmasks = [m for m in range(nmask) if m.bit_count() >= 2]
    z_of = {m: n_y + j for j, m in enumerate(zmasks)}
    n = n_y + len(zmasks)

    c = np.zeros(n)
    for i in range(L):
        c[y_id(i, 0)] = 1.0
    for m in zmasks:
        c[z_of[m]] = 1.0
    lo = np.zeros(n)
    hi = np.empty(n)
    for i in range(L):
        for mask in range(nmask):
            hi[y_id(i, mask)] = 1.0 if mask == 0 else float(x[mask.bit_count()])
    hi[n_y:] = float(np.max(x)) if np.max(x) > 0 else 0.0
    E = np.zeros((L, n))
    for i in range(L):
        E[i, y_id(i, 0):y_id(i, nmask - 1) + 1] = 1.0
    f = np.ones(L)
    rows = []
    for m in zmasks:
        for k in range(1, K + 1):
            bit = 1 << (k - 1)
            if not m & bit:
                continue
            i = file_of[d.requests[k - 1]]
            row = np.zeros(n)
            row[y_id(i, m & ~bit)] = 1.0
            row[z_of[m]] = -1.0
            rows.append(row)
    A = np.array(rows)
    b = np.zeros(A.shape[0])
    sol = solve(LinearProgram(c=c, E=E, f=f, A=A, b=b, lo=lo, hi=hi))
    if sol.status != "optimal":
        raise LpNumericalError(f"direct adaptive LP ended with status {sol.status}")
    return float(sol.value)


# --- bit-level realization -------------------------------------------------


@dataclass
class Message:
    """One coded multicast: XOR of the members' kept pieces, zero-padded."""

    mask: int
    payload: np.ndarray
    parts: list[tuple[int, int, np.ndarray]]  # (cache, file, symbol indices)


@dataclass
class MessageSchedule:
    """Everything the server sends for one demand vector."""

    demand: DemandVector
    F: int
    coded: dict[int, Message]
    uncoded: dict[int, tuple[np.ndarray, np.ndarray]]  # file -> (payload, indices)


def _plan_accessor(plan, d: DemandVector, K: int):
    if isinstance(plan, TransferPlan):
        if plan.demand.requests != d.requests:
            raise ValueError("transfer plan was built for a different demand vector")
        return plan.kept
    if isinstance(plan, SimplifiedPlan):
        y = np.asarray(plan.fractions, dtype=float)
    elif isinstance(plan, PlacementProfile):
        y = np.asarray(plan.fractions, dtype=float)
    else:
        y = np.asarray(plan, dtype=float).reshape(-1)
    if y.shape[0] != K + 1:
        raise ValueError("per-size plan needs one fraction per subset size 0..K")

    def kept(file: int, mask: int) -> float:
        return float(y[mask.bit_count()])

    return kept


def build_messages(pm: PartitionMap, plan, d: DemandVector) -> MessageSchedule:
    """Realize a plan: quantize kept fractions and XOR the messages.

    Kept counts are the plan fractions times F, rounded by largest
    remainder across each file's subsets (capped by the piece sizes) so
    the per-file totals stay exactly F; displaced symbols append to the
    uncoded part, which ships once per distinct file.
    """
    cfg = pm.config
    K, F = cfg.K, cfg.F
    if d.K != K:
        raise ValueError("demand length disagrees with the partition map")
    if any(r > cfg.N for r in d.requests):
        raise ValueError("demand requests a file beyond the library")
    kept_of = _plan_accessor(plan, d, K)
    files = sorted(set(d.requests), key=lambda n: (-d.requests.count(n), n))

    masks = list(range(1 << K))
    kept_idx: dict[tuple[int, int], np.ndarray] = {}
    uncoded: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for n in files:
        plan_targets = np.array([kept_of(n, m) * F for m in masks])
        pieces = [pm.piece(n, m) for m in masks]
        caps = np.array([F if m == 0 else p.shape[0] for m, p in zip(masks, pieces)],
                        dtype=np.int64)
        counts = apportion(plan_targets, F, caps)
        tails = [pieces[0]]
        for m in masks[1:]:
            cnt = int(counts[m])
            kept_idx[(n, m)] = pieces[m][:cnt]
            if cnt < pieces[m].shape[0]:
                tails.append(pieces[m][cnt:])
        idx = np.concatenate(tails) if tails else np.zeros(0, dtype=np.int64)
        uncoded[n] = (pm.data[n - 1][idx], idx)

    coded: dict[int, Message] = {}
    for mask in masks:
        if mask.bit_count() < 2:
            continue
        parts = []
        plen = 0
        for k in range(1, K + 1):
            bit = 1 << (k - 1)
            if not mask & bit:
                continue
            n = d.requests[k - 1]
            idx = kept_idx[(n, mask & ~bit)]
            parts.append((k, n, idx))
            plen = max(plen, idx.shape[0])
        if plen == 0:
            continue
        payload = np.zeros(plen, dtype=np.uint8)
        for _, n, idx in parts:
            payload[:idx.shape[0]] ^= pm.data[n - 1][idx]
        coded[mask] = Message(mask=mask, payload=payload, parts=parts)
    return MessageSchedule(demand=d, F=F, coded=coded, uncoded=uncoded)


def rate_of_schedule(schedule: MessageSchedule, F: int) -> float:
    """Total transmitted symbols over F."""
    total = sum(m.payload.shape[0] for m in schedule.coded.values())
    total += sum(p.shape[0] for p, _ in schedule.uncoded.values())
    return total / F


def decode(cache: int, cached, schedule: MessageSchedule, d: DemandVector) -> np.ndarray:
    """Reconstruct cache's requested file from storage plus the schedule.

    ``cached`` is the PartitionMap.cache_view of this cache.  Raises
    DecodeError on missing side information, conflicting fills, or
    coverage gaps.
    """
    if not 1 <= cache <= d.K:
        raise ValueError("cache index out of range")
    want = d.requests[cache - 1]
    F = schedule.F
    recon = np.zeros(F, dtype=np.uint8)
    have = np.zeros(F, dtype=bool)

    def fill(indices, values):
        seen = have[indices]
        if np.any(seen):
            clash = recon[indices[seen]] != values[seen]
            if np.any(clash):
                where = int(indices[seen][np.argmax(clash)])
                raise DecodeError(f"conflicting reconstruction at symbol {where}")
        recon[indices] = values
        have[indices] = True

    held, vals = cached[want]
    recon[held] = vals[held]
    have |= held

    if want in schedule.uncoded:
        payload, idx = schedule.uncoded[want]
        fill(idx, payload)

    bit = 1 << (cache - 1)
    for mask, msg in schedule.coded.items():
        if not mask & bit:
            continue
        mine = None
        interference = np.zeros(msg.payload.shape[0], dtype=np.uint8)
        for k, file, idx in msg.parts:
            if k == cache:
                if file != want:
                    raise DecodeError("schedule part disagrees with the demand")
                mine = idx
                continue
            fheld, fvals = cached[file]
            if not np.all(fheld[idx]):
                raise DecodeError(
                    f"cache {cache} lacks side information for message {mask}")
            interference[:idx.shape[0]] ^= fvals[idx]
        if mine is None or mine.shape[0] == 0:
            continue
        recovered = (msg.payload ^ interference)[:mine.shape[0]]
        fill(mine, recovered)

    if not np.all(have):
        missing = int(np.argmin(have))
        raise DecodeError(f"coverage gap at symbol {missing}")
    return recon
