"""Domain types and combinatorial helpers."""

import math

import numpy as np
import pytest

from cachecast.core import (
    CacheSubset,
    DemandVector,
    RedundancyPattern,
    SystemConfig,
    binomial,
    partitions_into_parts,
    redundancy_pattern,
    subsets_of_size,
)


def test_system_config_validation():
    cfg = SystemConfig(K=4, N=10, m_ratio=0.3)
    assert cfg.F is None
    with pytest.raises(ValueError):
        SystemConfig(K=0, N=10, m_ratio=0.3)
    with pytest.raises(ValueError):
        SystemConfig(K=4, N=3, m_ratio=0.3)  # fewer files than caches
    with pytest.raises(ValueError):
        SystemConfig(K=4, N=10, m_ratio=1.2)
    with pytest.raises(ValueError):
        SystemConfig(K=4, N=10, m_ratio=0.3, F=0)


def test_demand_vector():
    d = DemandVector((2, 1, 2, 5))
    assert d.K == 4
    assert d.distinct() == frozenset({1, 2, 5})
    with pytest.raises(ValueError):
        DemandVector(())
    with pytest.raises(ValueError):
        DemandVector((1, 0, 2))


def test_redundancy_pattern():
    p = RedundancyPattern((3, 2, 2, 1))
    assert p.K == 8
    assert p.L == 4
    assert not p.is_symmetric()
    assert RedundancyPattern((2, 2)).is_symmetric()
    assert str(p) == "3-2-2-1"
    with pytest.raises(ValueError):
        RedundancyPattern((2, 3))  # must be non-increasing
    with pytest.raises(ValueError):
        RedundancyPattern((2, 0))


def test_redundancy_pattern_of_demand():
    pattern, L, files = redundancy_pattern(DemandVector((4, 1, 4, 4, 1, 7)))
    assert pattern.counts == (3, 2, 1)
    assert L == 3
    assert files == frozenset({1, 4, 7})

    pattern, L, files = redundancy_pattern(DemandVector((5, 5, 5)))
    assert pattern.counts == (3,)
    assert L == 1


def test_cache_subset():
    s = CacheSubset.from_members([1, 3, 4])
    assert s.mask == 0b1101
    assert s.size == 3
    assert s.members == (1, 3, 4)
    assert s.contains(3) and not s.contains(2)
    assert s.without(3).members == (1, 4)
    assert list(s) == [1, 3, 4]
    assert str(s) == "{1,3,4}"
    with pytest.raises(ValueError):
        CacheSubset(-1)


def test_binomial():
    assert binomial(5, 2) == 10
    assert binomial(4, 0) == 1
    assert binomial(3, 7) == 0
    # exact big integers, no float overflow
    assert binomial(60, 30) == math.comb(60, 30)
    with pytest.raises(ValueError):
        binomial(-1, 2)


def test_subsets_of_size_ascending_masks():
    subs = subsets_of_size(5, 2)
    assert len(subs) == binomial(5, 2)
    masks = [s.mask for s in subs]
    assert masks == sorted(masks)
    assert all(s.size == 2 for s in subs)
    # every subset appears exactly once
    assert len(set(masks)) == len(masks)
    assert subsets_of_size(3, 0) == [CacheSubset(0)]


def test_partitions_into_parts_enumeration():
    nine_three = [p.counts for p in partitions_into_parts(9, 3)]
    assert nine_three == [
        (7, 1, 1),
        (6, 2, 1),
        (5, 3, 1),
        (5, 2, 2),
        (4, 4, 1),
        (4, 3, 2),
        (3, 3, 3),
    ]


def test_partitions_into_parts_counts():
    # partition numbers p(K, L) for spot checks
    for K, L, expect in ((8, 1, 1), (8, 8, 1), (8, 4, 5), (10, 5, 7), (6, 3, 3)):
        got = partitions_into_parts(K, L)
        assert len(got) == expect
        for p in got:
            assert sum(p.counts) == K
            assert p.L == L


def test_partitions_total_matches_partition_function():
    # sum over L of p(K, L) equals the partition number p(K)
    totals = {5: 7, 7: 15, 9: 30}
    for K, pk in totals.items():
        assert sum(len(partitions_into_parts(K, L)) for L in range(1, K + 1)) == pk
