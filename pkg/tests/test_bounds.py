"""Cut-set lower bound: hand values, clamping, and demand averaging."""

import pytest

from cachecast.bounds import average_bound, cutset_bound
from cachecast.core import DemandVector


def test_hand_values():
    # K=4, N=50, M=5, L=2: s=1 gives 1 - 5/50 = 0.9, s=2 gives 2 - 10/25 = 1.6
    rep = cutset_bound(4, 2, 50, 5.0)
    assert rep.value == pytest.approx(1.6)
    assert rep.argmax_s == 2

    # s=1 can win when capacity is large relative to floor(N/s)
    rep = cutset_bound(4, 2, 50, 20.0)
    assert rep.value == pytest.approx(max(1 - 20 / 50, 2 - 40 / 25, 0.0))
    assert rep.value == pytest.approx(0.6)
    assert rep.argmax_s == 1

    # L=1 always reduces to 1 - M/N
    rep = cutset_bound(8, 1, 1000, 100.0)
    assert rep.value == pytest.approx(0.9)
    assert rep.argmax_s == 1


def test_floor_matters():
    # N=7, s=2: caches reused floor(7/2)=3 times, not 3.5
    rep = cutset_bound(3, 2, 7, 1.5)
    assert rep.value == pytest.approx(max(1 - 1.5 / 7, 2 - 3.0 / 3))
    assert rep.value == pytest.approx(1.0)


def test_clamped_at_zero():
    rep = cutset_bound(3, 3, 9, 9.0)
    assert rep.value == 0.0
    assert rep.value >= 0.0
    # and stays zero for anything with full caches
    for L in (1, 2, 3):
        assert cutset_bound(3, L, 12, 12.0).value == 0.0


def test_argmax_is_first_maximizer():
    # M=0 makes val = s, so the last s wins; M=N pushes everything negative
    # and ties resolve to the first s seen
    assert cutset_bound(5, 4, 20, 0.0).argmax_s == 4
    rep = cutset_bound(2, 2, 10, 10.0)
    assert rep.value == 0.0


def test_validation():
    with pytest.raises(ValueError):
        cutset_bound(4, 0, 50, 1.0)
    with pytest.raises(ValueError):
        cutset_bound(4, 5, 50, 1.0)
    with pytest.raises(ValueError):
        cutset_bound(4, 2, 3, 1.0)  # N < K
    with pytest.raises(ValueError):
        cutset_bound(4, 2, 50, -0.5)
    with pytest.raises(ValueError):
        cutset_bound(4, 2, 50, 51.0)


def test_average_bound():
    demands = [DemandVector((1, 1, 2)), DemandVector((3, 3, 3))]
    # L=2 and L=1 at K=3, N=30, M=3
    v2 = cutset_bound(3, 2, 30, 3.0).value
    v1 = cutset_bound(3, 1, 30, 3.0).value
    assert average_bound(demands, 30, 3.0, 3) == pytest.approx((v1 + v2) / 2)

    with pytest.raises(ValueError):
        average_bound([], 30, 3.0, 3)
    with pytest.raises(ValueError):
        average_bound([DemandVector((1, 2))], 30, 3.0, 3)
