import threading

import pytest

from augtrees.core import (
    ABSENT,
    INF1,
    INF2,
    AtomicRef,
    MinMaxPolicy,
    SumPolicy,
    Version,
    internal_version,
    is_sentinel,
    leaf_version,
)


def test_leaf_version_present_and_absent():
    present = leaf_version(SumPolicy, 1)
    assert present.sum == 1
    assert present.left is None and present.right is None
    absent = leaf_version(SumPolicy, 0)
    assert absent.sum == 0
    keyed = leaf_version(SumPolicy, 1, key=5)
    assert keyed.key == 5 and keyed.sum == 1


def test_internal_version_combines_sums():
    a = leaf_version(SumPolicy, 1)
    b = internal_version(SumPolicy, leaf_version(SumPolicy, 1), leaf_version(SumPolicy, 1))
    assert b.sum == 2
    c = internal_version(SumPolicy, a, b)
    assert c.sum == 3
    z = internal_version(SumPolicy, leaf_version(SumPolicy, 0), leaf_version(SumPolicy, 0))
    assert z.sum == 0
    keyed = internal_version(
        SumPolicy, leaf_version(SumPolicy, 1), leaf_version(SumPolicy, 1), key=2
    )
    assert keyed.key == 2 and keyed.sum == 2


def test_sum_policy_aux_mirrors_sum():
    a = leaf_version(SumPolicy, 1, key=3)
    b = leaf_version(SumPolicy, 0, key=4)
    c = internal_version(SumPolicy, a, b)
    assert (a.aux, b.aux, c.aux) == (1, 0, 1)
    assert c.aux == c.sum


def test_minmax_policy_tracks_ranges():
    a = leaf_version(MinMaxPolicy, 1, key=3)
    gap = leaf_version(MinMaxPolicy, 0, key=4)
    b = leaf_version(MinMaxPolicy, 1, key=9)
    assert a.aux == (3, 3) and gap.aux is None
    c = internal_version(MinMaxPolicy, a, gap)
    d = internal_version(MinMaxPolicy, c, b)
    assert c.aux == (3, 3)
    assert d.aux == (3, 9)


def test_no_policy_skips_aux():
    v = internal_version(None, leaf_version(None, 1), leaf_version(None, 0))
    assert v.aux is None and v.sum == 1


def test_version_is_slotted():
    v = leaf_version(SumPolicy, 1)
    with pytest.raises(AttributeError):
        v.extra = 1  # no __dict__: field set is fixed at construction


def test_atomic_ref_cas_compares_identity():
    v0 = leaf_version(SumPolicy, 0)
    twin = leaf_version(SumPolicy, 0)  # equal-valued but distinct
    slot = AtomicRef(v0)
    assert slot.value is v0
    v1 = leaf_version(SumPolicy, 1)
    assert not slot.cas(twin, v1)
    assert slot.value is v0
    assert slot.cas(v0, v1)
    assert slot.value is v1
    # stale expected fails and leaves the newer value in place
    v2 = leaf_version(SumPolicy, 0)
    assert not slot.cas(v0, v2)
    assert slot.value is v1


def test_racing_cas_exactly_one_winner():
    for _ in range(200):
        v0 = object()
        slot = AtomicRef(v0)
        results = [None, None]
        barrier = threading.Barrier(2)

        def racer(i, new):
            barrier.wait()
            results[i] = slot.cas(v0, new)

        news = [object(), object()]
        threads = [threading.Thread(target=racer, args=(i, news[i])) for i in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [False, True]
        assert slot.value is news[results.index(True)]


def test_sentinel_total_order():
    assert INF1 < INF2 and not INF2 < INF1 and not INF1 < INF1
    assert INF1 <= INF1 and INF2 >= INF1
    for k in (-(10**9), -1, 0, 1, 10**9):
        assert k < INF1 and k < INF2
        assert INF1 > k and INF2 > k
        assert not INF1 < k and not k > INF2
        assert INF1 >= k and not INF1 <= k
    assert sorted([INF2, 3, INF1, 1]) == [1, 3, INF1, INF2]
    assert is_sentinel(INF1) and is_sentinel(INF2) and not is_sentinel(0)


def test_absent_is_a_unique_marker():
    assert repr(ABSENT) == "ABSENT"
    assert ABSENT is not None
    assert (ABSENT == 0) is False
