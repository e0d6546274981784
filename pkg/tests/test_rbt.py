import math
import random

import pytest

from augtrees.core import ABSENT
from augtrees.instrument import StepRecorder
from augtrees.rbt import (
    RbNode,
    Snap,
    check_rbt,
    combine_snaps,
    empty_snap,
    join,
    join3,
    rbt_find,
    rbt_height,
    rbt_inorder,
    rbt_range_collect,
    rbt_rank,
    rbt_rank_strict,
    rbt_select,
    singleton,
    singleton_snap,
)


def build(keys, rng, rec=None):
    """Random-shaped valid RBT over sorted distinct ``keys`` via joins."""
    if not keys:
        return None
    i = rng.randrange(len(keys))
    return join3(build(keys[:i], rng), keys[i], build(keys[i + 1 :], rng), rec)


def signature(t, seen=None):
    """Full structural fingerprint, for immutability checks."""
    if seen is None:
        seen = []
    if t is None:
        return None
    entry = (
        id(t),
        t.key,
        t.red,
        t.sum,
        t.bh,
        signature(t.left, seen),
        signature(t.right, seen),
    )
    seen.append(entry)
    return entry


def test_singleton_shape():
    s = singleton(3)
    assert s.key == 3 and s.sum == 1 and not s.red
    assert s.left is None and s.right is None
    assert check_rbt(s) == 1


def test_smallest_join():
    t = join(singleton(1), singleton(2))
    assert list(rbt_inorder(t)) == [1, 2]
    assert t.sum == 2 and not t.red
    check_rbt(t)


def test_join_of_two_two_key_subtrees():
    # the {3,5} and {6,7} sides joined must read back [3,5,6,7] with sum 4
    left = join(singleton(3), singleton(5))
    right = join(singleton(6), singleton(7))
    t = join(left, right)
    assert list(rbt_inorder(t)) == [3, 5, 6, 7]
    assert t.sum == 4 and not t.red
    check_rbt(t)


def test_join_oracle_equivalence_random_shapes():
    rng = random.Random(0xBEEF)
    for trial in range(400):
        nl = rng.randrange(0, 65)
        nr = rng.randrange(0, 65)
        if nl == 0 or nr == 0:
            continue
        split = rng.randrange(1, 200)
        lkeys = sorted(rng.sample(range(split), min(nl, split)))
        rkeys = sorted(rng.sample(range(split, 400), nr))
        l = build(lkeys, rng)
        r = build(rkeys, rng)
        check_rbt(l), check_rbt(r)
        lsig, rsig = signature(l), signature(r)
        t = join(l, r)
        assert list(rbt_inorder(t)) == lkeys + rkeys
        check_rbt(t)
        assert not t.red
        assert t.sum == len(lkeys) + len(rkeys)
        # inputs untouched, node for node
        assert signature(l) == lsig and signature(r) == rsig


def test_join3_exhaustive_small_sizes():
    rng = random.Random(5)
    for nl in range(0, 17):
        for nr in range(0, 17):
            lkeys = list(range(nl))
            rkeys = list(range(nl + 1, nl + 1 + nr))
            l = build(lkeys, rng)
            r = build(rkeys, rng)
            t = join3(l, nl, r)
            assert list(rbt_inorder(t)) == lkeys + [nl] + rkeys
            check_rbt(t)


def test_height_bound():
    rng = random.Random(11)
    for n in (1, 2, 3, 7, 20, 64, 200, 511):
        t = build(list(range(n)), rng)
        check_rbt(t)
        assert rbt_height(t) <= 2 * math.log2(n + 1)


def test_join3_allocates_proportional_to_height_difference():
    rng = random.Random(21)
    worst = 0.0
    for _ in range(300):
        nl = rng.randrange(0, 400)
        nr = rng.randrange(0, 400)
        l = build(list(range(nl)), rng)
        r = build(list(range(nl + 1, nl + 1 + nr)), rng)
        diff = abs((l.bh if l else 0) - (r.bh if r else 0))
        rec = StepRecorder()
        join3(l, nl, r, rec)
        assert rec.rbt_nodes_built <= 8 * diff + 12
        worst = max(worst, rec.rbt_nodes_built / (diff + 1))
    assert worst > 0


def test_pivotless_join_allocates_logarithmically():
    rng = random.Random(22)
    for _ in range(200):
        nl = rng.randrange(1, 600)
        nr = rng.randrange(1, 600)
        l = build(list(range(nl)), rng)
        r = build(list(range(nl, nl + nr)), rng)
        rec = StepRecorder()
        join(l, r, rec)
        n = nl + nr
        assert rec.rbt_nodes_built <= 24 * (math.log2(n + 1) + 2)


def test_queries_against_sorted_oracle():
    rng = random.Random(0xB0A)
    for _ in range(150):
        n = rng.randrange(0, 80)
        keys = sorted(rng.sample(range(200), n))
        t = build(keys, rng)
        for j in (1, 2, n // 2 + 1, n, n + 1, n + 5):
            if j < 1:
                continue
            assert rbt_select(t, j) == (keys[j - 1] if 1 <= j <= n else ABSENT)
        for _ in range(10):
            x = rng.randrange(-5, 205)
            assert rbt_rank(t, x) == sum(1 for k in keys if k <= x)
            assert rbt_rank_strict(t, x) == sum(1 for k in keys if k < x)
            assert rbt_find(t, x) == (x in keys)
        a = rng.randrange(-5, 205)
        b = rng.randrange(a, 206)
        assert rbt_range_collect(t, a, b) == [k for k in keys if a <= k <= b]


def test_select_depth_bound():
    rng = random.Random(33)
    for n in (1, 5, 33, 128, 500):
        t = build(list(range(n)), rng)
        for j in (1, n // 2 + 1, n):
            rec = StepRecorder()
            rbt_select(t, j, rec)
            assert rec.version_visits <= 2 * math.log2(n + 1) + 2


def test_select_rejects_nonpositive_rank():
    with pytest.raises(ValueError):
        rbt_select(singleton(1), 0)


def test_find_on_empty():
    assert rbt_find(None, 3) is False
    assert rbt_select(None, 1) is ABSENT


def test_validator_catches_red_red():
    bad = RbNode(2, RbNode(1, None, None, True), None, True)
    with pytest.raises(AssertionError, match="red-red"):
        check_rbt(bad)


def test_validator_catches_black_height_mismatch():
    bad = RbNode(5, singleton(1), None, False)
    with pytest.raises(AssertionError, match="black-height"):
        check_rbt(bad)


def test_validator_catches_order_violation():
    bad = RbNode(1, singleton(8), singleton(9), False)
    with pytest.raises(AssertionError, match="order"):
        check_rbt(bad)


def test_combine_snaps_short_circuits_and_stays_fresh():
    e1, e2 = empty_snap(), empty_snap()
    assert e1 is not e2 and e1.sum == 0
    both_empty = combine_snaps(e1, e2)
    assert both_empty.sum == 0 and both_empty is not e1 and both_empty is not e2

    s = singleton_snap(4)
    reused = combine_snaps(s, empty_snap())
    assert reused.root is s.root and reused is not s  # tree shared, wrapper fresh
    reused2 = combine_snaps(empty_snap(), s)
    assert reused2.root is s.root and reused2 is not reused

    rec = StepRecorder()
    joined = combine_snaps(singleton_snap(1), singleton_snap(2), rec)
    assert joined.sum == 2 and list(rbt_inorder(joined.root)) == [1, 2]
    assert rec.joins == 1 and rec.max_joined_size == 2
