"""Sequential behavior of the lock-free BST: shape, membership semantics,
query correctness against the oracle, structural invariants, and step
accounting. Concurrency is exercised in test_concurrency and test_acceptance.
"""

from __future__ import annotations

import math
import random

import pytest

from augtrees.bst import Bst, FastBst, check_version_tree
from augtrees.core import ABSENT, INF1, INF2, MinMaxPolicy, SumPolicy, Version
from augtrees.instrument import StepRecorder
from augtrees.oracle import SetOracle
from augtrees.queries import snapshot_find, snapshot_range_collect


def test_new_tree_shape():
    b = Bst()
    assert b.size() == 0
    assert b._root.key is INF2
    left, right = b._root.left.value, b._root.right.value
    assert left.leaf and left.key is INF1
    assert right.leaf and right.key is INF2
    assert b.find(17) is False
    b.check_invariants()


def test_membership_semantics():
    b = Bst()
    assert b.insert(5) is True
    assert b.insert(5) is False  # second insert of same key
    assert b.find(5) is True
    assert b.delete(5) is True
    assert b.delete(5) is False
    assert b.delete(9) is False  # absent from the start
    assert b.size() == 0
    b.check_invariants()


def test_insert_builds_replacement_with_max_key_routing():
    b = Bst()
    b.insert(5)
    # first insert lands at the smaller sentinel's leaf
    top = b._root.left.value
    assert not top.leaf and top.key is INF1
    assert top.left.value.key == 5 and top.right.value.key is INF1
    b.insert(3)  # 3 < 5: internal keyed by the larger (5), 3 on its left
    mid = top.left.value
    assert mid.key == 5
    assert mid.left.value.key == 3 and mid.right.value.key == 5
    b.insert(7)  # 7 >= 5: routes right of mid, pairs with leaf 5
    low = mid.right.value
    assert low.key == 7
    assert low.left.value.key == 5 and low.right.value.key == 7
    b.check_invariants()


def test_queries_on_small_set():
    b = Bst()
    for k in (3, 5, 6, 7):
        assert b.insert(k) is True
    assert b.size() == 4
    assert b.content() == [3, 5, 6, 7]
    assert b.select(1) == 3
    assert b.select(4) == 7
    assert b.select(5) is ABSENT
    assert b.rank(5) == 2
    assert b.rank(4) == 1
    assert b.minimum() == 3
    assert b.maximum() == 7
    assert b.predecessor(5) == 3
    assert b.successor(7) is ABSENT
    assert b.range_count(4, 7) == 3
    assert b.range_collect(4, 6) == [5, 6]
    b.check_invariants()


def test_sentinel_keys_rejected():
    b = Bst()
    for bad in (INF1, INF2):
        for meth in ("insert", "delete", "find", "rank", "predecessor", "successor"):
            with pytest.raises(ValueError):
                getattr(b, meth)(bad)
    with pytest.raises(ValueError):
        b.select(0)
    with pytest.raises(ValueError):
        b.range_count(5, 2)


def random_op(rng, n):
    op = rng.choice(
        ("insert", "insert", "delete", "find", "select", "rank", "size",
         "minimum", "maximum", "predecessor", "successor",
         "range_count", "range_collect")
    )
    if op == "select":
        return op, (rng.randint(1, n),)
    if op in ("range_count", "range_collect"):
        a, b = rng.randrange(n), rng.randrange(n)
        return op, (min(a, b), max(a, b))
    if op in ("size", "minimum", "maximum"):
        return op, ()
    return op, (rng.randrange(n),)


@pytest.mark.parametrize("cls", [Bst, FastBst])
@pytest.mark.parametrize("n,seed,steps", [(8, 5, 2500), (64, 6, 6000)])
def test_random_ops_match_oracle(cls, n, seed, steps):
    rng = random.Random(seed)
    b, o = cls(), SetOracle()
    for step in range(steps):
        op, args = random_op(rng, n)
        assert getattr(b, op)(*args) == o.apply(op, args), (step, op, args)
    assert b.content() == o.content()
    b.check_invariants()


@pytest.mark.parametrize("cls", [Bst, FastBst])
def test_invariants_hold_after_every_operation(cls):
    rng = random.Random(47)
    b = cls()
    for _ in range(300):
        op, args = random_op(rng, 16)
        getattr(b, op)(*args)
        b.check_invariants()


def test_ascending_inserts_degenerate_shape_still_correct():
    b, o = Bst(), SetOracle()
    for k in range(150):
        b.insert(k)
        o.insert(k)
    assert b.content() == o.content()
    assert b.select(75) == o.select(75)
    assert b.rank(100) == o.rank(100)
    for k in range(0, 150, 3):
        b.delete(k)
        o.delete(k)
    assert b.content() == o.content()
    b.check_invariants()


def test_size_costs_exactly_two_shared_reads():
    for cls in (Bst, FastBst):
        b = cls()
        for k in (2, 9, 14):
            b.insert(k)
        rec = StepRecorder()
        b.size(rec)
        assert rec.shared_reads() == 2


def test_snapshots_are_immutable_under_later_updates():
    b = Bst()
    for k in (3, 7, 11):
        b.insert(k)
    before = b.snapshot()
    b.insert(5)
    b.delete(7)
    assert snapshot_find(before, 5) is False
    assert snapshot_find(before, 7) is True
    assert before.sum == 3
    assert snapshot_range_collect(before, 0, 100) == [3, 7, 11]
    assert b.content() == [3, 5, 11]


def test_quiescent_refresh_returns_true():
    b = Bst()
    b.insert(4)
    assert b._refresh(b._root) is True
    b.check_invariants()


def test_sequential_step_accounting_tracks_path_length():
    # with no contention an update's steps stay within a constant factor of
    # the search path height
    b = Bst()
    rng = random.Random(53)
    keys = list(range(200))
    rng.shuffle(keys)
    for k in keys:
        b.insert(k)

    def height(node):
        if node.leaf:
            return 0
        return 1 + max(height(node.left.value), height(node.right.value))

    h = height(b._root)
    for k in rng.sample(range(250), 40):
        rec = StepRecorder()
        b.insert(k, rec) if rng.random() < 0.5 else b.delete(k, rec)
        assert rec.child_rereads == 0 and rec.helps == 0 and rec.backtrack_pops == 0
        assert rec.steps() <= 40 * (h + 1)


def test_fast_bst_queries_scale_with_contents():
    b = FastBst()
    for k in (10, 500, 900):
        b.insert(k)
    size = b.size()
    rec = StepRecorder()
    assert b.select(2) == 500
    b.select(2, rec)
    assert rec.version_visits <= 2 * math.log2(size + 1) + 2
    rec = StepRecorder()
    b.rank(700, rec)
    assert rec.version_visits <= 2 * math.log2(size + 1) + 2


def test_policies_flow_through_refreshes():
    b = Bst(policy=MinMaxPolicy())
    for k in (9, 2, 5):
        b.insert(k)
    assert b.snapshot().aux == (2, 9)
    b.delete(2)
    assert b.snapshot().aux == (5, 9)
    b.delete(9)
    b.delete(5)
    assert b.snapshot().aux is None
    sp = Bst(policy=SumPolicy())
    for k in (1, 2, 3):
        sp.insert(k)
    assert sp.snapshot().aux == sp.snapshot().sum == 3
    with pytest.raises(ValueError):
        FastBst(policy=SumPolicy())


def test_version_tree_checker_rejects_bad_snapshots():
    def leaf(key, s):
        return Version(None, None, s, key)

    ok = Version(leaf(1, 1), leaf(2, 1), 2, 2)
    assert check_version_tree(ok) == 2
    bad_sum = Version(leaf(1, 1), leaf(2, 1), 3, 2)
    with pytest.raises(AssertionError, match="sum mismatch"):
        check_version_tree(bad_sum)
    bad_order = Version(leaf(5, 1), leaf(2, 1), 2, 2)
    with pytest.raises(AssertionError, match="interval"):
        check_version_tree(bad_order)
    bad_leaf = Version(leaf(1, 1), leaf(2, 4), 5, 2)
    with pytest.raises(AssertionError, match="has sum"):
        check_version_tree(bad_leaf)
    bad_sentinel = Version(leaf(1, 1), leaf(INF1, 1), 2, INF1)
    with pytest.raises(AssertionError, match="sentinel"):
        check_version_tree(bad_sentinel)


def test_bst_is_its_own_handle():
    b = Bst()
    assert b.handle() is b
