"""Order-statistic queries over one immutable snapshot version.

Every function takes the snapshot (a :class:`~augtrees.core.Version`) as its
first argument and runs entirely on it: the caller's single root-slot read is
the linearization point of the whole query. The same code serves both hosts
because both route by key — the BST's internal versions carry their node's
routing key, and the trie's internal versions carry the first key of their
right half (a static property of the slot) — with the convention that keys
strictly below the routing key lie left and keys at or above it lie right.

Leaves carry ``sum`` copies of ``key`` (0 or 1 for sets, any count for the
multiset). Sentinel leaves have sum 0 and keys above every real key, so the
arithmetic never needs to special-case them.

When a :class:`~augtrees.instrument.StepRecorder` is supplied, each version
read during the descent counts one ``version_visit`` (see the counting
convention in :mod:`augtrees.instrument`).
"""

from __future__ import annotations

from typing import Any, List, Optional

from .core import ABSENT, Version
from .instrument import StepRecorder


def snapshot_find(v: Version, k: Any, rec: Optional[StepRecorder] = None) -> bool:
    if rec is not None:
        rec.version_visits += 1
    while v.left is not None:
        v = v.left if k < v.key else v.right
        if rec is not None:
            rec.version_visits += 1
    return v.key == k and v.sum > 0


def snapshot_get(v: Version, k: Any, rec: Optional[StepRecorder] = None) -> Any:
    """Value stored at key ``k`` (key-value hosts), or ABSENT."""
    if rec is not None:
        rec.version_visits += 1
    while v.left is not None:
        v = v.left if k < v.key else v.right
        if rec is not None:
            rec.version_visits += 1
    return v.val if (v.key == k and v.sum > 0) else ABSENT


def snapshot_select(v: Version, j: int, rec: Optional[StepRecorder] = None) -> Any:
    """1-based j-th smallest element (with multiplicity), or ABSENT."""
    if j < 1:
        raise ValueError(f"select rank must be >= 1, got {j}")
    if rec is not None:
        rec.version_visits += 1
    if v.sum < j:
        return ABSENT
    while v.left is not None:
        left = v.left
        if rec is not None:
            rec.version_visits += 1
        if left.sum >= j:
            v = left
        else:
            j -= left.sum
            v = v.right
            if rec is not None:
                rec.version_visits += 1
    return v.key


def snapshot_rank(v: Version, x: Any, rec: Optional[StepRecorder] = None) -> int:
    """Number of elements <= x (inclusive rank)."""
    acc = 0
    if rec is not None:
        rec.version_visits += 1
    while v.left is not None:
        if x < v.key:
            v = v.left
        else:
            left = v.left
            if rec is not None:
                rec.version_visits += 1
            acc += left.sum
            v = v.right
        if rec is not None:
            rec.version_visits += 1
    if not x < v.key:
        acc += v.sum
    return acc


def snapshot_rank_strict(v: Version, x: Any, rec: Optional[StepRecorder] = None) -> int:
    """Number of elements < x."""
    acc = 0
    if rec is not None:
        rec.version_visits += 1
    while v.left is not None:
        if x < v.key:
            v = v.left
        else:
            # routing key <= x: the whole left subtree is < routing key <= x
            left = v.left
            if rec is not None:
                rec.version_visits += 1
            acc += left.sum
            v = v.right
        if rec is not None:
            rec.version_visits += 1
    if v.key < x:
        acc += v.sum
    return acc


def snapshot_predecessor(v: Version, x: Any, rec: Optional[StepRecorder] = None) -> Any:
    r = snapshot_rank_strict(v, x, rec)
    return snapshot_select(v, r, rec) if r >= 1 else ABSENT


def snapshot_successor(v: Version, x: Any, rec: Optional[StepRecorder] = None) -> Any:
    r = snapshot_rank(v, x, rec)
    if rec is not None:
        rec.version_visits += 1
    if r >= v.sum:
        return ABSENT
    return snapshot_select(v, r + 1, rec)


def snapshot_minimum(v: Version, rec: Optional[StepRecorder] = None) -> Any:
    if rec is not None:
        rec.version_visits += 1
    if v.sum == 0:
        return ABSENT
    return snapshot_select(v, 1, rec)


def snapshot_maximum(v: Version, rec: Optional[StepRecorder] = None) -> Any:
    if rec is not None:
        rec.version_visits += 1
    if v.sum == 0:
        return ABSENT
    return snapshot_select(v, v.sum, rec)


def snapshot_range_count(
    v: Version, x1: Any, x2: Any, rec: Optional[StepRecorder] = None
) -> int:
    """Number of elements in [x1, x2]: two boundary descents on one snapshot."""
    if x1 > x2:
        raise ValueError(f"empty range: {x1} > {x2}")
    return snapshot_rank(v, x2, rec) - snapshot_rank_strict(v, x1, rec)


def snapshot_range_collect(
    v: Version, x1: Any, x2: Any, rec: Optional[StepRecorder] = None
) -> List[Any]:
    """All elements in [x1, x2], ascending, with multiplicity.

    The recursion prunes on empty subtrees and on subtrees wholly outside the
    range, so the number of versions visited is O(R (log(N/R) + 1)) for R
    collected elements.
    """
    if x1 > x2:
        raise ValueError(f"empty range: {x1} > {x2}")
    out: List[Any] = []

    def walk(u: Version) -> None:
        if rec is not None:
            rec.version_visits += 1
        if u.sum == 0:
            return
        if u.left is None:
            if not u.key < x1 and not x2 < u.key:
                if u.sum == 1:
                    out.append(u.key)
                else:
                    out.extend([u.key] * u.sum)
            return
        if x1 < u.key:
            walk(u.left)
        if not x2 < u.key:
            walk(u.right)

    walk(v)
    return out
