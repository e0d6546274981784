"""Immutable size-augmented red-black trees with a non-destructive join.

These trees are the snapshot payload of the fast-query structure variants:
every slot holds a :class:`Snap` wrapping an immutable tree, and a refresh
combines two child snapshots with :func:`join` instead of allocating a
version node. Keys live in internal nodes as well as leaves (node-oriented),
``sum`` is the subtree key count, and every node additionally caches its
black-height so joins can align the two spines in O(1) per step.

``join`` is the pivotless form: it splits the maximum key out of the left
tree and uses it as the pivot for a three-way join that walks the taller
tree's spine by black-height, path-copying as it goes (the inputs are never
mutated; only O(log) nodes are freshly allocated). The returned root is
always normalized to black.

Freshness: a slot never stores a bare tree. Reusing a child's root when the
sibling is empty is correct for the tree itself but would let one reference
be installed twice in the same slot, breaking the identity-CAS discipline;
:class:`Snap` is the fresh one-field indirection cell that restores it.
"""

from __future__ import annotations

from typing import Any, Iterator, List, Optional, Tuple

from .core import ABSENT
from .instrument import StepRecorder


class RbNode:
    """Immutable red-black node; ``bh`` is the black-height of this subtree."""

    __slots__ = ("key", "left", "right", "red", "sum", "bh")

    def __init__(
        self,
        key: Any,
        left: Optional["RbNode"],
        right: Optional["RbNode"],
        red: bool,
    ) -> None:
        self.key = key
        self.left = left
        self.right = right
        self.red = red
        self.sum = 1 + (left.sum if left is not None else 0) + (
            right.sum if right is not None else 0
        )
        self.bh = (0 if red else 1) + (left.bh if left is not None else 0)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        color = "R" if self.red else "B"
        return f"<RbNode {self.key!r} {color} sum={self.sum}>"


def _mk(
    key: Any,
    left: Optional[RbNode],
    right: Optional[RbNode],
    red: bool,
    rec: Optional[StepRecorder],
) -> RbNode:
    if rec is not None:
        rec.rbt_nodes_built += 1
    return RbNode(key, left, right, red)


def singleton(key: Any, rec: Optional[StepRecorder] = None) -> RbNode:
    """A one-key tree: black, sum 1."""
    return _mk(key, None, None, False, rec)


def _bh(t: Optional[RbNode]) -> int:
    return t.bh if t is not None else 0


def _blacken(t: RbNode, rec: Optional[StepRecorder]) -> RbNode:
    return t if not t.red else _mk(t.key, t.left, t.right, False, rec)


def _join_right(
    l: Optional[RbNode], k: Any, r: Optional[RbNode], rec: Optional[StepRecorder]
) -> RbNode:
    """Attach ``r`` below the right spine of ``l`` (requires bh(l) >= bh(r))."""
    if _bh(l) == _bh(r) and (l is None or not l.red):
        return _mk(k, l, r, True, rec)
    # l is not None here: bh(l) > bh(r) >= 0 or l is red.
    mid = _join_right(l.right, k, r, rec)
    node = _mk(l.key, l.left, mid, l.red, rec)
    if not node.red and mid.red and mid.right is not None and mid.right.red:
        # Right-right red violation under a black node: rotate left.
        return _mk(
            mid.key,
            _mk(node.key, node.left, mid.left, False, rec),
            _blacken(mid.right, rec),
            True,
            rec,
        )
    return node


def _join_left(
    l: Optional[RbNode], k: Any, r: Optional[RbNode], rec: Optional[StepRecorder]
) -> RbNode:
    """Mirror image: attach ``l`` below the left spine of ``r``."""
    if _bh(r) == _bh(l) and (r is None or not r.red):
        return _mk(k, l, r, True, rec)
    mid = _join_left(l, k, r.left, rec)
    node = _mk(r.key, mid, r.right, r.red, rec)
    if not node.red and mid.red and mid.left is not None and mid.left.red:
        return _mk(
            mid.key,
            _blacken(mid.left, rec),
            _mk(node.key, mid.right, node.right, False, rec),
            True,
            rec,
        )
    return node


def join3(
    l: Optional[RbNode], k: Any, r: Optional[RbNode], rec: Optional[StepRecorder] = None
) -> RbNode:
    """Join ``l``, pivot key ``k``, and ``r`` (all keys in l < k < all in r)."""
    if _bh(l) >= _bh(r):
        t = _join_right(l, k, r, rec)
    else:
        t = _join_left(l, k, r, rec)
    return _blacken(t, rec)


def _split_last(t: RbNode, rec: Optional[StepRecorder]) -> Tuple[Optional[RbNode], Any]:
    """Remove the maximum key: returns (remaining tree, that key)."""
    if t.right is None:
        return t.left, t.key
    rest, k = _split_last(t.right, rec)
    return join3(t.left, t.key, rest, rec), k


def join(l: RbNode, r: RbNode, rec: Optional[StepRecorder] = None) -> RbNode:
    """Pivotless join of two nonempty trees with all keys in l < all in r."""
    rest, k = _split_last(l, rec)
    return join3(rest, k, r, rec)


class Snap:
    """Fresh indirection cell around a tree root; the unit a slot stores.

    ``root is None`` means the empty set (sum 0). Allocating one of these per
    install is what keeps every CASed value distinct even when the underlying
    tree is shared or reused.
    """

    __slots__ = ("root", "sum")

    def __init__(self, root: Optional[RbNode]) -> None:
        self.root = root
        self.sum = root.sum if root is not None else 0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<Snap sum={self.sum}>"


def empty_snap() -> Snap:
    return Snap(None)


def singleton_snap(key: Any, rec: Optional[StepRecorder] = None) -> Snap:
    return Snap(singleton(key, rec))


def combine_snaps(vl: Snap, vr: Snap, rec: Optional[StepRecorder] = None) -> Snap:
    """One refresh step of the fast variants.

    An empty side short-circuits to (a fresh wrapper around) the other side's
    tree; otherwise the sides are joined. Left keys all precede right keys by
    construction of the hosts, so the pivotless join applies.
    """
    if vl.sum == 0:
        return Snap(vr.root)
    if vr.sum == 0:
        return Snap(vl.root)
    root = join(vl.root, vr.root, rec)
    if rec is not None:
        rec.joins += 1
        if root.sum > rec.max_joined_size:
            rec.max_joined_size = root.sum
    return Snap(root)


# -- read-only queries ----------------------------------------------------


def rbt_find(t: Optional[RbNode], k: Any, rec: Optional[StepRecorder] = None) -> bool:
    while t is not None:
        if rec is not None:
            rec.version_visits += 1
        if k == t.key:
            return True
        t = t.left if k < t.key else t.right
    return False


def rbt_select(t: Optional[RbNode], j: int, rec: Optional[StepRecorder] = None) -> Any:
    """1-based j-th smallest key, or ABSENT when fewer than j keys exist."""
    if j < 1:
        raise ValueError(f"select rank must be >= 1, got {j}")
    if t is None or t.sum < j:
        return ABSENT
    while True:
        if rec is not None:
            rec.version_visits += 1
        left_sum = t.left.sum if t.left is not None else 0
        if j <= left_sum:
            t = t.left
        elif j == left_sum + 1:
            return t.key
        else:
            j -= left_sum + 1
            t = t.right


def rbt_rank(t: Optional[RbNode], x: Any, rec: Optional[StepRecorder] = None) -> int:
    """Number of keys <= x."""
    acc = 0
    while t is not None:
        if rec is not None:
            rec.version_visits += 1
        if x < t.key:
            t = t.left
        else:
            acc += (t.left.sum if t.left is not None else 0) + 1
            t = t.right
    return acc


def rbt_rank_strict(t: Optional[RbNode], x: Any, rec: Optional[StepRecorder] = None) -> int:
    """Number of keys < x."""
    acc = 0
    while t is not None:
        if rec is not None:
            rec.version_visits += 1
        if t.key < x:
            acc += (t.left.sum if t.left is not None else 0) + 1
            t = t.right
        else:
            t = t.left
    return acc


def rbt_range_collect(
    t: Optional[RbNode], x1: Any, x2: Any, rec: Optional[StepRecorder] = None
) -> List[Any]:
    if x1 > x2:
        raise ValueError(f"empty range: {x1} > {x2}")
    out: List[Any] = []

    def walk(node: Optional[RbNode]) -> None:
        if node is None:
            return
        if rec is not None:
            rec.version_visits += 1
        if x1 < node.key:
            walk(node.left)
        if x1 <= node.key <= x2:
            out.append(node.key)
        if node.key < x2:
            walk(node.right)

    walk(t)
    return out


def rbt_inorder(t: Optional[RbNode]) -> Iterator[Any]:
    stack: List[RbNode] = []
    while t is not None or stack:
        while t is not None:
            stack.append(t)
            t = t.left
        t = stack.pop()
        yield t.key
        t = t.right


def rbt_height(t: Optional[RbNode]) -> int:
    if t is None:
        return 0
    return 1 + max(rbt_height(t.left), rbt_height(t.right))


def check_rbt(t: Optional[RbNode]) -> int:
    """Validate red-black shape, sums, and key order; returns black-height.

    Raises AssertionError naming the violated property.
    """

    def walk(node: Optional[RbNode]) -> Tuple[int, int, Any, Any]:
        # returns (black_height, sum, min_key, max_key)
        if node is None:
            return 0, 0, None, None
        lbh, lsum, lmin, lmax = walk(node.left)
        rbh, rsum, rmin, rmax = walk(node.right)
        if node.red:
            if node.left is not None and node.left.red:
                raise AssertionError(f"red-red violation at {node.key!r} (left)")
            if node.right is not None and node.right.red:
                raise AssertionError(f"red-red violation at {node.key!r} (right)")
        if lbh != rbh:
            raise AssertionError(
                f"black-height mismatch at {node.key!r}: {lbh} vs {rbh}"
            )
        if node.sum != lsum + rsum + 1:
            raise AssertionError(f"sum mismatch at {node.key!r}")
        bh = lbh + (0 if node.red else 1)
        if node.bh != bh:
            raise AssertionError(f"cached black-height wrong at {node.key!r}")
        if lmax is not None and not lmax < node.key:
            raise AssertionError(f"order violation at {node.key!r} (left)")
        if rmin is not None and not node.key < rmin:
            raise AssertionError(f"order violation at {node.key!r} (right)")
        return bh, node.sum, lmin if lmin is not None else node.key, (
            rmax if rmax is not None else node.key
        )

    bh, _, _, _ = walk(t)
    return bh


class SnapQueries:
    """Order-statistic query suite for hosts whose slots hold :class:`Snap`.

    The host supplies ``_snap(rec)`` (read the root slot) and ``_check_key``;
    every query runs against one snapshot's tree in O(log |contents|).
    """

    def size(self, rec: Optional[StepRecorder] = None) -> int:
        snap = self._snap(rec)
        if rec is not None:
            rec.version_visits += 1
        return snap.sum

    def find(self, k: Any, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        return rbt_find(self._snap(rec).root, k, rec)

    def select(self, j: int, rec: Optional[StepRecorder] = None) -> Any:
        return rbt_select(self._snap(rec).root, j, rec)

    def rank(self, x: Any, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x)
        return rbt_rank(self._snap(rec).root, x, rec)

    def predecessor(self, x: Any, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        root = self._snap(rec).root
        r = rbt_rank_strict(root, x, rec)
        return rbt_select(root, r, rec) if r >= 1 else ABSENT

    def successor(self, x: Any, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        root = self._snap(rec).root
        r = rbt_rank(root, x, rec)
        if root is None or r >= root.sum:
            return ABSENT
        return rbt_select(root, r + 1, rec)

    def minimum(self, rec: Optional[StepRecorder] = None) -> Any:
        root = self._snap(rec).root
        return rbt_select(root, 1, rec) if root is not None else ABSENT

    def maximum(self, rec: Optional[StepRecorder] = None) -> Any:
        root = self._snap(rec).root
        return rbt_select(root, root.sum, rec) if root is not None else ABSENT

    def range_count(self, x1: Any, x2: Any, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x1), self._check_key(x2)
        if x1 > x2:
            raise ValueError(f"empty range: {x1} > {x2}")
        root = self._snap(rec).root
        return rbt_rank(root, x2, rec) - rbt_rank_strict(root, x1, rec)

    def range_collect(
        self, x1: Any, x2: Any, rec: Optional[StepRecorder] = None
    ) -> List[Any]:
        self._check_key(x1), self._check_key(x2)
        return rbt_range_collect(self._snap(rec).root, x1, x2, rec)

    def content(self) -> List[Any]:
        """Sorted elements of the current snapshot (test convenience)."""
        return list(rbt_inorder(self._snap(None).root))
