"""Lock-free leaf-oriented BST with wait-free augmented snapshot queries.

Set members live in the leaves; internal nodes only route (left subtree keys
strictly below the node key, right subtree at or above it). Two sentinel keys
above every real key pin the shape: the root is an internal node keyed by the
larger sentinel and its right child never changes, so the root node itself is
permanent and its version slot is the query snapshot for the whole set.

Updates coordinate through each internal node's ``update`` field, which holds
a freshly allocated ``(state, info)`` pair — clean, insert-flagged,
delete-flagged, or marked. Flagging a node is a lease on its child pointers:
an insert flags the leaf's parent, swings the child to a pre-built three-node
replacement, and unflags; a delete flags the grandparent, marks the parent
(permanently — a marked node's update and children are frozen), swings the
grandparent's child to the leaf's sibling, and unflags. Any thread that runs
into a flag first *helps* the owning operation to completion using the info
record, so a stalled thread never blocks others (lock-freedom). Because every
installed pair is fresh and compared by identity, a helper's stale CAS simply
fails; no operation is applied twice.

Instead of restarting at the root after a failed attempt, an update keeps a
thread-local stack of the internal nodes it visited (each paired with the
update value read *before* reading that node's child — the order the flag
CAS relies on) and backtracks: marked nodes are popped and their deletions
helped; the search resumes at the first unmarked node, which is guaranteed
still reachable.

Versions mirror the node tree. Every node is born with an exact version;
after the child CAS the updater walks its stack from the deepest node to the
root, double-refreshing each (see :mod:`augtrees.trie` for why two failed
refreshes mean someone else carried the information). Refresh here must pair
a child's version with the child pointer it came from, so it re-reads the
child pointer after reading the version and retries on a change — each retry
is chargeable to a concurrent child swap. Refreshing a node that has since
been unlinked is harmless: its frozen children reproduce the same content.

:class:`FastBst` swaps the per-node version trees for red-black snapshots
(joined on refresh), making queries O(log |S|) instead of O(tree height).
"""

from __future__ import annotations

from typing import Any, List, Optional, Tuple

from . import queries
from .core import (
    INF1,
    INF2,
    AtomicRef,
    internal_version,
    is_sentinel,
    leaf_version,
)
from .instrument import StepRecorder, point
from .rbt import SnapQueries, check_rbt, combine_snaps, empty_snap, rbt_inorder, singleton_snap

# update-field states
CLEAN, IFLAG, DFLAG, MARK = 0, 1, 2, 3


class _Leaf:
    """Immutable leaf: key plus its version, fixed at construction."""

    __slots__ = ("key", "version")
    leaf = True

    def __init__(self, key: Any, version: Any) -> None:
        self.key = key
        self.version = version

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<leaf {self.key!r}>"


class _Internal:
    """Routing node; children, update state, and version slot are atomic."""

    __slots__ = ("key", "left", "right", "update", "version")
    leaf = False

    def __init__(self, key: Any, left: Any, right: Any, version: Any) -> None:
        self.key = key
        self.left = AtomicRef(left)
        self.right = AtomicRef(right)
        self.update = AtomicRef((CLEAN, None))
        self.version = AtomicRef(version)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<internal {self.key!r}>"


class _IInfo:
    """Pending insert: replace ``leaf`` under ``parent`` by ``new_internal``.

    ``flag`` is the exact (IFLAG, self) pair installed in parent.update, so
    helpers can unflag by identity.
    """

    __slots__ = ("parent", "leaf", "new_internal", "flag")

    def __init__(self, parent: _Internal, leaf: _Leaf, new_internal: _Internal) -> None:
        self.parent = parent
        self.leaf = leaf
        self.new_internal = new_internal
        self.flag: Optional[tuple] = None


class _DInfo:
    """Pending delete: unlink ``leaf`` and ``parent``, splicing the sibling.

    ``pupdate`` is the clean pair read from parent.update during the search
    (the mark CAS expects it); ``flag`` is the (DFLAG, self) pair on gp.
    """

    __slots__ = ("gp", "parent", "leaf", "pupdate", "flag")

    def __init__(
        self, gp: _Internal, parent: _Internal, leaf: _Leaf, pupdate: tuple
    ) -> None:
        self.gp = gp
        self.parent = parent
        self.leaf = leaf
        self.pupdate = pupdate
        self.flag: Optional[tuple] = None


class Bst:
    """Lock-free concurrent set of orderable keys with snapshot queries.

    The instance is the shareable handle. ``policy`` optionally adds an
    auxiliary summary channel to every version.
    """

    kind = "set"

    def __init__(self, policy: Any = None) -> None:
        self._policy = policy
        left = _Leaf(INF1, self._leaf_version(INF1, None))
        right = _Leaf(INF2, self._leaf_version(INF2, None))
        version = self._combine(left.version, right.version, INF2, None)
        self._root = _Internal(INF2, left, right, version)

    def handle(self) -> "Bst":
        """The structure is its own thread-safe handle; nothing is copied."""
        return self

    # -- version construction hooks (overridden by the fast variant) ------

    def _leaf_version(self, key: Any, rec: Optional[StepRecorder]) -> Any:
        if rec is not None:
            rec.versions_built += 1
        count = 0 if is_sentinel(key) else 1
        return leaf_version(self._policy, count, key=key)

    def _combine(self, vl: Any, vr: Any, key: Any, rec: Optional[StepRecorder]) -> Any:
        if rec is not None:
            rec.versions_built += 1
        return internal_version(self._policy, vl, vr, key=key)

    # -- updates -----------------------------------------------------------

    @staticmethod
    def _check_key(k: Any) -> None:
        if is_sentinel(k):
            raise ValueError("sentinel keys are reserved for internal structure")

    def _read_update(self, node: _Internal, rec: Optional[StepRecorder]) -> tuple:
        u = node.update.value
        if rec is not None:
            rec.slot_reads += 1
        return u

    def _search(self, k: Any, stack: List[tuple], rec: Optional[StepRecorder]) -> _Leaf:
        """Descend from the stack's top node to a leaf, pushing internals.

        Each pushed entry pairs the node with an update value read before the
        node's child pointer — the order the later flag CAS depends on.
        """
        node = stack[-1][0]
        while True:
            point("search-child")
            child = node.left.value if k < node.key else node.right.value
            if rec is not None:
                rec.slot_reads += 1
            if child.leaf:
                return child
            point("search-update")
            cu = child.update.value
            if rec is not None:
                rec.slot_reads += 1
            stack.append((child, cu))
            node = child

    def _backtrack(self, stack: List[tuple], rec: Optional[StepRecorder]) -> None:
        """Pop and help marked nodes; leave the first unmarked node on top
        with a freshly read update value."""
        while True:
            node, _ = stack[-1]
            u = node.update.value
            if rec is not None:
                rec.slot_reads += 1
            if u[0] == MARK:
                stack.pop()
                if rec is not None:
                    rec.backtrack_pops += 1
                self._help_marked(u[1], rec)
            else:
                # the root is never marked, so the stack cannot empty out
                stack[-1] = (node, u)
                return

    def _make_replacement(self, k: Any, l: _Leaf, rec: Optional[StepRecorder]) -> _Internal:
        """Three fresh nodes of an insert, versions exact from birth."""
        new_leaf = _Leaf(k, self._leaf_version(k, rec))
        sibling = _Leaf(l.key, self._leaf_version(l.key, rec))
        if k < l.key:
            left, right, ikey = new_leaf, sibling, l.key
        else:  # equal keys are impossible here; greater routes right
            left, right, ikey = sibling, new_leaf, k
        version = self._combine(left.version, right.version, ikey, rec)
        return _Internal(ikey, left, right, version)

    def insert(self, k: Any, rec: Optional[StepRecorder] = None) -> bool:
        """Add k; True iff this operation changed membership. Lock-free."""
        self._check_key(k)
        stack = [(self._root, self._read_update(self._root, rec))]
        while True:
            l = self._search(k, stack, rec)
            p, pup = stack[-1]
            if l.key == k:
                self._propagate(stack, rec)
                return False
            if pup[0] != CLEAN:
                self._help(pup, rec)
                self._backtrack(stack, rec)
                continue
            op = _IInfo(p, l, self._make_replacement(k, l, rec))
            tup = (IFLAG, op)
            op.flag = tup
            point("iflag-cas")
            ok = p.update.cas(pup, tup)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                self._help_insert(op, rec)
                self._propagate(stack, rec)
                return True
            self._help(self._read_update(p, rec), rec)
            self._backtrack(stack, rec)

    def delete(self, k: Any, rec: Optional[StepRecorder] = None) -> bool:
        """Remove k; True iff this operation removed it. Lock-free."""
        self._check_key(k)
        stack = [(self._root, self._read_update(self._root, rec))]
        while True:
            l = self._search(k, stack, rec)
            if l.key != k:
                self._propagate(stack, rec)
                return False
            # a real leaf always has a grandparent: the larger sentinel's
            # leaf occupies the root's right side, the smaller sentinel's
            # leaf is in every left spine, so a lone real leaf under the
            # root cannot occur
            p, pup = stack.pop()
            gp, gpup = stack[-1]
            if gpup[0] != CLEAN:
                self._help(gpup, rec)
                self._backtrack(stack, rec)
                continue
            if pup[0] != CLEAN:
                self._help(pup, rec)
                self._backtrack(stack, rec)
                continue
            op = _DInfo(gp, p, l, pup)
            tup = (DFLAG, op)
            op.flag = tup
            point("dflag-cas")
            ok = gp.update.cas(gpup, tup)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                if self._help_delete(op, rec):
                    self._propagate(stack, rec)
                    return True
                self._backtrack(stack, rec)
            else:
                self._help(self._read_update(gp, rec), rec)
                self._backtrack(stack, rec)

    # -- helping -----------------------------------------------------------

    def _help(self, u: tuple, rec: Optional[StepRecorder]) -> None:
        """Complete (or abort) the operation currently installed in u."""
        state = u[0]
        if state == CLEAN:
            return
        if rec is not None:
            rec.helps += 1
        if state == IFLAG:
            self._help_insert(u[1], rec)
        elif state == MARK:
            self._help_marked(u[1], rec)
        else:
            self._help_delete(u[1], rec)

    def _cas_child(
        self, parent: _Internal, old: Any, new: Any, rec: Optional[StepRecorder]
    ) -> bool:
        """Swing the parent's child pointer on the side the new node keys to."""
        side = parent.left if new.key < parent.key else parent.right
        ok = side.cas(old, new)
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok
        return ok

    def _help_insert(self, op: _IInfo, rec: Optional[StepRecorder]) -> None:
        point("ichild-cas")
        self._cas_child(op.parent, op.leaf, op.new_internal, rec)
        point("iunflag-cas")
        ok = op.parent.update.cas(op.flag, (CLEAN, op))
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok

    def _help_delete(self, op: _DInfo, rec: Optional[StepRecorder]) -> bool:
        """Try to mark the parent; on success finish the splice (True), on
        interference help the obstructor, release the grandparent, and report
        the attempt aborted (False)."""
        point("mark-cas")
        ok = op.parent.update.cas(op.pupdate, (MARK, op))
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok
        cur = self._read_update(op.parent, rec)
        if ok or (cur[0] == MARK and cur[1] is op):
            self._help_marked(op, rec)
            return True
        if cur[0] != CLEAN:
            self._help(cur, rec)
        point("dunflag-cas")
        ok2 = op.gp.update.cas(op.flag, (CLEAN, op))
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok2
        return False

    def _help_marked(self, op: _DInfo, rec: Optional[StepRecorder]) -> None:
        # the parent is marked, so its children are frozen; find the sibling
        point("sibling-read")
        pl = op.parent.left.value
        if rec is not None:
            rec.slot_reads += 1
        if pl is op.leaf:
            sibling = op.parent.right.value
            if rec is not None:
                rec.slot_reads += 1
        else:
            sibling = pl
        point("dchild-cas")
        self._cas_child(op.gp, op.parent, sibling, rec)
        point("dunflag-cas")
        ok = op.gp.update.cas(op.flag, (CLEAN, op))
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok

    # -- version maintenance -------------------------------------------------

    def _refresh(self, x: _Internal, rec: Optional[StepRecorder] = None) -> bool:
        """One attempt to pull children's information into x's version."""
        point("refresh-old")
        old = x.version.value
        if rec is not None:
            rec.slot_reads += 1
        point("refresh-children")
        while True:  # pair the left child with a version it really held
            xl = x.left.value
            vl = xl.version if xl.leaf else xl.version.value
            if rec is not None:
                rec.slot_reads += 3
            if x.left.value is xl:
                break
            if rec is not None:
                rec.child_rereads += 1
        while True:
            xr = x.right.value
            vr = xr.version if xr.leaf else xr.version.value
            if rec is not None:
                rec.slot_reads += 3
            if x.right.value is xr:
                break
            if rec is not None:
                rec.child_rereads += 1
        new = self._combine(vl, vr, x.key, rec)
        point("refresh-cas")
        ok = x.version.cas(old, new)
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok
        return ok

    def _propagate(self, stack: List[tuple], rec: Optional[StepRecorder] = None) -> None:
        """Double-refresh every stacked node, deepest first."""
        while stack:
            x, _ = stack.pop()
            if not self._refresh(x, rec):
                self._refresh(x, rec)

    # -- queries (one snapshot each) ---------------------------------------

    def snapshot(self) -> Any:
        """Current root version: an atomic snapshot of the whole set."""
        point("snap")
        return self._root.version.value

    def _snap(self, rec: Optional[StepRecorder]) -> Any:
        if rec is not None:
            rec.slot_reads += 1
        return self.snapshot()

    def size(self, rec: Optional[StepRecorder] = None) -> int:
        v = self._snap(rec)
        if rec is not None:
            rec.version_visits += 1
        return v.sum

    def find(self, k: Any, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        return queries.snapshot_find(self._snap(rec), k, rec)

    def select(self, j: int, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_select(self._snap(rec), j, rec)

    def rank(self, x: Any, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x)
        return queries.snapshot_rank(self._snap(rec), x, rec)

    def predecessor(self, x: Any, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        return queries.snapshot_predecessor(self._snap(rec), x, rec)

    def successor(self, x: Any, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        return queries.snapshot_successor(self._snap(rec), x, rec)

    def minimum(self, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_minimum(self._snap(rec), rec)

    def maximum(self, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_maximum(self._snap(rec), rec)

    def range_count(self, x1: Any, x2: Any, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x1), self._check_key(x2)
        return queries.snapshot_range_count(self._snap(rec), x1, x2, rec)

    def range_collect(self, x1: Any, x2: Any, rec: Optional[StepRecorder] = None) -> List[Any]:
        self._check_key(x1), self._check_key(x2)
        return queries.snapshot_range_collect(self._snap(rec), x1, x2, rec)

    def content(self) -> List[Any]:
        """Sorted elements of the current snapshot (test convenience)."""
        out: List[Any] = []

        def walk(v: Any) -> None:
            if v.left is None:
                if v.sum:
                    out.extend([v.key] * v.sum)
                return
            if v.sum == 0:
                return
            walk(v.left)
            walk(v.right)

        walk(self.snapshot())
        return out

    # -- whole-structure validation (tests and invariant sweeps) -----------

    def check_invariants(self) -> None:
        """Quiescent full check: node tree, key bounds, exact versions.

        Valid only with no updates in flight (sequential tests, drained
        stress runs); mid-update the versions legitimately lag the skeleton.
        Raises AssertionError naming the violated property.
        """
        root = self._root
        if root.key is not INF2:
            raise AssertionError("root key must be the larger sentinel")
        r = root.right.value
        if not (r.leaf and r.key is INF2):
            raise AssertionError("root's right child must be the larger sentinel leaf")

        def node_version(node: Any) -> Any:
            return node.version if node.leaf else node.version.value

        def walk(node: Any, lo: Any, hi: Any) -> int:
            if node.leaf:
                want = 0 if is_sentinel(node.key) else 1
                if node.version.sum != want:
                    raise AssertionError(f"leaf {node.key!r} has sum {node.version.sum}")
                if lo is not None and node.key < lo:
                    raise AssertionError(f"leaf {node.key!r} below its interval")
                if hi is not None and not (node.key < hi):
                    raise AssertionError(f"leaf {node.key!r} above its interval")
                return node.version.sum
            u = node.update.value
            if u[0] != CLEAN:
                raise AssertionError("update in flight during quiescent check")
            left, right = node.left.value, node.right.value
            v = node.version.value
            if v.left is not node_version(left) or v.right is not node_version(right):
                raise AssertionError(f"version of {node.key!r} lags its children")
            total = walk(left, lo, node.key) + walk(right, node.key, hi)
            if self._version_sum(v) != total:
                raise AssertionError(f"version sum of {node.key!r} is stale")
            return total

        walk(root, None, None)

    @staticmethod
    def _version_sum(v: Any) -> int:
        if v.left is None:
            return v.sum
        if v.sum != v.left.sum + v.right.sum:
            raise AssertionError("version sum does not equal its children's total")
        return v.sum


def check_version_tree(v: Any) -> int:
    """Concurrent-safe snapshot check: the version tree is a leaf-oriented
    BST whose internal sums equal their children's totals and whose leaves
    carry 1 for a real key, 0 for a sentinel. Returns the real-key count.
    Safe mid-update because versions are immutable once installed.
    """

    def walk(u: Any, lo: Any, hi: Any) -> int:
        if u.left is None:
            if is_sentinel(u.key):
                if u.sum != 0:
                    raise AssertionError("sentinel leaf with nonzero sum")
            elif u.sum != 1:
                raise AssertionError(f"leaf {u.key!r} has sum {u.sum}")
            if lo is not None and u.key < lo:
                raise AssertionError(f"leaf {u.key!r} below its interval")
            if hi is not None and not (u.key < hi):
                raise AssertionError(f"leaf {u.key!r} above its interval")
            return u.sum
        s = walk(u.left, lo, u.key) + walk(u.right, u.key, hi)
        if u.sum != s:
            raise AssertionError(f"sum mismatch at routing key {u.key!r}")
        return s

    return walk(v, None, None)


class FastBst(SnapQueries, Bst):
    """BST whose version slots hold red-black snapshots joined on refresh.

    Queries run in O(log |S|) independent of the node tree's height. Summary
    policies are not supported (the snapshots carry only keys and counts).
    """

    kind = "set"

    def __init__(self, policy: Any = None) -> None:
        if policy is not None:
            raise ValueError("the fast variant does not support summary policies")
        super().__init__(None)

    def _leaf_version(self, key: Any, rec: Optional[StepRecorder]) -> Any:
        return empty_snap() if is_sentinel(key) else singleton_snap(key, rec)

    def _combine(self, vl: Any, vr: Any, key: Any, rec: Optional[StepRecorder]) -> Any:
        return combine_snaps(vl, vr, rec)

    def check_invariants(self) -> None:
        """Quiescent check: every reachable internal's snapshot is a valid
        red-black tree holding exactly the live keys of its subtree."""

        def walk(node: Any, lo: Any, hi: Any) -> List[Any]:
            if node.leaf:
                if is_sentinel(node.key):
                    if node.version.sum != 0:
                        raise AssertionError("sentinel leaf with nonzero count")
                    return []
                if lo is not None and node.key < lo:
                    raise AssertionError(f"leaf {node.key!r} below its interval")
                if hi is not None and not (node.key < hi):
                    raise AssertionError(f"leaf {node.key!r} above its interval")
                return [node.key]
            keys = walk(node.left.value, lo, node.key) + walk(
                node.right.value, node.key, hi
            )
            snap = node.version.value
            check_rbt(snap.root)
            got = list(rbt_inorder(snap.root))
            if got != keys or snap.sum != len(keys):
                raise AssertionError(
                    f"snapshot of {node.key!r} holds {got}, skeleton holds {keys}"
                )
            return keys

        walk(self._root, None, None)
