"""Wait-free augmented static trie over the universe {0..N-1}.

The mutable skeleton is implicit: slot ``i`` of the array covers a fixed key
interval (slot 1 is the root, slot ``i`` has children ``2i`` and ``2i+1``,
and the leaf slot for key ``k`` is ``N+k``), so parents and children are
index arithmetic and the only shared state is one version slot per node.

An update CASes a fresh leaf version into the key's leaf slot and then walks
the ancestor path performing a *double refresh* at each slot: read the slot,
read both children, build the combined version, one CAS; on failure, once
more. If both CASes at a node fail, two competing refreshes completed there
back-to-back, and the second one read the children after the first installed
— so it carried this update's information upward. No retries, no helping
records: a set-variant update does at most 1 + 2*log2(N) CAS attempts total.

Queries read the root slot once and descend that immutable snapshot
(:mod:`augtrees.queries`). Internal versions carry the first key of their
right half so the descent is plain key routing; initial versions are built
bottom-up per slot (each adds one version on top of its children's) so even
never-refreshed regions route correctly.

Variants: :class:`MultisetTrie` retries the leaf CAS on contention (counts
instead of bits, lock-free); :class:`KvTrie` stores values on leaves, with
single-CAS :meth:`~KvTrie.replace` that deliberately does not retry;
:class:`FastTrie` stores a red-black snapshot per slot instead of a version
tree, turning refresh into a join and queries into O(log |S|) descents.
"""

from __future__ import annotations

from typing import Any, List, Optional

from . import queries
from .core import ABSENT, AtomicRef, Version, internal_version, leaf_version
from .instrument import StepRecorder, point
from .rbt import (
    Snap,
    SnapQueries,
    check_rbt,
    combine_snaps,
    empty_snap,
    rbt_inorder,
    singleton_snap,
)


class Trie:
    """Wait-free concurrent set of keys 0..n-1 with order-statistic queries.

    The instance is the shareable handle: hand the same object to every
    thread. ``policy`` optionally adds an auxiliary summary to each version
    (see :mod:`augtrees.core`).
    """

    kind = "set"

    def __init__(self, n: int, policy: Any = None) -> None:
        if n < 2 or n & (n - 1):
            raise ValueError(f"universe size must be a power of two >= 2, got {n}")
        self.n = n
        self.log_n = n.bit_length() - 1
        self._policy = policy
        # routing key of internal slot i = first key of its right half
        mids = [0] * n
        for i in range(1, n):
            depth = i.bit_length() - 1
            width = n >> depth
            lo = (i - (1 << depth)) * width
            mids[i] = lo + width // 2
        self._mids = mids
        self._slots: List[Optional[AtomicRef]] = self._make_initial_slots()

    def _make_initial_slots(self) -> List[Optional[AtomicRef]]:
        n = self.n
        slots: List[Optional[AtomicRef]] = [None] * (2 * n)
        for i in range(n, 2 * n):
            slots[i] = AtomicRef(leaf_version(self._policy, 0, key=i - n))
        for i in range(n - 1, 0, -1):
            slots[i] = AtomicRef(
                internal_version(
                    self._policy, slots[2 * i].value, slots[2 * i + 1].value,
                    key=self._mids[i],
                )
            )
        return slots

    def handle(self) -> "Trie":
        """The structure is its own thread-safe handle; nothing is copied."""
        return self

    # -- version construction hooks (overridden by the fast variant) ------

    def _leaf(self, k: int, count: int, rec: Optional[StepRecorder], val: Any = None) -> Any:
        if rec is not None:
            rec.versions_built += 1
        return leaf_version(self._policy, count, key=k, val=val)

    def _combine(self, vl: Any, vr: Any, key: Any, rec: Optional[StepRecorder]) -> Any:
        if rec is not None:
            rec.versions_built += 1
        return internal_version(self._policy, vl, vr, key=key)

    # -- updates -----------------------------------------------------------

    def _check_key(self, k: int) -> None:
        if not 0 <= k < self.n:
            raise ValueError(f"key {k} outside universe 0..{self.n - 1}")

    def insert(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        """Add k; True iff this operation changed membership. Wait-free."""
        self._check_key(k)
        slot = self._slots[self.n + k]
        point("leaf-read")
        old = slot.value
        if rec is not None:
            rec.slot_reads += 1
        if old.sum != 0:
            ok = False
        else:
            new = self._leaf(k, 1, rec)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
        self._propagate((self.n + k) >> 1, rec)
        return ok

    def delete(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        """Remove k; True iff this operation removed it. Wait-free."""
        self._check_key(k)
        slot = self._slots[self.n + k]
        point("leaf-read")
        old = slot.value
        if rec is not None:
            rec.slot_reads += 1
        if old.sum == 0:
            ok = False
        else:
            new = self._leaf(k, 0, rec)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
        self._propagate((self.n + k) >> 1, rec)
        return ok

    def _refresh(self, i: int, rec: Optional[StepRecorder] = None) -> bool:
        """One attempt to pull children's information into slot i."""
        slot = self._slots[i]
        point("refresh-old")
        old = slot.value
        point("refresh-children")
        vl = self._slots[2 * i].value
        vr = self._slots[2 * i + 1].value
        if rec is not None:
            rec.slot_reads += 3
        new = self._combine(vl, vr, self._mids[i], rec)
        point("refresh-cas")
        ok = slot.cas(old, new)
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok
        return ok

    def _propagate(self, i: int, rec: Optional[StepRecorder] = None) -> None:
        """Double-refresh every slot from i up to the root."""
        while i >= 1:
            if not self._refresh(i, rec):
                self._refresh(i, rec)
            i >>= 1

    # -- queries (one snapshot each) ---------------------------------------

    def snapshot(self) -> Any:
        """Current root version: an atomic snapshot of the whole set."""
        point("snap")
        return self._slots[1].value

    def _snap(self, rec: Optional[StepRecorder]) -> Any:
        if rec is not None:
            rec.slot_reads += 1
        return self.snapshot()

    def size(self, rec: Optional[StepRecorder] = None) -> int:
        v = self._snap(rec)
        if rec is not None:
            rec.version_visits += 1
        return v.sum

    def find(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        return queries.snapshot_find(self._snap(rec), k, rec)

    def select(self, j: int, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_select(self._snap(rec), j, rec)

    def rank(self, x: int, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x)
        return queries.snapshot_rank(self._snap(rec), x, rec)

    def predecessor(self, x: int, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        return queries.snapshot_predecessor(self._snap(rec), x, rec)

    def successor(self, x: int, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(x)
        return queries.snapshot_successor(self._snap(rec), x, rec)

    def minimum(self, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_minimum(self._snap(rec), rec)

    def maximum(self, rec: Optional[StepRecorder] = None) -> Any:
        return queries.snapshot_maximum(self._snap(rec), rec)

    def range_count(self, x1: int, x2: int, rec: Optional[StepRecorder] = None) -> int:
        self._check_key(x1), self._check_key(x2)
        return queries.snapshot_range_count(self._snap(rec), x1, x2, rec)

    def range_collect(self, x1: int, x2: int, rec: Optional[StepRecorder] = None) -> List[Any]:
        self._check_key(x1), self._check_key(x2)
        return queries.snapshot_range_collect(self._snap(rec), x1, x2, rec)

    # -- whole-structure validation (tests and invariant sweeps) -----------

    def check_invariants(self) -> None:
        """Verify shape and sums of every slot's version tree.

        For every slot the version tree must be a perfect binary tree of the
        slot's height, every internal version's sum must equal its children's
        total (and likewise the auxiliary summary under a policy), and leaf
        counts must be legal for the variant. Raises AssertionError.
        """
        verified = {}  # id(version) -> height, holds refs for the sweep

        def walk(v: Any, height: int, slot: int) -> None:
            got = verified.get(id(v))
            if got is not None:
                if got[0] != height:
                    raise AssertionError(
                        f"slot {slot}: version shared at mismatched heights"
                    )
                return
            if height == 0:
                if v.left is not None or v.right is not None:
                    raise AssertionError(f"slot {slot}: leaf version has children")
                if not self._leaf_count_ok(v.sum):
                    raise AssertionError(f"slot {slot}: illegal leaf count {v.sum}")
            else:
                if v.left is None or v.right is None:
                    raise AssertionError(
                        f"slot {slot}: internal version missing a child at height {height}"
                    )
                if v.sum != v.left.sum + v.right.sum:
                    raise AssertionError(
                        f"slot {slot}: sum {v.sum} != {v.left.sum} + {v.right.sum}"
                    )
                if self._policy is not None:
                    want = self._policy.combine(v.left.aux, v.right.aux)
                    if v.aux != want:
                        raise AssertionError(f"slot {slot}: aux {v.aux!r} != {want!r}")
                walk(v.left, height - 1, slot)
                walk(v.right, height - 1, slot)
            verified[id(v)] = (height, v)

        for i in range(1, 2 * self.n):
            height = self.log_n + 1 - i.bit_length()
            walk(self._slots[i].value, height, i)

    def _leaf_count_ok(self, count: int) -> bool:
        return count in (0, 1)

    def content(self) -> List[Any]:
        """Sorted elements of the current snapshot (test convenience)."""
        v = self.snapshot()
        return queries.snapshot_range_collect(v, 0, self.n - 1)


class MultisetTrie(Trie):
    """Trie over multisets: leaf sums are multiplicities; updates retry.

    The leaf CAS loops until it wins (lock-free, not wait-free: a loop
    iteration fails only because a competing update succeeded).
    """

    kind = "multiset"

    def _leaf_count_ok(self, count: int) -> bool:
        return count >= 0

    def insert(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        slot = self._slots[self.n + k]
        while True:
            point("leaf-read")
            old = slot.value
            if rec is not None:
                rec.slot_reads += 1
            new = self._leaf(k, old.sum + 1, rec)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                break
        self._propagate((self.n + k) >> 1, rec)
        return True

    def delete(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        slot = self._slots[self.n + k]
        while True:
            point("leaf-read")
            old = slot.value
            if rec is not None:
                rec.slot_reads += 1
            if old.sum == 0:
                ok = False
                break
            new = self._leaf(k, old.sum - 1, rec)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                break
        self._propagate((self.n + k) >> 1, rec)
        return ok

    def count(self, k: int, rec: Optional[StepRecorder] = None) -> int:
        """Multiplicity of k in the current snapshot."""
        self._check_key(k)
        return queries.snapshot_range_count(self._snap(rec), k, k, rec)


class KvTrie(Trie):
    """Key-value trie: leaf versions carry the mapped value.

    ``insert``/``delete`` retry their leaf CAS (like the multiset) so their
    boolean results always linearize even when racing ``replace``.
    ``replace`` itself is the single-CAS operation: it never retries, and
    when its CAS loses it linearizes as a no-op read of the value it
    returns, just before the competing update.
    """

    kind = "kv"

    def insert(self, k: int, v: Any, rec: Optional[StepRecorder] = None) -> bool:
        """Map k to v iff k is absent; True iff the mapping was added."""
        self._check_key(k)
        slot = self._slots[self.n + k]
        while True:
            point("leaf-read")
            old = slot.value
            if rec is not None:
                rec.slot_reads += 1
            if old.sum != 0:
                ok = False
                break
            new = self._leaf(k, 1, rec, val=v)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                break
        self._propagate((self.n + k) >> 1, rec)
        return ok

    def delete(self, k: int, rec: Optional[StepRecorder] = None) -> bool:
        self._check_key(k)
        slot = self._slots[self.n + k]
        while True:
            point("leaf-read")
            old = slot.value
            if rec is not None:
                rec.slot_reads += 1
            if old.sum == 0:
                ok = False
                break
            new = self._leaf(k, 0, rec)
            point("leaf-cas")
            ok = slot.cas(old, new)
            if rec is not None:
                rec.cas_attempts += 1
                rec.cas_success += ok
            if ok:
                break
        self._propagate((self.n + k) >> 1, rec)
        return ok

    def replace(self, k: int, v: Any, rec: Optional[StepRecorder] = None) -> Any:
        """Map k to v unconditionally; returns the value read before the CAS
        (ABSENT when k was unmapped). Single CAS, no retry."""
        return self._replace(k, v, rec)[0]

    def _replace(self, k: int, v: Any, rec: Optional[StepRecorder] = None) -> tuple:
        """(old value, whether the CAS installed) — harness entry point."""
        self._check_key(k)
        slot = self._slots[self.n + k]
        point("leaf-read")
        old = slot.value
        if rec is not None:
            rec.slot_reads += 1
        old_val = old.val if old.sum > 0 else ABSENT
        new = self._leaf(k, 1, rec, val=v)
        point("leaf-cas")
        ok = slot.cas(old, new)
        if rec is not None:
            rec.cas_attempts += 1
            rec.cas_success += ok
        self._propagate((self.n + k) >> 1, rec)
        return old_val, ok

    def get(self, k: int, rec: Optional[StepRecorder] = None) -> Any:
        self._check_key(k)
        return queries.snapshot_get(self._snap(rec), k, rec)


class FastTrie(SnapQueries, Trie):
    """Set trie whose slots hold red-black snapshots instead of version trees.

    Refresh combines children with a join (or an O(1) short-circuit when one
    side is empty), so queries on the root snapshot cost O(log |S|) rather
    than O(log N). Every installed value is a fresh :class:`~augtrees.rbt.Snap`
    wrapper, preserving the identity-CAS discipline even when a child's tree
    is reused whole.
    """

    kind = "set"

    def __init__(self, n: int, policy: Any = None) -> None:
        if policy is not None:
            raise ValueError("the fast variant does not support summary policies")
        super().__init__(n, None)

    def _make_initial_slots(self) -> List[Optional[AtomicRef]]:
        empty = empty_snap()  # plain init stores may share; CASes may not
        return [None] + [AtomicRef(empty) for _ in range(2 * self.n - 1)]

    def _leaf(self, k: int, count: int, rec: Optional[StepRecorder], val: Any = None) -> Snap:
        return singleton_snap(k, rec) if count else empty_snap()

    def _combine(self, vl: Snap, vr: Snap, key: Any, rec: Optional[StepRecorder]) -> Snap:
        return combine_snaps(vl, vr, rec)

    def check_invariants(self) -> None:
        """Each slot's snapshot is a valid RBT confined to the slot's interval."""
        for i in range(1, 2 * self.n):
            snap = self._slots[i].value
            if snap.sum != (snap.root.sum if snap.root is not None else 0):
                raise AssertionError(f"slot {i}: snap sum disagrees with tree")
            check_rbt(snap.root)
            if snap.root is not None:
                depth = i.bit_length() - 1
                width = self.n >> depth
                lo = (i - (1 << depth)) * width
                keys = list(rbt_inorder(snap.root))
                if keys[0] < lo or keys[-1] >= lo + width:
                    raise AssertionError(f"slot {i}: keys escape interval")
