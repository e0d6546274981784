"""Shared primitives: atomic slots, immutable version nodes, augmentation
policies, and key-order utilities.

Everything here is either immutable (versions, summaries, sentinels) or a
single mutable cell with CAS semantics (:class:`AtomicRef`). The concurrency
story of the whole package rests on two facts:

* a :class:`Version` never changes after construction, so a reference obtained
  from a slot can be traversed lock-free and describes one consistent state;
* every value a structure CASes into a slot is freshly allocated, so a
  successful compare by identity proves the slot did not change in between
  (there is no ABA problem to begin with).

CPython note: attribute reads are atomic under the GIL, so ``slot.value`` is a
plain load. :meth:`AtomicRef.cas` takes a small per-slot lock to make the
compare-and-set indivisible; lock hand-off orders the writes of the installed
object before any subsequent read that observes it, which is the
acquire/release pairing the algorithms assume. Stronger orderings are
irrelevant here — the GIL already serializes bytecode.

Augmentation: subtree *counts* (the ``sum`` field) are intrinsic — every
structure needs them for order statistics, so they are maintained directly.
An :class:`AugmentationPolicy` adds an auxiliary summary on top (kept in
``Version.aux``): :class:`SumPolicy` mirrors the built-in count (useful for
validating the generic path), :class:`MinMaxPolicy` tracks subtree key ranges.
Structures built without a policy skip the auxiliary channel entirely.
"""

from __future__ import annotations

import threading
from typing import Any, Optional


class _Absent:
    """Unique 'no such element' result; compare with ``is ABSENT``."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "ABSENT"


#: Returned by queries (select, predecessor, ...) when no element qualifies.
ABSENT = _Absent()


class AtomicRef:
    """A single reference cell with plain reads and identity-compared CAS.

    Plain stores happen only before the cell is shared (initialization);
    afterwards all writes go through :meth:`cas`.
    """

    __slots__ = ("value", "_lock")

    def __init__(self, value: Any = None) -> None:
        self.value = value
        self._lock = threading.Lock()

    def cas(self, expected: Any, new: Any) -> bool:
        """Install ``new`` iff the cell still holds ``expected`` (by identity)."""
        with self._lock:
            if self.value is expected:
                self.value = new
                return True
            return False

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"AtomicRef({self.value!r})"


class Version:
    """Immutable node of a version tree.

    ``sum`` counts the present keys below this version (a leaf holds its own
    count: 0, 1, or a multiset multiplicity). ``key`` routes descents: leaf
    versions carry their element's key, internal versions the first key of
    their right half, so one keyed query module serves every host structure.
    ``val`` carries the mapped value in key-value mode. ``aux`` is the
    auxiliary policy summary, ``None`` when no policy is installed.

    Either both children are present (internal version) or neither (leaf).
    """

    __slots__ = ("left", "right", "sum", "key", "val", "aux")

    def __init__(
        self,
        left: Optional["Version"],
        right: Optional["Version"],
        sum_: int,
        key: Any = None,
        val: Any = None,
        aux: Any = None,
    ) -> None:
        self.left = left
        self.right = right
        self.sum = sum_
        self.key = key
        self.val = val
        self.aux = aux

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "leaf" if self.left is None else "node"
        key = f" key={self.key!r}" if self.key is not None else ""
        return f"<Version {kind} sum={self.sum}{key}>"


class SumPolicy:
    """Auxiliary summary that mirrors the intrinsic count.

    Redundant on purpose: running a structure with this policy and asserting
    ``aux == sum`` everywhere validates the generic policy plumbing against
    the built-in counting.
    """

    @staticmethod
    def leaf_summary(key: Any, count: int) -> int:
        return count

    @staticmethod
    def combine(a: int, b: int) -> int:
        return a + b


class MinMaxPolicy:
    """Auxiliary summary tracking the (min, max) key range of a subtree.

    The summary of an empty subtree is ``None`` (identity of ``combine``).
    """

    @staticmethod
    def leaf_summary(key: Any, count: int) -> Optional[tuple]:
        return (key, key) if count else None

    @staticmethod
    def combine(a: Optional[tuple], b: Optional[tuple]) -> Optional[tuple]:
        if a is None:
            return b
        if b is None:
            return a
        lo = a[0] if a[0] <= b[0] else b[0]
        hi = a[1] if a[1] >= b[1] else b[1]
        return (lo, hi)


def leaf_version(policy: Any, count: int, key: Any = None, val: Any = None) -> Version:
    """Build a childless version holding ``count`` copies of ``key``."""
    aux = policy.leaf_summary(key, count) if policy is not None else None
    return Version(None, None, count, key, val, aux)


def internal_version(policy: Any, vl: Version, vr: Version, key: Any = None) -> Version:
    """Combine two child versions into a fresh parent version."""
    aux = policy.combine(vl.aux, vr.aux) if policy is not None else None
    return Version(vl, vr, vl.sum + vr.sum, key, None, aux)


class _SentinelKey:
    """Key strictly greater than every real key; two ranks order the pair.

    The comparison operators cooperate with arbitrary orderable real keys via
    reflected dispatch, so structure code compares keys with plain ``<``.
    """

    __slots__ = ("_rank", "_name")

    def __init__(self, rank: int, name: str) -> None:
        self._rank = rank
        self._name = name

    def __lt__(self, other: Any) -> bool:
        return isinstance(other, _SentinelKey) and self._rank < other._rank

    def __le__(self, other: Any) -> bool:
        return isinstance(other, _SentinelKey) and self._rank <= other._rank

    def __gt__(self, other: Any) -> bool:
        return not isinstance(other, _SentinelKey) or self._rank > other._rank

    def __ge__(self, other: Any) -> bool:
        return not isinstance(other, _SentinelKey) or self._rank >= other._rank

    def __repr__(self) -> str:
        return self._name


#: Sentinel keys: every real key < INF1 < INF2.
INF1 = _SentinelKey(1, "INF1")
INF2 = _SentinelKey(2, "INF2")


def is_sentinel(key: Any) -> bool:
    return isinstance(key, _SentinelKey)
