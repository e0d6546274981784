"""Single-threaded reference implementations used as ground truth.

A sorted-list set, a multiset, and a key-value map answering every query the
concurrent structures support, by brute force. Query conventions live here
and only here: ``rank`` is inclusive (number of elements <= x), predecessor
is strict (largest element < x), successor is strict (smallest element > x),
``select`` is 1-based and returns :data:`~augtrees.core.ABSENT` when the rank
exceeds the size.

Oracles are deterministic and pure given (state, operation); ``clone`` and
``state_key`` exist so the linearizability checker can branch and memoize.
"""

from __future__ import annotations

import bisect
from typing import Any, Callable, Dict, List, Tuple

from .core import ABSENT


class SetOracle:
    """Sorted-list set of orderable keys."""

    kind = "set"

    def __init__(self) -> None:
        self._keys: List[Any] = []
        self._dispatch: Dict[str, Callable] = {
            "insert": self.insert,
            "delete": self.delete,
            "find": self.find,
            "select": self.select,
            "rank": self.rank,
            "predecessor": self.predecessor,
            "successor": self.successor,
            "minimum": self.minimum,
            "maximum": self.maximum,
            "range_count": self.range_count,
            "range_collect": self.range_collect,
            "size": self.size,
        }

    def apply(self, op: str, args: Tuple = ()) -> Any:
        return self._dispatch[op](*args)

    def clone(self) -> "SetOracle":
        other = type(self)()
        other._keys = list(self._keys)
        return other

    def state_key(self) -> Tuple:
        return tuple(self._keys)

    def content(self) -> List[Any]:
        """Sorted contents (mirrors the structures' test convenience)."""
        return list(self._keys)

    # -- updates ---------------------------------------------------------

    def insert(self, k: Any) -> bool:
        i = bisect.bisect_left(self._keys, k)
        if i < len(self._keys) and self._keys[i] == k:
            return False
        self._keys.insert(i, k)
        return True

    def delete(self, k: Any) -> bool:
        i = bisect.bisect_left(self._keys, k)
        if i < len(self._keys) and self._keys[i] == k:
            del self._keys[i]
            return True
        return False

    # -- queries ---------------------------------------------------------

    def find(self, k: Any) -> bool:
        i = bisect.bisect_left(self._keys, k)
        return i < len(self._keys) and self._keys[i] == k

    def select(self, j: int) -> Any:
        if j < 1:
            raise ValueError(f"select rank must be >= 1, got {j}")
        if j > len(self._keys):
            return ABSENT
        return self._keys[j - 1]

    def rank(self, x: Any) -> int:
        return bisect.bisect_right(self._keys, x)

    def predecessor(self, x: Any) -> Any:
        i = bisect.bisect_left(self._keys, x)
        return self._keys[i - 1] if i > 0 else ABSENT

    def successor(self, x: Any) -> Any:
        i = bisect.bisect_right(self._keys, x)
        return self._keys[i] if i < len(self._keys) else ABSENT

    def minimum(self) -> Any:
        return self._keys[0] if self._keys else ABSENT

    def maximum(self) -> Any:
        return self._keys[-1] if self._keys else ABSENT

    def range_count(self, x1: Any, x2: Any) -> int:
        if x1 > x2:
            raise ValueError(f"empty range: {x1} > {x2}")
        return bisect.bisect_right(self._keys, x2) - bisect.bisect_left(self._keys, x1)

    def range_collect(self, x1: Any, x2: Any) -> List[Any]:
        if x1 > x2:
            raise ValueError(f"empty range: {x1} > {x2}")
        lo = bisect.bisect_left(self._keys, x1)
        hi = bisect.bisect_right(self._keys, x2)
        return self._keys[lo:hi]

    def size(self) -> int:
        return len(self._keys)


class MultisetOracle(SetOracle):
    """Sorted list with duplicates; insert always succeeds."""

    kind = "multiset"

    def __init__(self) -> None:
        super().__init__()
        self._dispatch["count"] = self.count

    def insert(self, k: Any) -> bool:
        bisect.insort(self._keys, k)
        return True

    def delete(self, k: Any) -> bool:
        i = bisect.bisect_left(self._keys, k)
        if i < len(self._keys) and self._keys[i] == k:
            del self._keys[i]
            return True
        return False

    def count(self, k: Any) -> int:
        return bisect.bisect_right(self._keys, k) - bisect.bisect_left(self._keys, k)


class KvOracle(SetOracle):
    """Sorted-key map; ``insert`` is insert-if-absent, ``replace`` upserts."""

    kind = "kv"

    def __init__(self) -> None:
        super().__init__()
        self._vals: Dict[Any, Any] = {}
        self._dispatch["replace"] = self.replace
        self._dispatch["get"] = self.get

    def clone(self) -> "KvOracle":
        other = type(self)()
        other._keys = list(self._keys)
        other._vals = dict(self._vals)
        return other

    def state_key(self) -> Tuple:
        return tuple((k, self._vals[k]) for k in self._keys)

    def insert(self, k: Any, v: Any) -> bool:
        if not super().insert(k):
            return False
        self._vals[k] = v
        return True

    def delete(self, k: Any) -> bool:
        if not super().delete(k):
            return False
        del self._vals[k]
        return True

    def replace(self, k: Any, v: Any) -> Any:
        old = self._vals.get(k, ABSENT)
        if old is ABSENT:
            super().insert(k)
        self._vals[k] = v
        return old

    def get(self, k: Any) -> Any:
        return self._vals.get(k, ABSENT)


def make_oracle(kind: str) -> SetOracle:
    """Oracle matching a structure kind (``set``/``trie``/``bst`` share one)."""
    if kind in ("set", "trie", "trie-fast", "bst", "bst-fast"):
        return SetOracle()
    if kind == "multiset":
        return MultisetOracle()
    if kind == "kv":
        return KvOracle()
    raise ValueError(f"unknown oracle kind: {kind}")
