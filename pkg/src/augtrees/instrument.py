"""Test-configuration instrumentation: step counters and cooperative pause
points.

Both facilities are inert by default. An operation only counts steps when the
caller hands it a :class:`StepRecorder`, and the pause hook does nothing
unless the calling thread has a gate installed (the deterministic scheduler
installs one around scripted thread bodies). The hot path therefore pays one
``is not None`` test per counter site and one thread-local read per labeled
action.

Counting convention (used by the step-complexity assertions)
------------------------------------------------------------
A *shared read* is either

* an atomic slot read (``AtomicRef.value`` of a version slot, child pointer,
  or update field), counted as ``slot_reads``; or
* a version/RBT node visited during a snapshot query descent, counted as
  ``version_visits``.

Refresh counts its slot reads (old + two children, plus any consistency
re-reads); constructing the combined version is not a shared read — it only
touches versions already counted. Under this convention ``size()`` performs
exactly 2 shared reads (the root slot, then the root version's ``sum``), and
a trie update performs at most ``6*log2(N) + 1`` — the leaf read, then per
level at most two refresh attempts of three slot reads each. The documented
constant for the ``c * log2(N)`` bound is therefore ``c = 7``.

CAS attempts and successes are counted separately (``cas_attempts``,
``cas_success``); they are not shared reads.
"""

from __future__ import annotations

import threading
from typing import Any, Callable, Optional


class StepRecorder:
    """Per-thread (or per-operation) step counters; merge with :meth:`add`."""

    __slots__ = (
        "slot_reads",
        "version_visits",
        "cas_attempts",
        "cas_success",
        "child_rereads",
        "helps",
        "backtrack_pops",
        "versions_built",
        "rbt_nodes_built",
        "joins",
        "max_joined_size",
    )

    def __init__(self) -> None:
        self.slot_reads = 0
        self.version_visits = 0
        self.cas_attempts = 0
        self.cas_success = 0
        self.child_rereads = 0
        self.helps = 0
        self.backtrack_pops = 0
        self.versions_built = 0
        self.rbt_nodes_built = 0
        self.joins = 0
        self.max_joined_size = 0

    def shared_reads(self) -> int:
        return self.slot_reads + self.version_visits

    def steps(self) -> int:
        """Total steps for amortized-complexity accounting."""
        return self.slot_reads + self.version_visits + self.cas_attempts

    def snapshot_counts(self) -> dict:
        return {name: getattr(self, name) for name in self.__slots__}

    def add(self, other: "StepRecorder") -> None:
        for name in self.__slots__:
            if name == "max_joined_size":
                if other.max_joined_size > self.max_joined_size:
                    self.max_joined_size = other.max_joined_size
            else:
                setattr(self, name, getattr(self, name) + getattr(other, name))

    def diff(self, before: dict) -> dict:
        """Counter deltas since a :meth:`snapshot_counts` call."""
        out = {}
        for name, prior in before.items():
            out[name] = getattr(self, name) - prior
        return out


_tls = threading.local()
_active_gates = 0  # count of installed gates; lets point() skip the TLS read
_active_lock = threading.Lock()


def set_gate(gate: Optional[Any]) -> None:
    """Install (or clear, with ``None``) the calling thread's pause gate."""
    global _active_gates
    had = getattr(_tls, "gate", None) is not None
    _tls.gate = gate
    if (gate is not None) != had:
        with _active_lock:
            _active_gates += 1 if gate is not None else -1


def point(name: str) -> None:
    """Labeled action hook.

    Structure code calls this immediately *before* each named shared-memory
    action; a scheduled thread parks here until the scheduler releases it.
    When no thread anywhere has a gate installed this is a single global
    read; otherwise one thread-local read decides.
    """
    if _active_gates:
        gate = getattr(_tls, "gate", None)
        if gate is not None:
            gate.pause(name)
