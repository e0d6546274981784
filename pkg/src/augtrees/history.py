"""Concurrent-history recording and the line-delimited dump format.

A history is a sequence of events, two per operation: ``invoke`` just before
the structure call and ``respond`` just after it returns. Sequence numbers
order the events; the interval [invoke.seq, respond.seq] encloses the
operation's real execution, so the real-time partial order derived from a
recorded history is implied by the true one (an order the checker must
respect is never invented, only possibly relaxed).

Dump format: one event per line, ``seq thread kind op args result`` with
space-separated tokens — args comma-joined (``-`` when empty), booleans
``true``/``false``, the no-element marker ``absent``, lists ``[a,b,c]``,
``result`` is ``-`` on invoke lines. Schedule files reuse the same token
syntax. The format is stable so failures can be reproduced from dumps.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Tuple

from .core import ABSENT


@dataclass(frozen=True)
class Event:
    seq: int
    thread: int
    kind: str  # "invoke" | "respond"
    op: str
    args: Tuple[Any, ...]
    result: Any = None  # meaningful on respond events only


@dataclass(frozen=True)
class OpRecord:
    """One completed operation: an invoke/respond pair."""

    thread: int
    op: str
    args: Tuple[Any, ...]
    result: Any
    invoke_seq: int
    respond_seq: int


class HistoryRecorder:
    """Thread-safe event sink for free-running (stress) histories.

    Sequence numbers come from one shared counter; events land in per-call
    list appends. Both are single bytecode operations, so recording adds no
    synchronization beyond what the interpreter already provides.
    """

    def __init__(self) -> None:
        self._seq = itertools.count()
        self._events: List[Event] = []

    def invoke(self, thread: int, op: str, args: Tuple[Any, ...]) -> None:
        self._events.append(Event(next(self._seq), thread, "invoke", op, args))

    def respond(self, thread: int, op: str, args: Tuple[Any, ...], result: Any) -> None:
        self._events.append(Event(next(self._seq), thread, "respond", op, args, result))

    def events(self) -> List[Event]:
        """Events in sequence order (call after the recorded threads join)."""
        return sorted(self._events, key=lambda e: e.seq)


def pair_operations(events: Iterable[Event]) -> List[OpRecord]:
    """Match invoke/respond pairs, validating per-thread alternation.

    Raises ValueError on malformed histories (response without invocation,
    two pending invocations on one thread, or an unmatched trailing invoke).
    """
    pending = {}
    ops: List[OpRecord] = []
    last_seq = -1
    for e in sorted(events, key=lambda ev: ev.seq):
        if e.seq <= last_seq:
            raise ValueError(f"sequence numbers not strictly increasing at {e}")
        last_seq = e.seq
        if e.kind == "invoke":
            if e.thread in pending:
                raise ValueError(f"thread {e.thread} invoked twice without responding")
            pending[e.thread] = e
        elif e.kind == "respond":
            inv = pending.pop(e.thread, None)
            if inv is None or inv.op != e.op or inv.args != e.args:
                raise ValueError(f"response without matching invocation: {e}")
            ops.append(
                OpRecord(e.thread, e.op, e.args, e.result, inv.seq, e.seq)
            )
        else:
            raise ValueError(f"unknown event kind {e.kind!r}")
    if pending:
        raise ValueError(f"unresponded invocations: {sorted(pending)}")
    return ops


# -- token encoding ---------------------------------------------------------


def _token(value: Any) -> str:
    if value is None:
        return "none"
    if value is ABSENT:
        return "absent"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_token(v) for v in value) + "]"
    text = str(value)
    if " " in text or not text:
        raise ValueError(f"token may not contain spaces or be empty: {value!r}")
    return text


def _untoken(text: str) -> Any:
    if text == "none":
        return None
    if text == "absent":
        return ABSENT
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1]
        return [_untoken(t) for t in inner.split(",")] if inner else []
    try:
        return int(text)
    except ValueError:
        return text


def dump_history(events: Iterable[Event]) -> str:
    """Render events as ``seq thread kind op args result`` lines."""
    lines = []
    for e in sorted(events, key=lambda ev: ev.seq):
        args = ",".join(_token(a) for a in e.args) if e.args else "-"
        result = _token(e.result) if e.kind == "respond" else "-"
        lines.append(f"{e.seq} {e.thread} {e.kind} {e.op} {args} {result}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_history(events: Iterable[Event], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_history(events))


def parse_history(text: str) -> List[Event]:
    events = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(" ")
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        seq, thread, kind, op, args, result = parts
        parsed_args: Tuple[Any, ...] = ()
        if args != "-":
            parsed_args = tuple(_untoken(t) for t in args.split(","))
        parsed_result: Optional[Any] = None
        if kind == "respond":
            parsed_result = _untoken(result)
        events.append(Event(int(seq), int(thread), kind, op, parsed_args, parsed_result))
    return events


def load_history(path: str) -> List[Event]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_history(fh.read())
