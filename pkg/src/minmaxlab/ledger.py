"""Query ledger: named, monotone counters for oracle-call accounting.

Every black-box oracle in the pipeline (circuit oracle ``L``, grid
labeling ``lambda``, fixed-point map ``F`` and its Jacobian, objective
``f`` and ``grad_f``) charges its calls to a ledger under its own key.
Ledgers only ever increase, increments are lock-protected so concurrent
evaluations stay linearizable, and per-worker ledgers merge by
coordinate-wise sum.
"""

from __future__ import annotations

import threading
from typing import Dict, Mapping, Optional


class QueryLedger:
    """Monotone counters keyed by oracle name."""

    def __init__(self, counts: Optional[Mapping[str, int]] = None) -> None:
        self._lock = threading.Lock()
        self._counts: Dict[str, int] = {}
        if counts:
            for key, value in counts.items():
                if value < 0:
                    raise ValueError(f"negative count for {key!r}")
                self._counts[key] = int(value)

    def record(self, name: str, amount: int = 1) -> None:
        """Charge `amount` queries to counter `name` (must be >= 0)."""
        if amount < 0:
            raise ValueError("ledger increments must be nonnegative")
        with self._lock:
            self._counts[name] = self._counts.get(name, 0) + amount

    def count(self, name: str) -> int:
        with self._lock:
            return self._counts.get(name, 0)

    def total(self) -> int:
        with self._lock:
            return sum(self._counts.values())

    def snapshot(self) -> Dict[str, int]:
        """Point-in-time copy of all counters."""
        with self._lock:
            return dict(self._counts)

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        """Coordinate-wise sum with another ledger (e.g. per-worker merge)."""
        merged = QueryLedger(self.snapshot())
        for key, value in other.snapshot().items():
            merged.record(key, value)
        return merged

    def __repr__(self) -> str:
        return f"QueryLedger({self.snapshot()!r})"
