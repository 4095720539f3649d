"""A dynamic event universe that grows as outcomes are observed.

Classical probability fixes the outcome set up front; here the set of known
outcomes grows monotonically with observations, and an outcome that has
never been observed is not assigned a probability at all -- not even zero.
Queries return the distinct UNDEFINED sentinel instead.

For known outcomes the estimator is additive smoothing with an explicit
escape slot: p(o) = (count(o) + alpha) / (total + alpha*|known| + alpha),
where the final alpha in the denominator reserves "unseen mass" for whatever
has not happened yet. With alpha = 0 this degrades to maximum likelihood
and the unseen mass is zero.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from typing import Iterable, Union


class _Undefined:
    """Sentinel for outcomes outside the known universe; not a number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()

Estimate = Union[float, _Undefined]


class EventUniverse:
    """Append-only observation timeline with time-indexed known sets.

    Observations arrive with non-decreasing integer times (ties allowed);
    out-of-order appends are rejected so the universe at any historical t
    stays well-defined. Re-observing a known outcome only bumps counts.
    """

    def __init__(self, alpha: float = 1.0):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        self.alpha = alpha
        self.timeline: list[tuple[int, str]] = []
        self._first_seen: dict[str, int] = {}
        self._first_seen_times: list[int] = []   # sorted, for |known(t)|
        self._all_times: list[int] = []          # sorted == append order
        self._times_by_outcome: dict[str, list[int]] = {}
        self.counts: dict[str, int] = {}

    def observe(self, t: int, outcome: str) -> "EventUniverse":
        if t < 0:
            raise ValueError("time must be a non-negative integer")
        if not outcome:
            raise ValueError("outcome must be non-empty")
        if self.timeline and t < self.timeline[-1][0]:
            raise ValueError(
                f"out-of-order observation: t={t} precedes last t={self.timeline[-1][0]}")
        self.timeline.append((t, outcome))
        self._all_times.append(t)
        if outcome not in self._first_seen:
            self._first_seen[outcome] = t
            insort(self._first_seen_times, t)
            self._times_by_outcome[outcome] = []
        self._times_by_outcome[outcome].append(t)
        self.counts[outcome] = self.counts.get(outcome, 0) + 1
        return self

    def universe_at(self, t: int) -> set[str]:
        """Outcomes observed at any time <= t; empty before the first one."""
        return {o for o, first in self._first_seen.items() if first <= t}

    def known_size_at(self, t: int) -> int:
        return bisect_right(self._first_seen_times, t)

    def total_at(self, t: int) -> int:
        return bisect_right(self._all_times, t)

    def estimate(self, t: int, outcome: str) -> Estimate:
        """Smoothed probability of a known outcome as of time t, or
        UNDEFINED for an outcome outside the universe at t."""
        first = self._first_seen.get(outcome)
        if first is None or first > t:
            return UNDEFINED
        count = bisect_right(self._times_by_outcome[outcome], t)
        total = self.total_at(t)
        known = self.known_size_at(t)
        denom = total + self.alpha * known + self.alpha
        return (count + self.alpha) / denom

    def unseen_mass(self, t: int) -> float:
        """Escape mass reserved for outcomes not yet observed at t."""
        total = self.total_at(t)
        known = self.known_size_at(t)
        denom = total + self.alpha * known + self.alpha
        if denom == 0:
            return 0.0
        return self.alpha / denom

    def replay(self) -> "EventUniverse":
        """Rebuild from the timeline; the result matches this universe."""
        return EventUniverse.from_timeline(self.timeline, alpha=self.alpha)

    @classmethod
    def from_timeline(cls, records: Iterable[tuple[int, str]],
                      alpha: float = 1.0) -> "EventUniverse":
        universe = cls(alpha=alpha)
        for t, outcome in records:
            universe.observe(int(t), outcome)
        return universe


def dump_timeline(universe: EventUniverse) -> Iterable[str]:
    """`t TAB outcome` append-log lines."""
    for t, outcome in universe.timeline:
        yield f"{t}\t{outcome}"


def load_timeline(lines: Iterable[str], alpha: float = 1.0) -> EventUniverse:
    records = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"timeline line {lineno}: expected `t TAB outcome`")
        records.append((int(parts[0]), parts[1]))
    return EventUniverse.from_timeline(records, alpha=alpha)
