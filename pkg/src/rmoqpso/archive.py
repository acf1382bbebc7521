"""Bounded external archive of feasible non-dominated solutions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleCandidate, MixedBenchmarks
from .objectives import ObjectiveVector, dominance_matrix


@dataclass
class ArchiveEntry:
    position: np.ndarray
    objective: ObjectiveVector


def crowding_distance(values: np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance of each row; boundary rows get ``inf``."""
    V = np.asarray(values, dtype=float)
    size, k = V.shape
    dist = np.zeros(size)
    if size <= 2:
        return np.full(size, np.inf)
    for j in range(k):
        order = np.argsort(V[:, j], kind="stable")
        col = V[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span <= 0 or not np.isfinite(span):
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


@dataclass
class ParetoArchive:
    capacity: int = 200
    entries: list = field(default_factory=list)
    _cache: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def objectives(self) -> list:
        return [e.objective for e in self.entries]

    def positions(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 0))
        return np.array([e.position for e in self.entries])

    def _values(self) -> np.ndarray:
        if self._cache is None or len(self._cache) != len(self.entries):
            self._cache = np.array([e.objective.values() for e in self.entries]).reshape(-1, 5)
        return self._cache

    def insert(self, position, objective: ObjectiveVector) -> bool:
        """Add a candidate unless something already dominates it.

        Returns True when the candidate was kept.
        """
        if not objective.feasible:
            raise InfeasibleCandidate("only feasible candidates can be archived")
        if self.entries and self.entries[0].objective.tail_kind != objective.tail_kind:
            raise MixedBenchmarks("archive holds a different benchmark")
        v = objective.values()
        V = self._values()
        if V.size:
            le = np.all(V <= v, axis=1)
            if np.any(le & (np.any(V < v, axis=1) | np.all(V == v, axis=1))):
                return False
            beaten = np.all(v <= V, axis=1) & np.any(v < V, axis=1)
            if beaten.any():
                keep = np.flatnonzero(~beaten)
                self.entries = [self.entries[i] for i in keep]
                V = V[keep]
        self.entries.append(ArchiveEntry(np.array(position, dtype=float).reshape(-1), objective))
        self._cache = np.vstack([V, v[None, :]])
        if len(self.entries) > self.capacity:
            self._evict()
        return True

    def _evict(self):
        dist = crowding_distance(self._values())
        drop = int(np.argmin(dist))
        del self.entries[drop]
        self._cache = np.delete(self._cache, drop, axis=0)

    def check(self) -> bool:
        """True when no archived pair dominates one another."""
        if len(self.entries) < 2:
            return True
        D = dominance_matrix(np.array([e.objective.values() for e in self.entries]))
        return not D.any()

    def to_csv(self, state_count: int, input_count: int, tail_label: str = "tail", header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        cols = [f"Q{i + 1}" for i in range(state_count)] + [f"R{j + 1}" for j in range(input_count)]
        cols += ["J", "OS", "Tr", "Ts", tail_label]
        writer.writerow(cols)
        for e in self.entries:
            o = e.objective
            writer.writerow([repr(float(v)) for v in e.position] + [repr(float(v)) for v in o.values()])
        return buf.getvalue()
