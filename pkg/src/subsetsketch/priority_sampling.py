"""Entry-wise universal sketch: shared-randomness priority sampling per set.

Every arriving entry (i, v_i) gets one uniform u_i derived from the seed, a
weight w_i = |v_i|**p, and the priority w_i / u_i.  Each member set keeps the
k+1 entries of highest priority it contains; the (k+1)-st acts as the
threshold tau_s and the other k estimate the set's weight mass as
sum(max(w_i, tau_s)).  Because all sets draw on the same u_i, a coordinate is
stored once no matter how many top lists reference it, and the total store
obeys the same neededness bound as the budget-bounded sampler with budget
k + 1.

Each coordinate may arrive at most once: repeated arrivals are a model
violation, not an accumulation.
"""

from __future__ import annotations

import heapq
import math
import statistics

from .errors import DuplicateEntry, QueryNotInSystem
from .rng import counter_hash, derive_seed
from .setsystem import IntervalSystem

_U_SCALE = 2.0 ** -53


def sample_budget(epsilon: float) -> int:
    """Per-set budget k giving (1 +- epsilon) relative error with failure
    probability at most 1/((k-1) * epsilon**2) <= 0.1 by Chebyshev."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    return math.ceil(10.0 / (epsilon * epsilon)) + 1


class PrioritySketch:
    def __init__(self, system, p: float, k: int, seed: int) -> None:
        if isinstance(system, IntervalSystem):
            system = system.to_explicit()
        if k < 1:
            raise ValueError("sample budget k must be >= 1")
        if p < 0:
            raise ValueError("norm exponent p must be >= 0")
        self.system = system
        self.p = float(p)
        self.k = int(k)
        self.seed = seed
        # the variance bound needs the u_i to behave independently; a pairwise
        # family measurably inflates Var(E), so use full 64-bit mixing
        self._ubase = derive_seed(seed, "uniform")
        # per set: min-heap of (priority, -coord, coord, weight); ties on
        # priority displace the larger coordinate first
        self._heaps: list[list[tuple[float, int, int, float]]] = [
            [] for _ in range(system.num_sets)
        ]
        self._refs: dict[int, int] = {}
        self._seen: set[int] = set()

    def uniform_for(self, coord: int) -> float:
        """The shared uniform u_i in (0, 1), a pure function of (seed, i);
        53-bit precision, with 0 remapped to the smallest positive value."""
        u = (counter_hash(self._ubase, coord) >> 11) * _U_SCALE
        return u if u > 0.0 else _U_SCALE

    def update(self, coord: int, value: float) -> None:
        coord = int(coord)
        if not 1 <= coord <= self.system.n:
            raise ValueError(
                f"coordinate {coord} outside universe [1, {self.system.n}]")
        if coord in self._seen:
            raise DuplicateEntry(
                f"coordinate {coord} already delivered; entries arrive once")
        self._seen.add(coord)
        value = float(value)
        if value == 0.0:
            return
        if not math.isfinite(value):
            raise ValueError(f"entry value must be finite, got {value!r}")
        ids = self.system.ids_containing(coord)
        if not ids:
            return
        w = 1.0 if self.p == 0.0 else abs(value) ** self.p
        q = w / self.uniform_for(coord)
        entry = (q, -coord, coord, w)
        for j in ids:
            heap = self._heaps[j]
            if len(heap) <= self.k:
                heapq.heappush(heap, entry)
                self._refs[coord] = self._refs.get(coord, 0) + 1
            elif entry[:2] > heap[0][:2]:
                displaced = heapq.heapreplace(heap, entry)
                self._refs[coord] = self._refs.get(coord, 0) + 1
                self._unref(displaced[2])

    def _unref(self, coord: int) -> None:
        r = self._refs[coord] - 1
        if r:
            self._refs[coord] = r
        else:
            del self._refs[coord]

    # -- queries ---------------------------------------------------------------

    def threshold(self, q) -> float:
        """tau_s: the (k+1)-st highest priority in s, or 0 below capacity."""
        heap = self._heaps[self._resolve(q)]
        return heap[0][0] if len(heap) > self.k else 0.0

    def query(self, q) -> float:
        """(1 +- eps) estimate of (sum_{i in s} |v_i|^p)^(1/p) (the sum
        itself for p = 0)."""
        heap = self._heaps[self._resolve(q)]
        if len(heap) > self.k:
            tau = heap[0][0]
            est = sum(max(e[3], tau) for e in heap[1:])
        else:
            est = sum(e[3] for e in heap)
        if self.p == 0.0 or est == 0.0:
            return float(est)
        return est ** (1.0 / self.p)

    def _resolve(self, q) -> int:
        sid = self.system.member_id(q)
        if sid is None:
            raise QueryNotInSystem(f"not a member set: {q!r}")
        return sid

    @property
    def size(self) -> int:
        return len(self._refs)

    def stored_coordinates(self) -> list[int]:
        return sorted(self._refs)


class PriorityEnsemble:
    """Median over independent sketches, enough replicas that the per-set
    failure probability union-bounds over every member set."""

    def __init__(self, system, p: float, epsilon: float, seed: int, *,
                 k: int | None = None, replicas: int | None = None) -> None:
        if isinstance(system, IntervalSystem):
            system = system.to_explicit()
        if k is None:
            k = sample_budget(epsilon)
        if replicas is None:
            replicas = math.ceil(3 * math.log2(max(system.num_sets, 2)))
            if replicas % 2 == 0:
                replicas += 1
        if replicas < 1:
            raise ValueError("replicas must be >= 1")
        self.replicas = replicas
        self.epsilon = float(epsilon)
        self.sketches = [
            PrioritySketch(system, p, k, derive_seed(seed, "replica", i))
            for i in range(replicas)
        ]

    def update(self, coord: int, value: float) -> None:
        for s in self.sketches:
            s.update(coord, value)

    def query(self, q) -> float:
        return statistics.median(s.query(q) for s in self.sketches)
