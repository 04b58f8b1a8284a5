"""Budget-bounded coordinate sampler over a set system.

The sampler keeps a set H of (sampled) stream coordinates and evicts any
coordinate the declared set system no longer needs: i is needed while some
member set s containing i still has |s . H| <= budget.  Eviction is prompt
and proceeds in ascending coordinate order; since removing a coordinate only
lowers intersection counts, an eviction can never create a new eviction, so
one ascending sweep per insertion settles H.

Guarantees used by everything downstream (with xi the sampling indicators
and v the arrival indicator vector): |H| <= budget * hhdim, and per member
set s either all of supp(xi . s . v) landed in H, or |H . s| >= budget.

Two backends:

* explicit systems: per-set intersection counts, plus for every kept
  coordinate a slack counter (how many of its sets are still at or below
  the budget); slack hitting zero queues the coordinate for eviction.
* interval systems: neededness reduces to windows of the minimum member
  length, since any member interval through i contains such a window
  through i and the window is itself a member.  Window counts live in one
  array updated by slice; eviction scans trigger only when a window
  crosses the budget.

A `project` hook lets a caller run the sampler over a larger virtual
universe whose coordinates map many-to-one onto system coordinates; counts
and neededness are computed on the projected side, H stores virtual
coordinates.
"""

from __future__ import annotations

import heapq

import numpy as np
from scipy.ndimage import minimum_filter1d

from .hashing import PairwiseHash, bernoulli_threshold
from .setsystem import IntervalSystem, SetSystem

_INF = np.iinfo(np.int32).max // 2  # larger than any window count


class BoundedSampler:
    def __init__(
        self,
        system,
        budget: int,
        rate: float,
        seed: int,
        *,
        universe: int | None = None,
        project=None,
        vote_only: bool = False,
    ) -> None:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0.0 < rate <= 1.0:
            raise ValueError("sampling rate must be in (0, 1]")
        if isinstance(system, IntervalSystem):
            self._impl = _IntervalState(system, budget, track_saturation=vote_only)
        elif isinstance(system, SetSystem):
            self._impl = _ExplicitState(system, budget)
        else:
            raise TypeError(f"unsupported system type: {type(system).__name__}")
        self.system = system
        self.budget = budget
        self.rate = rate
        self.seed = seed
        self.universe = system.n if universe is None else universe
        self.project = project
        # vote_only: the caller promises to only ever test intersection counts
        # against thresholds at most the budget.  Eviction preconditions keep a
        # set's count from ever dropping below the budget once reached, so an
        # arrival whose sets are all at the budget cannot flip any such test
        # and is skipped; once every member set is at the budget the sampler
        # freezes.  The subset-or-saturated guarantee survives: a skipped
        # coordinate's sets are all saturated.
        self.vote_only = bool(vote_only)
        self._frozen = False
        self._hash = PairwiseHash(seed, n_max=self.universe)
        self._threshold = bernoulli_threshold(rate)
        self._h: set[int] = set()

    # -- sampling ------------------------------------------------------------

    def sampled(self, coord: int) -> bool:
        """The fixed sampling indicator xi for a coordinate."""
        if self.rate >= 1.0:
            return True
        return self._hash.value(coord) < self._threshold

    @property
    def sampling_coefficients(self) -> tuple[int, int, int]:
        """(a, b, threshold): xi(c) = 1 iff (a*c + b) mod (2^61 - 1) < threshold.

        Lets an owner of many samplers batch the xi decisions itself and
        then call `insert_presampled` on the hits.
        """
        return self._hash.a, self._hash.b, self._threshold

    # -- stream --------------------------------------------------------------

    def update(self, coord: int) -> None:
        coord = int(coord)
        if not 1 <= coord <= self.universe:
            raise ValueError(f"coordinate {coord} outside universe [1, {self.universe}]")
        if self._frozen or coord in self._h or not self.sampled(coord):
            return
        self.insert_presampled(coord)

    def insert_presampled(self, coord: int) -> None:
        """Insert a coordinate whose sampling decision was made externally."""
        if self._frozen or coord in self._h:
            return
        orig = coord if self.project is None else self.project(coord)
        if not self._impl.has_sets(orig):
            return
        if self.vote_only and self._impl.saturated_for(orig):
            return
        self._h.add(coord)
        self._impl.insert(coord, orig)
        for victim in self._impl.drain_evictions():
            self._h.discard(victim)
        if self.vote_only and self._impl.fully_saturated:
            self._frozen = True

    def update_many(self, coords) -> None:
        arr = np.asarray(coords, dtype=np.int64)
        if arr.size == 0:
            return
        if arr.min() < 1 or arr.max() > self.universe:
            bad = arr[(arr < 1) | (arr > self.universe)][0]
            raise ValueError(f"coordinate {bad} outside universe [1, {self.universe}]")
        if self._frozen:
            return
        if self.rate < 1.0:
            keep = self._hash.values(arr.astype(np.uint64)) < np.uint64(self._threshold)
            arr = arr[keep]
        for c in arr:
            self.insert_presampled(int(c))

    def restore_support(self, coords) -> None:
        """Rebuild bookkeeping from a settled support snapshot.

        Counts grow monotonically while replaying a snapshot, so a support
        that was valid when saved triggers no evictions on the way back in;
        anything else is rejected.  Sampling and saturation skips are
        bypassed: the snapshot already made those decisions.
        """
        if self._h:
            raise ValueError("restore requires a fresh sampler")
        for coord in sorted(int(c) for c in coords):
            orig = coord if self.project is None else self.project(coord)
            if not self._impl.has_sets(orig):
                raise ValueError(f"snapshot coordinate {coord} touches no member set")
            self._h.add(coord)
            self._impl.insert(coord, orig)
        if self._impl.drain_evictions():
            raise ValueError("snapshot is not a settled support")
        if self.vote_only and self._impl.fully_saturated:
            self._frozen = True

    # -- queries ---------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self._h)

    def support(self) -> list[int]:
        return sorted(self._h)

    def __contains__(self, coord: int) -> bool:
        return coord in self._h

    def intersection_count(self, q) -> int:
        """|H . s| for a coordinate collection q (projected side)."""
        return self._impl.intersection_count(q)


class _ExplicitState:
    def __init__(self, system: SetSystem, budget: int) -> None:
        self.system = system
        self.budget = budget
        self.counts = [0] * system.num_sets
        self.members: list[set[int]] = [set() for _ in range(system.num_sets)]
        self.slack: dict[int, int] = {}
        self.origin: dict[int, int] = {}
        self._cand: list[int] = []
        self._sat = 0  # member sets whose count has reached the budget

    def has_sets(self, orig: int) -> bool:
        return bool(self.system.ids_containing(orig))

    def saturated_for(self, orig: int) -> bool:
        u = self.budget
        return all(self.counts[j] >= u for j in self.system.ids_containing(orig))

    @property
    def fully_saturated(self) -> bool:
        return self.system.num_sets > 0 and self._sat == self.system.num_sets

    def insert(self, coord: int, orig: int) -> None:
        u = self.budget
        ids = self.system.ids_containing(orig)
        self.origin[coord] = orig
        crossed = []
        for j in ids:
            self.members[j].add(coord)
            self.counts[j] += 1
            if self.counts[j] == u:
                self._sat += 1
            elif self.counts[j] == u + 1:
                crossed.append(j)
        self.slack[coord] = sum(1 for j in ids if self.counts[j] <= u)
        if self.slack[coord] == 0:
            heapq.heappush(self._cand, coord)
        for j in crossed:
            for c in self.members[j]:
                if c == coord:
                    continue
                s = self.slack[c] - 1
                self.slack[c] = s
                if s == 0:
                    heapq.heappush(self._cand, c)

    def drain_evictions(self):
        u = self.budget
        out = []
        while self._cand:
            c = heapq.heappop(self._cand)
            if self.slack.get(c, -1) != 0:
                continue  # stale: already evicted or re-needed
            del self.slack[c]
            orig = self.origin.pop(c)
            for j in self.system.ids_containing(orig):
                self.members[j].discard(c)
                self.counts[j] -= 1
                if self.counts[j] == u - 1:
                    self._sat -= 1
                elif self.counts[j] == u:
                    for c2 in self.members[j]:
                        self.slack[c2] += 1
            out.append(c)
        return out

    def intersection_count(self, q) -> int:
        if self.system.n == 0:
            return 0
        sid = self.system.member_id(q)
        if sid is not None:
            return len(self.members[sid])
        coords = q if not isinstance(q, int) else None
        if coords is None:
            raise TypeError("mask queries must name a member set")
        hits = 0
        per_orig: dict[int, int] = {}
        for orig in self.origin.values():
            per_orig[orig] = per_orig.get(orig, 0) + 1
        for c in coords:
            hits += per_orig.get(int(c), 0)
        return hits


class _IntervalState:
    """Window-count backend; `w[t]` counts kept coordinates whose projection
    lies in the length-L window starting at t+1, L the minimum member length."""

    def __init__(self, system: IntervalSystem, budget: int, *,
                 track_saturation: bool = False) -> None:
        self.system = system
        self.budget = budget
        self.n = system.n
        self.length = system.min_len
        self.num_windows = self.n - self.length + 1
        # int32 keeps the filter memory-bound path fast; counts are <= n
        self.w = np.zeros(max(self.num_windows, 0), dtype=np.int32)
        self.per_orig = np.zeros(self.n + 1, dtype=np.int32)
        self.orig_members: dict[int, set[int]] = {}
        self._evicted: list[int] = []
        self._projected = False
        self._track = track_saturation
        self._sat_windows = 0
        size = max(self.num_windows, 0) + self.length + 1
        self._segbuf = np.empty(size, dtype=np.int32)
        self._minbuf = np.empty(size, dtype=np.int32)

    def has_sets(self, orig: int) -> bool:
        return self.num_windows >= 1 and 1 <= orig <= self.n

    def saturated_for(self, orig: int) -> bool:
        # every member interval through orig contains a minimum-length window
        # through orig, and those windows are member sets themselves
        lo, hi = self._window_range(orig)
        return bool(self.w[lo : hi + 1].min() >= self.budget)

    @property
    def fully_saturated(self) -> bool:
        return (
            self._track
            and self.num_windows > 0
            and self._sat_windows == self.num_windows
        )

    def _window_range(self, orig: int) -> tuple[int, int]:
        lo = max(0, orig - self.length)
        hi = min(self.num_windows - 1, orig - 1)
        return lo, hi

    def insert(self, coord: int, orig: int) -> None:
        u = self.budget
        lo, hi = self._window_range(orig)
        self.w[lo : hi + 1] += 1
        if self._track:
            self._sat_windows += int(np.count_nonzero(self.w[lo : hi + 1] == u))
        self.per_orig[orig] += 1
        self.orig_members.setdefault(orig, set()).add(coord)
        if coord != orig:
            self._projected = True
        sl = self.w[lo : hi + 1]
        if int(sl.min()) > u or bool((sl == u + 1).any()):
            self._evict_region(lo, hi)

    def _evict_region(self, wlo: int, whi: int) -> None:
        # Only coordinates over windows [wlo, whi] can have turned evictable,
        # and evictions never create new evictable coordinates, so refiltering
        # the same region after each eviction implements repeated removal of
        # the smallest evictable coordinate.  minwin(c) = min of w over the
        # trailing length-L window ending at index c-1, out-of-range window
        # slots reading as infinity.
        u = self.budget
        length = self.length
        clo, chi = wlo + 1, min(self.n, whi + length)
        seg_lo = max(0, clo - length)
        seg_len = chi - seg_lo
        seg = self._segbuf[:seg_len]
        minwin = self._minbuf[:seg_len]
        valid = min(chi, self.num_windows) - seg_lo
        while True:
            seg[:valid] = self.w[seg_lo : seg_lo + valid]
            seg[valid:] = _INF
            minimum_filter1d(
                seg, size=length, mode="constant", cval=_INF,
                origin=(length - 1) // 2,  # trailing window [t-L+1, t]
                output=minwin,
            )
            occupied = self.per_orig[clo : chi + 1] > 0
            over = minwin[clo - 1 - seg_lo : chi - seg_lo] > u
            cand_origs = np.nonzero(occupied & over)[0] + clo
            if cand_origs.size == 0:
                return
            if not self._projected:
                vorig = int(cand_origs[0])
                victim = vorig
            else:
                victim, vorig = min(
                    (min(self.orig_members[int(o)]), int(o)) for o in cand_origs
                )
            lo, hi = self._window_range(vorig)
            self.w[lo : hi + 1] -= 1
            if self._track:
                self._sat_windows -= int(np.count_nonzero(self.w[lo : hi + 1] == u - 1))
            self.per_orig[vorig] -= 1
            mem = self.orig_members[vorig]
            mem.discard(victim)
            if not mem:
                del self.orig_members[vorig]
            self._evicted.append(victim)

    def drain_evictions(self):
        out = self._evicted
        self._evicted = []
        return out

    def intersection_count(self, q) -> int:
        from .setsystem import as_interval

        iv = as_interval(q)
        if iv is None:
            coords = sorted(set(int(c) for c in q))
            return int(sum(self.per_orig[c] for c in coords if 1 <= c <= self.n))
        a, b = iv
        a, b = max(1, a), min(self.n, b)
        if a > b:
            return 0
        return int(self.per_orig[a : b + 1].sum())
