"""Linear count-sketch point estimator.

d rows of w counters; row r adds sign_r(c) * delta into bucket_r(c), and a
point query returns the median over rows of sign_r(c) * counter[r][bucket].
Bucket and sign hashes are pairwise over the Mersenne prime 2^31 - 1, so all
products fit in uint64 and whole batches vectorize.

Sizing aims the per-coordinate estimate error at eps_prime * sqrt(F2(tail_k)):
rows wide enough that a tail-noise or top-k collision failure is rare per row,
and depth (odd, for medians) set so the median failure is negligible at the
caller's scale.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import counter_hash, derive_seed

P31 = (1 << 31) - 1


def _mod_p31(x: np.ndarray) -> np.ndarray:
    # x < 2^62: two folds bring it under 2^31 + eps, one subtract finishes
    m = np.uint64(P31)
    x = (x & m) + (x >> np.uint64(31))
    x = (x & m) + (x >> np.uint64(31))
    return np.where(x >= m, x - m, x)


def sketch_dimensions(k: int, eps_prime: float, fail_scale: int) -> tuple[int, int]:
    """(width, depth) so that per-coordinate error exceeds
    eps_prime * sqrt(F2(tail_k)) with probability well below 1/(100*fail_scale).

    Per row the failure rate is q = k/width (a top-k collision) plus
    1/(width * eps_prime^2) (Chebyshev on the tail noise); the median of
    depth rows then fails with probability at most (2*sqrt(q(1-q)))^depth.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < eps_prime <= 1.0:
        raise ValueError("eps_prime must be in (0, 1]")
    width = max(200 * k, math.ceil(24.0 / (eps_prime * eps_prime)))
    q = k / width + 1.0 / (width * eps_prime * eps_prime)
    per_row = 2.0 * math.sqrt(q * (1.0 - q))
    depth = max(7, math.ceil(math.log(100.0 * max(fail_scale, 2)) / math.log(1.0 / per_row)))
    if depth % 2 == 0:
        depth += 1
    return width, depth


class CountSketch:
    def __init__(self, universe: int, width: int, depth: int, seed: int) -> None:
        if not 1 <= universe < P31:
            raise ValueError(f"universe must be in [1, 2^31 - 1), got {universe}")
        if width < 1:
            raise ValueError("width must be >= 1")
        if depth < 1 or depth % 2 == 0:
            raise ValueError("depth must be odd and positive")
        self.universe = universe
        self.width = width
        self.depth = depth
        self.seed = seed
        base = derive_seed(seed, "rows")
        coeffs = []
        for r in range(depth):
            s = derive_seed(base, r)
            coeffs.append(
                (
                    counter_hash(s, 1) % (P31 - 1) + 1,  # bucket slope != 0
                    counter_hash(s, 2) % P31,
                    counter_hash(s, 3) % (P31 - 1) + 1,  # sign slope != 0
                    counter_hash(s, 4) % P31,
                )
            )
        arr = np.asarray(coeffs, dtype=np.uint64)
        self._ba, self._bb = arr[:, 0], arr[:, 1]
        self._sa, self._sb = arr[:, 2], arr[:, 3]
        self.counters = np.zeros((depth, width), dtype=np.float64)

    # -- hashing ---------------------------------------------------------------

    def _row_buckets(self, r: int, coords: np.ndarray) -> np.ndarray:
        return _mod_p31(self._ba[r] * coords + self._bb[r]) % np.uint64(self.width)

    def _row_signs(self, r: int, coords: np.ndarray) -> np.ndarray:
        bit = _mod_p31(self._sa[r] * coords + self._sb[r]) & np.uint64(1)
        return 1.0 - 2.0 * bit.astype(np.float64)

    def _check(self, coords: np.ndarray) -> None:
        if coords.size and (coords.min() < 1 or coords.max() > self.universe):
            bad = coords[(coords < 1) | (coords > self.universe)][0]
            raise ValueError(f"coordinate {bad} outside universe [1, {self.universe}]")

    # -- updates ---------------------------------------------------------------

    def update(self, coord: int, delta: float) -> None:
        if delta == 0.0:
            return
        self.update_many([coord], [delta])

    def update_many(self, coords, deltas) -> None:
        c = np.ascontiguousarray(coords, dtype=np.uint64)
        d = np.ascontiguousarray(deltas, dtype=np.float64)
        if c.shape != d.shape:
            raise ValueError("coords and deltas must have matching shapes")
        if c.size == 0:
            return
        self._check(c)
        small = c.size * 16 < self.width
        for r in range(self.depth):
            b = self._row_buckets(r, c)
            sd = self._row_signs(r, c) * d
            if small:
                np.add.at(self.counters[r], b, sd)
            else:
                self.counters[r] += np.bincount(b, weights=sd, minlength=self.width)

    # -- queries ---------------------------------------------------------------

    def estimate(self, coord: int) -> float:
        return float(self.estimate_many([coord])[0])

    def estimate_many(self, coords) -> np.ndarray:
        c = np.ascontiguousarray(coords, dtype=np.uint64)
        self._check(c)
        if c.size == 0:
            return np.zeros(0, dtype=np.float64)
        rows = np.empty((self.depth, c.size), dtype=np.float64)
        for r in range(self.depth):
            b = self._row_buckets(r, c)
            rows[r] = self.counters[r][b] * self._row_signs(r, c)
        return np.median(rows, axis=0)
