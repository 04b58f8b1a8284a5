"""Additive-error subset lp estimation over turnstile streams.

Every coordinate i is scaled by k integer scalers X_{1,i}..X_{k,i} drawn
pairwise-independently from the heavy-tailed inverse-power law with exponent
p, and the k*n virtual coordinates (r, i) are fed through one linear
count-sketch.  For any subset s the floor(k/2)-th largest estimated magnitude
among the k*|s| virtual entries, scaled by 2^(-1/p), lands within an additive
eps * ||v||_p of ||v o s||_p with constant probability.  One update pass
serves every subset; no set system is declared up front.

p = 0 has no such scaling (the estimator's 2^(-1/p) is undefined) and is
rejected.  p > 2 is supported but experimental: the count-sketch width grows
polynomially with n.
"""

from __future__ import annotations

import math
import statistics

import numpy as np

from .count_sketch import P31, CountSketch, sketch_dimensions
from .errors import UniverseTooLarge
from .hashing import AlphaInverseSource
from .rng import derive_seed


def sample_rows(epsilon: float) -> int:
    """Number of scaler rows k; even, Theta(1/epsilon^2)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return 2 * math.ceil(25.0 / (epsilon * epsilon))


def error_param(p: float, n: int, epsilon: float) -> float:
    """Count-sketch error parameter for the given norm exponent."""
    if p <= 0.0:
        raise ValueError("p must be positive")
    e2 = epsilon * epsilon
    if p < 2.0:
        return e2
    if p == 2.0:
        return e2 / math.log2(max(n, 4))
    return e2 * n ** (1.0 / p - 0.5)


class LpSetSketch:
    def __init__(
        self,
        n: int,
        p: float,
        epsilon: float,
        seed: int,
        *,
        k: int | None = None,
    ) -> None:
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        if p == 0.0:
            raise ValueError(
                "p = 0 is not supported by the additive sketch; "
                "use the subset support-size sketch instead"
            )
        if p < 0.0 or not math.isfinite(p):
            raise ValueError(f"p must be positive, got {p}")
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
        if k is None:
            k = sample_rows(epsilon)
        if k < 2 or k % 2 != 0:
            raise ValueError(f"k must be a positive even integer, got {k}")
        if k * n >= P31:
            raise UniverseTooLarge(
                f"virtual universe k*n = {k * n} exceeds the count-sketch hash field"
            )
        self.n = n
        self.p = float(p)
        self.epsilon = float(epsilon)
        self.k = k
        self.seed = seed
        self.eps_prime = error_param(p, n, epsilon)
        width, depth = sketch_dimensions(k, self.eps_prime, n)
        self.x_source = AlphaInverseSource(derive_seed(seed, "scalers"), alpha=self.p, n_max=n)
        self.cs = CountSketch(k * n, width, depth, derive_seed(seed, "counters"))
        self._rows = np.arange(1, k + 1, dtype=np.uint64)

    # -- scalers -----------------------------------------------------------------

    def scalers_for(self, coords) -> np.ndarray:
        """The (k, m) matrix of scalers X_{r,i} for the given coordinates."""
        c = np.asarray(coords, dtype=np.uint64)
        if c.size and (c.min() < 1 or c.max() > self.n):
            raise ValueError("coordinate outside [1, n]")
        return self.x_source.values(self._rows[:, None], c[None, :])

    def _virtual(self, coords: np.ndarray) -> np.ndarray:
        # virtual coordinate of (r, i) is (r-1)*n + i, in [1, k*n]
        return ((self._rows - np.uint64(1))[:, None] * np.uint64(self.n) + coords[None, :]).ravel()

    # -- updates -----------------------------------------------------------------

    def update(self, coord: int, delta: float) -> None:
        self.update_many([coord], [delta])

    def update_many(self, coords, deltas) -> None:
        """Apply turnstile deltas; coordinates may repeat."""
        c = np.asarray(coords, dtype=np.uint64)
        d = np.asarray(deltas, dtype=np.float64)
        if c.shape != d.shape:
            raise ValueError("coords and deltas must have matching shapes")
        if not np.isfinite(d).all():
            raise ValueError("deltas must be finite")
        live = d != 0.0
        if not live.all():
            c, d = c[live], d[live]
        if c.size == 0:
            return
        x = self.scalers_for(c)
        self.cs.update_many(self._virtual(c), (x * d[None, :]).ravel())

    def update_dense(self, values) -> None:
        """Ingest a whole length-n vector (equivalent to n single updates)."""
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector")
        (nz,) = np.nonzero(v)
        self.update_many((nz + 1).astype(np.uint64), v[nz])

    # -- queries -----------------------------------------------------------------

    def _subset_coords(self, s) -> np.ndarray:
        arr = np.asarray(s)
        if arr.dtype == bool:
            if arr.shape != (self.n,):
                raise ValueError(f"bitset must have length {self.n}")
            return (np.nonzero(arr)[0] + 1).astype(np.uint64)
        coords = np.unique(arr.astype(np.int64))
        if coords.size and (coords[0] < 1 or coords[-1] > self.n):
            raise ValueError("subset coordinate outside [1, n]")
        return coords.astype(np.uint64)

    def query(self, s) -> float:
        """Estimate ||v o s||_p for an arbitrary subset (bitset or index list)."""
        coords = self._subset_coords(s)
        if coords.size == 0:
            return 0.0
        est = self.cs.estimate_many(self._virtual(coords))
        z = selection_statistic(np.abs(est), self.k)
        return 2.0 ** (-1.0 / self.p) * z

    def query_exact(self, s, values) -> float:
        """The same order statistic computed from exact scaled values
        (count-sketch bypassed); reference path for calibration."""
        coords = self._subset_coords(s)
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector")
        if coords.size == 0:
            return 0.0
        scaled = self.scalers_for(coords) * v[coords.astype(np.int64) - 1][None, :]
        z = selection_statistic(np.abs(scaled).ravel(), self.k)
        return 2.0 ** (-1.0 / self.p) * z


def selection_statistic(magnitudes: np.ndarray, k: int) -> float:
    """floor(k/2)-th largest entry of a flat magnitude array."""
    rank = k // 2
    if magnitudes.size < rank:
        # fewer virtual entries than the rank only happens for tiny universes;
        # everything below the rank is an implicit zero
        return 0.0
    return float(np.partition(magnitudes, magnitudes.size - rank)[magnitudes.size - rank])


class LpEnsemble:
    """Median of independent sketches; boosts per-query success to cover a
    declared family of subsets of known size."""

    def __init__(
        self,
        n: int,
        p: float,
        epsilon: float,
        seed: int,
        *,
        num_sets: int = 2,
        replicas: int | None = None,
    ) -> None:
        if replicas is None:
            replicas = math.ceil(3 * math.log2(max(num_sets, 2)))
            if replicas % 2 == 0:
                replicas += 1
        if replicas < 1:
            raise ValueError("need at least one replica")
        self.sketches = [
            LpSetSketch(n, p, epsilon, derive_seed(seed, "replica", r))
            for r in range(replicas)
        ]

    def update(self, coord: int, delta: float) -> None:
        for sk in self.sketches:
            sk.update(coord, delta)

    def update_many(self, coords, deltas) -> None:
        for sk in self.sketches:
            sk.update_many(coords, deltas)

    def update_dense(self, values) -> None:
        for sk in self.sketches:
            sk.update_dense(values)

    def query(self, s) -> float:
        return float(statistics.median(sk.query(s) for sk in self.sketches))
