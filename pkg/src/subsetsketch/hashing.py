"""Pairwise-independent hashing over a fixed 61-bit Mersenne prime.

Two consumers sit on top of the same family h(x) = (a*x + b) mod (2^61 - 1):

* a Bernoulli predicate (coordinate-level sampling with exactly pairwise
  joint behavior, which is what makes the variance identity of the sampled
  support-size estimator hold), and
* an integer "alpha-inverse" source with Pr[X <= x] = 1 - x^(-alpha) for
  positive integers x, used to rescale coordinates so that a fixed order
  statistic of the rescaled vector recovers the lp norm.

All integer arithmetic is exact Python/uint64 arithmetic, so the same seed
produces bit-identical outputs on every platform.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import stream64

MERSENNE61 = (1 << 61) - 1
ALPHA_INVERSE_CAP = 1 << 40

_M61 = MERSENNE61
_U64 = np.uint64


def _coeffs_from_seed(seed: int) -> tuple[int, int]:
    # Two 128-bit draws folded mod the prime; mod bias is ~2^-67.
    w = stream64(seed, 4)
    a = 1 + (((w[0] << 64) | w[1]) % (_M61 - 1))
    b = ((w[2] << 64) | w[3]) % _M61
    return a, b


class PairwiseHash:
    """h(x) = (a*x + b) mod (2^61 - 1), with (a, b) derived from the seed.

    `n_max`, when given, is validated against the prime (the family needs
    prime > 2 * n_max to cover the key space with room for pair encoding).
    """

    __slots__ = ("seed", "prime", "a", "b")

    def __init__(self, seed: int, n_max: int | None = None):
        if n_max is not None and 2 * n_max >= _M61:
            raise ValueError(f"universe too large for 61-bit prime: {n_max}")
        self.seed = seed
        self.prime = _M61
        self.a, self.b = _coeffs_from_seed(seed)

    def value(self, x: int) -> int:
        return (self.a * x + self.b) % _M61

    def uniform01(self, x: int) -> float:
        """Map h(x) to [0, 1); exactly pairwise over distinct keys."""
        return self.value(x) / _M61

    def values(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized `value` for uint64 keys below 2^61.

        Products are kept inside 64 bits by splitting operands and folding
        partial products with 2^61 = 1 (mod prime).  Keys below 2^32 take a
        cheaper two-term route.
        """
        xs = np.ascontiguousarray(xs, dtype=np.uint64)
        if not xs.size:
            return xs.copy()
        if int(xs.max()) < (1 << 32):
            a_hi = self.a >> 32
            a_lo = self.a & 0xFFFFFFFF
            t = _U64(a_hi) * xs                  # < 2^61
            hi = t >> _U64(29)
            lo = t & _U64((1 << 29) - 1)
            term1 = hi + (lo << _U64(32))        # (a_hi*x)*2^32 mod p, < 2^62
            term2 = _U64(a_lo) * xs              # < 2^64
            term2 = (term2 & _U64(_M61)) + (term2 >> _U64(61))
            r = term1 + term2 + _U64(self.b)     # < 2^63
        else:
            if int(xs.max()) >= _M61:
                raise ValueError("keys must be below 2^61 - 1")
            mask30 = _U64((1 << 30) - 1)
            mask31 = _U64((1 << 31) - 1)
            x_hi = xs >> _U64(31)                # < 2^30
            x_lo = xs & mask31                   # < 2^31
            a_hi = _U64(self.a >> 31)
            a_lo = _U64(self.a & ((1 << 31) - 1))
            hh = a_hi * x_hi                     # < 2^60; times 2^62 = 2 mod p
            term_hh = hh << _U64(1)
            cross = a_hi * x_lo + a_lo * x_hi    # < 2^62; times 2^31 mod p:
            term_cr = (cross >> _U64(30)) + ((cross & mask30) << _U64(31))
            ll = a_lo * x_lo                     # < 2^62
            term_ll = (ll & _U64(_M61)) + (ll >> _U64(61))
            r = term_hh + term_cr + term_ll + _U64(self.b)
        r = (r & _U64(_M61)) + (r >> _U64(61))
        r = (r & _U64(_M61)) + (r >> _U64(61))
        return np.where(r >= _U64(_M61), r - _U64(_M61), r)


def coeff_mod_values(a: np.ndarray, b: np.ndarray, x: int) -> np.ndarray:
    """(a*x + b) mod (2^61 - 1) for coefficient arrays and one scalar key.

    The transpose of `PairwiseHash.values`: many hash functions applied to a
    single key, used to make one sampling decision per sketch instance per
    stream item without a Python loop.
    """
    if not 0 <= x < _M61:
        raise ValueError("key must be in [0, 2^61 - 1)")
    a = np.ascontiguousarray(a, dtype=np.uint64)
    b = np.ascontiguousarray(b, dtype=np.uint64)
    mask30 = _U64((1 << 30) - 1)
    mask31 = _U64((1 << 31) - 1)
    a_hi = a >> _U64(31)
    a_lo = a & mask31
    x_hi = _U64(x >> 31)
    x_lo = _U64(x & ((1 << 31) - 1))
    hh = a_hi * x_hi                         # < 2^60; times 2^62 = 2 mod p
    term_hh = hh << _U64(1)
    cross = a_hi * x_lo + a_lo * x_hi        # < 2^62; times 2^31 mod p:
    term_cr = (cross >> _U64(30)) + ((cross & mask30) << _U64(31))
    ll = a_lo * x_lo                         # < 2^62
    term_ll = (ll & _U64(_M61)) + (ll >> _U64(61))
    r = term_hh + term_cr + term_ll + b
    r = (r & _U64(_M61)) + (r >> _U64(61))
    r = (r & _U64(_M61)) + (r >> _U64(61))
    return np.where(r >= _U64(_M61), r - _U64(_M61), r)


def bernoulli_threshold(p: float) -> int:
    """Smallest integer t with t/prime >= p, computed exactly.

    h(x) < t then happens with probability within 1/prime of p, and for
    p = 1 the predicate accepts every key.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    num, den = float(p).as_integer_ratio()
    return -((-num * _M61) // den)  # ceil(p * prime)


def bernoulli_predicate(h: PairwiseHash, x: int, p: float) -> int:
    """1 iff h(x)/prime < p.  Pairwise independent across keys."""
    return 1 if h.value(x) < bernoulli_threshold(p) else 0


def bernoulli_mask(h: PairwiseHash, xs: np.ndarray, p: float) -> np.ndarray:
    """Vectorized `bernoulli_predicate`; boolean array."""
    return h.values(xs) < _U64(bernoulli_threshold(p))


class AlphaInverseSource:
    """Integer scalers X(row, i) with Pr[X <= x] = 1 - x^(-alpha), x = 1, 2, ...

    X = ceil(U^(-1/alpha)) where U in (0, 1) comes from the pairwise hash of
    the encoded pair row * n_max + i, so any two entries are independent.
    X >= 2 always (U < 1 strictly) and values are capped at 2^40.
    """

    __slots__ = ("seed", "alpha", "n_max", "hash")

    def __init__(self, seed: int, alpha: float, n_max: int):
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.seed = seed
        self.alpha = alpha
        self.n_max = n_max
        self.hash = PairwiseHash(seed)

    def _encode(self, row: int, i: int) -> int:
        if not 1 <= i <= self.n_max:
            raise ValueError(f"coordinate {i} outside [1, {self.n_max}]")
        return row * self.n_max + i

    def value(self, row: int, i: int) -> int:
        return int(self.transform(np.array([self.hash.value(self._encode(row, i))], dtype=np.uint64))[0])

    def values(self, rows: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Vectorized scalers for broadcastable row/coordinate arrays (float64)."""
        idx = rows.astype(np.uint64) * _U64(self.n_max) + coords.astype(np.uint64)
        return self.transform(self.hash.values(idx))

    def transform(self, hvals: np.ndarray) -> np.ndarray:
        """Map raw hash values to scalers; exposed so callers can reuse hashes."""
        u = (hvals.astype(np.float64) + 1.0) * 2.0**-61
        with np.errstate(over="ignore"):
            x = u ** (-1.0 / self.alpha)
        return np.minimum(np.ceil(x), float(ALPHA_INVERSE_CAP))


def alpha_inverse_value(src: AlphaInverseSource, pair: tuple[int, int]) -> int:
    """Functional form of `AlphaInverseSource.value` for a (row, i) pair."""
    return src.value(*pair)


def alpha_inverse_cdf(x: float, alpha: float) -> float:
    """Reference CDF Pr[X <= x]; used by tests and the selfcheck."""
    if x < 1:
        return 0.0
    return 1.0 - math.floor(x) ** (-alpha) if x >= 1 else 0.0
