"""Sieve tables (primality, Moebius, Euler phi) and the W-trick modulus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidResidueError, SieveRangeError, WOverflowError

# ~14 bytes of table per integer; 10**8 is the desk-scale ceiling.
DEFAULT_MAX_LIMIT = 10**8
INT128_MAX = 2**127 - 1


@dataclass(frozen=True, eq=False)
class SieveContext:
    """Immutable tables over [0, limit].

    ``spf[n]`` is the smallest prime factor of n (0 for n < 2); it backs
    exact factorization of any m <= limit in O(log m) steps.
    """

    limit: int
    is_prime: np.ndarray
    mobius: np.ndarray
    phi: np.ndarray
    spf: np.ndarray

    def primes(self, upto: int | None = None) -> np.ndarray:
        hi = self.limit if upto is None else min(upto, self.limit)
        return np.flatnonzero(self.is_prime[: hi + 1])

    def check_range(self, m: int) -> None:
        if m > self.limit:
            raise SieveRangeError(f"{m} exceeds sieve limit {self.limit}")

    def prime_factors(self, m: int) -> list[int]:
        """Distinct prime factors of ``1 <= m <= limit`` in increasing order."""
        self.check_range(m)
        out: list[int] = []
        while m > 1:
            p = int(self.spf[m])
            out.append(p)
            while m % p == 0:
                m //= p
        return out


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def build_sieve(limit: int, max_limit: int = DEFAULT_MAX_LIMIT) -> SieveContext:
    if limit < 2:
        raise ConfigurationError(f"sieve limit must be >= 2, got {limit}")
    if limit > max_limit:
        raise ConfigurationError(f"sieve limit {limit} above memory bound {max_limit}")

    n = limit + 1
    root = math.isqrt(limit)

    is_prime = np.ones(n, dtype=bool)
    is_prime[:2] = False
    for p in range(2, root + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    small = np.flatnonzero(is_prime[: root + 1])

    spf = np.zeros(n, dtype=np.int64 if limit > 2**31 - 1 else np.int32)
    for p in small[::-1]:
        spf[p * p :: p] = p
    spf[is_prime] = np.flatnonzero(is_prime)

    # phi via phi -= phi // p for every prime factor (exact at each stage);
    # rem keeps the cofactor free of primes <= sqrt(limit), which is 1 or a prime.
    mobius = np.ones(n, dtype=np.int8)
    mobius[0] = 0
    phi = np.arange(n, dtype=np.int64)
    rem = np.arange(n, dtype=np.int64)
    for p in small:
        p = int(p)
        mobius[p::p] *= -1
        mobius[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
        pk = p
        while pk <= limit:
            rem[pk::pk] //= p
            pk *= p
    big = rem > 1
    mobius[big] *= -1
    phi[big] -= phi[big] // rem[big]
    del rem

    _freeze(is_prime, mobius, phi, spf)
    return SieveContext(limit=limit, is_prime=is_prime, mobius=mobius, phi=phi, spf=spf)


@dataclass(frozen=True)
class WTrick:
    omega: int
    w: int
    phi_w: int

    def is_residue(self, b: int) -> bool:
        return b >= 1 and math.gcd(b, self.w) == 1

    def residues(self) -> list[int]:
        """Reduced residues 1 <= b < W (b = 1 when W = 1)."""
        return [b for b in range(1, max(self.w, 2)) if math.gcd(b, self.w) == 1]


def build_wtrick(omega: int, sieve: SieveContext) -> WTrick:
    if omega < 2:
        raise ConfigurationError(f"omega must be >= 2, got {omega}")
    if omega > sieve.limit:
        raise ConfigurationError(f"omega={omega} exceeds sieve limit {sieve.limit}")
    w = 1
    phi_w = 1
    for p in sieve.primes(omega):
        w *= int(p)
        phi_w *= int(p) - 1
        if w > INT128_MAX:
            raise WOverflowError(f"W = prod_(p <= {omega}) p overflows 128-bit range")
    return WTrick(omega=omega, w=w, phi_w=phi_w)


def check_residue(b: int, w: int) -> None:
    if b < 1 or math.gcd(b, w) != 1:
        raise InvalidResidueError(f"residue b={b} must be positive and coprime to W={w}")


def prime_count_in_progression(N: int, w: int, b: int, sieve: SieveContext) -> int:
    """Number of 1 <= n <= N with w*n + b prime."""
    check_residue(b, w)
    if N <= 0:
        return 0
    sieve.check_range(w * N + b)
    return int(np.count_nonzero(sieve.is_prime[w + b : w * N + b + 1 : w]))
