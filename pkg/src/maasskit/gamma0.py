"""Arithmetic of the Hecke congruence group Gamma0(N).

Index, cusp enumeration with widths and scaling matrices, coset
representatives for the translation quotient, elliptic stabilizer weights,
and classical plus cusp-generalized Kloosterman sums.  Everything is exact
integer arithmetic except the Kloosterman phase sums, which are float/complex
accumulations of unit-modulus terms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

from .config import DomainError, PrecisionError, as_point

__all__ = [
    "Mat2",
    "CuspRep",
    "EllipticWeight",
    "index",
    "cusps",
    "coset_reps_inf",
    "elliptic_weight",
    "kloosterman",
    "kloosterman_cusp",
    "kloosterman_cusp_zero_row",
    "divisor_sigma",
    "moebius",
    "divisors",
    "moebius_sieve",
    "ramanujan_sum_row",
    "modinv_array",
]


@dataclass(frozen=True)
class Mat2:
    """2x2 integer matrix acting on the upper half plane by fractions."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for entry in (self.a, self.b, self.c, self.d):
            if entry != int(entry):
                raise DomainError("Mat2 entries must be integers")

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self) -> "Mat2":
        det = self.det
        if det == 1:
            return Mat2(self.d, -self.b, -self.c, self.a)
        if det == -1:
            return Mat2(-self.d, self.b, self.c, -self.a)
        raise DomainError("only determinant +-1 matrices are invertible here")

    def act(self, tau):
        """Moebius action (a tau + b) / (c tau + d); works on complex or mpc."""
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)


@dataclass(frozen=True)
class CuspRep:
    """A cusp a/c of Gamma0(N); (a, c) = (1, 0) encodes the cusp at infinity.

    `scaling` maps the cusp to infinity and is chosen deterministically
    (smallest nonnegative completion), so downstream phase sums that depend
    on this choice are reproducible.
    """

    a: int
    c: int
    width: int
    scaling: Mat2

    @property
    def is_infinity(self) -> bool:
        return self.c == 0

    @property
    def value(self):
        return None if self.is_infinity else Fraction(self.a, self.c)

    def label(self) -> str:
        return "oo" if self.is_infinity else f"{self.a}/{self.c}"

    def __str__(self) -> str:
        return f"cusp {self.label()} (width {self.width})"


@dataclass(frozen=True)
class EllipticWeight:
    value: Fraction
    stabilizer_order: int


def _factorize(n: int) -> dict:
    n = int(n)
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list:
    """Sorted positive divisors."""
    if n < 1:
        raise DomainError("n must be positive")
    out = [1]
    for p, e in _factorize(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def divisor_sigma(k: int, n: int) -> int:
    return sum(d**k for d in divisors(n))


def moebius(n: int) -> int:
    if n < 1:
        raise DomainError("n must be positive")
    fac = _factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def index(N: int) -> int:
    """Index of Gamma0(N) in the full modular group: N * prod (1 + 1/p)."""
    if N < 1:
        raise DomainError("N must be a positive integer")
    idx = N
    for p in _factorize(N):
        idx = idx // p * (p + 1)
    return idx


def _complete_to_sl2(a: int, c: int) -> Mat2:
    """Deterministic (a, b; c, d) in SL2(Z) with the given first column."""
    if c == 0:
        if a not in (1, -1):
            raise DomainError("no completion: first column not unimodular")
        return Mat2(a, 0, 0, a)
    if gcd(a, c) != 1:
        raise DomainError("no completion: gcd(a, c) != 1")
    d = pow(a, -1, c) if c > 1 else 0
    b = (a * d - 1) // c
    return Mat2(a, b, c, d)


@lru_cache(maxsize=None)
def cusps(N: int):
    """Complete pairwise-inequivalent cusp list for Gamma0(N).

    One class per divisor c of N and unit residue mod gcd(c, N/c); width is
    N / gcd(c^2, N).  The divisor c = N is the class of infinity and is
    listed first; the rest follow in (c, a) order.
    """
    if N < 1:
        raise DomainError("N must be a positive integer")
    out = []
    total_width = 0
    for c in divisors(N):
        g = gcd(c, N // c)
        width = N // gcd(c * c, N)
        for r in range(g):
            if gcd(r, g) != 1:
                continue
            if c == N:
                out.append(CuspRep(1, 0, width, Mat2.identity()))
                total_width += width
                continue
            a = next(a for a in range(r, r + g * (c + 2) + 1, g) if gcd(a, c) == 1)
            sigma = _complete_to_sl2(a, c)
            out.append(CuspRep(a, c, width, sigma.inv()))
            total_width += width
    if total_width != index(N):
        raise PrecisionError(f"cusp widths sum to {total_width}, expected {index(N)}")
    out.sort(key=lambda rep: (0,) if rep.is_infinity else (1, rep.c, rep.a))
    return tuple(out)


def coset_reps_inf(N: int, bound: int):
    """Representatives of the translation quotient with 0 <= c <= bound.

    Classes are indexed by bottom rows (c, d): c a positive multiple of N
    with d in [-bound, bound] and gcd(c, d) = 1, plus the identity class for
    c = 0.  Each is returned as a completed matrix with the deterministic
    smallest-nonnegative top row.
    """
    if N < 1 or bound < 1:
        raise DomainError("need N >= 1 and bound >= 1")
    out = [Mat2.identity()]
    for c in range(N, bound + 1, N):
        for d in range(-bound, bound + 1):
            if gcd(c, d) != 1:
                continue
            a = pow(d, -1, c) if c > 1 else 0
            b = (a * d - 1) // c
            out.append(Mat2(a, b, c, d))
    return out


def elliptic_weight(N: int, z) -> EllipticWeight:
    """Stabilizer weight 2 / #Stab_z at a point of the upper half plane.

    Elliptic stabilizer elements have |trace| <= 1 and bottom-left entry
    bounded by 2 / Im z, so a finite scan decides the order.  Candidates
    must match the fixed-point data to within 10 units of machine epsilon;
    anything landing in the ambiguous band between that and sqrt(eps) raises
    instead of guessing.
    """
    pt = as_point(z)
    x, y = pt.x, pt.y
    eps = float(np.finfo(float).eps)
    tight = 10.0 * eps * max(1.0, abs(x), y)
    loose = math.sqrt(eps) * max(1.0, abs(x), y)
    count = 0
    c_top = int(math.floor(2.0 / y)) + 1
    for c in range(N, c_top + 1, N):
        for tr in (-1, 0, 1):
            root = math.sqrt(4 - tr * tr)
            # fixed point of (a b; c d): ((a-d) + i sqrt(4 - tr^2)) / (2c)
            im_res = abs(2 * c * y - root)
            amd_real = 2 * c * x
            amd = round(amd_real)
            resid = max(im_res, abs(amd_real - amd))
            if resid < tight:
                if (tr + amd) % 2 != 0:
                    continue
                a = (tr + amd) // 2
                d = tr - a
                if (a * d - 1) % c == 0:
                    count += 1
            elif resid < loose:
                raise PrecisionError(
                    f"elliptic decision ambiguous at c={c}, tr={tr}: residual {resid:.3e}"
                )
    order = 2 + 2 * count
    if order not in (2, 4, 6):
        raise PrecisionError(f"unexpected stabilizer order {order}")
    return EllipticWeight(Fraction(2, order), order)


def kloosterman(m: int, n: int, c: int) -> float:
    """Classical Kloosterman sum over units d mod c with phases (m d + n dbar)/c."""
    if c < 1:
        raise DomainError("c must be a positive integer")
    if c == 1:
        return 1.0
    total = 0.0
    for d in range(1, c):
        if gcd(d, c) != 1:
            continue
        dbar = pow(d, -1, c)
        total += math.cos(2.0 * math.pi * ((m * d + n * dbar) % c) / c)
    return total


def kloosterman_cusp(N: int, rho: CuspRep, m: int, n: int, c: int) -> complex:
    """Generalized Kloosterman sum attached to the cusp pair (infinity, rho).

    Double cosets at bottom-left entry c are parametrized by w mod c*width
    with gcd(w, c) = 1 and the level congruence c*a0 + w*c0 = 0 mod N; the
    phase uses the top-left entry x = w^{-1} mod c.  Inadmissible c gives an
    empty sum, returned as 0.
    """
    if c < 1:
        raise DomainError("c must be a positive integer")
    ell = rho.width
    a0, c0 = rho.a, rho.c
    total = 0.0 + 0.0j
    for w in range(c * ell):
        if gcd(w, c) != 1:
            continue
        if (c * a0 + w * c0) % N != 0:
            continue
        x = pow(w, -1, c) if c > 1 else 0
        total += cmath.exp(2j * math.pi * (m * w / (ell * c) + n * x / c))
    return total


def moebius_sieve(limit: int) -> np.ndarray:
    """Moebius function on 0..limit as an int8 array (index 0 unused)."""
    if limit < 1:
        raise DomainError("limit must be positive")
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    sieve = np.ones(limit + 1, dtype=bool)
    for p in range(2, limit + 1):
        if not sieve[p]:
            continue
        sieve[2 * p:: p] = False
        mu[p::p] = -mu[p::p]
        p2 = p * p
        if p2 <= limit:
            mu[p2::p2] = 0
    return mu


def ramanujan_sum_row(n: int, c_max: int) -> np.ndarray:
    """Ramanujan sums c_c(n) for c = 1..c_max (index 0 unused).

    Uses c_c(n) = sum over d | gcd(c, n) of d * mu(c/d), filled divisor by
    divisor with a sieved Moebius table.
    """
    if n < 1:
        raise DomainError("n must be positive")
    mu = moebius_sieve(c_max).astype(np.int64)
    row = np.zeros(c_max + 1, dtype=np.int64)
    for d in divisors(n):
        if d > c_max:
            break
        ks = np.arange(1, c_max // d + 1)
        row[d::d] += d * mu[ks]
    return row


def modinv_array(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Vectorized modular inverse a^{-1} mod m for int64 arrays, m >= 1.

    Extended Euclid; finished lanes are compacted away each sweep, so the
    cost tracks the mean iteration count, not the worst lane.  Entries with
    modulus 1 return 0, entries with gcd > 1 return -1.
    """
    a = np.atleast_1d(np.asarray(a, dtype=np.int64))
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    a, m = np.broadcast_arrays(a, m)
    shape = a.shape
    mm = m.reshape(-1)
    r0 = mm.copy()
    r1 = np.mod(a.reshape(-1), mm)
    s0 = np.zeros(r0.size, dtype=np.int64)
    s1 = np.ones(r0.size, dtype=np.int64)
    out = np.empty(r0.size, dtype=np.int64)
    idx = np.arange(r0.size)
    while r1.size:
        done = r1 == 0
        if done.any():
            di = idx[done]
            res = np.mod(s0[done], mm[di])
            res[r0[done] != 1] = -1          # gcd > 1; m == 1 lands at gcd 1
            out[di] = res
            live = ~done
            idx, r0, r1 = idx[live], r0[live], r1[live]
            s0, s1 = s0[live], s1[live]
            if not r1.size:
                break
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return out.reshape(shape)


def kloosterman_cusp_zero_row(N: int, rho: CuspRep, n: int, c_max: int,
                              block: int = 4_000_000) -> np.ndarray:
    """K(0, n; c) for c = 1..c_max as a float array (index 0 unused).

    The m = 0 phase only sees w mod c, so each unit class is weighted by its
    lift count c*width / lcm(c, N/c0) under the level congruence.  The level
    one cusp at infinity short-circuits to sieved Ramanujan sums.
    """
    if c_max < 1:
        raise DomainError("c_max must be positive")
    ell = rho.width
    a0, c0 = rho.a, rho.c
    if c0 == 0:
        # infinity: admissible c are multiples of N, u-sum is a Ramanujan sum
        row = np.zeros(c_max + 1, dtype=float)
        if n == 0:
            for c in range(N, c_max + 1, N):
                row[c] = ell * sum(1 for u in range(max(c, 1)) if gcd(u, c) == 1)
            return row
        ram = ramanujan_sum_row(abs(n), c_max).astype(float)
        row[N::N] = ell * ram[N::N]
        return row
    out = np.zeros(c_max + 1, dtype=complex)
    cs = [c for c in range(c0, c_max + 1, c0)]
    start = 0
    while start < len(cs):
        # grow the block until the flattened u-range hits the element budget
        stop, load = start, 0
        while stop < len(cs) and load + cs[stop] <= block:
            load += cs[stop]
            stop += 1
        stop = max(stop, start + 1)
        chunk = cs[start:stop]
        us = np.concatenate([np.arange(c, dtype=np.int64) for c in chunk])
        mods = np.concatenate([np.full(c, c, dtype=np.int64) for c in chunk])
        inv = modinv_array(us, mods)
        ok = inv >= 0
        M0 = N // c0
        w0s = np.concatenate([
            np.full(c, (-(c // c0) * a0) % M0, dtype=np.int64) for c in chunk
        ])
        gs = np.concatenate([
            np.full(c, gcd(c, M0), dtype=np.int64) for c in chunk
        ])
        ok &= np.mod(us - w0s, gs) == 0
        phases = np.where(ok, np.exp(2j * np.pi * n * (inv / mods)), 0.0)
        bounds = np.cumsum([0] + chunk)
        sums = np.add.reduceat(phases, bounds[:-1])
        for i, c in enumerate(chunk):
            lc = c * M0 // gcd(c, M0)
            lifts, rem = divmod(c * ell, lc)
            if rem:
                raise PrecisionError("lift count not integral; enumeration invariant broken")
            out[c] = lifts * sums[i]
        start = stop
    return out.real if np.allclose(out.imag, 0, atol=1e-9) else out
