"""Coefficient machinery for meromorphic forms with elliptic-point poles.

Fourier coefficients of reciprocals of Eisenstein series admit rapidly
convergent expansions as sums over primitive ideals of the Gaussian or
Eisenstein order, weighted by a cosine character and an exponential in the
Fourier index.  This module supplies the ideal enumeration, the character,
the assembled coefficient series, and the two-variable kernels (with their
antiholomorphic completion and the raising operator) that generate the
expansions for higher-order poles.

The index-0 term of the coefficient series carries no exponential boost and
converges only like the inverse square of the norm cutoff; it is the term
the stabilization gate is calibrated against.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import (DEFAULT_CONFIG, DomainError, PrecisionConfig,
                     PrecisionError, StabilizationError, as_point)
from .hecke import _lattice_blocks
from .polar import _ipow
from .qseries import eisenstein_series

__all__ = [
    "IdealRep",
    "ideal_enumerate",
    "C_weight",
    "f_kjr_coefficient",
    "beta_exact",
    "ramanujan_expansion_1overE4",
    "h2k_kernel",
    "raise_op",
]

_RINGS = ("gauss", "eisenstein")
_SQRT3 = math.sqrt(3.0)
# Order-3 elliptic point; the order-4 one is plain i.
_RHO = complex(0.5, _SQRT3 / 2.0)


@dataclass(frozen=True)
class IdealRep:
    """One primitive ideal (c*w + d), w = i (gauss) or a cube root of unity.

    The eisenstein generator is w = (-1 + i*sqrt(3))/2, so the norm form is
    c^2 - c*d + d^2; the completion (a, b) satisfies a*d - b*c = 1 and is
    only determined modulo (c, d), which the character must not see.
    """

    ring: str
    c: int
    d: int
    norm: int
    completion: tuple


def _norm_of(ring: str, c: int, d: int) -> int:
    if ring == "gauss":
        return c * c + d * d
    return c * c - c * d + d * d


def _rot(ring: str, c: int, d: int):
    # One unit rotation of the generator: i*(ci+d) resp. w*(cw+d).
    if ring == "gauss":
        return d, -c
    return d - c, -c


def _eligible(c: int, d: int) -> bool:
    return c > 0 or (c == 0 and d > 0)


def _canonical(ring: str, c: int, d: int):
    """Lexicographically smallest eligible pair in the unit orbit."""
    best = None
    for _ in range(2 if ring == "gauss" else 3):
        cc, dd = (c, d) if _eligible(c, d) else (-c, -d)
        if best is None or (cc, dd) < best:
            best = (cc, dd)
        c, d = _rot(ring, c, d)
    return best


def _ext_gcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _completion_of(c: int, d: int):
    g, x, y = _ext_gcd(d, c)
    if g < 0:
        g, x, y = -g, -x, -y
    if g != 1:
        raise DomainError(f"({c}, {d}) is not primitive")
    # a*d - b*c = x*d + y*c = 1
    return x, -y


def ideal_enumerate(ring: str, norm_bound: int) -> list:
    """All primitive ideal classes with norm up to the bound.

    One representative per unit class, sorted by norm and then by the (c, d)
    pair; the representative is the smallest pair with c > 0, or c = 0 and
    d > 0, inside the orbit.
    """
    if ring not in _RINGS:
        raise DomainError(f"unknown ring {ring!r}; expected one of {_RINGS}")
    if norm_bound < 1:
        raise DomainError("norm_bound must be at least 1")
    # Both norm forms dominate (c^2 + d^2)/2, so this box is exhaustive.
    box = math.isqrt(2 * norm_bound) + 2
    out = []
    for c in range(0, box + 1):
        for d in range(-box, box + 1):
            if not _eligible(c, d):
                continue
            if math.gcd(c, d) != 1:
                continue
            nm = _norm_of(ring, c, d)
            if nm > norm_bound:
                continue
            if (c, d) != _canonical(ring, c, d):
                continue
            out.append(IdealRep(ring, c, d, nm, _completion_of(c, d)))
    out.sort(key=lambda rep: (rep.norm, rep.c, rep.d))
    return out


def C_weight(ring: str, m: int, rep: IdealRep, n: int) -> float:
    """Cosine character of an ideal; zero unless the ring admits the weight.

    The admissibility patterns (4 | m for gauss, 6 | m for eisenstein) are
    exactly what makes the value independent of the generator and of the
    completion, since both ambiguities shift the angle by the corresponding
    root-of-unity multiples.
    """
    if ring not in _RINGS:
        raise DomainError(f"unknown ring {ring!r}; expected one of {_RINGS}")
    if rep.ring != ring:
        raise DomainError("ideal belongs to the other ring")
    c, d = rep.c, rep.d
    a, b = rep.completion
    if ring == "gauss":
        if m % 4:
            return 0.0
        # Reduce the rational angle in exact arithmetic before the cosine.
        w = (n * (a * c + b * d)) % rep.norm
        return math.cos(2.0 * math.pi * w / rep.norm + m * math.atan2(c, d))
    if m % 6:
        return 0.0
    u = (n * (a * d + b * c - 2 * a * c - 2 * b * d)) % (2 * rep.norm)
    return math.cos(math.pi * u / rep.norm
                    - m * math.atan2(c * _SQRT3, 2 * d - c))


_IDEAL_CACHE: dict = {}


def _ideal_arrays(ring: str, bound: int):
    key = (ring, bound)
    hit = _IDEAL_CACHE.get(key)
    if hit is None:
        reps = ideal_enumerate(ring, bound)
        hit = tuple(np.array([getattr(r, f) for r in reps], dtype=np.int64)
                    for f in ("c", "d", "norm"))
        hit += (np.array([r.completion[0] for r in reps], dtype=np.int64),
                np.array([r.completion[1] for r in reps], dtype=np.int64))
        _IDEAL_CACHE[key] = hit
    return hit


def _c_array(ring, m, c, d, nm, a, b, n):
    # Vectorized mirror of C_weight; kept in lockstep by a regression test.
    if ring == "gauss":
        if m % 4:
            return np.zeros(c.size)
        w = (n * (a * c + b * d)) % nm
        return np.cos(2.0 * np.pi * w / nm + m * np.arctan2(c, d))
    if m % 6:
        return np.zeros(c.size)
    u = (n * (a * d + b * c - 2 * a * c - 2 * b * d)) % (2 * nm)
    return np.cos(np.pi * u / nm - m * np.arctan2(c * _SQRT3, 2 * d - c))


def _ring_of(z: complex) -> str:
    z = complex(z)
    if abs(z - 1j) < 1e-9:
        return "gauss"
    if abs(z - _RHO) < 1e-9 or abs(z - (_RHO - 1.0)) < 1e-9:
        return "eisenstein"
    raise DomainError("base point must be i or an order-3 elliptic point")


def f_kjr_coefficient(k: int, j: int, r: int, z, m: int,
                      cfg: PrecisionConfig = DEFAULT_CONFIG,
                      exponent: str = "imag"):
    """Index-m coefficient of the ideal-sum series attached to (k, j, r).

    Returns Im(z)^{-j} * sum over ideal classes of
    C_k * norm^{j-k/2} * (4 pi m)^r * exp(2 pi m Im(z) / norm).
    Index 0 is the calibration term used by the reciprocal-Eisenstein
    pipeline.  `exponent="literal"` replaces the real exponential with
    exp(2 pi i m z / norm) and returns the complex value; it exists so the
    convention can be falsified against the exact series oracle.
    """
    if k < 1 or j < 0 or r < 0 or m < 0:
        raise DomainError("need k >= 1 and j, r, m >= 0")
    if exponent not in ("imag", "literal"):
        raise DomainError("exponent must be 'imag' or 'literal'")
    ring = _ring_of(z)
    y = float(complex(z).imag)
    bound = int(cfg.cutoff("norm_bound"))
    c, d, nm, a, b = _ideal_arrays(ring, bound)
    nf = nm.astype(float)
    base = _c_array(ring, k, c, d, nm, a, b, m) * nf ** (j - k / 2.0)
    if exponent == "imag":
        base = base * np.exp(2.0 * math.pi * m * y / nf)
    else:
        base = base * np.exp(2j * math.pi * m * complex(z) / nf)
    if r:
        base = base * (4.0 * math.pi * m) ** r
    total = base.sum()
    if bound >= 4:
        drift = abs(total - base[nm <= bound // 2].sum())
        if drift > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
            raise StabilizationError(
                f"ideal sum moved by {drift:.3e} between norm bounds "
                f"{bound // 2} and {bound}; raise norm_bound")
    out = total * y ** (-j)
    return complex(out) if exponent == "literal" else float(out.real)


_BETA_CACHE: dict = {"trunc": -1, "series": None}


def beta_exact(n: int):
    """Exact rational q^n coefficient of the reciprocal weight-4 Eisenstein
    series, by series inversion."""
    if n < 0:
        raise DomainError("coefficient index must be nonnegative")
    if _BETA_CACHE["trunc"] < n:
        trunc = max(16, n + 4, 2 * _BETA_CACHE["trunc"])
        _BETA_CACHE["series"] = eisenstein_series(4, trunc).inverse()
        _BETA_CACHE["trunc"] = trunc
    return _BETA_CACHE["series"].coeff(n)


def ramanujan_expansion_1overE4(n: int, cfg: PrecisionConfig = DEFAULT_CONFIG,
                                exponent: str = "imag"):
    """Coefficient n of the reciprocal weight-4 Eisenstein series via the
    single-pole ideal-sum expansion.

    The overall constant is calibrated by matching the index-0 coefficient
    to 1 rather than computed from a derivative at the pole, so agreement
    with beta_exact at n >= 1 is a genuine check of the expansion.
    """
    if n < 0:
        raise DomainError("coefficient index must be nonnegative")
    s0 = f_kjr_coefficient(6, 0, 0, _RHO, 0, cfg)
    if not 0.1 < abs(s0) < 10.0:
        raise StabilizationError(
            f"calibration term {s0:.6e} is out of range; the expansion "
            "conventions no longer reproduce the constant coefficient")
    # 2/3 * a0 * s0 = 1: the pole sits at an order-3 point, so 2 e_1 = 2/3.
    a0 = 3.0 / (2.0 * s0)
    val = f_kjr_coefficient(6, 0, 0, _RHO, n, cfg, exponent=exponent)
    return (2.0 / 3.0) * a0 * val


_POLY_CACHE: dict = {}


def _kernel_polys(depth: int):
    """P_0..P_depth with (q d/dq)^r (1-q)^{-1} = P_r(q) / (1-q)^{r+1}."""
    polys = _POLY_CACHE.get(depth)
    if polys is None:
        polys = [np.array([1.0])]
        for r in range(depth):
            p = polys[-1]
            dp = p[1:] * np.arange(1, p.size) if p.size > 1 else np.zeros(0)
            nxt = np.zeros(p.size + 1)
            nxt[1:1 + dp.size] += dp            # X P'
            nxt[2:2 + dp.size] -= dp            # -X^2 P'
            nxt[1:1 + p.size] += (r + 1) * p    # (r+1) X P
            polys.append(nxt)
        _POLY_CACHE[depth] = polys
    return polys


def _completion_term(k: int, v: float, qb):
    """Antiholomorphic completion: 2k-1 exact conjugate-variable derivatives
    of the geometric kernel, evaluated below the real axis (no poles there)."""
    polys = _kernel_polys(2 * k - 2)
    one = 1.0 - qb
    acc = np.zeros_like(qb) if isinstance(qb, np.ndarray) else 0j
    coef = 1.0 + 0j
    for r in range(2 * k - 1):
        if r:
            coef *= (2j * v) * (2j * math.pi) / r
        acc = acc + coef * np.polyval(polys[r][::-1], qb) / one ** (r + 1)
    return acc


def h2k_kernel(k: int, N: int, z, tau, variant: str = "H",
               cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """Two-variable coset kernel of z-weight 2k on the level-N group.

    `variant="H"` is the bare coset sum of the geometric kernel; `"calH"`
    subtracts the finite antiholomorphic completion, which restores the
    weight (2-2k) transformation law in the second variable (the bare sum
    is already harmonic there, being holomorphic; what it lacks is
    modularity, by exactly the cuspidal content of the coset sum).  The
    sign of the completion is fixed empirically: subtracting reduces the
    tau-side modularity defect to the truncation floor, adding doubles it.
    Both variants cost one pass over the cosets; the tail beyond the
    lattice cutoff decays like the cutoff to the power 2-2k.
    """
    if k < 2:
        raise DomainError("weight parameter k must be at least 2")
    if N < 1:
        raise DomainError("level must be positive")
    if variant not in ("H", "calH"):
        raise DomainError("variant must be 'H' or 'calH'")
    pz = as_point(z)
    pt = as_point(tau)
    zc = complex(pz.x, pz.y)
    tc = complex(pt.x, pt.y)
    tb = tc.conjugate()
    wt = 2 * k
    q1 = cmath.exp(2j * math.pi * (tc - zc))
    if abs(1.0 - q1) < 1e-8:
        raise DomainError("tau sits on the singular set of the kernel")
    total = 1.0 / (1.0 - q1)
    if variant == "calH":
        total -= _completion_term(k, pt.y, cmath.exp(2j * math.pi * (tb - zc)))
    lam_max = float(cfg.cutoff("lattice_bound")) ** 2
    for c, d, lam, t, afrac in _lattice_blocks(N, pz.x, pz.y, lam_max):
        jac = _ipow(t + 1j * c * pz.y, -wt)
        mz = afrac - (t - 1j * c * pz.y) / (c * lam)
        qq = np.exp(2j * np.pi * (tc - mz))
        gap = np.abs(1.0 - qq)
        if gap.min() < 1e-8:
            raise DomainError("tau sits on the singular set of the kernel")
        vals = 1.0 / (1.0 - qq)
        if variant == "calH":
            vals = vals - _completion_term(k, pt.y,
                                           np.exp(2j * np.pi * (tb - mz)))
        total += (jac * vals).sum()
    return complex(total)


def raise_op(sampler, k: int, zz, n: int = 1, h: float = 1e-4) -> complex:
    """n-fold weight raising 2i d/dz + weight/Im(z), weights k, k+2, ...

    Derivatives are nested central differences with a common step, so the
    noise floor grows like h^{-n}; nesting is capped at 3.
    """
    if h <= 0:
        raise DomainError("step must be positive")
    if h < 1e-6:
        raise PrecisionError("step below the float differencing floor")
    if not 0 <= n <= 3:
        raise DomainError("nesting is supported for 0 <= n <= 3 only")
    w0 = complex(zz)
    if w0.imag - n * h <= 0:
        raise DomainError("stencil reaches the real axis; shrink h")

    def level(m):
        if m == 0:
            return sampler
        g = level(m - 1)
        kk = k + 2 * (m - 1)

        def out(w):
            dx = (g(w + h) - g(w - h)) / (2.0 * h)
            dy = (g(w + 1j * h) - g(w - 1j * h)) / (2.0 * h)
            # 2i d/dz = i d/dx + d/dy
            return 1j * dx + dy + kk * g(w) / w.imag

        return out

    return complex(level(n)(w0))
