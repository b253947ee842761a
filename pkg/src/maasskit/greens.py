"""Binary quadratic form classes, their weight-k class sums, and higher
Green's functions with the paired-root inner-product constant.

The Green's function is realized as an automorphic sum of Legendre functions
of the second kind in the hyperbolic-distance variable.  Terms are included
by a cap on that variable rather than on matrix entries, so the included set
is intrinsic to the point pair: group invariance and symmetry then hold
exactly (term bijection), and only the eigenvalue, decay, and singularity
checks see the truncation tail, which decays like one over the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import (DEFAULT_CONFIG, DomainError, PrecisionConfig,
                     StabilizationError, as_point)
from .hecke import _lattice_blocks

__all__ = [
    "QuadFormClass",
    "reduced_forms",
    "form_root",
    "f_class",
    "green_eval",
    "inner_product_rhs",
]


@dataclass(frozen=True)
class QuadFormClass:
    """An equivalence class of positive definite integral forms.

    `disc` is the (negative) discriminant, `rep` the Gauss-reduced
    representative, and `class_list` the reduced representatives of every
    class of the same discriminant, so a class can reach its companions.
    """

    disc: int
    rep: tuple
    class_list: tuple


def _reduce(a: int, b: int, c: int):
    """Gauss reduction of a positive definite form to |b| <= a <= c with
    b >= 0 on either boundary."""
    while True:
        if not -a < b <= a:
            t = (a - b) // (2 * a)
            c = a * t * t + b * t + c
            b = b + 2 * t * a
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return a, b, c


def reduced_forms(D: int) -> list:
    """One reduced representative per class of discriminant -D, sorted."""
    if D < 1 or D % 4 not in (0, 3):
        raise DomainError(f"-{D} is not a negative discriminant")
    reps = []
    a_max = math.isqrt(D // 3) if D >= 3 else 1
    for a in range(1, a_max + 1):
        for b in range(-a, a + 1):
            num = b * b + D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            reps.append((a, b, c))
    reps.sort()
    handle = tuple(reps)
    return [QuadFormClass(-D, rep, handle) for rep in handle]


def form_root(Q) -> complex:
    """Upper half-plane root of A X^2 + B X + C."""
    a, b, c = (int(v) for v in Q)
    disc = b * b - 4 * a * c
    if a <= 0 or disc >= 0:
        raise DomainError("form must be positive definite")
    return complex(-b, math.sqrt(-disc)) / (2 * a)


def _f_class_with_tail(k: int, cls: QuadFormClass, tau, cfg: PrecisionConfig):
    if k < 2:
        raise DomainError("class sums need weight k >= 2 for convergence")
    if not isinstance(cls, QuadFormClass):
        raise DomainError("expected a QuadFormClass (see reduced_forms)")
    D = -cls.disc
    bound = int(cfg.cutoff("lattice_bound"))
    tc = complex(tau)
    aa, cc = np.meshgrid(np.arange(1, bound + 1), np.arange(1, bound + 1),
                         indexing="ij")
    s = 4 * aa * cc - D
    root = np.sqrt(np.maximum(s, 0)).round().astype(np.int64)
    sq = (s >= 0) & (root * root == s)
    cand = np.stack([aa[sq], cc[sq], root[sq]], axis=1)
    total = 0j
    half = 0j
    half_bound = bound // 2
    for a, c, r in cand:
        bs = (r,) if r == 0 else (r, -r)
        for b in bs:
            if _reduce(int(a), int(b), int(c)) != cls.rep:
                continue
            q = (a * tc + b) * tc + c
            if abs(q) < 1e-10:
                raise DomainError("tau is numerically a root of a class form")
            term = q ** (-k)
            total += term
            if a <= half_bound and c <= half_bound:
                half += term
    scale = float(D) ** (k / 2.0)
    return scale * total, scale * abs(total - half)


def f_class(k: int, cls: QuadFormClass, tau,
            cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """Weight-k sum of Q(tau, 1)^{-k} over one form class, with the
    discriminant power that makes distinct discriminants comparable.

    Forms are enumerated over the box max(A, C) <= lattice_bound and kept
    when they reduce to the class representative.  The tail of that box
    shrinks like bound^(1-k), so at k=2 the value carries percent-level
    truncation at moderate bounds; the half-versus-full box drift measures
    it, and the sum is rejected only when that drift stops being small
    against the value itself.
    """
    val, tail = _f_class_with_tail(k, cls, tau, cfg)
    if tail > 0.05 * max(abs(val), 1e-30):
        raise StabilizationError(
            f"class sum drift {tail:.3e} against |value| {abs(val):.3e}; "
            "raise lattice_bound")
    return val


# -- Legendre Q on (1, inf) ---------------------------------------------------

def _legendre_q_array(n: int, x: np.ndarray) -> np.ndarray:
    """Q_n on x > 1: log closed forms near 1, hypergeometric tail beyond.

    The forward recurrence is only used on x < 2 where the first-kind
    contamination stays comparable to rounding for the small n used here.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x < 2.0
    if lo.any():
        xl = x[lo]
        el = 0.5 * np.log((xl + 1.0) / (xl - 1.0))
        q0, q1 = el, xl * el - 1.0
        for m in range(1, n):
            q0, q1 = q1, ((2 * m + 1) * xl * q1 - m * q0) / (m + 1)
        out[lo] = q1 if n else q0
    hi = ~lo
    if hi.any():
        xh = x[hi]
        t = 1.0 / (xh * xh)
        # 2F1((n+1)/2, (n+2)/2; n+3/2; 1/x^2), term ratio < 1/4
        term = np.ones_like(xh)
        acc = np.ones_like(xh)
        j = 0
        while True:
            ratio = ((n + 1 + 2 * j) * (n + 2 + 2 * j)
                     / (4.0 * (j + 1) * (n + 1.5 + j)))
            term = term * ratio * t
            acc += term
            j += 1
            if term.max() < 1e-17 or j > 60:
                break
        pref = (math.sqrt(math.pi) * math.gamma(n + 1.0)
                / (2.0 ** (n + 1) * math.gamma(n + 1.5)))
        out[hi] = pref * acc * xh ** (-n - 1)
    return out


def green_eval(k: int, N: int, z, zz,
               cfg: PrecisionConfig = DEFAULT_CONFIG) -> float:
    """Higher Green's function on level N at a point pair.

    The group sum runs over matrices modulo sign whose distance argument
    x = cosh(hyperbolic distance) stays below the `green_cap` cutoff, and
    each contributes -Q_{k-1}(x).  This is half the textbook -2 Q kernel;
    the halving makes the diagonal singularity exactly log of the local
    coordinate at generic points, which is the normalization the axioms
    demand.  Elliptic base points still carry their stabilizer multiple.
    """
    if k < 2:
        raise DomainError("Green's functions need k >= 2")
    if N < 1:
        raise DomainError("level must be positive")
    pz = as_point(z)
    pw = as_point(zz)
    cap = float(cfg.cutoff("green_cap", 20_000.0))
    inv_2yy = 1.0 / (2.0 * pz.y * pw.y)
    n = k - 1

    def row_sum(w0x: float, scale: float) -> float:
        # scale = 1/|c zz + d|^2 so Im(gamma zz) = pw.y * scale
        alpha = inv_2yy / scale
        vert2 = (pz.y - pw.y * scale) ** 2
        reach = (cap - 1.0) / alpha - vert2
        if reach < 0.0:
            return 0.0
        w = math.sqrt(reach)
        t0 = pz.x - w0x
        ts = np.arange(math.ceil(t0 - w), math.floor(t0 + w) + 1.0)
        if not ts.size:
            return 0.0
        xs = 1.0 + alpha * ((t0 - ts) ** 2 + vert2)
        xs = xs[xs <= cap]
        if not xs.size:
            return 0.0
        if xs.min() < 1.0 + 1e-10:
            raise DomainError("points are on or near the same orbit")
        return float(_legendre_q_array(n, xs).sum())

    total = row_sum(pw.x, 1.0)
    lam_max = 2.0 * pw.y * cap / pz.y + 4.0
    for c, d, lam, t, afrac in _lattice_blocks(N, pw.x, pw.y, lam_max):
        gz = afrac - (t - 1j * c * pw.y) / (c * lam)
        for wx, lm in zip(gz.real, lam):
            total += row_sum(wx, 1.0 / lm)
    return -total


def _elliptic_weight(disc: int) -> int:
    # Stabilizer order in the projective group: 2 at the order-4 point,
    # 3 at the order-3 point, 1 elsewhere.
    if disc == -3:
        return 3
    if disc == -4:
        return 2
    return 1


def inner_product_rhs(k: int, cls1: QuadFormClass, cls2: QuadFormClass,
                      N: int = 1,
                      cfg: PrecisionConfig = DEFAULT_CONFIG) -> float:
    """Pairing constant times the Green's function at the two class roots.

    Only the full modular group is wired; the statement pairs classes of
    (possibly different) negative discriminants, and equivalent classes
    are rejected because the Green's function diverges on the diagonal.
    """
    if N != 1:
        raise DomainError("the paired-root evaluation is wired for N=1 only")
    if k < 2:
        raise DomainError("need k >= 2")
    for cls in (cls1, cls2):
        if not isinstance(cls, QuadFormClass):
            raise DomainError("expected QuadFormClass inputs")
    if cls1.disc == cls2.disc and cls1.rep == cls2.rep:
        raise DomainError("classes must be distinct")
    t1 = form_root(cls1.rep)
    t2 = form_root(cls2.rep)
    pref = ((-1.0) ** k * math.sqrt(math.pi) * math.gamma(k - 0.5)
            / (2.0 ** k * math.factorial(k - 1)))
    e1 = _elliptic_weight(cls1.disc)
    e2 = _elliptic_weight(cls2.disc)
    return pref / (e1 * e2) * green_eval(k, 1, t1, t2, cfg)
