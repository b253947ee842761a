"""Special functions for the expansion machinery.

Everything here is deterministic in (inputs, PrecisionConfig): float64 paths
for 53-bit configs, mpmath paths above that, and no hidden state.  Orders and
parameters are restricted to the small integer / half-integer ranges the rest
of the package actually uses, which keeps every routine a finite closed form
or a positive-term series with a provable tail bound.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp
import numpy as np

from .config import DEFAULT_CONFIG, DomainError, PrecisionConfig, PrecisionError, mp_workprec

__all__ = [
    "bessel_I",
    "incomplete_gamma",
    "incomplete_beta",
    "beta0_constant",
    "legendre_Q",
]

# float64 exp overflow; the mp path has no comparable ceiling
_FLOAT_EXP_LIMIT = 700.0


def _is_half_integer(alpha: float) -> bool:
    return abs(alpha - round(alpha - 0.5) - 0.5) < 1e-14


def bessel_I(alpha: float, x, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Modified Bessel function I_alpha(x) for alpha in [0, 3], x > 0.

    Half-integer orders use the sinh/cosh closed forms; other orders use the
    ascending series, summed until the tail is provably below rel_tol (all
    terms are positive, so the ratio test gives a rigorous bound).  Accepts a
    scalar or a numpy array for x on 53-bit configs.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 3.0:
        raise DomainError(f"order {alpha} outside supported range [0, 3]")
    if cfg.precision_bits <= 53:
        arr = np.asarray(x, dtype=float)
        if arr.size == 0:
            return arr.copy()
        if np.any(arr <= 0.0):
            raise DomainError("bessel_I requires x > 0")
        if float(arr.max()) > _FLOAT_EXP_LIMIT:
            raise PrecisionError("argument overflows 53-bit evaluation; raise precision_bits")
        out = _bessel_half_np(alpha, arr)
        if out is None:
            out = _bessel_series_np(alpha, arr, cfg.rel_tol)
        return float(out) if np.isscalar(x) or np.asarray(x).ndim == 0 else out
    return _bessel_mp(alpha, x, cfg)


def _bessel_half_np(alpha, arr):
    if not _is_half_integer(alpha):
        return None
    k = round(alpha - 0.5)
    # the k >= 1 closed forms cancel badly as x -> 0; series handles that range
    if k >= 1 and float(arr.min()) < 2.0:
        return None
    pref = np.sqrt(2.0 / (np.pi * arr))
    sh, ch = np.sinh(arr), np.cosh(arr)
    if k == 0:
        return pref * sh
    if k == 1:
        return pref * (ch - sh / arr)
    # k == 2, the largest half-integer order below 3
    return pref * ((1.0 + 3.0 / arr**2) * sh - 3.0 * ch / arr)


def _bessel_series_np(alpha, arr, rel_tol):
    q = arr * arr / 4.0
    term = np.power(arr / 2.0, alpha) / math.gamma(alpha + 1.0)
    acc = term.copy()
    stop = max(rel_tol / 8.0, 1e-18)
    for k in range(1, 100000):
        term = term * q / (k * (k + alpha))
        acc += term
        ratio = q / ((k + 1) * (k + 1 + alpha))
        if float(ratio.max()) <= 0.5 and float((term / acc).max()) < stop:
            # tail <= term * r/(1-r) <= term once the ratio falls below 1/2
            return acc
    raise PrecisionError("Bessel series failed to converge")


def _bessel_mp(alpha, x, cfg):
    with mp_workprec(cfg.precision_bits):
        xm = mp.mpf(x)
        if xm <= 0:
            raise DomainError("bessel_I requires x > 0")
        if _is_half_integer(alpha) and (round(alpha - 0.5) == 0 or xm >= 2):
            pref = mp.sqrt(2 / (mp.pi * xm))
            k = round(alpha - 0.5)
            if k == 0:
                return pref * mp.sinh(xm)
            if k == 1:
                return pref * (mp.cosh(xm) - mp.sinh(xm) / xm)
            return pref * ((1 + 3 / xm**2) * mp.sinh(xm) - 3 * mp.cosh(xm) / xm)
        al = mp.mpf(alpha)
        q = xm * xm / 4
        term = (xm / 2) ** al / mp.gamma(al + 1)
        acc = term
        eps = mp.mpf(2) ** (-(cfg.precision_bits + 4))
        for k in range(1, 1000000):
            term = term * q / (k * (k + al))
            acc += term
            if q / ((k + 1) * (k + 1 + al)) <= mp.mpf(0.5) and term < eps * acc:
                return acc
        raise PrecisionError("Bessel series failed to converge")


def incomplete_gamma(a: int, w, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Upper incomplete gamma for positive integer a <= 20.

    Exact finite form e^{-w} * sum_{j<a} (a-1)!/j! * w^j, valid for any real
    w including negative values.
    """
    if a != int(a) or not 1 <= int(a) <= 20:
        raise DomainError(f"incomplete_gamma needs integer a in [1, 20], got {a!r}")
    a = int(a)
    coeffs = [math.factorial(a - 1) // math.factorial(j) for j in range(a)]
    if cfg.precision_bits <= 53:
        w = float(w)
        if -w > _FLOAT_EXP_LIMIT or abs(w) > _FLOAT_EXP_LIMIT:
            raise PrecisionError("argument overflows 53-bit evaluation; raise precision_bits")
        poly = 0.0
        for c in reversed(coeffs):
            poly = poly * w + c
        return math.exp(-w) * poly
    with mp_workprec(cfg.precision_bits):
        wm = mp.mpf(w)
        poly = mp.mpf(0)
        for c in reversed(coeffs):
            poly = poly * wm + c
        return mp.exp(-wm) * poly


def beta0_constant(a: int, b: int) -> Fraction:
    """The exact rational constant relating the raw and beta0 variants.

    Sum over 0 <= j <= a-1, j != -b of binom(a-1, j) * (-1)^j / (j + b).
    """
    if a != int(a) or int(a) < 1:
        raise DomainError("a must be a positive integer")
    a, b = int(a), int(b)
    total = Fraction(0)
    for j in range(a):
        if j + b == 0:
            continue
        total += Fraction(math.comb(a - 1, j) * (-1) ** j, j + b)
    return total


def incomplete_beta(w, a: int, b: int, variant: str = "raw",
                    cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Incomplete beta integral int_0^w t^{a-1} (1-t)^{b-1} dt, integer a >= 1.

    Expanding t^{a-1} binomially in (1-t) reduces the integral to a finite
    sum, exact for any integer b; the j = -b term integrates to -log(1-w).
    variant "beta0" subtracts beta0_constant(a, b), which renders the w -> 1
    limit finite whenever the raw integral diverges only through the constant.
    """
    if variant not in ("raw", "beta0"):
        raise DomainError(f"unknown variant {variant!r}")
    if a != int(a) or int(a) < 1:
        raise DomainError("a must be a positive integer")
    a, b = int(a), int(b)
    if cfg.precision_bits <= 53:
        return _beta_sum(float(w), a, b, variant, math.log1p, math.expm1, 1.0)
    with mp_workprec(cfg.precision_bits):
        return _beta_sum(mp.mpf(w), a, b, variant, mp.log1p, mp.expm1, mp.mpf(1))


def _beta_sum(wv, a, b, variant, log1p, expm1, one):
    if not 0 <= wv <= 1:
        raise DomainError("w must lie in [0, 1]")
    if wv == 1 and b <= 0:
        raise DomainError("integral undefined at w = 1 for b <= 0")
    log1mw = log1p(-wv) if wv < 1 else None
    total = one * 0
    for j in range(a):
        coef = math.comb(a - 1, j) * (-1) ** j
        e = j + b
        if e == 0:
            total += coef * (-log1mw)
        elif wv == 1:
            total += coef * (one / e)
        else:
            # (1 - (1-w)^e)/e via expm1 to dodge cancellation at small w
            total += coef * (-expm1(e * log1mw) / e)
    if variant == "beta0":
        c = beta0_constant(a, b)
        total -= one * c.numerator / c.denominator
    return total


def legendre_Q(m: int, t, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Legendre function of the second kind Q_m(t) for t > 1, m <= 10.

    Forward recurrence from the Q_0, Q_1 closed forms.  The recurrence loses
    roughly (2m+1) * log2(t) bits to cancellation at large t, so evaluation
    runs at a correspondingly elevated internal precision.
    """
    if m != int(m) or not 0 <= int(m) <= 10:
        raise DomainError(f"legendre_Q needs integer m in [0, 10], got {m!r}")
    m = int(m)
    tf = float(t)
    if not tf > 1.0:
        raise DomainError("legendre_Q requires t > 1")
    extra = int((2 * m + 1) * math.log2(max(tf, 2.0))) + 30
    with mp_workprec(cfg.precision_bits + extra):
        tm = mp.mpf(t)
        ell = mp.log((tm + 1) / (tm - 1))
        q_prev = ell / 2
        if m == 0:
            out = q_prev
        else:
            q_cur = tm * ell / 2 - 1
            for j in range(1, m):
                q_prev, q_cur = q_cur, ((2 * j + 1) * tm * q_cur - j * q_prev) / (j + 1)
            out = q_cur
        return float(out) if cfg.precision_bits <= 53 else +out


def _legendre_q1_array(t: np.ndarray) -> np.ndarray:
    """Float64 Q_1 on arrays of t > 1, for summation hot loops.

    Absolute error is O(eps) per entry; fine for accumulating O(1) sums, not
    a substitute for legendre_Q when relative accuracy at large t matters.
    """
    t = np.asarray(t, dtype=float)
    return (t / 2.0) * np.log1p(2.0 / (t - 1.0)) - 1.0
