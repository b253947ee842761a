"""Evaluation of the weight-zero Hecke system j_{N,n}.

Four routes to the same family of values, kept deliberately independent so
they can arbitrate each other:

* an exact level-one oracle through Faber polynomials in J,
* the real-analytic Niebur Poincare series, tapered and extrapolated from
  s > 1 down to its harmonic limit,
* transfer relations (Hecke operator for indices coprime to the level,
  level lowering for indices dividing it),
* the Kloosterman-sum series at cusps and the large-index layer sum.

Float64/numpy carries the big lattice sums; mpmath carries the exact oracle
and the high-precision asymptotic comparisons.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import mpmath as mp
import numpy as np

from .config import (DEFAULT_CONFIG, DomainError, PrecisionConfig, PrecisionError,
                     StabilizationError, as_point, mp_workprec)
from .gamma0 import CuspRep, Mat2, divisor_sigma, divisors, kloosterman_cusp_zero_row, modinv_array
from .qseries import delta_and_j, evaluate_qseries, faber_polynomial
from .special import bessel_I

__all__ = [
    "LatticeDatum",
    "fundamental_domain_map",
    "j_exact_level1",
    "niebur_series",
    "niebur_frozen_sampler",
    "j_interior",
    "j_via_relations",
    "j_at_cusp",
    "j_asymptotic_main",
    "lattice_layers",
    "hecke_points",
]


# ---------------------------------------------------------------------------
# exact level-one oracle

def fundamental_domain_map(z) -> Mat2:
    """Modular matrix taking z into |Re| <= 1/2, |z| >= 1 (float guidance)."""
    zz = complex(z)
    M = Mat2.identity()
    for _ in range(256):
        k = round(zz.real)
        if k != 0:
            zz -= k
            M = Mat2(1, -k, 0, 1) @ M
        if abs(zz) < 1.0 - 1e-13:
            zz = -1.0 / zz
            M = Mat2(0, -1, 1, 0) @ M
        else:
            return M
    raise PrecisionError("fundamental-domain reduction did not terminate")


@lru_cache(maxsize=16)
def _j_series(order: int):
    return delta_and_j(order)[1]


@lru_cache(maxsize=64)
def _faber(n: int):
    return faber_polynomial(n)


def j_exact_level1(n: int, z, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """j_{1,n}(z) = F_n(J(z)) + 24 sigma_1(n), the certified exact route.

    z is first reduced into the fundamental domain, so the q-series for J
    converges at rate e^{-2 pi 0.866} or better; the series order and the
    precision budget are sized from the n-fold derivative amplification of
    the Faber polynomial, and a shortfall raises instead of degrading.
    """
    if n != int(n) or n < 1:
        raise DomainError("n must be a positive integer")
    n = int(n)
    pt = as_point(z)
    bits = cfg.precision_bits
    with mp_workprec(bits):
        zm = mp.mpc(pt.x, pt.y)
        M = fundamental_domain_map(complex(pt.x, pt.y))
        zs = M.act(zm)
        ys = float(mp.im(zs))
        log_j = 2.0 * math.pi * ys + 1.0          # |J(z*)| <~ e^{2 pi y*} (+ slack)
        log_scale = n * log_j
        if bits <= 53 and log_scale > 300.0:
            raise PrecisionError(
                f"magnitude exp({log_scale:.0f}) for n={n} at reduced height "
                f"{ys:.3f} is beyond the float64 path; raise precision_bits"
            )
        # rounding noise stays relative (the Faber Horner has no cancellation),
        # so the bit budget only has to cover the requested relative tolerance
        need_bits = math.log2(4.0 * n / cfg.rel_tol) + 6.0
        if bits < need_bits:
            raise PrecisionError(
                f"rel_tol {cfg.rel_tol:g} at n={n} needs ~{int(need_bits) + 1} bits; "
                f"cfg supplies {bits}"
            )
        # absolute error budget for J: target / |F_n'|, with a margin of 16
        log_amp = math.log(n) + (n - 1) * log_j
        log_target = max(
            math.log(cfg.abs_tol),
            math.log(cfg.rel_tol) + max(log_scale, 0.0),
        )
        log_jtol = log_target - log_amp - math.log(16.0)
        j_tol = math.exp(max(log_jtol, -700.0))
        if j_tol == 0.0:
            raise PrecisionError("J tolerance underflows float range")
        # predicted tail of the J series: coefficients grow like e^{4 pi sqrt(m)}
        order = 24
        while 4.0 * math.pi * math.sqrt(order) - 2.0 * math.pi * ys * order > log_jtol - 2.0:
            order *= 2
            if order > 1 << 14:
                raise PrecisionError("J series order exploded; raise precision or lower n")
        cfg_j = dataclasses.replace(cfg, abs_tol=j_tol, rel_tol=j_tol)
        jv = evaluate_qseries(_j_series(order), zs, cfg_j).value
        out = _faber(n)(jv) + 24 * divisor_sigma(1, n)
    return out if bits > 53 else complex(out)


# ---------------------------------------------------------------------------
# tapered lattice sums for the Niebur series

def _taper_weights(lam: np.ndarray, lam_max: float, lo: float) -> np.ndarray:
    """Smooth cutoff: 1 below lo*lam_max, 0 above lam_max, C-infinity between."""
    t = (lam / lam_max - lo) / (1.0 - lo)
    out = np.zeros_like(lam)
    out[t <= 0.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    # g(1-t)/(g(t)+g(1-t)) with g(t)=e^{-1/t}, folded into one exponential
    h = np.clip(1.0 / (1.0 - tm) - 1.0 / tm, -700.0, 700.0)
    out[mid] = 1.0 / (1.0 + np.exp(h))
    return out


def _lattice_blocks(N, x, y, lam_max, budget=2_000_000):
    """Yield (c, d, lam, cx+d, a/c) arrays for coprime rows with 0 < c, N|c.

    When a row's d-window is longer than c, inverses repeat mod c, so a unit
    table indexed by d mod c replaces per-element Euclid; the table's -1
    marker for non-units doubles as the coprimality filter.  All Euclid work
    in a chunk is batched into one vectorized call.
    """
    c_hi = int(math.floor(math.sqrt(lam_max) / y))
    rows = []
    for c in range(N, c_hi + 1, N):
        half = math.sqrt(max(lam_max - (c * y) ** 2, 0.0))
        lo_d = math.ceil(-c * x - half)
        hi_d = math.floor(-c * x + half)
        if hi_d >= lo_d:
            rows.append((c, lo_d, hi_d - lo_d + 1))
    start = 0
    while start < len(rows):
        stop, load = start, 0
        while stop < len(rows) and (stop == start or load + rows[stop][2] <= budget):
            load += rows[stop][2]
            stop += 1
        chunk = rows[start:stop]
        start = stop
        tables = _unit_tables([c for c, _, sz in chunk if c <= sz])
        dir_a, dir_m = [], []
        resids = []
        for c, lo_d, sz in chunk:
            rm = np.mod(np.arange(lo_d, lo_d + sz, dtype=np.int64), c)
            resids.append(rm)
            if c not in tables:
                dir_a.append(rm)
                dir_m.append(np.full(sz, c, dtype=np.int64))
        dir_inv = (modinv_array(np.concatenate(dir_a), np.concatenate(dir_m))
                   if dir_a else None)
        parts, pos = [], 0
        for (c, lo_d, sz), rm in zip(chunk, resids):
            if c in tables:
                inv = tables[c][rm]
            else:
                inv = dir_inv[pos:pos + sz]
                pos += sz
            ds = np.arange(lo_d, lo_d + sz, dtype=np.int64)
            keep = inv >= 0
            ds, inv = ds[keep], inv[keep]
            t = c * x + ds
            lam = t * t + (c * y) ** 2
            keep = lam <= lam_max
            ds, inv, t, lam = ds[keep], inv[keep], t[keep], lam[keep]
            if ds.size:
                parts.append((np.full(ds.size, c, dtype=np.int64),
                              ds, lam, t, inv / c))
        if parts:
            yield tuple(np.concatenate(cols) for cols in zip(*parts))


_TABLE_CACHE: dict = {}
_TABLE_CACHE_LOAD = 0
_TABLE_CACHE_BUDGET = 12_000_000      # int32 entries, ~48 MB


def _unit_tables(cs) -> dict:
    """d mod c -> d^{-1} mod c tables (non-units -1), one shared Euclid pass.

    Tables depend only on c, so they are cached across calls up to a global
    entry budget; oversized stragglers are rebuilt per call.
    """
    global _TABLE_CACHE_LOAD
    out = {c: _TABLE_CACHE[c] for c in cs if c in _TABLE_CACHE}
    missing = [c for c in cs if c not in out]
    if missing:
        sizes = np.asarray(missing, dtype=np.int64)
        inv = modinv_array(
            np.concatenate([np.arange(c, dtype=np.int64) for c in missing]),
            np.repeat(sizes, sizes))
        pos = 0
        for c in missing:
            tab = inv[pos:pos + c].astype(np.int32)
            pos += c
            out[c] = tab
            if _TABLE_CACHE_LOAD + c <= _TABLE_CACHE_BUDGET:
                _TABLE_CACHE[c] = tab
                _TABLE_CACHE_LOAD += c
    return out


_PHI_TERMS = 12


def _phi_coeffs(nu: float) -> np.ndarray:
    # I_nu(w) = (w/2)^nu / Gamma(nu+1) * sum c_k u^k with u = w^2/4
    cks = np.empty(_PHI_TERMS + 1)
    cks[0] = 1.0
    for k in range(_PHI_TERMS):
        cks[k + 1] = cks[k] / ((k + 1) * (nu + 1 + k))
    return cks


def _lam_power_set(lam: np.ndarray, s_values) -> list:
    """lam^{-s} per s; when 8s is integral, one eighth-root and a squaring
    ladder replace the per-s exp/log passes (the schedule s = 1 + 2^{-j}
    always lands here)."""
    ladder = {}
    out = []
    for s in s_values:
        p = int(round(8.0 * s))
        if abs(8.0 * s - p) < 1e-9 and 1 <= p <= 32:
            if 1 not in ladder:
                ladder[1] = lam ** -0.125
            acc = None
            bit = 1
            while bit <= p:
                if bit not in ladder:
                    ladder[bit] = ladder[bit >> 1] * ladder[bit >> 1]
                if p & bit:
                    acc = ladder[bit] if acc is None else acc * ladder[bit]
                bit <<= 1
            out.append(acc)
        else:
            out.append(lam ** (-float(s)))
    return out


def _interior_table(N, n, pt, s_values, lam_max, fracs, lo, cfg):
    """Tapered sums of the Niebur series for every (s, cutoff fraction) pair.

    One pass over the lattice: phases and log(lam) are shared across s, the
    radial profile is shared across cutoff fractions, so the full table
    costs barely more than a single evaluation.
    """
    if cfg.precision_bits > 53:
        raise PrecisionError("the tapered continuation is a float64 route; "
                             "use precision_bits <= 53")
    x, y = pt.x, pt.y
    if fracs[0] * lam_max * lo <= 4.0:
        raise DomainError("coset bound too small for the taper floor")
    pny = math.pi * n * y
    if 2.0 * pny > 690.0:
        raise PrecisionError("principal term overflows float64; this route is 53-bit only")
    sums = np.zeros((len(s_values), len(fracs)), dtype=complex)
    coeffs = [_phi_coeffs(s - 0.5) for s in s_values]
    for cs, ds, lam, t, afrac in _lattice_blocks(N, x, y, lam_max):
        re_mz = afrac - t / (cs * lam)
        ph = np.exp((-2j * np.pi * n) * re_mz)
        u = (pny / lam) ** 2
        big = np.nonzero(u > 1.0)[0]
        lam_pows = _lam_power_set(lam, s_values)
        tapers = [_taper_weights(lam, f * lam_max, lo) for f in fracs]
        umax = float(u.max())
        for si, s in enumerate(s_values):
            nu = s - 0.5
            cks = coeffs[si]
            # first dropped term below 1e-19 of the leading 1
            K = 1
            while K < _PHI_TERMS and cks[K] * umax**K > 1e-19:
                K += 1
            poly = np.full(lam.shape, cks[K])
            for k in range(K - 1, -1, -1):
                poly = poly * u + cks[k]
            radial = (math.sqrt(y) * pny**nu / math.gamma(nu + 1.0)) \
                * lam_pows[si] * poly
            if big.size:
                lam_b = lam[big]
                radial[big] = np.sqrt(y / lam_b) * bessel_I(nu, 2.0 * pny / lam_b, cfg)
            tr = radial * ph.real
            ti = radial * ph.imag
            for fi, w in enumerate(tapers):
                sums[si, fi] += complex(np.dot(w, tr), np.dot(w, ti))
    base_ph = complex(np.exp(-2j * np.pi * n * x))
    for si, s in enumerate(s_values):
        nu = s - 0.5
        ident = base_ph * math.sqrt(y) * bessel_I(nu, 2.0 * pny, cfg)
        sums[si, :] += ident
    return sums


def _lam_max(pt, cfg: PrecisionConfig) -> float:
    bound = cfg.cutoff("coset_bound")
    if bound is None:
        raise DomainError("cfg.cutoffs must supply coset_bound")
    return float(bound * pt.y) ** 2


def niebur_series(N: int, n: int, z, s: float, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """Tapered truncation of the Niebur Poincare series F_{N,-n,s}(z), s > 1.

    Averages over the configured cutoff fractions; their spread is the
    empirical tail certificate and exceeding tolerance raises.
    """
    if s <= 1.0:
        raise DomainError("absolute convergence requires s > 1")
    if n < 1 or N < 1:
        raise DomainError("need N >= 1 and n >= 1")
    pt = as_point(z)
    table = _interior_table(N, n, pt, [float(s)], _lam_max(pt, cfg),
                            cfg.cutoff_fracs, cfg.taper_lo, cfg)
    vals = table[0]
    mean = complex(vals.mean())
    spread = float(np.max(np.abs(vals - mean)))
    if spread > 4.0 * max(cfg.abs_tol, cfg.rel_tol * abs(mean), 1e-12):
        raise StabilizationError(
            f"cutoff-fraction spread {spread:.3e} exceeds tolerance; raise coset_bound"
        )
    return mean


def niebur_frozen_sampler(N: int, n: int, z0, s: float,
                          cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Closure evaluating the tapered series with lattice frozen at z0.

    Enumeration and taper weights are fixed once, at z0, so the returned
    function is a finite sum of exact eigenfunctions: finite differences of
    it converge to derivatives of the truncated sum itself, with no cutoff
    jitter.  Used by the harmonicity and eigenvalue checks.
    """
    pt0 = as_point(z0)
    lam_max = _lam_max(pt0, cfg)
    lo = cfg.taper_lo
    nu = float(s) - 0.5
    frozen = []
    for cs, ds, lam, t, afrac in _lattice_blocks(N, pt0.x, pt0.y, lam_max):
        w = _taper_weights(lam, lam_max, lo)
        keep = w > 0.0
        frozen.append((cs[keep], ds[keep], afrac[keep], w[keep]))

    def sample(z) -> complex:
        p = as_point(z)
        x, y = p.x, p.y
        total = complex(np.exp(-2j * np.pi * n * x)) * math.sqrt(y) \
            * bessel_I(nu, 2.0 * math.pi * n * y, cfg)
        for cs, ds, afrac, w in frozen:
            t = cs * x + ds
            lam = t * t + (cs * y) ** 2
            re_mz = afrac - t / (cs * lam)
            im_mz = y / lam
            ph = np.exp((-2j * np.pi * n) * re_mz)
            radial = np.sqrt(im_mz) * bessel_I(nu, 2.0 * math.pi * n * im_mz, cfg)
            total += complex(np.dot(w, radial * ph.real), np.dot(w, radial * ph.imag))
        return total

    return sample


def _richardson_weights(eps):
    ws = []
    for k, ek in enumerate(eps):
        w = 1.0
        for j, ej in enumerate(eps):
            if j != k:
                w *= ej / (ej - ek)
        ws.append(w)
    return ws


def j_interior(N: int, n: int, z, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """2 pi sqrt(n) times the s -> 1 continuation of the Niebur series.

    Evaluates the tapered series at s = 1 + eps along the configured
    schedule and extrapolates to eps = 0 by Richardson weights; the spread
    of the extrapolant across cutoff fractions is the convergence
    certificate.
    """
    if n < 1 or N < 1:
        raise DomainError("need N >= 1 and n >= 1")
    if not cfg.continuation_schedule:
        raise DomainError("continuation schedule must be nonempty")
    pt = as_point(z)
    s_vals = [1.0 + e for e in cfg.continuation_schedule]
    table = _interior_table(N, n, pt, s_vals, _lam_max(pt, cfg),
                            cfg.cutoff_fracs, cfg.taper_lo, cfg)
    ws = _richardson_weights(cfg.continuation_schedule)
    pref = 2.0 * math.pi * math.sqrt(n)
    per_frac = pref * np.tensordot(np.asarray(ws), table, axes=(0, 0))
    value = complex(per_frac.mean())
    spread = float(np.max(np.abs(per_frac - value)))
    if spread > 0.01 * max(1.0, abs(value)):
        raise StabilizationError(
            f"extrapolation spread {spread:.3e} at N={N}, n={n}; "
            "raise coset_bound or extend the schedule"
        )
    return value


# ---------------------------------------------------------------------------
# transfer relations

def hecke_points(n: int, z):
    """Evaluation points (a z + b) / d over a d = n, b mod d, matching the
    normalization of qseries.hecke_weight0 (plain sum, no prefactor)."""
    pts = []
    for a in divisors(n):
        d = n // a
        for b in range(d):
            pts.append((a * z + b) / d)
    return pts


def j_via_relations(N: int, n: int, z, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """j_{N,n} through the divisor and coprime-index transfer rules.

    n splits as n1 * n2 with n1 carrying every prime shared with N and n2
    coprime to N.  n1 must divide N (level lowering j_{N,n1} = j_{N/n1,1}
    at n1 z); the coprime part is applied as the pointwise Hecke sum.  Any
    other pattern is refused rather than guessed.
    """
    if n < 1 or N < 1:
        raise DomainError("need N >= 1 and n >= 1")
    n1 = 1
    rest = n
    while (g := gcd(rest, N)) > 1:
        n1 *= g
        rest //= g
    n2 = rest
    if N % n1 != 0:
        raise DomainError(
            f"unsupported pattern: shared part {n1} of n={n} does not divide N={N}"
        )
    sub_level = N // n1

    def lowered(w):
        if sub_level == 1:
            return j_exact_level1(1, as_point(n1 * complex(w)), cfg)
        return j_interior(sub_level, 1, n1 * complex(w), cfg)

    zc = complex(as_point(z).as_complex)
    if n2 == 1:
        return lowered(zc)
    total = 0j
    for w in hecke_points(n2, zc):
        total += lowered(w)
    return total


# ---------------------------------------------------------------------------
# cusp values

def j_at_cusp(N: int, n: int, rho: CuspRep, cfg: PrecisionConfig = DEFAULT_CONFIG) -> float:
    """Kloosterman-series value of j_{N,n} at a cusp, Cesaro smoothed.

    Partial sums of K(0,-n;c)/c^2 oscillate; the value is the mean of the
    trailing 20 percent of them, and the drift between the two halves of
    that window is the stabilization certificate.
    """
    if n < 1:
        raise DomainError("n must be positive")
    c_max = cfg.cutoff("c_max")
    if c_max is None:
        raise DomainError("cfg.cutoffs must supply c_max")
    c_max = int(c_max)
    row = kloosterman_cusp_zero_row(N, rho, -n, c_max)
    cs = np.arange(0, c_max + 1, dtype=float)
    cs[0] = 1.0
    partial = np.cumsum(row / cs**2)[1:]
    w0 = max(int(0.8 * c_max), 1)
    window = partial[w0:]
    if window.size < 8:
        raise DomainError("c_max too small for a smoothing window")
    pref = 4.0 * math.pi**2 * n / rho.width
    value = pref * complex(window.mean())
    half = window.size // 2
    drift = abs(pref * (window[:half].mean() - window[half:].mean()))
    if drift > max(2e-4 * max(1.0, abs(value)), 40.0 * cfg.abs_tol):
        raise StabilizationError(
            f"cusp series drift {drift:.3e} at c_max={c_max}; not stabilized"
        )
    if abs(value.imag) > max(1e-6 * max(1.0, abs(value)), 40.0 * cfg.abs_tol):
        raise PrecisionError(f"cusp value has non-negligible imaginary part {value.imag:.3e}")
    return float(value.real)


# ---------------------------------------------------------------------------
# large-index asymptotic layers

@dataclass(frozen=True)
class LatticeDatum:
    """One norm layer lambda with its solutions and completion-checked phases."""

    lam: float
    solutions: tuple
    phases: tuple


def _phase_of(c, d, n, lam, zsq, x, exp_fn):
    """e(-(n/lam) r_z(c,d)) for the canonical completion, rechecked with a
    second completion (a, b) -> (a + c, b + d)."""
    if c == 0:
        a, b = 1, 0
    else:
        a = pow(d % c, -1, c) if c > 1 else 0
        b = (a * d - 1) // c
    r = a * c * zsq + (a * d + b * c) * x + b * d
    first = exp_fn(-(n / lam) * r)
    r2 = (a + c) * c * zsq + ((a + c) * d + (b + d) * c) * x + (b + d) * d
    second = exp_fn(-(n / lam) * r2)
    if abs(first - second) > 1e-9:
        raise PrecisionError(
            f"phase not completion-invariant at (c,d)=({c},{d}): {abs(first - second):.3e}"
        )
    return first


def lattice_layers(N: int, n: int, z, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """All norm layers lambda <= n of the quadratic form |cz+d|^2, as
    LatticeDatum records (admissible rows: N|c, gcd(c,d)=1, c=0 -> d=+1)."""
    if n < 1:
        raise DomainError("n must be positive")
    pt = as_point(z)
    use_mp = cfg.precision_bits > 53
    if use_mp:
        zm = mp.mpc(pt.x, pt.y)
        zsq, x = abs(zm) ** 2, mp.mpf(pt.x)
        exp_fn = lambda t: mp.e ** (2j * mp.pi * t)
    else:
        zsq, x = pt.x**2 + pt.y**2, pt.x
        exp_fn = lambda t: np.exp(2j * np.pi * t)
    rows = [(0, 1)]
    c = N
    while (c * pt.y) ** 2 <= n + 1e-9:
        half = math.sqrt(max(n + 1e-9 - (c * pt.y) ** 2, 0.0))
        for d in range(math.ceil(-c * pt.x - half), math.floor(-c * pt.x + half) + 1):
            if gcd(c, d) == 1:
                rows.append((c, d))
        c += N
    entries = []
    for c, d in rows:
        lam = float((c * pt.x + d) ** 2 + (c * pt.y) ** 2)
        if lam <= n + 1e-9:
            entries.append((lam, c, d))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    ym = mp.mpf(pt.y) if use_mp else pt.y
    layers = []
    i = 0
    while i < len(entries):
        j = i + 1
        while j < len(entries) and entries[j][0] - entries[i][0] <= 1e-9 * max(1.0, entries[i][0]):
            j += 1
        sols, phases = [], []
        for lam, c, d in entries[i:j]:
            lam_exact = (c * x + d) ** 2 + (c * ym) ** 2
            sols.append((c, d))
            phases.append(_phase_of(c, d, n, lam_exact, zsq, x, exp_fn))
        layers.append(LatticeDatum(entries[i][0], tuple(sols), tuple(phases)))
        i = j
    return layers


def j_asymptotic_main(N: int, n: int, z, cfg: PrecisionConfig = DEFAULT_CONFIG,
                      mode: str = "full"):
    """Main-term approximation to j_{N,n} for large n.

    full: sum of e(-(n/lam) r_z(c,d)) e^{2 pi n Im z / lam} over all layers
    lam <= n.  dominant: the single leading exponential plus the unit-norm
    correction ring.
    """
    if mode not in ("full", "dominant"):
        raise DomainError(f"unknown mode {mode!r}")
    pt = as_point(z)
    use_mp = cfg.precision_bits > 53
    if not use_mp and 2.0 * math.pi * n * pt.y > 690.0:
        raise PrecisionError("growth factor overflows float64; raise precision_bits")
    with mp_workprec(cfg.precision_bits):
        if mode == "dominant":
            if use_mp:
                zm = mp.mpc(pt.x, pt.y)
                total = mp.e ** (-2j * mp.pi * n * zm)
                ring = [e for e in lattice_layers(N, min(n, 2), z, cfg)
                        if abs(e.lam - 1.0) <= 1e-9][0]
                for (c, d), _ in zip(ring.solutions, ring.phases):
                    if c == 0:
                        continue
                    a = pow(d % c, -1, c) if c > 1 else 0
                    total += mp.e ** (2j * mp.pi * mp.mpf(n * (d - a)) / c) \
                        * mp.e ** (2j * mp.pi * n * mp.conj(zm))
                return total
            zc = complex(pt.x, pt.y)
            total = np.exp(-2j * np.pi * n * zc)
            ring = [e for e in lattice_layers(N, min(n, 2), z, cfg)
                    if abs(e.lam - 1.0) <= 1e-9][0]
            for (c, d) in ring.solutions:
                if c == 0:
                    continue
                a = pow(d % c, -1, c) if c > 1 else 0
                total += np.exp(2j * np.pi * n * (d - a) / c) * np.exp(2j * np.pi * n * zc.conjugate())
            return complex(total)
        layers = lattice_layers(N, n, z, cfg)
        if use_mp:
            # growth recomputed per solution at full precision, so clustered
            # layers that are only float-close stay exact
            total = mp.mpc(0)
            xm, y = mp.mpf(pt.x), mp.mpf(pt.y)
            for datum in layers:
                for (c, d), phase in zip(datum.solutions, datum.phases):
                    lam = (c * xm + d) ** 2 + (c * y) ** 2
                    total += phase * mp.e ** (2 * mp.pi * n * y / lam)
            return total
        total = 0j
        for datum in layers:
            grow = math.exp(2.0 * math.pi * n * pt.y / datum.lam)
            total += grow * sum(datum.phases)
        return complex(total)
