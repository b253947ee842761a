"""Exact arithmetic of q-expansions.

Laurent series in q = e^{2 pi i tau / ell} with exact rational coefficients:
Eisenstein series, Delta, the normalized Hauptmodul J, weight-0 Hecke
operators, Faber polynomials, and the two exact two-variable identities
(denominator_check, akn_check).

Truncation is tracked honestly: every arithmetic result carries the minimum
validity order implied by its inputs, never silently more.  This matters for
powers of J (min_exp -1), where each multiplication loses one order; callers
that need J^k correct down to the constant term must supply enough input
order, and coefficient reads beyond the tracked order raise.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath as mp

from .config import DEFAULT_CONFIG, DomainError, PrecisionError, PrecisionConfig, mp_workprec

Rat = Fraction


def _sigma(k: int, n: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


class QSeries:
    """Truncated Laurent series sum_{n=min_exp}^{trunc} a_n q^{n/ell}."""

    __slots__ = ("ell", "min_exp", "coeffs", "trunc")

    def __init__(self, ell: int, min_exp: int, coeffs: Sequence, trunc: int):
        if ell < 1:
            raise DomainError("width must be positive")
        if trunc - min_exp + 1 != len(coeffs):
            raise DomainError("coefficient count does not match exponent range")
        self.ell = ell
        self.min_exp = min_exp
        self.coeffs = list(coeffs)
        self.trunc = trunc

    # -- construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, value, trunc: int, ell: int = 1) -> "QSeries":
        c = [Fraction(0)] * (trunc + 1)
        c[0] = Fraction(value) if not isinstance(value, (complex, mp.mpc, mp.mpf)) else value
        return cls(ell, 0, c, trunc)

    @classmethod
    def from_dict(cls, d: dict, trunc: int, ell: int = 1) -> "QSeries":
        if d:
            lo = min(d)
        else:
            lo = 0
        coeffs = [d.get(e, Fraction(0)) for e in range(lo, trunc + 1)]
        return cls(ell, lo, coeffs, trunc)

    # -- basic access ---------------------------------------------------------

    def coeff(self, n: int):
        """Coefficient of q^{n/ell}; reading past the tracked order raises."""
        if n > self.trunc:
            raise PrecisionError(
                f"coefficient {n} requested but series only valid to {self.trunc}")
        if n < self.min_exp:
            return Fraction(0)
        return self.coeffs[n - self.min_exp]

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.min_exp + i, c

    def _trimmed(self) -> "QSeries":
        lo = self.min_exp
        i = 0
        while i < len(self.coeffs) - 1 and not self.coeffs[i]:
            i += 1
        return QSeries(self.ell, lo + i, self.coeffs[i:], self.trunc)

    def __repr__(self):
        head = {e: c for e, c in list(self.items())[:4]}
        return f"QSeries(ell={self.ell}, O(q^{self.trunc + 1}), head={head})"

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        lo = min(self.min_exp, other.min_exp)
        hi = min(self.trunc, other.trunc)
        return self.ell == other.ell and all(
            self.coeff(e) == other.coeff(e) for e in range(lo, hi + 1))

    # -- arithmetic (honest truncation propagation) ---------------------------

    def _check_width(self, other: "QSeries"):
        if self.ell != other.ell:
            raise DomainError("width mismatch")

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc, self.ell)
        self._check_width(other)
        trunc = min(self.trunc, other.trunc)
        lo = min(self.min_exp, other.min_exp)
        coeffs = [self.coeff(e) + other.coeff(e) for e in range(lo, trunc + 1)]
        return QSeries(self.ell, lo, coeffs, trunc)

    def __neg__(self):
        return QSeries(self.ell, self.min_exp, [-c for c in self.coeffs], self.trunc)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other, self.trunc, self.ell)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            out = QSeries(self.ell, self.min_exp,
                          [c * other for c in self.coeffs], self.trunc)
            return out
        self._check_width(other)
        a, b = self._trimmed(), other._trimmed()
        # product coefficients are complete only up to this order
        trunc = min(a.trunc + b.min_exp, b.trunc + a.min_exp)
        lo = a.min_exp + b.min_exp
        n = trunc - lo + 1
        if n <= 0:
            raise PrecisionError("product has no valid coefficients at this truncation")
        out = [Fraction(0)] * n
        for i, ca in enumerate(a.coeffs):
            if not ca:
                continue
            ea = a.min_exp + i
            jmax = min(len(b.coeffs), trunc - ea - b.min_exp + 1)
            for j in range(jmax):
                cb = b.coeffs[j]
                if cb:
                    out[ea + b.min_exp + j - lo] += ca * cb
        return QSeries(self.ell, lo, out, trunc)

    __rmul__ = __mul__
    __radd__ = __add__

    def inverse(self) -> "QSeries":
        """Laurent inversion; validity shrinks by 2*min_exp of the input."""
        a = self._trimmed()
        lead = a.coeffs[0]
        if not lead:
            raise DomainError("division by series with zero leading coefficient")
        m = a.min_exp
        rel = a.trunc - m          # relative order of the unit part
        inv = [Fraction(0)] * (rel + 1)
        inv[0] = Fraction(1, 1) / lead if isinstance(lead, Fraction) else 1 / lead
        for k in range(1, rel + 1):
            s = sum(a.coeffs[j] * inv[k - j]
                    for j in range(1, min(k, len(a.coeffs) - 1) + 1))
            inv[k] = -s * inv[0]
        return QSeries(self.ell, -m, inv, rel - m)

    def __truediv__(self, other):
        if not isinstance(other, QSeries):
            return self * (Fraction(1, 1) / Fraction(other))
        return self * other.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise DomainError("only nonnegative integer powers")
        out = QSeries.constant(1, self.trunc, self.ell)
        for _ in range(k):
            out = out * self
        return out

    # -- serialization (External Interfaces contract) -------------------------

    def to_json(self) -> dict:
        def enc(c):
            if isinstance(c, Fraction):
                return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            return str(c)
        return {"ell": self.ell, "min_exp": self.min_exp,
                "coeffs": [enc(c) for c in self.coeffs], "trunc": self.trunc}

    @classmethod
    def from_json(cls, obj: dict) -> "QSeries":
        coeffs = [Fraction(s) for s in obj["coeffs"]]
        return cls(int(obj["ell"]), int(obj["min_exp"]), coeffs, int(obj["trunc"]))


# -- classical expansions ----------------------------------------------------

_EIS_CONST = {2: -24, 4: 240, 6: -504}
_EIS_POWER = {2: 1, 4: 3, 6: 5}


def eisenstein_series(k: int, M: int) -> QSeries:
    """E_k for k in {2,4,6}: 1 + const * sum sigma_{k-1}(n) q^n, exact."""
    if k not in _EIS_CONST:
        raise DomainError(f"unsupported Eisenstein weight {k}")
    if M < 0:
        raise DomainError("truncation order must be >= 0")
    c = _EIS_CONST[k]
    p = _EIS_POWER[k]
    coeffs = [Fraction(1)] + [Fraction(c * _sigma(p, n)) for n in range(1, M + 1)]
    return QSeries(1, 0, coeffs, M)


def delta_and_j(M: int) -> tuple[QSeries, QSeries]:
    """Delta = q prod (1-q^n)^24 and J = E4^3/Delta - 744, both valid to q^M."""
    if M < 0:
        raise DomainError("truncation order must be >= 0")
    # internal bump: J = E4^3 * Delta^{-1} loses two orders through the inversion
    Mi = M + 2
    prod = [Fraction(0)] * (Mi + 1)
    prod[0] = Fraction(1)
    for n in range(1, Mi + 1):
        # multiply by (1 - q^n)^24, truncated
        binom = Fraction(1)
        fac = [Fraction(1)]
        for j in range(1, Mi // n + 1):
            binom = binom * (24 - j + 1) / j
            fac.append((-1) ** j * binom)
        new = [Fraction(0)] * (Mi + 1)
        for j, fj in enumerate(fac):
            if not fj:
                continue
            base = j * n
            for i in range(Mi + 1 - base):
                if prod[i]:
                    new[i + base] += prod[i] * fj
        prod = new
    delta_i = QSeries(1, 1, prod[:Mi], Mi)
    e4 = eisenstein_series(4, Mi)
    j_full = e4 * e4 * e4 * delta_i.inverse() - 744
    delta = QSeries(1, 1, prod[:M], M)
    j = QSeries(1, -1, [j_full.coeff(e) for e in range(-1, M + 1)], M)
    return delta, j


def series_arith(op: str, a: QSeries, b) -> QSeries:
    """Dispatch wrapper: op in {add, mul, div, pow}."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        return a ** b
    raise DomainError(f"unknown op {op!r}")


def hecke_weight0(f: QSeries, n: int) -> QSeries:
    """Normalized weight-0 Hecke image: sum over ad=n, b mod d of f((a tau+b)/d).

    Normalization sends q^{-1}+O(q) to q^{-n}+O(q).  Output order is
    f.trunc // n, the honest limit: the d=n branch consumes input
    coefficients up to n times the output exponent.
    """
    if n < 1:
        raise DomainError("Hecke index must be positive")
    if f.ell != 1:
        raise DomainError("integer-exponent expansions only")
    M_out = f.trunc // n
    if M_out < 1:
        raise PrecisionError("insufficient truncation order for this Hecke index")
    out: dict[int, Fraction] = {}
    for a in sorted(d for d in range(1, n + 1) if n % d == 0):
        d = n // a
        # b-sum over b mod d kills exponents not divisible by d, weight d
        for k, c in f.items():
            if k % d:
                continue
            e = k * a // d
            if e > M_out:
                continue
            out[e] = out.get(e, Fraction(0)) + d * c
    return QSeries.from_dict(out, M_out)


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial over exact integers/rationals in one variable X."""

    coeffs: tuple

    def __post_init__(self):
        c = self.coeffs
        if len(c) > 1 and not c[-1]:
            raise DomainError("nonzero leading coefficient required")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (mp.mpf(c.numerator) / c.denominator
                             if isinstance(c, Fraction) and isinstance(x, (mp.mpf, mp.mpc))
                             else c)
        return acc

    def compose_qseries(self, powers: Sequence[QSeries]) -> QSeries:
        """Evaluate at a series given precomputed powers[k] = base**k."""
        acc = None
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            term = powers[k] * c
            acc = term if acc is None else acc + term
        return acc if acc is not None else powers[0] * 0


def faber_polynomial(n: int, M: int | None = None) -> IntPolynomial:
    """F_n with j_n = F_n(J): monic, degree n, integer coefficients.

    Solved triangularly against the Hecke image of J; the result is verified
    by re-expansion before it is returned.
    """
    if n < 0:
        raise DomainError("index must be nonnegative")
    if n == 0:
        return IntPolynomial((Fraction(1),))
    order = max(M or 0, 2 * n + 2)
    _, js = delta_and_j(order)
    powers = [QSeries.constant(1, js.trunc)]
    for _ in range(n):
        powers.append(powers[-1] * js)
    target = hecke_weight0(js, n)
    coeffs = [Fraction(0)] * (n + 1)
    # build up the combination from the top exponent down
    acc = {e: Fraction(0) for e in range(-n, 1)}
    for k in range(n, -1, -1):
        want = target.coeff(-k) - acc[-k]
        coeffs[k] = want
        if want:
            for e in range(-n, 1):
                acc[e] += want * powers[k].coeff(e)
    poly = IntPolynomial(tuple(coeffs))
    recomposed = poly.compose_qseries(powers)
    check_to = min(recomposed.trunc, target.trunc)
    for e in range(-n, check_to + 1):
        if recomposed.coeff(e) != target.coeff(e):
            raise PrecisionError(f"Faber re-expansion mismatch at q^{e}")
    return poly


# -- numerical evaluation -----------------------------------------------------

@dataclass(frozen=True)
class EvaluatedSeries:
    value: object          # mpc
    tail_estimate: float


def tail_bound(f: QSeries, absq: float) -> float:
    """Documented tail model: |a_m| <= A e^{4 pi sqrt(m)} with empirical A.

    Valid for the expansions used here (divisor sums, Delta, J and their
    exact combinations); the geometric ratio uses the sqrt-increment bound
    e^{2 pi / sqrt(M)}.  Infinite when the ratio reaches 1.
    """
    M = f.trunc
    A = 0.0
    for e, c in f.items():
        if e < 1:
            continue
        cc = abs(c) if isinstance(c, Fraction) else abs(complex(c))
        A = max(A, float(cc) * mp.e ** (-4 * mp.pi * mp.sqrt(e)))
    A = max(A, 1.0)
    r = absq * float(mp.e ** (2 * mp.pi / mp.sqrt(M + 1)))
    if r >= 1:
        return float("inf")
    lead = A * float(mp.e ** (4 * mp.pi * mp.sqrt(M + 1))) * absq ** (M + 1)
    return lead / (1 - r)


def evaluate_qseries(f: QSeries, tau, cfg: PrecisionConfig = DEFAULT_CONFIG) -> EvaluatedSeries:
    """Sum the expansion at tau with a certified tail estimate."""
    with mp_workprec(cfg.precision_bits):
        t = tau.as_mpc() if hasattr(tau, "as_mpc") else mp.mpc(tau)
        q = mp.e ** (2j * mp.pi * t / f.ell)
        est = tail_bound(f, float(abs(q)))
        acc = mp.mpc(0)
        qe = q ** f.min_exp
        for c in f.coeffs:
            if c:
                cc = (mp.mpf(c.numerator) / c.denominator
                      if isinstance(c, Fraction) else mp.mpc(c))
                acc += cc * qe
            qe *= q
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(acc))
        if not est <= tol:
            raise PrecisionError(
                f"tail estimate {est} exceeds tolerance {tol} at order {f.trunc}")
        return EvaluatedSeries(acc, est)


# -- the two exact two-variable identities ------------------------------------

class TwoVarSeries:
    """Integer coefficients of p^m q^n on a rectangular box."""

    def __init__(self, box_p: tuple[int, int], box_q: tuple[int, int]):
        self.box_p = box_p
        self.box_q = box_q
        self.data: dict[tuple[int, int], int] = {}

    def add(self, m: int, n: int, c):
        if self.box_p[0] <= m <= self.box_p[1] and self.box_q[0] <= n <= self.box_q[1]:
            v = self.data.get((m, n), 0) + c
            if v:
                self.data[(m, n)] = v
            else:
                self.data.pop((m, n), None)

    def get(self, m: int, n: int):
        if not (self.box_p[0] <= m <= self.box_p[1] and self.box_q[0] <= n <= self.box_q[1]):
            raise DomainError("coefficient outside the truncation box")
        return self.data.get((m, n), 0)

    def nonzero(self):
        return dict(self.data)


def _mul_factor(acc: TwoVarSeries, m: int, n: int, expo: int) -> TwoVarSeries:
    # multiply acc by (1 - p^m q^n)^expo, truncated to the box
    jmax_p = (acc.box_p[1] - acc.box_p[0]) // m if m > 0 else 10 ** 9
    out = TwoVarSeries(acc.box_p, acc.box_q)
    # binomial coefficients C(expo, j)(-1)^j, expo may be huge: stop at box limit
    coefs = [1]
    b = 1
    for j in range(1, jmax_p + 1):
        b = b * (expo - j + 1) // j
        coefs.append((-1) ** j * b)
    for (pm, qn), c in acc.data.items():
        for j, bj in enumerate(coefs):
            if not bj:
                continue
            out.add(pm + j * m, qn + j * n, c * bj)
    return out


def denominator_check(M_p: int, M_q: int) -> TwoVarSeries:
    """Difference of the two sides of the two-variable product identity.

    Expands J(z) - J(tau) and e^{-2 pi i z} prod_{m>0, n} (1 - p^m q^n)^{c(mn)}
    exactly over the integers on the box and returns their difference; an
    all-zero result is the identity check.
    """
    # factors with m = M_p+1 or n = M_q+1 still reach the box through the
    # leading p^{-1} and the (1,-1) factor, so the loops run one index past it
    need = max((M_p + 1) * (M_q + 1), 1)
    _, js = delta_and_j(need)
    c = {e: int(v) for e, v in js.items()}
    box_p = (-1, M_p)
    box_q = (-1, M_q)
    prod = TwoVarSeries(box_p, box_q)
    prod.add(-1, 0, 1)                     # leading e^{-2 pi i z}
    for m in range(1, M_p + 2):
        for n in range(-1, M_q + 2):
            k = m * n
            expo = c.get(k, 0)
            if expo:
                prod = _mul_factor(prod, m, n, expo)
    diff = TwoVarSeries(box_p, box_q)
    for (pm, qn), v in prod.nonzero().items():
        diff.add(pm, qn, v)
    for e in range(-1, M_p + 1):           # subtract J(z)
        if c.get(e):
            diff.add(e, 0, -c[e])
    for e in range(-1, M_q + 1):           # add J(tau)
        if c.get(e):
            diff.add(0, e, c[e])
    return diff


def akn_check(M: int):
    """Exact identity in Z[X][[q]] through q^M, X standing for J(z).

    Checks (sum_{n=0}^{M+1} F_n(X) q^n)(J(tau) - X) = E4^2 E6 / Delta.  The
    internal Faber sum runs one index past M: the q^M coefficient of the
    product needs F_{M+1} through the q^{-1} term of J.  Returns
    (ok, first_failure) where first_failure is (q_exponent, X_degree) or None.
    """
    if M < 1:
        raise DomainError("order must be >= 1")
    order = 2 * (M + 1) + 2
    delta, js = delta_and_j(order)
    e4 = eisenstein_series(4, order)
    e6 = eisenstein_series(6, order)
    hn = e4 * e4 * e6 * delta.inverse()
    powers = [QSeries.constant(1, js.trunc)]
    for _ in range(M + 1):
        powers.append(powers[-1] * js)
    fabers = [faber_polynomial(n, order) for n in range(M + 2)]
    # left side: q-exponent -> dict X-degree -> rational
    lhs: dict[int, dict[int, Fraction]] = {}

    def bump(qe, xd, val):
        if not val:
            return
        row = lhs.setdefault(qe, {})
        row[xd] = row.get(xd, Fraction(0)) + val
        if not row[xd]:
            del row[xd]

    for n in range(M + 2):
        for xd, fc in enumerate(fabers[n].coeffs):
            if not fc:
                continue
            for je, jc in js.items():
                if -1 <= n + je <= M:
                    bump(n + je, xd, fc * jc)
            if -1 <= n <= M:
                bump(n, xd + 1, -fc)
    for qe in range(-1, M + 1):
        row = lhs.get(qe, {})
        want = {0: hn.coeff(qe)} if hn.coeff(qe) else {}
        degs = set(row) | set(want)
        for xd in sorted(degs):
            if row.get(xd, Fraction(0)) != want.get(xd, Fraction(0)):
                return False, (qe, xd)
    return True, None
