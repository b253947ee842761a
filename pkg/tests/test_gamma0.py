import cmath
from fractions import Fraction
import math
from math import gcd

import numpy as np
import pytest

from maasskit.config import DomainError
from maasskit.gamma0 import (CuspRep, Mat2, cusps, divisor_sigma, divisors,
                             elliptic_weight, index, kloosterman,
                             kloosterman_cusp, kloosterman_cusp_zero_row,
                             moebius, moebius_sieve, modinv_array,
                             ramanujan_sum_row)


def test_index_values():
    # psi(N) = N prod (1 + 1/p)
    assert [index(N) for N in (1, 2, 3, 4, 6, 12)] == [1, 3, 4, 6, 12, 24]


def test_cusp_widths_partition_index():
    for N in range(1, 61):
        reps = cusps(N)
        assert sum(r.width for r in reps) == index(N)
        assert reps[0].is_infinity
        # representatives are pairwise distinct
        assert len({(r.a, r.c) for r in reps}) == len(reps)


def test_cusp_counts_known():
    # number of cusps of Gamma_0(N) for small N
    known = {1: 1, 2: 2, 3: 2, 4: 3, 6: 4, 12: 6, 16: 6, 36: 12}
    for N, h in known.items():
        assert len(cusps(N)) == h


def test_elliptic_weight_orders():
    # orders are for the matrix group, so +-I doubles them
    rho = complex(-0.5, math.sqrt(3) / 2)
    assert elliptic_weight(1, 1j).stabilizer_order == 4
    assert elliptic_weight(1, rho).stabilizer_order == 6
    assert elliptic_weight(1, complex(0.21, 1.3)).stabilizer_order == 2
    assert elliptic_weight(1, 1j).value == Fraction(1, 2)
    assert elliptic_weight(1, rho).value == Fraction(1, 3)
    # i is not elliptic for Gamma_0(4)
    assert elliptic_weight(4, 1j).stabilizer_order == 2


def test_kloosterman_hand_values():
    assert abs(kloosterman(1, 1, 1) - 1.0) < 1e-14
    assert abs(kloosterman(1, 1, 2) - 1.0) < 1e-14
    assert abs(kloosterman(1, 1, 3) - (-1.0)) < 1e-13
    # S(m, n; c) is symmetric in m, n
    for c in (5, 7, 12):
        assert abs(kloosterman(2, 3, c) - kloosterman(3, 2, c)) < 1e-11


def test_kloosterman_weil_bound():
    for c in range(1, 200):
        s = kloosterman(1, 1, c)
        assert abs(s) <= len(divisors(c)) * math.sqrt(c) + 1e-9


def test_kloosterman_brute_force():
    for c in (4, 6, 9, 10):
        brute = 0j
        for x in range(c):
            if gcd(x, c) != 1:
                continue
            xinv = pow(x, -1, c)
            brute += cmath.exp(2j * math.pi * (2 * x + 5 * xinv) / c)
        assert abs(kloosterman(2, 5, c) - brute.real) < 1e-11
        assert abs(brute.imag) < 1e-11


def test_cusp_kloosterman_level1_reduces_to_classical():
    inf = cusps(1)[0]
    for c in (1, 2, 3, 5, 8):
        got = kloosterman_cusp(1, inf, 1, 1, c)
        assert abs(got - kloosterman(1, 1, c)) < 1e-11


def test_zero_row_matches_direct_sums():
    for N in (2, 3):
        for rep in cusps(N):
            row = kloosterman_cusp_zero_row(N, rep, -2, 30)
            for c in range(1, 31):
                direct = kloosterman_cusp(N, rep, 0, -2, c)
                assert abs(row[c] - direct) < 1e-9, (N, rep, c)


def test_ramanujan_row_against_definition():
    for n in (1, 2, 6, 12):
        row = ramanujan_sum_row(n, 40)
        for c in range(1, 41):
            direct = 0j
            for a in range(c):
                if gcd(a, c) == 1:
                    direct += cmath.exp(2j * math.pi * a * n / c)
            assert abs(row[c] - direct.real) < 1e-9
            assert abs(direct.imag) < 1e-9


def test_moebius_and_sieve_agree():
    mu = moebius_sieve(200)
    for n in range(1, 201):
        assert mu[n] == moebius(n)
    assert [moebius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]


def test_divisor_sigma():
    assert divisor_sigma(1, 6) == 12
    assert divisor_sigma(1, 10) == 18
    assert divisor_sigma(3, 4) == 1 + 8 + 64


def test_modinv_array():
    rng = np.random.default_rng(7)
    a = rng.integers(1, 10 ** 6, size=500)
    m = rng.integers(2, 10 ** 6, size=500)
    out = modinv_array(a, m)
    for ai, mi, oi in zip(a, m, out):
        if gcd(int(ai), int(mi)) == 1:
            assert oi == pow(int(ai), -1, int(mi))
        else:
            assert oi == -1


def test_mat2_validation_and_action():
    m = Mat2(2, 1, 3, 2)
    assert m.det == 1
    z = complex(0.3, 1.1)
    want = (2 * z + 1) / (3 * z + 2)
    assert abs(m.act(z) - want) < 1e-14


def test_domain_errors():
    with pytest.raises(DomainError):
        index(0)
    with pytest.raises(DomainError):
        cusps(-3)
    with pytest.raises(DomainError):
        kloosterman(1, 1, 0)
