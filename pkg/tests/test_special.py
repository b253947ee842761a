import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from maasskit.config import DEFAULT_CONFIG, DomainError
from maasskit.special import (bessel_I, beta0_constant, incomplete_beta,
                              incomplete_gamma, legendre_Q)

CFG = DEFAULT_CONFIG


def test_bessel_reference_values():
    # the contract promises cfg.rel_tol, not machine epsilon
    for alpha in (0.0, 0.5, 1.0, 1.5, 2.0, 2.7):
        for x in (0.1, 1.0, 7.3, 40.0):
            got = float(bessel_I(alpha, x, CFG))
            ref = float(mp.besseli(alpha, x))
            assert abs(got - ref) <= CFG.rel_tol * abs(ref), (alpha, x)


def test_bessel_array_matches_scalar():
    xs = np.array([0.3, 2.0, 11.0])
    arr = bessel_I(1.5, xs, CFG)
    for x, v in zip(xs, arr):
        assert abs(v - float(bessel_I(1.5, float(x), CFG))) < 1e-10 * abs(v)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_I(-0.5, 1.0, CFG)
    with pytest.raises(DomainError):
        bessel_I(1.0, -2.0, CFG)


def test_incomplete_gamma_reference():
    for a in (1, 2, 5, 9):
        for w in (0.2, 1.0, 3.7, 12.0):
            got = float(incomplete_gamma(a, w, CFG))
            ref = float(mp.gammainc(a, w))
            assert abs(got - ref) <= 1e-11 * max(abs(ref), 1e-300), (a, w)


def test_incomplete_gamma_negative_argument():
    # the closed form continues to w < 0, where Gamma(a, w) > Gamma(a)
    got = float(incomplete_gamma(3, -2.0, CFG))
    ref = float(mp.gammainc(3, -2.0).real)
    assert abs(got - ref) <= 1e-10 * abs(ref)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        incomplete_gamma(0, 1.0, CFG)
    with pytest.raises(DomainError):
        incomplete_gamma(21, 1.0, CFG)


def test_incomplete_beta_reference_positive_b():
    for a in (1, 2, 4):
        for b in (1, 2, 3):
            for w in (0.1, 0.5, 0.9):
                got = float(incomplete_beta(w, a, b, "raw", CFG))
                ref = float(mp.betainc(a, b, 0, w))
                assert abs(got - ref) <= 1e-11 * max(abs(ref), 1e-12)


def test_incomplete_beta_negative_b_log_term():
    # b = 1 - a brings in the -log(1 - w) piece; differentiate numerically
    a, b, w = 3, -2, 0.4
    h = 1e-6
    d = (float(incomplete_beta(w + h, a, b, "raw", CFG))
         - float(incomplete_beta(w - h, a, b, "raw", CFG))) / (2 * h)
    assert abs(d - w ** (a - 1) * (1 - w) ** (b - 1)) < 1e-7


def test_beta0_variant_shifts_by_constant():
    a, b = 4, -1
    c = beta0_constant(a, b)
    assert isinstance(c, Fraction)
    for w in (0.2, 0.7):
        raw = float(incomplete_beta(w, a, b, "raw", CFG))
        b0 = float(incomplete_beta(w, a, b, "beta0", CFG))
        assert abs((raw - b0) - float(c)) < 1e-12


def test_legendre_reference():
    for m in (0, 1, 2, 5, 10):
        for t in (1.001, 1.5, 3.0, 50.0, 1e5):
            got = float(legendre_Q(m, t, CFG))
            ref = float(mp.legenq(m, 0, mp.mpf(t), type=3).real)
            assert abs(got - ref) <= 1e-10 * max(abs(ref), 1e-300), (m, t)


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre_Q(11, 2.0, CFG)
    with pytest.raises(DomainError):
        legendre_Q(2, 1.0, CFG)


def test_legendre_agrees_with_vector_kernel():
    # the Green's module keeps its own float-vector evaluator; the two
    # implementations must not drift apart
    from maasskit.greens import _legendre_q_array
    for m in (1, 2, 3):
        for t in (1.2, 1.999, 2.0, 7.0, 4e4):
            a = _legendre_q_array(m, np.array([t]))[0]
            b = float(legendre_Q(m, t, CFG))
            assert abs(a - b) <= 1e-12 * max(abs(b), 1e-300), (m, t)
