"""Shared configuration and point types.

Everything numeric in this package is a deterministic function of its inputs
and a PrecisionConfig.  The config carries working precision, truncation
orders, lattice cutoffs and the continuation schedule; there is no hidden
global state apart from the mpmath context, which every entry point sets
explicitly from ``precision_bits``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import mpmath as mp

# Cutoff fractions used for multi-cutoff averaging of conditionally convergent
# lattice sums.  Averaging over several cutoffs suppresses the oscillatory
# truncation error; the spread across them is reported as a certificate.
DEFAULT_CUTOFF_FRACS = (0.5, 0.62, 0.75, 0.87, 1.0)


@dataclass(frozen=True)
class PrecisionConfig:
    """Determinism contract: every result is a function of (inputs, config)."""

    precision_bits: int = 53
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    cutoffs: Mapping[str, int] = field(default_factory=dict)
    continuation_schedule: tuple[float, ...] = (0.5, 0.25, 0.125)
    cutoff_fracs: tuple[float, ...] = DEFAULT_CUTOFF_FRACS
    taper_lo: float = 0.1

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        sched = tuple(self.continuation_schedule)
        if any(e <= 0 for e in sched):
            raise ValueError("continuation schedule entries must be positive")
        if any(a <= b for a, b in zip(sched, sched[1:])):
            raise ValueError("continuation schedule must be strictly decreasing")

    def cutoff(self, name: str, default: int | None = None) -> int | None:
        value = self.cutoffs.get(name, default)
        return None if value is None else int(value)

    def with_bits(self, bits: int) -> "PrecisionConfig":
        return replace(self, precision_bits=bits)

    def with_cutoffs(self, **named: int) -> "PrecisionConfig":
        merged = dict(self.cutoffs)
        merged.update(named)
        return replace(self, cutoffs=merged)


# Default cutoffs are sized for interactive use (a few seconds per call);
# acceptance-grade runs override them explicitly.
DEFAULT_CONFIG = PrecisionConfig(cutoffs={
    "coset_bound": 2000,
    "c_max": 20000,
    "norm_bound": 40,
    "lattice_bound": 100,
})


@dataclass(frozen=True)
class UpperHalfPoint:
    """A point x + iy in the upper half plane."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("upper half plane point needs y > 0")

    @property
    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def as_mpc(self) -> mp.mpc:
        return mp.mpc(self.x, self.y)

    def translated(self, t: float) -> "UpperHalfPoint":
        return UpperHalfPoint(self.x + t, self.y)


def as_point(z) -> UpperHalfPoint:
    """Coerce a complex number, pair, or UpperHalfPoint."""
    if isinstance(z, UpperHalfPoint):
        return z
    if isinstance(z, (tuple, list)) and len(z) == 2:
        return UpperHalfPoint(float(z[0]), float(z[1]))
    zc = complex(z)
    return UpperHalfPoint(zc.real, zc.imag)


def mp_workprec(bits: int):
    """Context manager setting mpmath precision (with guard digits)."""
    return mp.workprec(bits + 10)


class DomainError(ValueError):
    """Input outside an operation's documented domain."""


class PrecisionError(ArithmeticError):
    """Requested tolerance not achievable at the configured truncation."""


class StabilizationError(PrecisionError):
    """A monitored partial-sum sequence failed its empirical stabilization test."""
