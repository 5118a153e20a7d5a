"""Periodic points, their multipliers, and continued fractions of rotation numbers."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as kr
from .errors import NotPeriodic
from .maps import EntireMap

RESIDUAL_TOL = 1e-10
DEDUP_RADIUS = 1e-9
INDIFFERENT_SLACK = 1e-9
ROOT_OF_UNITY_TOL = 1e-6
MAX_Q = 64

CSV_FIXED = "re,im,period,mult_re,mult_im,class"


@dataclass(frozen=True)
class Attracting:
    def __str__(self):
        return "attracting"


@dataclass(frozen=True)
class Repelling:
    def __str__(self):
        return "repelling"


@dataclass(frozen=True)
class ParabolicCandidate:
    q: int

    def __str__(self):
        return f"parabolic_candidate(q={self.q})"


@dataclass(frozen=True)
class IrrationallyIndifferent:
    rotation_number: float

    def __str__(self):
        return f"irrationally_indifferent({self.rotation_number!r})"


@dataclass(frozen=True)
class FixedPointInfo:
    point: complex
    period: int
    multiplier: complex
    cls: object
    residual: float

    def csv_row(self) -> str:
        z, m = self.point, self.multiplier
        return (f"{z.real!r},{z.imag!r},{self.period},"
                f"{m.real!r},{m.imag!r},{self.cls}")


def orbit_with_multiplier(m: EntireMap, z: complex, period: int):
    """(f^period(z), (f^period)'(z)) by the chain rule."""
    w = complex(z)
    mult = 1.0 + 0j
    for _ in range(period):
        mult *= kr.f_deriv(m.code, m.p, w)
        w = kr.f_eval(m.code, m.p, w)
    return w, mult


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def newton_periodic(m: EntireMap, z: complex, period: int, iters: int = 60):
    """Newton on f^period(z) - z; returns (z, residual) with residual ``inf``
    when the iteration leaves double range."""
    z = complex(z)
    res = math.inf
    for _ in range(iters):
        w, mult = orbit_with_multiplier(m, z, period)
        if not (_finite(w) and _finite(mult)):
            return z, math.inf
        g = w - z
        res = abs(g)
        if res < 1e-15 * max(1.0, abs(z)):
            break
        d = mult - 1.0
        if d == 0:
            break
        z = z - g / d
    w, _ = orbit_with_multiplier(m, z, period)
    return z, (abs(w - z) if _finite(w) else math.inf)


def classify_multiplier(mult: complex):
    a = abs(mult)
    if a > 1.0 + INDIFFERENT_SLACK:
        return Repelling()
    if a < 1.0 - INDIFFERENT_SLACK:
        return Attracting()
    for q in range(1, MAX_Q + 1):
        if abs(mult ** q - 1.0) < ROOT_OF_UNITY_TOL:
            return ParabolicCandidate(q)
    return IrrationallyIndifferent((cmath.phase(mult) / (2.0 * math.pi)) % 1.0)


def classify(m: EntireMap, z: complex, period: int) -> FixedPointInfo:
    if period < 1:
        raise ValueError("period must be >= 1")
    zp, res = newton_periodic(m, z, period)
    if not res < RESIDUAL_TOL:
        raise NotPeriodic(f"no point of period {period} near {z} "
                          f"(residual {res:.3g})")
    _, mult = orbit_with_multiplier(m, zp, period)
    return FixedPointInfo(zp, period, mult, classify_multiplier(mult), res)


def find_fixed_points(m: EntireMap, period: int, search_box, grid: int,
                      jitter: complex = 0j) -> list:
    """Newton from the ``grid x grid`` cell centres of ``search_box``
    ``(x0, x1, y0, y1)``; returns the distinct roots inside the box."""
    if not 1 <= period <= 8:
        raise ValueError("period must be in [1, 8]")
    if grid < 4:
        raise ValueError("grid must be >= 4")
    x0, x1, y0, y1 = (float(v) for v in search_box)
    xs = x0 + (np.arange(grid) + 0.5) * (x1 - x0) / grid
    ys = y0 + (np.arange(grid) + 0.5) * (y1 - y0) / grid
    roots = []
    for y in ys:
        for x in xs:
            z, res = newton_periodic(m, complex(x, y) + jitter, period)
            if not res < RESIDUAL_TOL:
                continue
            if not (x0 <= z.real <= x1 and y0 <= z.imag <= y1):
                continue
            if any(abs(z - r) < DEDUP_RADIUS for r in roots):
                continue
            roots.append(z)
    roots.sort(key=lambda r: (r.real, r.imag))
    return [classify(m, r, period) for r in roots]


def rotation_number_cf(theta, depth: int) -> list:
    """Partial quotients of ``theta`` in (0, 1).

    Rational input (``Fraction``) is expanded exactly.  For a float the
    expansion stops once a convergent matches ``theta`` to 1e-15, beyond which
    the quotients only describe rounding error.
    """
    if depth > 40:
        raise ValueError("depth must be <= 40")
    exact = isinstance(theta, Fraction)
    x = Fraction(theta)
    if not 0 < x < 1:
        raise ValueError("theta must lie in (0, 1)")
    target = x
    quotients = []
    h0, h1 = 1, 0  # numerators of the convergents
    k0, k1 = 0, 1  # denominators
    while len(quotients) < depth and x != 0:
        y = 1 / x
        a = math.floor(y)
        quotients.append(a)
        x = y - a
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if not exact and abs(target - Fraction(h1, k1)) <= Fraction(1, 10 ** 15):
            break
    return quotients


def convergents(quotients) -> list:
    out = []
    h0, h1, k0, k1 = 1, 0, 0, 1
    for a in quotients:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
    return out
