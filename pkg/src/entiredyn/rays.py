"""Dynamic rays by inverse-branch pullback along an external address.

Rays are parametrised by the potential ``t > 0`` with ``F(t) = exp(t) - 1``
as the model dynamics, so ``f(g_s(t)) = g_{shift s}(F(t))``.  To evaluate
``g_s(t)`` the levels ``t, F(t), F(F(t)), ...`` are followed until one exceeds
``SEED_POTENTIAL``; there the ray is seeded as the branch-``s_n`` preimage of
``exp(tau_n)`` (i.e. ``tau_n + 2 pi i s_n`` to first order for exponential
maps) and pulled back level by level.  As ``t -> 0`` the pullbacks approach
the landing point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels as kr
from .errors import (AddressInfeasible, Indeterminate, NotInDomain,
                     PullbackDivergence)
from .fixedpoints import FixedPointInfo, classify as classify_fixed, newton_periodic
from .logdyn import geometry
from .maps import EntireMap
from .orbits import BigPoint, classify_growth, step

SEED_POTENTIAL = 50.0
MAX_DIGIT = 2 ** 16
LANDING_GAP = 1e-12

CSV_RAY = "t,re,im,digit"


def potential_map(t: float) -> float:
    return math.expm1(t)


def potential_inverse(t: float) -> float:
    return math.log1p(t)


@dataclass(frozen=True)
class ExternalAddress:
    preperiod: tuple
    period: tuple

    def __post_init__(self):
        pre = tuple(int(d) for d in self.preperiod)
        per = tuple(int(d) for d in self.period)
        if not per:
            raise ValueError("period must be nonempty")
        for d in pre + per:
            if abs(d) > MAX_DIGIT:
                raise ValueError(f"digit {d} exceeds 2**16 in modulus")
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def periodic(cls, *digits) -> "ExternalAddress":
        return cls((), tuple(digits))

    @classmethod
    def constant(cls, digit: int) -> "ExternalAddress":
        return cls((), (digit,))

    @classmethod
    def parse(cls, text: str) -> "ExternalAddress":
        """``p:0,1`` or ``pre:3;p:0,1``."""
        pre, per = (), None
        for part in text.replace(" ", "").split(";"):
            if not part:
                continue
            key, _, digits = part.partition(":")
            vals = tuple(int(d) for d in digits.split(",") if d != "")
            if key == "p":
                per = vals
            elif key == "pre":
                pre = vals
            else:
                raise ValueError(f"bad address part {part!r}")
        if per is None:
            raise ValueError("address needs a periodic part p:<d,...>")
        return cls(pre, per)

    @property
    def is_periodic(self) -> bool:
        return not self.preperiod

    def digit(self, k: int) -> int:
        if k < len(self.preperiod):
            return self.preperiod[k]
        k -= len(self.preperiod)
        return self.period[k % len(self.period)]

    def shift(self, k: int = 1) -> "ExternalAddress":
        if k <= len(self.preperiod):
            return ExternalAddress(self.preperiod[k:], self.period)
        j = (k - len(self.preperiod)) % len(self.period)
        return ExternalAddress((), self.period[j:] + self.period[:j])

    def __str__(self):
        per = "p:" + ",".join(map(str, self.period))
        if self.preperiod:
            return "pre:" + ",".join(map(str, self.preperiod)) + ";" + per
        return per


@dataclass(frozen=True)
class RaySample:
    t: float
    point: BigPoint
    address_digit: int

    def csv_row(self) -> str:
        z = _as_complex(self.point)
        return f"{self.t!r},{z.real!r},{z.imag!r},{self.address_digit}"


def _as_complex(p: BigPoint) -> complex:
    if not p.is_log:
        return p.value
    if p.value.real > kr.LOG_OVERFLOW:
        return complex(math.inf, math.inf)
    return complex(np.exp(p.value))


def pullback(m: EntireMap, w: BigPoint, digit: int) -> complex:
    """The preimage of ``w`` on the inverse branch selected by ``digit``."""
    g = geometry(m)
    status, z, res = kr.pullback(m.code, m.p, g.geo, w.is_log, w.value, int(digit))
    if status == kr.OK:
        return complex(z)
    if status == kr.NOT_IN_DOMAIN:
        raise AddressInfeasible(f"digit {digit}: {w} has no preimage on that branch")
    tract, _ = kr.split_index(m.code, int(digit))
    t_z, _ = kr.lift(m.code, m.p, z)
    if res == math.inf and t_z != tract:
        raise AddressInfeasible(f"inverse branch {digit} leaves its tract at {w}")
    raise PullbackDivergence(f"pullback of {w} on branch {digit} stalled "
                             f"(residual {res:.3g})")


def potential_levels(t: float) -> list:
    if not t > 0:
        raise ValueError("potential must be positive")
    levels = [float(t)]
    while levels[-1] < SEED_POTENTIAL:
        levels.append(potential_map(levels[-1]))
    return levels


def ray_chain(m: EntireMap, addr: ExternalAddress, t: float) -> list:
    """``[g_{shift^j s}(tau_j)]`` for every level ``j``, as BigPoints."""
    levels = potential_levels(t)
    n = len(levels) - 1
    pts = [None] * (n + 1)
    seed = BigPoint.logarithmic(complex(levels[n], 0.0))
    pts[n] = BigPoint.from_complex(pullback(m, seed, addr.digit(n)))
    for j in range(n - 1, -1, -1):
        try:
            z = pullback(m, pts[j + 1], addr.digit(j))
        except PullbackDivergence as exc:
            raise PullbackDivergence(str(exc), t=levels[j], iterations=n - j) from None
        pts[j] = BigPoint.from_complex(z)
    return pts


def ray_point(m: EntireMap, addr: ExternalAddress, t: float) -> BigPoint:
    return ray_chain(m, addr, t)[0]


def trace_ray(m: EntireMap, addr: ExternalAddress, t_start: float, t_end: float,
              samples: int) -> list:
    """``samples`` points ``g_s(t)`` for ``t`` evenly spaced in ``[t_start, t_end]``."""
    if not 0 < t_start < t_end:
        raise ValueError("need 0 < t_start < t_end")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    out = []
    for t in np.linspace(t_start, t_end, samples):
        out.append(RaySample(float(t), ray_point(m, addr, float(t)), addr.digit(0)))
    return out


def functional_residuals(m: EntireMap, addr: ExternalAddress, ts) -> np.ndarray:
    """|f(g_s(t)) - g_{shift s}(F(t))| / (1 + |g_{shift s}(F(t))|) per ``t``;
    NaN where either side is beyond direct range."""
    out = np.full(len(ts), np.nan)
    nxt = addr.shift(1)
    for k, t in enumerate(ts):
        z = ray_point(m, addr, float(t))
        w = ray_point(m, nxt, potential_map(float(t)))
        try:
            fz = step(m, z)
        except Indeterminate:
            continue
        if fz.is_log or w.is_log:
            continue
        out[k] = abs(fz.value - w.value) / (1.0 + abs(w.value))
    return out


def point_at_modulus(m: EntireMap, addr: ExternalAddress, rho: float,
                     t_min: float = 1e-2) -> complex | None:
    """The point of the ray ``g_s`` with modulus ``rho``, or None if the ray
    does not cross that circle for potentials above ``t_min``."""
    log_rho = math.log(rho)

    def h(u):
        return ray_point(m, addr, math.exp(u)).log_modulus - log_rho

    try:
        u_hi = min(max(log_rho, 0.0) + 1.0, kr.LOG_OVERFLOW)
        while h(u_hi) <= 0:
            if u_hi >= kr.LOG_OVERFLOW:
                return None
            u_hi = min(u_hi + 1.0, kr.LOG_OVERFLOW)
        u_lo = u_hi - 1.0
        while h(u_lo) >= 0:
            u_lo -= 1.0
            if u_lo < math.log(t_min):
                return None
        u = brentq(h, u_lo, u_lo + 1.0, xtol=1e-13)
    except (PullbackDivergence, AddressInfeasible, NotInDomain):
        return None
    p = ray_point(m, addr, math.exp(u))
    return _as_complex(p)


@dataclass
class LandingResult:
    address: ExternalAddress
    status: str  # "landed" or "no_convergence"
    point: complex | None = None
    fp: FixedPointInfo | None = None
    gaps: list = field(default_factory=list)
    pullbacks: int = 0

    @property
    def landed(self) -> bool:
        return self.status == "landed"

    def record(self) -> str:
        if self.landed:
            z = self.point
            return (f"{self.address};landed;{z.real!r};{z.imag!r};"
                    f"{abs(self.fp.multiplier)!r};{self.fp.cls}")
        last = ",".join(f"{g:.3e}" for g in self.gaps[-2:])
        return f"{self.address};no_convergence;nan;nan;nan;gaps={last}"


def land_ray(m: EntireMap, addr: ExternalAddress, max_pullbacks: int = 200,
             t0: float = 1.0) -> LandingResult:
    """Pull ``g_s(t0)`` back by ``f^n`` along the period until successive
    points agree to 1e-12, then polish to a point of period ``n``."""
    if not addr.is_periodic:
        raise ValueError("land_ray needs a purely periodic address")
    n = len(addr.period)
    cur = ray_point(m, addr, t0)
    gaps = []
    for k in range(max_pullbacks):
        w = cur
        for j in range(n - 1, -1, -1):
            w = BigPoint.from_complex(pullback(m, w, addr.period[j]))
        if w.is_log or cur.is_log:
            gap = math.inf
        else:
            gap = abs(w.value - cur.value)
        gaps.append(gap)
        cur = w
        if not cur.is_log and gap < LANDING_GAP * max(1.0, abs(cur.value)):
            z, res = newton_periodic(m, cur.value, n)
            if res < 1e-10 and abs(z - cur.value) < 1e-8 * max(1.0, abs(z)):
                fp = classify_fixed(m, z, n)
                return LandingResult(addr, "landed", fp.point, fp, gaps, k + 1)
    return LandingResult(addr, "no_convergence", None, None, gaps, max_pullbacks)


@dataclass
class HairReport:
    ok: bool
    samples: int
    failures: list
    fiat_images: int


def hair_confinement_check(m: EntireMap, digit: int, t_range, R: float,
                           samples: int = 100, n_images: int = 20,
                           n_max: int = 2000) -> HairReport:
    """Do the hair of constant address ``digit`` over ``t_range`` and its first
    ``n_images`` images stay in that fundamental domain above modulus ``R``
    and classify as escaping?

    Images whose domain can no longer be resolved in double precision are
    counted in ``fiat_images`` and accepted.
    """
    addr = ExternalAddress.constant(digit)
    t0, t1 = t_range
    failures = []
    fiat = 0
    for s in trace_ray(m, addr, float(t0), float(t1), samples):
        p = s.point
        for j in range(n_images + 1):
            if p.log_modulus < math.log(R):
                failures.append((s.t, j, "modulus"))
                break
            status, idx = kr.domain_index(m.code, m.p, geometry(m).geo, p.is_log, p.value)
            if status == kr.INDETERMINATE:
                fiat += 1
                break
            if status != kr.OK or idx != digit:
                failures.append((s.t, j, "domain"))
                break
            if j == n_images:
                break
            try:
                p = step(m, p)
            except Indeterminate:
                fiat += 1
                break
        if not classify_growth(m, {digit}, R, s.point, n_max).escaping:
            failures.append((s.t, None, "not escaping"))
    return HairReport(not failures, samples, failures, fiat)
