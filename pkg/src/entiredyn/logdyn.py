"""Tract geometry in logarithmic coordinates.

A point ``z`` with ``|z| > K`` is written ``z = exp(zeta)`` with ``zeta`` in the
half-plane ``H = {Re zeta > log K}``.  The cut ray ``gamma`` lifts to the
horizontal lines ``Im zeta = phi_d + 2 pi m`` which slice ``H`` into strips;
strip ``j`` has centre line ``Im zeta = phi_d - pi + 2 pi j``.

For a tract point the lift ``L(z)`` is a continuous branch of ``log f(z)``; the
fundamental domain of ``z`` is the strip containing ``L(z)`` (tagged with the
tract for two-tract families, see ``flatten_index``).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as kr
from .errors import (Indeterminate, NoCutRay, NoThreshold, NotInDomain,
                     NotInTract, OutsideDomain, PullbackDivergence)
from .maps import EntireMap, bound_K, to_descriptor

AXIS_DIRECTIONS = (-1 + 0j, 1j, -1j, 1 + 0j)
CUT_SAMPLES = 200
CUT_REACH = 1e10
BASE_MARGIN = 1.0


@dataclass(frozen=True)
class CutCurve:
    """Axis ray ``{t * direction : t >= K}``."""

    direction: complex
    K: float

    @property
    def base(self) -> complex:
        return self.K * self.direction

    @property
    def angle(self) -> float:
        return cmath.phase(self.direction)

    def contains(self, z: complex, tol: float = kr.ON_CUT_TOL) -> bool:
        if abs(z) < self.K:
            return False
        return abs(cmath.phase(z / self.direction)) < tol

    def samples(self, n: int = CUT_SAMPLES, reach: float = CUT_REACH) -> np.ndarray:
        return self.direction * np.geomspace(self.K, reach, n)


def _asymptotic_bound(m: EntireMap, d: complex) -> float:
    """lim sup |f| along the ray in direction ``d`` (inf when unbounded)."""
    fam, ps = m.family, m.params
    if fam == "expaffine" and d == -1:
        return abs(ps[0])
    if fam == "expshift" and d == -1:
        return abs(ps[0])
    if fam == "sine" and d in (-1, 1):
        return abs(ps[0])
    if fam == "cosine" and d in (1j, -1j):
        return abs(ps[0]) + abs(ps[1])
    if fam == "zexp" and d == -1:
        return 0.0
    if fam == "petalexp" and d == -1:
        return 0.25
    return math.inf


def audit_cut(m: EntireMap, cut: CutCurve) -> float:
    """Largest |f| over the audit samples of ``cut``."""
    worst = 0.0
    for z in cut.samples():
        w = kr.f_eval(m.code, m.p, complex(z))
        a = math.sqrt(kr.mod2(w))
        if not math.isfinite(a):
            return math.inf
        worst = max(worst, a)
    return worst


def choose_cut_curve(m: EntireMap) -> CutCurve:
    K = bound_K(m)
    for d in AXIS_DIRECTIONS:
        cut = CutCurve(d, K)
        if audit_cut(m, cut) <= K and _asymptotic_bound(m, d) <= K:
            return cut
    raise NoCutRay(f"no axis ray avoids the tracts of {to_descriptor(m)}")


@dataclass(frozen=True)
class LogPoint:
    zeta: complex
    strip_index: int

    @property
    def z(self) -> complex:
        return cmath.exp(self.zeta)


@dataclass(frozen=True)
class BasePoint:
    strip: int
    zeta0: complex

    @property
    def z0(self) -> complex:
        return cmath.exp(self.zeta0)


class Geometry:
    """Per-map constants: K, the cut ray and the strip anchors."""

    def __init__(self, m: EntireMap):
        self.map = m
        self.K = bound_K(m)
        self.logK = math.log(self.K)
        self.cut = choose_cut_curve(m)
        self.phi_d = self.cut.angle
        self.base_re = 16.0 * math.pi + self.logK + BASE_MARGIN
        self.geo = np.array([self.K, self.logK, self.phi_d, self.base_re])

    def strip_of(self, im: float) -> int:
        return int(kr.strip_of(self.geo, float(im)))

    def base_point(self, strip: int) -> BasePoint:
        im = kr.strip_center(self.geo, int(strip))
        if kr.cut_distance(self.geo, im) < kr.ON_CUT_TOL:
            im += 0.1
        return BasePoint(int(strip), complex(self.base_re, im))

    def log_point(self, zeta: complex) -> LogPoint:
        zeta = complex(zeta)
        return LogPoint(zeta, self.strip_of(zeta.imag))


@lru_cache(maxsize=128)
def geometry(m: EntireMap) -> Geometry:
    return Geometry(m)


def _as_state(z):
    """(is_log, value) for a complex, a LogPoint or a BigPoint."""
    if isinstance(z, LogPoint):
        return True, z.zeta
    if hasattr(z, "is_log"):
        return z.is_log, z.value
    return False, complex(z)


def in_tract(m: EntireMap, z) -> bool:
    g = geometry(m)
    is_log, v = _as_state(z)
    status, nl, w = kr.step(m.code, m.p, is_log, v)
    if status != kr.OK:
        raise Indeterminate("image modulus is beyond the precision horizon")
    if nl:
        return w.real > g.logK
    return abs(w) > g.K


def domain_index(m: EntireMap, z) -> int:
    g = geometry(m)
    is_log, v = _as_state(z)
    status, idx = kr.domain_index(m.code, m.p, g.geo, is_log, v)
    if status == kr.NOT_IN_DOMAIN:
        raise NotInDomain(f"{v} is outside every fundamental domain")
    if status == kr.INDETERMINATE:
        raise Indeterminate("argument of the image is not resolvable")
    return int(idx)


def split_index(m: EntireMap, idx: int) -> tuple:
    """(tract, strip) of a flattened domain label."""
    t, s = kr.split_index(m.code, int(idx))
    return int(t), int(s)


def flatten_index(m: EntireMap, tract: int, strip: int) -> int:
    return int(kr.flatten_index(m.code, int(tract), int(strip)))


def phi(m: EntireMap, p) -> LogPoint:
    """Logarithmic lift: ``exp(phi(zeta)) == f(exp(zeta))``."""
    g = geometry(m)
    zeta = p.zeta if isinstance(p, LogPoint) else complex(p)
    if zeta.real > kr.LOG_OVERFLOW:
        raise Indeterminate("exp(zeta) overflows; phi is not representable")
    z = kr.cexp(zeta)
    t, L = kr.lift(m.code, m.p, z)
    if t < 0 or not L.real > g.logK:
        raise NotInTract(f"exp({zeta}) is not in a tract")
    return g.log_point(L)


def phi_derivative(m: EntireMap, p) -> complex:
    """Phi'(zeta) = z f'(z)/f(z) with z = exp(zeta), in closed form."""
    zeta = p.zeta if isinstance(p, LogPoint) else complex(p)
    if zeta.real > kr.LOG_OVERFLOW:
        raise Indeterminate("exp(zeta) overflows")
    z = kr.cexp(zeta)
    return z * kr.logderiv(m.code, m.p, z)


def size_r(m: EntireMap, z) -> float:
    g = geometry(m)
    is_log, v = _as_state(z)
    r = kr.size_r(g.geo, is_log, v)
    if not r == r:
        raise OutsideDomain(f"{v} is not in G_K minus the cut ray")
    return float(r)


def inverse_branch(m: EntireMap, ell, domain: int) -> complex:
    """The point ``z`` of fundamental domain ``domain`` with ``f(z) = exp(ell)``."""
    g = geometry(m)
    ell = ell.zeta if isinstance(ell, LogPoint) else complex(ell)
    status, z, res = kr.inverse_branch(m.code, m.p, g.geo, ell, int(domain), 60)
    if status == kr.NOT_IN_DOMAIN:
        raise NotInDomain(f"exp({ell}) is not in G_K minus the cut ray")
    if status != kr.OK:
        raise PullbackDivergence(f"inverse branch {domain} did not converge "
                                 f"(residual {res:.3g})", iterations=60)
    return complex(z)


@dataclass
class ExpansionReport:
    family: str
    params: str
    samples: int
    violations: int
    min_margin: float
    min_ratio: float

    def csv_row(self) -> str:
        return (f"{self.family},{self.params},{self.samples},"
                f"{self.violations},{self.min_margin!r}")


CSV_EXPANSION = "family,params,samples,violations,min_margin"
CSV_CF = "family,domain,C_F"


def _params_field(m: EntireMap) -> str:
    return " ".join(f"{v.real!r}{v.imag:+}j" for v in m.params)


def verify_expansion(m: EntireMap, sample_count: int, seed: int = 0,
                     slack: float = 1e-12) -> ExpansionReport:
    """Audit |Phi'| >= (Re Phi - log K)/4pi on tract points of the rectangle
    ``log K - 3 <= Re zeta <= log K + 6``, ``-pi <= Im zeta < pi``."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    g = geometry(m)
    rng = np.random.default_rng(seed)
    lo, hi = g.logK - 3.0, g.logK + 6.0
    dphi_all, bound_all = [], []
    have = 0
    for _ in range(1000):
        n = max(2 * (sample_count - have), 256)
        zeta = rng.uniform(lo, hi, n) + 1j * rng.uniform(-math.pi, math.pi, n)
        dphi, bound = kr.expansion_margins(m.code, m.p, g.geo, zeta)
        ok = ~np.isnan(dphi)
        dphi_all.append(dphi[ok])
        bound_all.append(bound[ok])
        have += int(ok.sum())
        if have >= sample_count:
            break
    dphi = np.concatenate(dphi_all)[:sample_count]
    bound = np.concatenate(bound_all)[:sample_count]
    violations = int(np.count_nonzero(dphi < bound * (1.0 - slack)))
    margin = dphi - bound
    with np.errstate(divide="ignore"):
        ratio = np.where(bound > 0, dphi / bound, np.inf)
    return ExpansionReport(m.family, _params_field(m), int(dphi.size), violations,
                           float(margin.min()), float(ratio.min()))


def sample_domain_points(m: EntireMap, domain: int, n: int, r_max: float,
                         rng: np.random.Generator):
    """Random pullbacks into ``domain``: returns (|z|, r(z), r(f(z))).

    The image log-value ``ell`` has ``log Re ell`` uniform over the range that
    makes ``r(z)`` sweep ``[0, r_max]`` and ``Im ell`` uniform across strip 0.
    """
    g = geometry(m)
    u_lo = math.log(g.logK)
    u_hi = g.base_re + r_max
    a = np.exp(rng.uniform(u_lo, u_hi, n))
    b = rng.uniform(g.phi_d - 2.0 * math.pi, g.phi_d, n)
    mz, r0, r1 = kr.doubling_pairs(m.code, m.p, g.geo, a + 1j * b, int(domain))
    ok = (mz > g.K) & ~np.isnan(r0) & ~np.isnan(r1)
    return mz[ok], r0[ok], r1[ok]


def doubling_audit(m: EntireMap, domain: int, C: float, r_max: float,
                   count: int, seed: int = 0):
    """``count`` samples with ``r(z)`` in ``[C, r_max]``; returns (r(z), r(f(z)))."""
    rng = np.random.default_rng(seed)
    r0s, r1s = [], []
    have = 0
    for _ in range(2000):
        _, r0, r1 = sample_domain_points(m, domain, max(4 * count, 256), r_max, rng)
        keep = (r0 >= C) & (r0 <= r_max)
        r0s.append(r0[keep])
        r1s.append(r1[keep])
        have += int(keep.sum())
        if have >= count:
            break
    r0 = np.concatenate(r0s)[:count]
    r1 = np.concatenate(r1s)[:count]
    if r0.size < count:
        raise NoThreshold(f"could only place {r0.size} samples with r in [{C}, {r_max}]")
    return r0, r1


def find_CF(m: EntireMap, domain: int, r_max: float, samples: int = 500,
            seed: int = 0, factor: float = 1.1) -> float:
    """Smallest ``C = factor**i`` such that ``samples`` random points of the
    domain with ``r`` in ``[C, r_max]`` all satisfy ``r(f(z)) >= 2 r(z)``."""
    rng_seed = np.random.SeedSequence(seed)
    C = 1.0
    i = 0
    while C < r_max:
        sub = int(rng_seed.generate_state(1)[0]) + i
        r0, r1 = doubling_audit(m, domain, C, r_max, samples, seed=sub)
        if np.all(r1 >= 2.0 * r0):
            return C
        i += 1
        C = factor ** i
    raise NoThreshold(f"no grid value below r_max={r_max} doubles r")
