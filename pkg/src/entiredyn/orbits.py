"""Overflow-safe iteration and growth classification of orbits.

Points are carried as ``BigPoint``: the value itself while ``|z| <= 1e15``,
otherwise a logarithm ``zeta`` of it (the branch supplied by the lift, so the
imaginary part also records the fundamental domain).  Once ``exp(zeta)`` can no
longer be resolved to better than a radian, the next image is undetermined
and the orbit is counted as escaping by fiat, with a flag.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kr
from .errors import EmptyShell, Indeterminate, MapOverflow, NoWitness
from .logdyn import geometry
from .maps import EntireMap

ESCAPE_DOUBLINGS = 20
DEFAULT_NMAX = 100_000

CSV_ORBIT = "re,im,classification,n_detect,domains_visited"


@dataclass(frozen=True)
class BigPoint:
    is_log: bool
    value: complex

    @classmethod
    def direct(cls, z: complex) -> "BigPoint":
        z = complex(z)
        if not kr.mod2(z) <= kr.DIRECT_LIMIT ** 2:
            raise ValueError("direct points need |z| <= 1e15")
        return cls(False, z)

    @classmethod
    def logarithmic(cls, zeta: complex) -> "BigPoint":
        return cls(True, complex(zeta))

    @classmethod
    def from_complex(cls, z: complex) -> "BigPoint":
        """Switches to the logarithm exactly above modulus 1e15."""
        z = complex(z)
        if kr.mod2(z) <= kr.DIRECT_LIMIT ** 2:
            return cls(False, z)
        return cls(True, cmath.log(z))

    @property
    def log_modulus(self) -> float:
        if self.is_log:
            return self.value.real
        return math.log(abs(self.value)) if self.value != 0 else -math.inf

    def to_complex(self) -> complex:
        if not self.is_log:
            return self.value
        if self.value.real > kr.LOG_OVERFLOW:
            raise MapOverflow("modulus exceeds double range")
        return cmath.exp(self.value)

    def __str__(self):
        if self.is_log:
            return f"exp({self.value})"
        return str(self.value)


def step(m: EntireMap, p: BigPoint) -> BigPoint:
    status, nl, v = kr.step(m.code, m.p, p.is_log, p.value)
    if status != kr.OK:
        raise Indeterminate(f"image of {p} is beyond the precision horizon")
    return BigPoint(bool(nl), complex(v))


@dataclass(frozen=True)
class Escaping:
    n_detect: int
    fiat: bool = False

    name = "escaping"


@dataclass(frozen=True)
class LeftDomains:
    n_exit: int

    name = "left_domains"


@dataclass(frozen=True)
class Undecided:
    name = "undecided"


@dataclass
class OrbitRecord:
    start: BigPoint
    points: list
    r_values: list
    classification: object
    domains_visited: list = field(default_factory=list)

    @property
    def escaping(self) -> bool:
        return isinstance(self.classification, Escaping)

    @property
    def n_event(self) -> int | None:
        c = self.classification
        if isinstance(c, Escaping):
            return c.n_detect
        if isinstance(c, LeftDomains):
            return c.n_exit
        return None

    def csv_row(self) -> str:
        z = self.start.value
        n = self.n_event
        label = self.classification.name
        if isinstance(self.classification, Escaping) and self.classification.fiat:
            label = "escaping_fiat"
        doms = " ".join(str(d) for d in self.domains_visited)
        return f"{z.real!r},{z.imag!r},{label},{'' if n is None else n},{doms}"


def _allowed_array(allowed) -> tuple:
    if allowed is None:
        return np.zeros(0, np.int64), False
    return np.array(sorted(int(a) for a in allowed), np.int64), True


def _verdict(code: int, n: int, fiat: bool):
    if code == kr.ESCAPING:
        return Escaping(int(n), bool(fiat))
    if code == kr.LEFT_DOMAINS:
        return LeftDomains(int(n))
    return Undecided()


def classify_growth(m: EntireMap, allowed_domains, R: float, z,
                    n_max: int = DEFAULT_NMAX,
                    doublings: int = ESCAPE_DOUBLINGS) -> OrbitRecord:
    """Follow the orbit of ``z`` while recording r and the fundamental domains.

    Escaping once r has doubled ``doublings`` times in a row with every point
    of modulus at least ``R``; LeftDomains at the first point of modulus at
    least ``R`` outside ``allowed_domains`` (``None`` allows every domain).
    """
    g = geometry(m)
    if not R > g.K:
        raise ValueError(f"R must exceed K = {g.K}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = z if isinstance(z, BigPoint) else BigPoint.from_complex(z)
    allowed, use = _allowed_array(allowed_domains)
    n = n_max + 1
    rec_log = np.zeros(n, np.bool_)
    rec_v = np.full(n, np.nan + 0j, np.complex128)
    rec_r = np.full(n, np.nan)
    rec_dom = np.zeros(n, np.int64)
    rec_dstat = np.full(n, kr.NOT_IN_DOMAIN, np.int64)
    code, n_ev, fiat, last, _, _ = kr.classify_core(
        m.code, m.p, g.geo, allowed, use, float(R), p.is_log, p.value, 0, n_max,
        doublings, 0, rec_log, rec_v, rec_r, rec_dom, rec_dstat)
    k = last + 1
    points = [BigPoint(bool(a), complex(b)) for a, b in zip(rec_log[:k], rec_v[:k])]
    doms = [int(d) for d, s in zip(rec_dom[:k], rec_dstat[:k]) if s == kr.OK]
    return OrbitRecord(p, points, [float(r) for r in rec_r[:k]],
                       _verdict(code, n_ev, fiat), doms)


def classify_batch(m: EntireMap, points, R: float | None = None,
                   n_max: int = DEFAULT_NMAX, allowed_domains=None,
                   doublings: int = ESCAPE_DOUBLINGS, block: int = 64):
    """Verdict codes, event steps and fiat flags for many starting points.

    Without a domain restriction this runs the lock-step compiled path; the
    verdicts agree with ``classify_growth`` point for point.
    """
    g = geometry(m)
    R = g.K + 1.0 if R is None else float(R)
    if not R > g.K:
        raise ValueError(f"R must exceed K = {g.K}")
    z = np.ascontiguousarray(np.asarray(points, np.complex128).ravel())
    if allowed_domains is None and R < 700.0:
        return kr.classify_batch_kernel(m.code, m.p, g.geo, R, int(n_max),
                                        int(doublings), z, int(block))
    allowed, use = _allowed_array(allowed_domains)
    verdict = np.empty(z.size, np.int64)
    n_event = np.empty(z.size, np.int64)
    fiat = np.empty(z.size, np.bool_)
    eb = np.zeros(0, np.bool_)
    ec = np.zeros(0, np.complex128)
    ef = np.zeros(0, np.float64)
    ei = np.zeros(0, np.int64)
    for k, zk in enumerate(z):
        p = BigPoint.from_complex(zk)
        c, ne, fi, *_ = kr.classify_core(m.code, m.p, g.geo, allowed, use, R,
                                         p.is_log, p.value, 0, int(n_max),
                                         int(doublings), 0, eb, ec, ef, ei, ei)
        verdict[k], n_event[k], fiat[k] = c, ne, fi
    return verdict, n_event, fiat


def orbit_csv(m: EntireMap, points, allowed_domains, R: float,
              n_max: int = DEFAULT_NMAX) -> list:
    rows = [CSV_ORBIT]
    for z in points:
        rows.append(classify_growth(m, allowed_domains, R, z, n_max).csv_row())
    return rows


@dataclass
class RprimeWitness:
    R_prime: float
    probes: list
    grid_tried: list


def _probe_points(m, allowed, rho, probes, rng, max_tries):
    from .rays import ExternalAddress, point_at_modulus  # rays build on orbits

    out = []
    tries = 0
    allowed = sorted(int(a) for a in allowed)
    while len(out) < probes and tries < max_tries:
        tries += 1
        digits = tuple(int(d) for d in rng.choice(allowed, size=8))
        addr = ExternalAddress(digits, (allowed[0],))
        z = point_at_modulus(m, addr, rho)
        if z is not None:
            out.append(z)
    return out


def estimate_Rprime(m: EntireMap, allowed_domains, R: float, probes: int = 50,
                    seed: int = 0, n_max: int = 2000,
                    log_cap: float = 700.0) -> RprimeWitness:
    """First radius ``R * 2**i`` at which every probe of ``X`` escapes.

    Probes are points of modulus ``rho`` on dynamic rays whose addresses are
    drawn at random from ``allowed_domains`` (orbits of such points stay in
    the allowed domains), so the check is the executable content of "X meets
    ``{|z| >= R'}`` only in escaping points".
    """
    g = geometry(m)
    if not R > g.K:
        raise ValueError(f"R must exceed K = {g.K}")
    rng = np.random.default_rng(seed)
    tried = []
    i = 0
    while math.log(R) + i * math.log(2.0) <= log_cap:
        rho = R * 2.0 ** i
        tried.append(rho)
        pts = _probe_points(m, allowed_domains, rho, probes, rng, 4 * probes)
        if len(pts) == probes and all(
                classify_growth(m, allowed_domains, R, z, n_max).escaping for z in pts):
            return RprimeWitness(rho, pts, tried)
        i += 1
    raise NoWitness(f"no radius up to exp({log_cap}) has all probes escaping")


def probes_at(m: EntireMap, allowed_domains, rho: float, probes: int,
              seed: int) -> list:
    """Fresh probe points of modulus ``rho`` (for re-auditing a witness)."""
    rng = np.random.default_rng(seed)
    return _probe_points(m, allowed_domains, rho, probes, rng, 4 * probes)


@dataclass
class ExtendabilityReport:
    radii: list
    min_image_modulus: list

    @property
    def nondecreasing(self) -> bool:
        v = self.min_image_modulus
        return all(b >= a for a, b in zip(v, v[1:]))


def _image_log_modulus(m: EntireMap, z: complex) -> float:
    status, nl, w = kr.step(m.code, m.p, False, complex(z))
    if status != kr.OK:
        return math.inf
    if nl:
        return w.real
    return math.log(abs(w)) if w != 0 else -math.inf


def extendability_probe(m: EntireMap, samples, radii) -> ExtendabilityReport:
    """min |f(z)| over samples with ``|z| >= T`` for each radius ``T``.

    Minima that overflow double range are reported as ``inf``.
    """
    radii = [float(t) for t in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    zs = np.asarray(samples, np.complex128).ravel()
    logs = np.array([_image_log_modulus(m, z) for z in zs])
    mods = np.abs(zs)
    mins = []
    for T in radii:
        sel = mods >= T
        if not sel.any():
            raise EmptyShell(f"no samples with |z| >= {T}")
        lm = logs[sel].min()
        mins.append(math.exp(lm) if lm <= kr.LOG_OVERFLOW else math.inf)
    return ExtendabilityReport(radii, mins)
