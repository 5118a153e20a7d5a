"""Compiled numeric core shared by every scalar and batch code path.

All family closed forms, logarithmic lifts, strip geometry, the hybrid
direct/logarithmic step and the orbit classification loop live here so that
the per-point API and the pixel renderer execute bit-identical arithmetic.

Conventions
-----------
``fam``   integer family code (see ``FAMILY_CODES`` in ``maps``).
``p``     complex128 array of length 2 holding the family parameters.
``geo``   float64 array ``[K, log K, phi_d, base_re]`` where ``phi_d`` is the
          argument of the cut-ray direction and ``base_re`` the real part of
          every strip's base point.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from numba import njit

EXP_AFFINE, EXP_SHIFT, SINE, COSINE, ZEXP, PETAL_EXP = range(6)

TWO_PI = 2.0 * math.pi
DIRECT_LIMIT = 1e15
LOG_DIRECT_LIMIT = math.log(DIRECT_LIMIT)
LOG_OVERFLOW = 709.0
ON_CUT_TOL = 1e-9
EPS = 2.220446049250313e-16

# step / index status codes
OK = 0
INDETERMINATE = 1
NOT_IN_DOMAIN = 2

# verdict codes
UNDECIDED = 0
ESCAPING = 1
LEFT_DOMAINS = 2
PENDING = 3

_POW2 = np.ldexp(1.0, np.arange(-1100, 1024))
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_PIO2_1 = 1.57079632673412561417e+00
_PIO2_2 = 6.07710050630396597660e-11
_PIO2_3 = 2.02226624871116645580e-21


# Taylor coefficients; multiplying by reciprocals keeps divisions out of the
# hot loop (LLVM may not rewrite x / c without fast-math)
_E2, _E3, _E4, _E5, _E6, _E7, _E8, _E9, _E10, _E11, _E12, _E13 = (
    1.0 / math.factorial(j) for j in range(2, 14))
_S1, _S2, _S3, _S4, _S5, _S6, _S7, _S8 = (
    (-1.0) ** j / math.factorial(2 * j + 1) for j in range(1, 9))
_C1, _C2, _C3, _C4, _C5, _C6, _C7, _C8, _C9 = (
    (-1.0) ** j / math.factorial(2 * j) for j in range(1, 10))


@njit(cache=True, inline="always")
def _exp_parts(x, y):
    # valid for -740 < x < 700 and |y| < 1e5; branch-free so lanes vectorize.
    # Returns e = exp(x), exp(x) - 1, cos y, cos y - 1 and sin y, the two
    # differences without cancellation near 0.
    k = np.floor(x * 1.4426950408889634 + 0.5)
    r = (x - k * _LN2_HI) - k * _LN2_LO
    pm1 = r * (1.0 + r * (_E2 + r * (_E3 + r * (_E4 + r * (_E5 + r * (
        _E6 + r * (_E7 + r * (_E8 + r * (_E9 + r * (_E10 + r * (
            _E11 + r * (_E12 + r * _E13))))))))))))
    # clamp keeps stalled out-of-range lanes from indexing outside the table
    e = (1.0 + pm1) * _POW2[min(max(np.int64(k) + 1100, 0), 2123)]
    em1 = pm1 if k == 0.0 else e - 1.0
    q = np.floor(y * 0.6366197723675814 + 0.5)
    t = ((y - q * _PIO2_1) - q * _PIO2_2) - q * _PIO2_3
    t2 = t * t
    s = t + t * t2 * (_S1 + t2 * (_S2 + t2 * (_S3 + t2 * (_S4 + t2 * (
        _S5 + t2 * (_S6 + t2 * (_S7 + t2 * _S8)))))))
    cm1 = t2 * (_C1 + t2 * (_C2 + t2 * (_C3 + t2 * (_C4 + t2 * (
        _C5 + t2 * (_C6 + t2 * (_C7 + t2 * (_C8 + t2 * _C9))))))))
    c = 1.0 + cm1
    qm = q - 4.0 * np.floor(q * 0.25)
    odd = (qm == 1.0) or (qm == 3.0)
    sn = c if odd else s
    cs = s if odd else c
    if qm >= 2.0:
        sn = -sn
    if qm == 1.0 or qm == 2.0:
        cs = -cs
    cm1 = cm1 if qm == 0.0 else cs - 1.0
    return e, em1, cs, cm1, sn


@njit(cache=True, inline="always")
def cexp_core(x, y):
    e, _, cs, _, sn = _exp_parts(x, y)
    return complex(e * cs, e * sn)


@njit(cache=True, inline="always")
def cexpm1_core(x, y):
    e, em1, cs, cm1, sn = _exp_parts(x, y)
    # e cos y - 1 == (e - 1) cos y + (cos y - 1)
    return complex(em1 * cs + cm1, e * sn)


@njit(cache=True)
def cexp(z):
    x = z.real
    y = z.imag
    if x < -740.0 or x > 700.0 or abs(y) > 1e5 or x != x or y != y:
        return cmath.exp(z)
    return cexp_core(x, y)


@njit(cache=True)
def cexpm1(z):
    x = z.real
    y = z.imag
    if x < -740.0 or x > 700.0 or x != x or y != y:
        # |exp(z)| is far from 1 (or z is NaN): nothing cancels
        return cmath.exp(z) - 1.0
    if abs(y) > 1e5:
        h = math.sin(0.5 * y)
        return complex(math.expm1(x) * math.cos(y) - 2.0 * h * h,
                       math.exp(x) * math.sin(y))
    return cexpm1_core(x, y)


@njit(cache=True, inline="always")
def _fast_exp(z):
    return cexp_core(z.real, z.imag)


@njit(cache=True, inline="always")
def _fast_expm1(z):
    return cexpm1_core(z.real, z.imag)


def _make_family_eval(expf, expm1f):
    @njit(cache=True, inline="always")
    def feval(fam, p, z):
        if fam == EXP_AFFINE:
            return p[0] * expm1f(z)
        elif fam == EXP_SHIFT:
            return expf(z) + p[0]
        elif fam == SINE:
            iz = complex(-z.imag, z.real)
            return p[0] * (-0.5j) * (expm1f(iz) - expm1f(-iz))
        elif fam == COSINE:
            return p[0] * expf(z) + p[1] * expf(-z)
        elif fam == ZEXP:
            return z * expf(z)
        else:
            # ((z + 1) e^z - 1) / 4 without the cancellation at 0
            return 0.25 * (z * expf(z) + expm1f(z))
    return feval


f_eval = _make_family_eval(cexp, cexpm1)
f_eval_fast = _make_family_eval(_fast_exp, _fast_expm1)


@njit(cache=True)
def f_deriv(fam, p, z):
    if fam == EXP_AFFINE:
        return p[0] * cexp(z)
    elif fam == EXP_SHIFT:
        return cexp(z)
    elif fam == SINE:
        iz = complex(-z.imag, z.real)
        return p[0] * 0.5 * (cexp(iz) + cexp(-iz))
    elif fam == COSINE:
        return p[0] * cexp(z) - p[1] * cexp(-z)
    elif fam == ZEXP:
        return (1.0 + z) * cexp(z)
    else:
        return 0.25 * (z + 2.0) * cexp(z)


@njit(cache=True)
def _sine_as_cosine(p):
    # lambda*sin(z) == a*exp(Z) + b*exp(-Z) with Z = -i z
    a = 0.5j * p[0]
    return a, -a


@njit(cache=True)
def _lift_cos(a, b, z):
    if 2.0 * z.real > math.log(abs(b) / abs(a)):
        q = (b / a) * cexp(-2.0 * z)
        return 0, cmath.log(a) + z + cmath.log(1.0 + q)
    q = (a / b) * cexp(2.0 * z)
    return 1, cmath.log(b) - z + cmath.log(1.0 + q)


@njit(cache=True)
def _logderiv_cos(a, b, z):
    if 2.0 * z.real > math.log(abs(b) / abs(a)):
        q = (b / a) * cexp(-2.0 * z)
        return (1.0 - q) / (1.0 + q)
    q = (a / b) * cexp(2.0 * z)
    return -(1.0 - q) / (1.0 + q)


@njit(cache=True)
def lift(fam, p, z):
    """Return ``(tract, L)`` with ``exp(L) == f(z)`` and ``L`` continuous on
    the tract; ``tract == -1`` when the formula is not applicable."""
    if fam == EXP_AFFINE:
        L = cmath.log(p[0]) + z + cmath.log(1.0 - cexp(-z))
        tract = 0
    elif fam == EXP_SHIFT:
        L = z + cmath.log(1.0 + p[0] * cexp(-z))
        tract = 0
    elif fam == SINE:
        a, b = _sine_as_cosine(p)
        tract, L = _lift_cos(a, b, complex(z.imag, -z.real))
    elif fam == COSINE:
        tract, L = _lift_cos(p[0], p[1], z)
    elif fam == ZEXP:
        if z == 0:
            return -1, complex(np.nan, np.nan)
        L = z + cmath.log(z)
        tract = 0
    else:
        if z == -1.0:
            return -1, complex(np.nan, np.nan)
        L = -math.log(4.0) + z + cmath.log(z + 1.0) + cmath.log(1.0 - cexp(-z) / (z + 1.0))
        tract = 0
    if not (math.isfinite(L.real) and math.isfinite(L.imag)):
        return -1, L
    return tract, L


@njit(cache=True)
def logderiv(fam, p, z):
    """f'(z)/f(z) in a form that stays finite deep inside the tracts."""
    if fam == EXP_AFFINE:
        return 1.0 / (1.0 - cexp(-z))
    elif fam == EXP_SHIFT:
        return 1.0 / (1.0 + p[0] * cexp(-z))
    elif fam == SINE:
        a, b = _sine_as_cosine(p)
        return -1j * _logderiv_cos(a, b, complex(z.imag, -z.real))
    elif fam == COSINE:
        return _logderiv_cos(p[0], p[1], z)
    elif fam == ZEXP:
        return 1.0 + 1.0 / z
    else:
        return (z + 2.0) / ((z + 1.0) - cexp(-z))


@njit(cache=True)
def _inv_cos(a, b, ell, tract):
    h = 0.5 * (1.0 + cmath.sqrt(1.0 - 4.0 * a * b * cexp(-2.0 * ell)))
    if tract == 0:
        return ell - cmath.log(a) + cmath.log(h)
    return cmath.log(b) - ell - cmath.log(h)


@njit(cache=True)
def inverse_guess(fam, p, ell, tract):
    """Closed-form (or fixed-point) solution of ``lift(z) == ell`` in ``tract``."""
    if fam == EXP_AFFINE:
        return ell - cmath.log(p[0]) + cmath.log(1.0 + p[0] * cexp(-ell))
    elif fam == EXP_SHIFT:
        return ell + cmath.log(1.0 - p[0] * cexp(-ell))
    elif fam == SINE:
        a, b = _sine_as_cosine(p)
        Z = _inv_cos(a, b, ell, tract)
        return complex(-Z.imag, Z.real)
    elif fam == COSINE:
        return _inv_cos(p[0], p[1], ell, tract)
    elif fam == ZEXP:
        z = ell
        for _ in range(200):
            z = ell - cmath.log(z)
        return z
    else:
        z = ell
        for _ in range(200):
            z = ell + math.log(4.0) - cmath.log(z + 1.0) - cmath.log(1.0 - cexp(-z) / (z + 1.0))
        return z


@njit(cache=True)
def inverse_polish(fam, p, ell, tract, z0, iters):
    """Newton on ``lift(z) - ell``; returns (z, residual)."""
    z = z0
    res = np.inf
    for _ in range(iters):
        t, L = lift(fam, p, z)
        if t != tract:
            return z, np.inf
        d = L - ell
        res = abs(d) / max(1.0, abs(ell))
        if res < 1e-15:
            return z, res
        z = z - d / logderiv(fam, p, z)
    t, L = lift(fam, p, z)
    if t != tract:
        return z, np.inf
    return z, abs(L - ell) / max(1.0, abs(ell))


# --- strip geometry -------------------------------------------------------

@njit(cache=True)
def strip_of(geo, im):
    return np.int64(np.floor((im - geo[2]) / TWO_PI)) + 1


@njit(cache=True)
def strip_center(geo, j):
    return geo[2] - math.pi + TWO_PI * j


@njit(cache=True)
def cut_distance(geo, im):
    u = (im - geo[2]) / TWO_PI
    return abs(im - geo[2] - TWO_PI * np.floor(u + 0.5))


@njit(cache=True)
def cut_log(geo, w):
    """Branch of log w continuous off the cut ray, imaginary part in strip 0."""
    L = cmath.log(w)
    return complex(L.real, L.imag - TWO_PI * (strip_of(geo, L.imag)))


@njit(cache=True)
def n_tracts(fam):
    if fam == SINE or fam == COSINE:
        return 2
    return 1


@njit(cache=True)
def flatten_index(fam, tract, strip):
    if n_tracts(fam) == 2:
        return 2 * strip + tract
    return strip


@njit(cache=True)
def split_index(fam, idx):
    if n_tracts(fam) == 2:
        return idx % 2, idx // 2
    return 0, idx


@njit(cache=True)
def index_from_lift(fam, geo, tract, L):
    if tract < 0 or not L.real > geo[1]:
        return NOT_IN_DOMAIN, 0
    if cut_distance(geo, L.imag) < ON_CUT_TOL:
        return NOT_IN_DOMAIN, 0
    return OK, flatten_index(fam, tract, strip_of(geo, L.imag))


@njit(cache=True)
def _log_precise(zeta):
    # Im of exp(zeta) known to better than one radian
    if zeta.real > LOG_OVERFLOW:
        return False
    return math.exp(zeta.real) * EPS * (1.0 + abs(zeta.imag)) <= 1.0


@njit(cache=True)
def domain_index(fam, p, geo, is_log, v):
    if not is_log:
        t, L = lift(fam, p, v)
        return index_from_lift(fam, geo, t, L)
    if _log_precise(v):
        t, L = lift(fam, p, cexp(v))
        return index_from_lift(fam, geo, t, L)
    if v.imag == 0.0:
        proxy = math.exp(v.real) if v.real <= LOG_OVERFLOW else 1e300
        t, L = lift(fam, p, complex(proxy, 0.0))
        return index_from_lift(fam, geo, t, L)
    return INDETERMINATE, 0


@njit(cache=True)
def asymptotic_value(fam, p):
    if fam == EXP_AFFINE:
        return -p[0]
    elif fam == EXP_SHIFT:
        return p[0]
    elif fam == ZEXP:
        return 0j
    return complex(-0.25, 0.0)


@njit(cache=True, inline="always")
def mod2(w):
    return w.real * w.real + w.imag * w.imag


@njit(cache=True)
def _step_direct(fam, p, z):
    w = f_eval(fam, p, z)
    if mod2(w) <= DIRECT_LIMIT * DIRECT_LIMIT:
        return OK, False, w
    t, L = lift(fam, p, z)
    if t < 0:
        return INDETERMINATE, False, w
    if L.real <= LOG_DIRECT_LIMIT:
        return OK, False, cexp(L)
    return OK, True, L


@njit(cache=True)
def step(fam, p, is_log, v):
    """One application of f in the hybrid representation."""
    if not is_log:
        return _step_direct(fam, p, v)
    if v.real <= LOG_OVERFLOW and (v.imag == 0.0 or _log_precise(v)):
        return _step_direct(fam, p, cexp(v))
    if fam == SINE or fam == COSINE:
        return INDETERMINATE, True, v
    c = math.cos(v.imag)
    if c < -1e-6 and v.real + math.log(-c) > math.log(800.0):
        return OK, False, asymptotic_value(fam, p)
    return INDETERMINATE, True, v


@njit(cache=True)
def size_r(geo, is_log, v):
    if is_log:
        zeta = v
    else:
        if not abs(v) > geo[0]:
            return np.nan
        zeta = cmath.log(v)
    if not zeta.real > geo[1]:
        return np.nan
    if cut_distance(geo, zeta.imag) < ON_CUT_TOL:
        return np.nan
    j = strip_of(geo, zeta.imag)
    return abs(zeta - complex(geo[3], strip_center(geo, j)))


@njit(cache=True)
def modulus_at_least(is_log, v, R):
    if is_log:
        return v.real >= math.log(R)
    return mod2(v) >= R * R


@njit(cache=True)
def classify_core(fam, p, geo, allowed, use_allowed, R, is_log, v, m0, n_max,
                  doublings, yield_after, rec_log, rec_v, rec_r, rec_dom, rec_dstat):
    """Iterate from step ``m0``; returns (verdict, n_event, fiat, m, is_log, v).

    When ``rec_v`` has room, per-step states are written to the record
    arrays.  With ``yield_after > 0`` the loop hands control back
    (``PENDING``) at the first point of modulus below ``R`` reached at least
    ``yield_after`` steps after ``m0``; the doubling count restarts there
    anyway, so resuming loses nothing.
    """
    record = rec_v.shape[0] > 0
    count = 0
    prev_r = np.nan
    m = m0
    while True:
        big = modulus_at_least(is_log, v, R)
        if yield_after > 0 and not big and m >= m0 + yield_after:
            return PENDING, m, False, m, is_log, v
        r = np.nan
        dstat = NOT_IN_DOMAIN
        dom = 0
        if big:
            r = size_r(geo, is_log, v)
            if use_allowed or record:
                dstat, dom = domain_index(fam, p, geo, is_log, v)
        if record:
            rec_log[m] = is_log
            rec_v[m] = v
            rec_r[m] = r
            rec_dom[m] = dom
            rec_dstat[m] = dstat
        if big and use_allowed:
            if dstat == INDETERMINATE:
                return ESCAPING, m, True, m, is_log, v
            if dstat == NOT_IN_DOMAIN:
                return LEFT_DOMAINS, m, False, m, is_log, v
            hit = False
            for a in allowed:
                if a == dom:
                    hit = True
                    break
            if not hit:
                return LEFT_DOMAINS, m, False, m, is_log, v
        if big and r == r and prev_r == prev_r and r >= 2.0 * prev_r:
            count += 1
        else:
            count = 0
        prev_r = r if big else np.nan
        if count >= doublings:
            return ESCAPING, m, False, m, is_log, v
        if m >= n_max:
            return UNDECIDED, m, False, m, is_log, v
        status, nl, nv = step(fam, p, is_log, v)
        if status != OK:
            return ESCAPING, m + 1, True, m, is_log, v
        is_log = nl
        v = nv
        m += 1


@njit(cache=True, inline="always")
def _lane_can_step(fam, p, z, m, run, n_max, doublings):
    # a direct step the scalar loop would take with no verdict possible yet:
    # fewer than doublings + 1 consecutive big points means fewer than
    # ``doublings`` consecutive doublings, and the fast exp is exact here
    x = z.real
    y = z.imag
    w = f_eval_fast(fam, p, z)
    ok = (m < n_max) and (run <= doublings) and (x > -740.0) and (x < 700.0) \
        and (abs(y) < 1e5) and (mod2(w) <= DIRECT_LIMIT * DIRECT_LIMIT)
    return ok, w


def _make_advance(FAM):
    # one loop per family: with the family a compile-time constant the
    # dispatch folds away and the lane loop vectorizes
    @njit(cache=True)
    def advance(p, R, n_max, doublings, z, m, run, zs, ms, n_steps):
        R2 = R * R
        L2 = DIRECT_LIMIT * DIRECT_LIMIT
        for _ in range(n_steps):
            for j in range(z.shape[0]):
                zj = z[j]
                x = zj.real
                w = f_eval_fast(FAM, p, zj)
                a2 = w.real * w.real + w.imag * w.imag
                rj = run[j]
                # same test as _lane_can_step, without short-circuiting
                ok = (m[j] < n_max) & (rj <= doublings) & (x > -740.0) \
                    & (x < 700.0) & (abs(zj.imag) < 1e5) & (a2 <= L2)
                big = a2 >= R2
                start = ok & big & (rj == 0)
                z[j] = w if ok else zj
                mj = m[j] + ok
                m[j] = mj
                run[j] = (rj + 1 if big else 0) if ok else rj
                zs[j] = w if start else zs[j]
                ms[j] = mj if start else ms[j]
    return advance


_advance_exp_affine = _make_advance(EXP_AFFINE)
_advance_exp_shift = _make_advance(EXP_SHIFT)
_advance_sine = _make_advance(SINE)
_advance_cosine = _make_advance(COSINE)
_advance_zexp = _make_advance(ZEXP)
_advance_petal_exp = _make_advance(PETAL_EXP)


@njit(cache=True)
def advance_lanes(fam, p, R, n_max, doublings, z, m, run, zs, ms, n_steps):
    """Lock-step direct iteration.  ``run`` counts consecutive points of
    modulus >= R ending at the current one, and (``zs``, ``ms``) is where that
    run started; a lane freezes as soon as it needs the scalar loop."""
    if fam == EXP_AFFINE:
        _advance_exp_affine(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)
    elif fam == EXP_SHIFT:
        _advance_exp_shift(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)
    elif fam == SINE:
        _advance_sine(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)
    elif fam == COSINE:
        _advance_cosine(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)
    elif fam == ZEXP:
        _advance_zexp(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)
    else:
        _advance_petal_exp(p, R, n_max, doublings, z, m, run, zs, ms, n_steps)


@njit(cache=True)
def classify_batch_kernel(fam, p, geo, R, n_max, doublings, z0, block):
    """Classify every point of ``z0`` exactly as ``classify_core`` would with
    no domain restriction; returns (verdict, n_event, fiat)."""
    n = z0.shape[0]
    R2 = R * R
    # a replay must end past the frame that stalled it
    block = max(block, doublings + 2)
    z = z0.copy()
    m = np.zeros(n, np.int64)
    run = np.zeros(n, np.int64)
    zs = z0.copy()
    ms = np.zeros(n, np.int64)
    for j in range(n):
        if mod2(z[j]) >= R2:
            run[j] = 1
    verdict = np.full(n, -1, np.int64)
    n_event = np.zeros(n, np.int64)
    fiat = np.zeros(n, np.bool_)
    empty_b = np.zeros(0, np.bool_)
    empty_c = np.zeros(0, np.complex128)
    empty_f = np.zeros(0, np.float64)
    empty_i = np.zeros(0, np.int64)
    allowed = np.zeros(0, np.int64)
    pending = np.arange(n)
    while pending.shape[0] > 0:
        for k in range(pending.shape[0]):
            j = pending[k]
            ok, w = _lane_can_step(fam, p, z[j], m[j], run[j], n_max, doublings)
            if ok:
                continue
            # replay from the start of the current big run so the doubling
            # count is rebuilt exactly
            zr = zs[j] if run[j] > 0 else z[j]
            mr = ms[j] if run[j] > 0 else m[j]
            v, ne, fi, mm, il, vv = classify_core(
                fam, p, geo, allowed, False, R, False, zr, mr, n_max,
                doublings, block, empty_b, empty_c, empty_f, empty_i, empty_i)
            if v == PENDING:
                z[j] = vv
                m[j] = mm
                run[j] = 0
            else:
                verdict[j] = v
                n_event[j] = ne
                fiat[j] = fi
        cnt = 0
        for k in range(pending.shape[0]):
            if verdict[pending[k]] < 0:
                cnt += 1
        nxt = np.empty(cnt, np.int64)
        cnt = 0
        for k in range(pending.shape[0]):
            if verdict[pending[k]] < 0:
                nxt[cnt] = pending[k]
                cnt += 1
        pending = nxt
        if cnt == 0:
            break
        zc = z[pending]
        mc = m[pending]
        rc = run[pending]
        zsc = zs[pending]
        msc = ms[pending]
        advance_lanes(fam, p, R, n_max, doublings, zc, mc, rc, zsc, msc, block)
        z[pending] = zc
        m[pending] = mc
        run[pending] = rc
        zs[pending] = zsc
        ms[pending] = msc
    return verdict, n_event, fiat


# --- inverse branches and log-coordinate audits -----------------------------

@njit(cache=True)
def shift_to_strip(geo, ell, strip):
    return complex(ell.real, ell.imag - TWO_PI * (strip_of(geo, ell.imag) - strip))


@njit(cache=True)
def inverse_branch(fam, p, geo, ell, idx, iters):
    """Solve ``lift(z) == ell`` (moved into the strip of ``idx``) in the tract of
    ``idx``; returns (status, z, residual)."""
    if not ell.real > geo[1] or cut_distance(geo, ell.imag) < ON_CUT_TOL:
        return NOT_IN_DOMAIN, complex(np.nan, np.nan), np.inf
    tract, strip = split_index(fam, idx)
    target = shift_to_strip(geo, ell, strip)
    z0 = inverse_guess(fam, p, target, tract)
    z, res = inverse_polish(fam, p, target, tract, z0, iters)
    if not res < 1e-10:
        return INDETERMINATE, z, res
    return OK, z, res


@njit(cache=True)
def expansion_margins(fam, p, geo, zeta):
    """|Phi'| and the lower bound (Re Phi - log K)/4pi; NaN outside tracts."""
    n = zeta.shape[0]
    dphi = np.full(n, np.nan)
    bound = np.full(n, np.nan)
    for k in range(n):
        z = cexp(zeta[k])
        t, L = lift(fam, p, z)
        if t < 0 or not L.real > geo[1]:
            continue
        dphi[k] = abs(z * logderiv(fam, p, z))
        bound[k] = (L.real - geo[1]) / (4.0 * math.pi)
    return dphi, bound


@njit(cache=True)
def doubling_pairs(fam, p, geo, ell, idx):
    """For each log-value ``ell`` pull back into domain ``idx`` and return
    (|z|, r(z), r(f(z))); NaN where the pullback is unusable."""
    n = ell.shape[0]
    mz = np.full(n, np.nan)
    r0 = np.full(n, np.nan)
    r1 = np.full(n, np.nan)
    for k in range(n):
        st, z, res = inverse_branch(fam, p, geo, ell[k], idx, 60)
        if st != OK:
            continue
        if abs(z) > DIRECT_LIMIT:
            a = size_r(geo, True, cmath.log(z))
        else:
            a = size_r(geo, False, z)
        mz[k] = abs(z)
        r0[k] = a
        r1[k] = size_r(geo, True, ell[k])
    return mz, r0, r1


@njit(cache=True)
def newton_preimage(fam, p, w, z0, iters):
    """Damped Newton on ``f(z) = w``; halves the step while the residual grows.
    Returns (z, |f(z) - w| / (1 + |w|))."""
    z = z0
    g = f_eval(fam, p, z) - w
    res = abs(g)
    scale = 1.0 + abs(w)
    for _ in range(iters):
        if res <= 1e-15 * scale:
            break
        d = f_deriv(fam, p, z)
        if d == 0:
            break
        dz = g / d
        lam = 1.0
        zn = z - dz
        gn = f_eval(fam, p, zn) - w
        rn = abs(gn)
        while not rn < res and lam > 1e-6:
            lam *= 0.5
            zn = z - lam * dz
            gn = f_eval(fam, p, zn) - w
            rn = abs(gn)
        if not rn < res:
            break
        z = zn
        g = gn
        res = rn
    return z, res / scale


@njit(cache=True)
def pullback(fam, p, geo, is_log, v, idx):
    """Preimage of the point ``(is_log, v)`` on the branch labelled ``idx``.

    In ``G_K`` off the cut this is the fundamental-domain inverse; elsewhere
    the same closed form is continued analytically and polished by Newton.
    Returns (status, z, residual).
    """
    if is_log:
        ell = v
    else:
        if v == 0:
            return INDETERMINATE, complex(np.nan, np.nan), np.inf
        ell = cmath.log(v)
    if ell.real > geo[1] and cut_distance(geo, ell.imag) >= ON_CUT_TOL:
        return inverse_branch(fam, p, geo, ell, idx, 60)
    tract, strip = split_index(fam, idx)
    target = shift_to_strip(geo, ell, strip)
    z0 = inverse_guess(fam, p, target, tract)
    w = cexp(ell) if is_log else v
    z, res = newton_preimage(fam, p, w, z0, 100)
    if not res < 1e-11:
        return INDETERMINATE, z, res
    return OK, z, res


@njit(cache=True)
def orbit_direct(fam, p, z, n):
    """``z, f(z), ..., f^n(z)`` in plain double arithmetic."""
    out = np.empty(n + 1, np.complex128)
    out[0] = z
    for k in range(n):
        z = f_eval(fam, p, z)
        out[k + 1] = z
    return out
