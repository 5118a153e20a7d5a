"""Acceptance suite: nine end-to-end criteria at their stated tolerances.

Each check records its outcome; a summary with one PASS/FAIL line per
criterion is printed at the end of the pytest run.  Run directly with
``python tests/test_acceptance.py`` for just this suite.
"""
import cmath
import hashlib
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from entiredyn import _kernels as kr
from entiredyn.cli import main as cli_main
from entiredyn.errors import DynamicsError
from entiredyn.fixedpoints import (Attracting, IrrationallyIndifferent, Repelling,
                                   find_fixed_points)
from entiredyn.logdyn import (doubling_audit, find_CF, geometry, inverse_branch, size_r,
                              verify_expansion)
from entiredyn.maps import (GOLDEN_MEAN, cosine, evaluate, exp_affine, exp_shift,
                            golden_exp_affine, golden_sine, petal_exp, zexp)
from entiredyn.orbits import (BigPoint, Escaping, classify_growth, estimate_Rprime,
                              probes_at, step)
from entiredyn.rays import ExternalAddress, hair_confinement_check, land_ray
from entiredyn.render import Viewport, ppm_bytes, render, rotation_estimate

from conftest import ATTRACTING_X, REPELLING_X, record

GOLDEN_PARAM = "-0.7373688780783199,-0.6754902942615236"
ES_ARGS = ["--family", "expshift", "--param", "-2,0"]


def cli(capsys, *argv):
    code = cli_main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    # compile (or load from cache) every kernel before anything is timed
    es = exp_shift(-2)
    verify_expansion(es, 10)
    render(golden_exp_affine(), Viewport(0, 8, 4), 10)
    classify_growth(es, {0}, 5, 60, 10)


def test_criterion_1_expansion_audit():
    maps = [golden_exp_affine(), exp_shift(-2), cosine(1, 1)]
    t0 = time.perf_counter()
    reports = [verify_expansion(m, 10_000, seed=0, slack=1e-12) for m in maps]
    elapsed = time.perf_counter() - t0
    for m, rep in zip(maps, reports):
        ok = rep.samples == 10_000 and rep.violations == 0
        record(1, f"{m.family} violations={rep.violations}/{rep.samples}", ok)
    record(1, "runtime", elapsed < 10, f"{elapsed:.2f} s < 10 s")
    assert all(r.violations == 0 and r.samples == 10_000 for r in reports)
    assert elapsed < 10


def _oracle_doubling_samples(m, C, r_max, count, seed):
    """Fresh domain-0 points of exp(z) + kappa with C <= r(z) <= r_max, paired
    with a lower bound for r(f(z)) evaluated by hand.

    Every such point has |z| > e^100, so f(z) itself is far outside double
    range and its argument is unresolvable.  Its log-modulus is not:
    log|f(z)| >= Re z + log(1 - |kappa| e^(-Re z)).  The base point of the
    strip containing log f(z) has real part ``base_re``, so
    r(f(z)) >= log|f(z)| - base_re whatever that strip is.
    """
    g = geometry(m)
    kappa = abs(m.params[0])
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a = math.exp(rng.uniform(math.log(g.logK), g.base_re + r_max))
        b = rng.uniform(g.phi_d - 2 * math.pi, g.phi_d)
        try:
            z = inverse_branch(m, complex(a, b), 0)
        except DynamicsError:
            continue
        if abs(z) <= g.K:
            continue
        r0 = size_r(m, z)
        if not C <= r0 <= r_max:
            continue
        log_fz = z.real + math.log1p(-kappa * math.exp(-z.real))
        out.append((r0, log_fz - g.base_re))
    return np.array(out)


def test_criterion_2_doubling_threshold(capsys):
    m = exp_shift(-2)
    code, out = cli(capsys, "find-cf", *ES_ARGS, "--domain", "0", "--r-max", "200")
    C = float(out.splitlines()[1].split(",")[2])
    record(2, f"find-cf C={C:.6g}", code == 0 and math.isfinite(C))
    pairs = _oracle_doubling_samples(m, C, 200.0, 1000, seed=20261016)
    worst = float((pairs[:, 1] / pairs[:, 0]).min())
    ok = bool(np.all(pairs[:, 1] >= 2 * pairs[:, 0]))
    record(2, "1000 fresh samples double", ok, f"min r(f(z))/r(z) >= {worst:.4g}")
    assert code == 0 and math.isfinite(C) and ok
    assert C == find_CF(m, 0, 200.0)


def test_criterion_3_orbit_growth(capsys):
    m = exp_shift(-2)
    t0 = time.perf_counter()
    code, out = cli(capsys, "estimate-rprime", *ES_ARGS, "--domains", "0", "--R", "5",
                    "--probes", "50")
    R_prime = float(out.splitlines()[1].split(",")[0])
    fresh = probes_at(m, {0}, R_prime, 50, seed=777)
    bad = 0
    for z in fresh:
        rec = classify_growth(m, {0}, 5, z, 2000)
        big = all(p.log_modulus >= math.log(5) for p in rec.points)
        bad += not (isinstance(rec.classification, Escaping) and big)
    elapsed = time.perf_counter() - t0
    record(3, f"R'={R_prime:g}", code == 0 and math.isfinite(R_prime))
    record(3, f"fresh probes escaping above 5: {len(fresh) - bad}/50",
           len(fresh) == 50 and bad == 0)
    record(3, "runtime", elapsed < 30, f"{elapsed:.2f} s < 30 s")
    assert code == 0 and len(fresh) == 50 and bad == 0 and elapsed < 30


def test_criterion_4_ray_landing(capsys):
    code, out = cli(capsys, "land-ray", *ES_ARGS, "--address", "p:0")
    _, status, re_, im, mult, cls = out.strip().split(";")
    x = complex(float(re_), float(im))
    ok_x = status == "landed" and abs(x - 1.146193) < 1e-6 and abs(x - REPELLING_X) < 1e-6
    ok_m = cls == "repelling" and abs(float(mult) - 3.14619) < 1e-4
    record(4, "landing point", ok_x, f"x*={x.real!r}, bisection {REPELLING_X!r}")
    record(4, "repelling multiplier", ok_m, f"|m|={float(mult):.10g}")
    assert code == 0 and ok_x and ok_m


ADDRESSES = [(1,), (-1,), (2,), (3,), (0, 1), (1, 0), (1, -1), (2, -1),
             (0, 0, 1), (1, 1, 0), (0, 1, 2)]


def test_criterion_5_landing_taxonomy():
    m = exp_shift(-2)
    landed = []
    for digits in ADDRESSES:
        res = land_ray(m, ExternalAddress.periodic(*digits))
        if res.landed:
            landed.append(res)
    bad = [str(r.address) for r in landed
           if abs(r.fp.multiplier) < 1 - 1e-6
           or isinstance(r.fp.cls, (Attracting, IrrationallyIndifferent))]
    record(5, f"converged {len(landed)}/{len(ADDRESSES)} (need 10)", len(landed) >= 10)
    record(5, "all |multiplier| >= 1 - 1e-6", not bad,
           f"min |m| = {min(abs(r.fp.multiplier) for r in landed):.4g}")
    assert len(landed) >= 10 and not bad


def test_criterion_6_hair_confinement():
    rep = hair_confinement_check(exp_shift(-2), 0, (5, 10), 5, samples=100, n_images=20)
    record(6, f"samples={rep.samples}", rep.ok and rep.samples >= 100,
           f"{len(rep.failures)} failures, {rep.fiat_images} images past the precision horizon")
    assert rep.ok and rep.samples >= 100


@pytest.fixture(scope="module")
def siegel_image():
    m = golden_exp_affine()
    t0 = time.perf_counter()
    img = render(m, Viewport(0, 8, 400), 10_000)
    return img, time.perf_counter() - t0


def test_criterion_7_pixel_at_zero(siegel_image):
    img, _ = siegel_image
    v = img.verdict_at(0)
    record(7, "pixel at 0 non-escaping", v == ("non_escaping", None), str(v))
    assert v == ("non_escaping", None)


def test_criterion_7_pixel_at_five(siegel_image):
    img, _ = siegel_image
    v = img.verdict_at(5)
    direct = classify_growth(golden_exp_affine(), None, 3.0, 5, 10_000).classification
    ok = v is not None and v[0] == "escaping"
    record(7, "pixel at 5 escaping", ok,
           f"verdict_at(5)={v}; viewport spans Re in [-4, 4]; "
           f"orbit of 5 classifies {type(direct).__name__}")
    assert ok


def test_criterion_7_orbit_and_rotation():
    est = rotation_estimate(golden_exp_affine(), 0.01, 100_000)
    record(7, "orbit of 0.01 below 1", est.max_modulus < 1, f"max |z| = {est.max_modulus:.5f}")
    err = abs(est.theta - GOLDEN_MEAN)
    record(7, "rotation number", err < 1e-3, f"|theta - golden| = {err:.2e}")
    assert est.max_modulus < 1 and err < 1e-3


PINNED_SHA256 = "efb85a42ce6c692416e457082d4152c75b9475d34ca36dde5ac32e8b4d453fdb"


def test_criterion_7_runtime_and_determinism(siegel_image, tmp_path):
    img, elapsed = siegel_image
    record(7, "render runtime", elapsed < 60, f"{elapsed:.1f} s < 60 s")
    data = ppm_bytes(img)
    path = tmp_path / "siegel.ppm"
    out = subprocess.run([sys.executable, "-m", "entiredyn.cli", "render",
                          "--family", "expaffine", "--param", GOLDEN_PARAM,
                          "--viewport", "0,0,8", "--pixels", "400", "--nmax", "10000",
                          "--out", str(path)], capture_output=True)
    same = out.returncode == 0 and path.read_bytes() == data
    digest = hashlib.sha256(data).hexdigest()
    record(7, "PPM byte-identical across runs", same)
    record(7, "PPM matches pinned golden digest", digest == PINNED_SHA256, digest[:16])
    assert elapsed < 60 and same and digest == PINNED_SHA256


def test_criterion_8_fixed_point_inventory(capsys):
    m = exp_shift(-2)
    code, out = cli(capsys, "fixed-points", *ES_ARGS, "--period", "1",
                    "--box", "-3,3,-3,3", "--grid", "16")
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    pts = find_fixed_points(m, 1, (-3, 3, -3, 3), 16)
    ok = (code == 0 and len(rows) == 2 and len(pts) == 2
          and abs(complex(float(rows[0][0]), float(rows[0][1])) - ATTRACTING_X) < 1e-6
          and rows[0][5] == "attracting" and isinstance(pts[0].cls, Attracting)
          and abs(complex(float(rows[1][0]), float(rows[1][1])) - REPELLING_X) < 1e-6
          and rows[1][5] == "repelling" and isinstance(pts[1].cls, Repelling))
    res = max(p.residual for p in pts)
    record(8, f"found {len(rows)} fixed points", ok,
           ", ".join(f"{float(r[0]):.6f} {r[5]}" for r in rows))
    record(8, "residuals < 1e-10", res < 1e-10, f"max {res:.2e}")
    assert ok and res < 1e-10


def test_criterion_9_representation_consistency():
    maps = [exp_shift(-2), golden_exp_affine(), golden_sine(), cosine(1, 1), zexp(),
            petal_exp(), exp_affine(2.5 + 0.3j), exp_shift(0.3 + 1j)]
    rng = np.random.default_rng(99)
    worst = 0.0
    steps = 0
    for k in range(1000):
        m = maps[k % len(maps)]
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        for _ in range(30):
            w = kr.f_eval(m.code, m.p, z)
            if not kr.mod2(w) < 1e28:
                break
            # the same step taken from both representations of z
            direct = step(m, BigPoint.direct(z))
            via_log = step(m, BigPoint.logarithmic(cmath.log(z))) if z != 0 else direct
            for p in (direct, via_log):
                worst = max(worst, abs(p.to_complex() - w) / abs(w) if w != 0
                            else abs(p.to_complex()))
            steps += 1
            z = w
    record(9, f"{steps} steps over 1000 orbits", worst < 1e-8, f"max relative gap {worst:.2e}")
    assert worst < 1e-8


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
