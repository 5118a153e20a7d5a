import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from entiredyn.errors import NotInDomain
from entiredyn.logdyn import (choose_cut_curve, doubling_audit, domain_index,
                              find_CF, geometry, in_tract, inverse_branch, phi,
                              phi_derivative, size_r, verify_expansion)
from entiredyn.maps import (bound_K, cosine, evaluate, exp_affine, exp_shift,
                            golden_exp_affine, petal_exp, sine, zexp)

MAPS = [golden_exp_affine(), exp_shift(-2), cosine(1, 1), sine(1.3), zexp(), petal_exp()]


def test_in_tract(es):
    assert in_tract(es, 3)
    assert not in_tract(es, -10)
    assert not in_tract(cosine(1, 1), 0)


def test_cut_curves():
    assert choose_cut_curve(exp_shift(-2)).direction == -1
    assert choose_cut_curve(golden_exp_affine()).direction == -1
    cut = choose_cut_curve(cosine(1, 1))
    assert cut.direction == 1j and cut.base == 3j


@pytest.mark.parametrize("m", MAPS, ids=str)
def test_cut_avoids_tracts(m):
    cut = choose_cut_curve(m)
    K = bound_K(m)
    for z in cut.samples(50, 1e3):
        assert abs(evaluate(m, complex(z))) <= K


def test_domain_index(es):
    assert domain_index(es, 5) == 0
    assert domain_index(es, 5 + 2j * math.pi) == 1
    assert domain_index(es, 5 - 6j * math.pi) == -3
    with pytest.raises(NotInDomain):
        domain_index(es, -10)


def test_phi_examples(es):
    assert phi(es, math.log(5)).zeta == pytest.approx(math.log(math.exp(5) - 2), abs=1e-12)
    assert phi(exp_affine(1), 4).zeta.real == pytest.approx(math.exp(4), rel=1e-9)


@pytest.mark.parametrize("m", MAPS, ids=str)
@settings(max_examples=50, deadline=None)
@given(x=st.floats(1.5, 5.0), y=st.floats(-math.pi, math.pi))
def test_phi_is_a_lift(m, x, y):
    zeta = complex(x, y)
    z = cmath.exp(zeta)
    w = evaluate(m, z)
    if abs(w) <= bound_K(m):
        return
    got = cmath.exp(phi(m, zeta).zeta)
    assert abs(got - w) / abs(w) < 1e-9


@settings(max_examples=50, deadline=None)
@given(x=st.floats(2.5, 4.0), y=st.floats(-3.0, 3.0))
def test_phi_derivative_matches_difference(x, y):
    m = exp_shift(-2)
    zeta = complex(x, y)
    h = 1e-6
    # the tract is not a vertical strip in log coordinates
    assume(all(in_tract(m, cmath.exp(zeta + d)) for d in (-2 * h, 2 * h)))
    fd = (phi(m, zeta + h).zeta - phi(m, zeta - h).zeta) / (2 * h)
    assert abs(phi_derivative(m, zeta) - fd) < 1e-6 * abs(fd)


def test_size_r(es):
    g = geometry(es)
    assert g.base_re == pytest.approx(16 * math.pi + math.log(3) + 1)
    assert size_r(es, cmath.exp(100)) == pytest.approx(100 - g.base_re, abs=1e-9)
    assert size_r(es, cmath.exp(100)) == pytest.approx(47.64, abs=0.01)
    z0 = g.base_point(0).z0
    assert size_r(es, z0) == pytest.approx(0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(2.0, 80.0), y=st.floats(-3.1, 3.1))
def test_size_r_dominates_log_ratio(x, y):
    m = exp_shift(-2)
    g = geometry(m)
    z = cmath.exp(complex(x, y))
    assert size_r(m, z) >= math.log(abs(z)) - g.base_point(0).zeta0.real - 1e-12


@pytest.mark.parametrize("m", MAPS, ids=str)
def test_inverse_branch_round_trip(m):
    g = geometry(m)
    rng = np.random.default_rng(3)
    for _ in range(20):
        ell = complex(rng.uniform(g.logK + 0.5, 30), rng.uniform(-3, 3))
        z = inverse_branch(m, ell, 0)
        w = evaluate(m, z)
        assert abs(cmath.log(w) - ell) < 1e-9 or abs(w - cmath.exp(ell)) < 1e-9 * abs(w)
        assert domain_index(m, z) == 0


@pytest.mark.parametrize("m", [exp_affine(1), exp_shift(-2), cosine(1, 1)], ids=str)
def test_expansion_has_no_violations(m):
    rep = verify_expansion(m, 10_000, seed=0)
    assert rep.samples == 10_000
    assert rep.violations == 0
    assert rep.min_margin >= 0


def test_find_cf_doubles(es):
    C = find_CF(es, 0, 200.0)
    assert C <= 120
    r0, r1 = doubling_audit(es, 0, C, 200.0, 500, seed=11)
    assert np.all(r1 >= 2 * r0)


def test_find_cf_golden():
    assert math.isfinite(find_CF(golden_exp_affine(), 0, 200.0))
