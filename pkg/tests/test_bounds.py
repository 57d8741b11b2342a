"""Coefficient bounds, the incomplete gamma sum, kernel constants and the grid certificate."""

import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspbound.bounds import (
    CertificationFailed,
    G_value,
    akmn_envelope,
    j_coeff_bound,
    const,
    grid_min_G,
    incomplete_gamma_int,
    kernel_constants_verify,
    theorem1_B,
    theorem1_bound,
)
from cuspbound.forms import dim_cusp, jfun, miller_basis
from cuspbound.series import to_mpf


# -- incomplete gamma ------------------------------------------------------

@given(st.integers(0, 60), st.fractions(min_value=0, max_value=300, max_denominator=97))
@settings(max_examples=80, deadline=None)
def test_incomplete_gamma_matches_mpmath(d, x):
    with mpmath.workprec(256):
        want = mpmath.gammainc(d + 1, a=to_mpf(x))
        got = incomplete_gamma_int(d, to_mpf(x))
        assert abs(got - want) <= mpmath.mpf(10) ** -20 * max(1, abs(want))


@pytest.mark.parametrize("d,x", [(0, 1), (3, 2), (10, 5), (22, 30)])
def test_incomplete_gamma_matches_quadrature(d, x):
    with mpmath.workdps(40):
        want = mpmath.quad(lambda t: t ** d * mpmath.exp(-t), [x, x + 50, x + 200, mpmath.inf])
        assert abs(incomplete_gamma_int(d, x) - want) <= mpmath.mpf(10) ** -20 * abs(want)


def test_incomplete_gamma_edges():
    assert incomplete_gamma_int(5, 0) == 120
    with mpmath.workprec(256):
        assert abs(incomplete_gamma_int(1, 1) - 2 / mpmath.e) < mpmath.mpf(10) ** -70
    with pytest.raises(ValueError):
        incomplete_gamma_int(-1, 1)
    with pytest.raises(ValueError):
        incomplete_gamma_int(2, -1)


# -- directed constants ----------------------------------------------------

@pytest.mark.parametrize("s", ["0.1", "7.358", "0.000003636545", "2003.34"])
def test_const_rounding_direction(s):
    with mpmath.workprec(64):
        lo, hi = const(s, "d"), const(s, "u")

    def exact(x):
        m, e = x.man_exp
        return Fraction(m) * Fraction(2) ** e

    assert exact(lo) <= Fraction(s) <= exact(hi)
    assert lo < hi


# -- the bound on |a(n)| ---------------------------------------------------

def test_bound_report_fields():
    r = theorem1_B(12, [1])
    d = r.to_dict()
    for key in ("B", "B_proof", "term1", "term2", "inner_sum", "mantissa", "coeffs", "constants"):
        assert key in d
    json.dumps(d)
    assert mpmath.mpf("8.50e8") < r.B < mpmath.mpf("8.51e8")


def test_bound_report_errors():
    with pytest.raises(ValueError):
        theorem1_B(14, [])
    with pytest.raises(ValueError):
        theorem1_B(24, [1])
    with pytest.raises(ValueError):
        theorem1_B(24, [1, 0], mantissa=32)


def test_bound_dominates_delta():
    # tau(n) for n <= 300
    rep = theorem1_B(12, [1])
    from cuspbound.forms import delta

    D = delta(301)
    for n in range(1, 301):
        assert abs(D[n]) <= theorem1_bound(rep, n)


@pytest.mark.parametrize("k", [k for k in range(12, 41, 2) if dim_cusp(k)])
def test_bound_dominates_miller_rows(k):
    ell = dim_cusp(k)
    N = 150
    basis = miller_basis(k, N + 1)
    for m in range(1, ell + 1):
        rep = theorem1_B(k, [int(i == m) for i in range(1, ell + 1)])
        for n in range(ell + 1, N + 1):
            assert abs(to_mpf(basis.rows[m][n])) <= theorem1_bound(rep, n), (k, m, n)


@given(st.sampled_from([24, 36, 48]), st.lists(st.integers(-50, 50), min_size=4, max_size=4))
@settings(max_examples=15, deadline=None)
def test_bound_dominates_combinations(k, raw):
    ell = dim_cusp(k)
    a = raw[:ell]
    if not any(a):
        return
    basis = miller_basis(k, 121)
    G = basis.rows[1].scale(a[0])
    for m in range(2, ell + 1):
        G = G + basis.rows[m].scale(a[m - 1])
    rep = theorem1_B(k, a)
    for n in range(1, 121):
        assert abs(to_mpf(G[n])) <= theorem1_bound(rep, n)


@pytest.mark.parametrize("k", [k for k in range(12, 61, 2) if dim_cusp(k)])
def test_envelope_dominates_basis(k):
    ell = dim_cusp(k)
    basis = miller_basis(k, 61)
    for m in range(1, ell + 1):
        for n in range(ell + 1, 61):
            assert abs(to_mpf(basis.rows[m][n])) <= akmn_envelope(k, m, n)


def test_envelope_value():
    v = akmn_envelope(12, 1, 2)
    assert abs(v - mpmath.mpf("529545.75")) < 1


# -- kernel constants ------------------------------------------------------

def test_kernel_constants_report_shape():
    r = kernel_constants_verify()
    names = {c["name"]: c for c in r["checks"]}
    for n in ("delta_ratio", "inv_delta_tau", "envelope_consolidation", "j_tail_z_chain", "j_bound_spotcheck"):
        assert names[n]["ok"], names[n]
    json.dumps(r)
    assert r["mantissa"] == 256


def test_delta_ratio_value():
    r = kernel_constants_verify(mantissa=128)
    c = {x["name"]: x for x in r["checks"]}
    assert mpmath.mpf(c["delta_ratio"]["recomputed"]) == pytest.approx(7.35756, abs=1e-4)
    assert mpmath.mpf(c["inv_delta_tau"]["recomputed"]) == pytest.approx(1488.8013, abs=1e-3)


def test_jb_bound_dominates_j_coefficients():
    c = jfun(120)
    assert all(c[n] <= j_coeff_bound(n) for n in range(1, 120))


# -- grid certificate ------------------------------------------------------

@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
@settings(max_examples=200, deadline=None)
def test_G_symmetry(x, u):
    assert G_value(x, u)[0] == pytest.approx(G_value(-x, -u)[0], rel=1e-12)


@pytest.fixture(scope="module")
def coarse_certificate():
    return grid_min_G(step=5e-4)


def test_certificate_is_below_every_sample(coarse_certificate):
    rng = np.random.default_rng(0)
    xs = rng.uniform(-0.5, 0.5, 20000)
    us = rng.uniform(-0.5, 0.5, 20000)
    vals = G_value(xs, us)
    assert vals.shape == (20000,)
    assert coarse_certificate.certified_G <= vals.min()
    assert coarse_certificate.certified_G2 <= coarse_certificate.min_sampled_G2


def test_certificate_clears_target(coarse_certificate):
    assert coarse_certificate.ok
    json.dumps(coarse_certificate.to_dict())


def test_finer_grid_certifies_more():
    a = grid_min_G(step=1e-3)
    b = grid_min_G(step=5e-4)
    assert a.certified_G < b.certified_G


def test_certificate_failure_raises():
    with pytest.raises(CertificationFailed):
        grid_min_G(step=5e-3, raise_on_failure=True)
