"""Hecke operators, eigenforms, decompositions and the Petersson sandwich."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspbound.forms import delta, dim_cusp, eisenstein, miller_basis
from cuspbound.hecke import (
    charpoly,
    decompose,
    deligne_check,
    eigenforms,
    geometric_ratio_exponent,
    hecke_matrix,
    hecke_tp,
    multiplicativity_check,
    petersson_lower,
    petersson_upper_ff,
    tolerance,
)
from cuspbound.series import QLaurent, to_mpf

CUSP_WEIGHTS = [k for k in range(12, 61, 2) if dim_cusp(k) > 0]


def matmul(A, B):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def test_hecke_on_delta_and_eisenstein():
    D = delta(60)
    assert hecke_tp(D, 12, 2) == delta(30).scale(-24)
    assert hecke_tp(D, 12, 3) == delta(20).scale(252)
    E = eisenstein(6, 40)
    assert hecke_tp(E, 6, 5) == eisenstein(6, 8).scale(1 + 5 ** 5)


@given(st.lists(st.integers(-1000, 1000), min_size=20, max_size=40), st.sampled_from([2, 3, 5, 7]),
       st.sampled_from([4, 12, 20]))
@settings(max_examples=60, deadline=None)
def test_hecke_formula_on_arbitrary_series(cs, p, k):
    f = QLaurent(cs, 0, len(cs))
    g = hecke_tp(f, k, p)
    assert g.prec == f.prec // p
    for n in range(g.prec):
        want = f[p * n] + (p ** (k - 1) * f[n // p] if n % p == 0 else 0)
        assert g[n] == want


def test_hecke_rejects_composite():
    with pytest.raises(ValueError):
        hecke_tp(delta(20), 12, 4)


def test_weight_24_matrix_and_spectrum():
    M = hecke_matrix(24, 2)
    assert M == [[0, 20468736], [1, 1080]]
    assert charpoly(M) == [1, -1080, -20468736]
    gs = eigenforms(24)
    with mpmath.workdps(60):
        s = 12 * mpmath.sqrt(144169)
        assert abs(gs[0].eigenvalue - (540 + s)) < mpmath.mpf(10) ** -50
        assert abs(gs[1].eigenvalue - (540 - s)) < mpmath.mpf(10) ** -50


@pytest.mark.parametrize("k", [24, 36, 48, 60, 72])
def test_charpoly_cayley_hamilton(k):
    M = [[Fraction(x) for x in row] for row in hecke_matrix(k, 2)]
    c = charpoly(M)
    n = len(M)
    acc = [[Fraction(0)] * n for _ in range(n)]
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for coef in reversed(c):
        acc = [[acc[i][j] + coef * P[i][j] for j in range(n)] for i in range(n)]
        P = matmul(P, M)
    assert all(x == 0 for row in acc for x in row)
    assert c[0] == 1


@pytest.mark.parametrize("k", [24, 36, 48])
def test_hecke_matrices_commute(k):
    A, B = hecke_matrix(k, 2), hecke_matrix(k, 3)
    assert matmul(A, B) == matmul(B, A)


def test_weight_12_eigenform_is_delta():
    (g,) = eigenforms(12, nmax=40)
    D = delta(41)
    assert all(g.a(n) == D[n] for n in range(1, 41))


@pytest.mark.parametrize("k", CUSP_WEIGHTS)
def test_eigenforms_multiplicative_and_deligne(k):
    gs = eigenforms(k, nmax=200)
    assert len(gs) == dim_cusp(k)
    for g in gs:
        assert g.a(1) == 1
        assert deligne_check(g, 200)["ok"]
        assert multiplicativity_check(g, 200)["ok"]


@pytest.mark.parametrize("k", [24, 36, 48])
def test_eigenvalue_is_a_of_p(k):
    rel, floor = tolerance(256)
    for g in eigenforms(k, nmax=30):
        assert abs(g.a(g.hecke_prime) - g.eigenvalue) <= rel * abs(g.eigenvalue) + floor


def test_multiplicativity_detects_corruption():
    g = eigenforms(24, nmax=40)[0]
    coeffs = list(g.coeffs)
    coeffs[6] *= 1 + mpmath.mpf(10) ** -20
    g.coeffs = tuple(coeffs)
    r = multiplicativity_check(g, 40)
    assert not r["ok"] and (2, 3) in r["violations"]


@pytest.mark.parametrize("k", [24, 36, 40, 60])
def test_decomposition_reconstructs_form(k):
    ell = dim_cusp(k)
    P = 60
    basis = miller_basis(k, P)
    G = basis.rows[1] + basis.rows[ell].scale(Fraction(-3, 7))
    gs = eigenforms(k, nmax=P - 1)
    dec = decompose(G, k, forms=gs)
    assert dec.ok
    rel, floor = tolerance(256)
    with mpmath.workprec(512):
        for n in range(1, P):
            s = mpmath.fsum(c * g.a(n) for c, g in zip(dec.c, gs))
            assert abs(s - to_mpf(G[n])) <= rel * max(1, abs(to_mpf(G[n]))) * 10 ** 6 + floor


def test_decompose_single_form_space():
    dec = decompose(delta(10).scale(5), 12)
    assert abs(dec.C - 5) < mpmath.mpf(10) ** -60


def test_decompose_rejects_non_cusp_input():
    with pytest.raises(ValueError):
        decompose(eisenstein(12, 5), 12)


@pytest.mark.parametrize("k", CUSP_WEIGHTS)
def test_petersson_sandwich(k):
    ell = dim_cusp(k)
    N = 60
    basis = miller_basis(k, N + 1)
    gs = eigenforms(k, nmax=ell + 1)
    for m in range(1, ell + 1):
        G = basis.rows[m]
        lo = petersson_lower(decompose(G, k, forms=gs))
        up = petersson_upper_ff(G, k, N)
        head = petersson_upper_ff(G, k, N, tail=False)
        assert 0 < lo <= up
        assert head <= up


def test_petersson_upper_needs_precision():
    with pytest.raises(ValueError):
        petersson_upper_ff(delta(10), 12, 10)


def test_geometric_ratio():
    assert geometric_ratio_exponent() <= -mpmath.mpf("0.01288")


def test_tolerance_policy():
    rel, floor = tolerance(256)
    assert rel == mpmath.mpf(2) ** -128 and floor == mpmath.mpf(2) ** -64
