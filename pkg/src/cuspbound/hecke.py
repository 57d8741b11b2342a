"""Hecke operators, numeric eigenforms and Petersson-norm bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .bounds import DELTA_RATIO, ENVELOPE, GEOM_EXP, V_TAU, Y_Z, const, incomplete_gamma_int
from .forms import dim_cusp, miller_basis
from .series import DEFAULT_MANTISSA, QLaurent, check_mantissa, divisor_count, is_prime, to_mpf


class DegenerateSpectrum(RuntimeError):
    pass


def tolerance(mantissa):
    """(relative, absolute) tolerance used for every numeric assertion."""
    return mpmath.mpf(2) ** (-(mantissa // 2)), mpmath.mpf(2) ** -64


def hecke_tp(f: QLaurent, k: int, p: int) -> QLaurent:
    """f | T_p, exact, to O(q^floor(prec/p))."""
    if not is_prime(p):
        raise ValueError(f"T_p needs a prime p, got {p}")
    if f.valuation < 0:
        raise ValueError("T_p acts on holomorphic q-expansions only")
    out_prec = f.prec // p
    pk = p ** (k - 1)
    cs = []
    for n in range(out_prec):
        c = f[p * n]
        if n % p == 0:
            c += pk * f[n // p]
        cs.append(c)
    return QLaurent(cs, 0, out_prec)


def hecke_matrix(k: int, p: int):
    """Matrix of T_p on the Miller cusp basis; row m-1 holds T_p F_{k,m} in
    coordinates F_{k,1..ell}."""
    ell = dim_cusp(k)
    if ell == 0:
        return []
    basis = miller_basis(k, max(p * (ell + 1), ell + 2))
    rows = []
    for m in range(1, ell + 1):
        t = hecke_tp(basis.rows[m], k, p)
        rows.append([t[i] for i in range(1, ell + 1)])
    return rows


def charpoly(M):
    """Exact characteristic polynomial det(xI - M), highest degree first (Faddeev-LeVerrier)."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # Mk = A Mk-1 + c I
        Mk = [[sum(A[i][t] * Mk[t][j] for t in range(n)) + (c if i == j else 0) for j in range(n)]
              for i in range(n)]
        AM = [[sum(A[i][t] * Mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(AM[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


@dataclass
class Eigenform:
    k: int
    coeffs: tuple  # a(0), a(1), ..., a(nmax); a(0) = 0, a(1) = 1
    mantissa: int
    q_prec: int
    vector: tuple  # coordinates in F_{k,1..ell}
    eigenvalue: object  # eigenvalue of the Hecke operator used to separate the spectrum
    hecke_prime: int

    def a(self, n):
        return self.coeffs[n]


def _separated(vals, tol):
    scale = max(abs(v) for v in vals) or mpmath.mpf(1)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= tol * scale:
                return False
    return True


def eigenforms(k: int, mantissa: int = DEFAULT_MANTISSA, nmax: int | None = None):
    """Normalized Hecke eigenforms of S_k, sorted by eigenvalue (descending).

    Diagonalizes T_2 on the Miller basis (T_3 if T_2 has a repeated eigenvalue
    within tolerance) at twice the requested precision, then expands each
    eigenvector into q-coefficients a(0..nmax).
    """
    mantissa = check_mantissa(mantissa)
    ell = dim_cusp(k)
    if ell == 0:
        raise ValueError(f"S_{k} = 0 has no eigenforms")
    nmax = max(nmax or 0, 2 * ell, 5)
    work = 2 * mantissa
    rel, _ = tolerance(mantissa)
    basis = miller_basis(k, nmax + 1)
    with mp.workprec(work):
        for p in (2, 3):
            T = hecke_matrix(k, p)
            Mt = mpmath.matrix([[to_mpf(T[j][i]) for j in range(ell)] for i in range(ell)])
            if ell == 1:
                vals, vecs = [Mt[0, 0]], mpmath.matrix([[1]])
            else:
                vals, vecs = mpmath.eig(Mt)
            scale = max(abs(v) for v in vals)
            if any(abs(mpmath.im(v)) > rel * scale for v in vals):
                raise DegenerateSpectrum(f"T_{p} on S_{k} has non-real eigenvalues numerically")
            vals = [mpmath.re(v) for v in vals]
            if _separated(vals, rel):
                break
        else:
            raise DegenerateSpectrum(f"T_2 and T_3 on S_{k} both have repeated eigenvalues within tolerance")
        forms = []
        for idx, lam in enumerate(vals):
            x = [mpmath.re(vecs[i, idx]) for i in range(ell)]
            x = [xi / x[0] for xi in x]
            a = [mpmath.mpf(0)] * (nmax + 1)
            for n in range(1, nmax + 1):
                if n <= ell:
                    a[n] = x[n - 1]
                else:
                    a[n] = mpmath.fsum(x[m - 1] * basis.rows[m][n] for m in range(1, ell + 1))
            a[1] = mpmath.mpf(1)
            forms.append((-lam, idx, Eigenform(k, tuple(a), mantissa, nmax + 1, tuple(x), lam, p)))
    forms.sort(key=lambda t: (t[0], t[1]))
    return [f for _, _, f in forms]


@dataclass
class EigenDecomposition:
    k: int
    eigenforms: list
    c: list
    C: object
    residual: object
    condition: object
    mantissa: int
    ok: bool
    tolerance: dict = field(default_factory=dict)

    def to_dict(self):
        digits = max(15, int(self.mantissa * 0.30103) - 2)
        f = lambda x: mpmath.nstr(x, digits)  # noqa: E731
        return {"k": self.k, "mantissa": self.mantissa, "c": [f(x) for x in self.c], "C": f(self.C),
                "residual": f(self.residual), "condition": f(self.condition), "ok": self.ok,
                "eigenvalues": [f(g.eigenvalue) for g in self.eigenforms],
                "hecke_prime": self.eigenforms[0].hecke_prime if self.eigenforms else None,
                "tolerance": self.tolerance}


def decompose(G: QLaurent, k: int, mantissa: int = DEFAULT_MANTISSA, forms=None) -> EigenDecomposition:
    """Write the cusp form G as sum c_i g_i over normalized eigenforms."""
    mantissa = check_mantissa(mantissa)
    ell = dim_cusp(k)
    if G.prec < ell + 1:
        raise ValueError(f"G must be known to O(q^{ell + 1})")
    if G.valuation < 1:
        raise ValueError("G is not a cusp form")
    forms = forms if forms is not None else eigenforms(k, mantissa)
    rel, floor = tolerance(mantissa)
    with mp.workprec(2 * mantissa):
        X = mpmath.matrix([[g.a(n) for g in forms] for n in range(1, ell + 1)])
        b = mpmath.matrix([to_mpf(G[n]) for n in range(1, ell + 1)])
        c = mpmath.lu_solve(X, b)
        r = X * c - b
        bnorm = max(abs(x) for x in b)
        residual = max(abs(x) for x in r) / bnorm if bnorm else max(abs(x) for x in r)
        cond = mpmath.mnorm(X, 1) * mpmath.mnorm(mpmath.inverse(X), 1)
        cs = [c[i] for i in range(ell)]
        C = mpmath.fsum(abs(x) for x in cs)
    ok = bool(residual <= rel + floor)
    return EigenDecomposition(k, forms, cs, C, residual, cond, mantissa, ok,
                              {"relative": f"2^-{mantissa // 2}", "absolute": "2^-64"})


def deligne_check(g: Eigenform, nmax: int) -> dict:
    """Check |a(p)| <= 2 p^((k-1)/2) and |a(n)| <= d(n) n^((k-1)/2) up to nmax."""
    if nmax >= len(g.coeffs):
        raise ValueError(f"eigenform known only to n = {len(g.coeffs) - 1}")
    rel, floor = tolerance(g.mantissa)
    worst_p = mpmath.mpf(0)
    worst_n = mpmath.mpf(0)
    with mp.workprec(2 * g.mantissa):
        e = mpmath.mpf(g.k - 1) / 2
        for n in range(1, nmax + 1):
            s = mpmath.mpf(n) ** e
            worst_n = max(worst_n, abs(g.a(n)) / (divisor_count(n) * s))
            if is_prime(n):
                worst_p = max(worst_p, abs(g.a(n)) / (2 * s))
    ok = bool(worst_p <= 1 + rel + floor and worst_n <= 1 + rel + floor)
    return {"k": g.k, "nmax": nmax, "max_ratio_prime": worst_p, "max_ratio_all": worst_n, "ok": ok}


def multiplicativity_check(g: Eigenform, nmax: int) -> dict:
    """|a(mn) - a(m)a(n)| <= rel |a(m)a(n)| + floor for coprime m, n with mn <= nmax."""
    from math import gcd

    rel, floor = tolerance(g.mantissa)
    worst = mpmath.mpf(0)
    bad = []
    with mp.workprec(2 * g.mantissa):
        for m in range(2, nmax + 1):
            for n in range(m + 1, nmax // m + 1):
                if gcd(m, n) != 1:
                    continue
                prod = g.a(m) * g.a(n)
                err = abs(g.a(m * n) - prod)
                allowed = rel * abs(prod) + floor
                if err > allowed:
                    bad.append((m, n))
                if prod:
                    worst = max(worst, err / abs(prod))
    return {"k": g.k, "nmax": nmax, "worst_relative": worst, "violations": bad, "ok": not bad}


# ---------------------------------------------------------------------------
# Petersson norm sandwich


def symsq_lower(k: int, mantissa: int = DEFAULT_MANTISSA):
    """1/(64 log k), the lower bound for L(Sym^2 g, 1)."""
    with mp.workprec(check_mantissa(mantissa)):
        return 1 / (64 * mpmath.log(k))


def petersson_lower(dec: EigenDecomposition):
    """sum |c_i|^2 * 3 (k-1)! / (32 pi^2 (4 pi)^k log k)."""
    k = dec.k
    with mp.workprec(dec.mantissa):
        per_form = 3 * mpmath.factorial(k - 1) / (32 * mpmath.pi ** 2 * (4 * mpmath.pi) ** k * mpmath.log(k))
        return mpmath.fsum(abs(c) ** 2 for c in dec.c) * per_form


def petersson_upper_ff(G: QLaurent, k: int, N_tail: int, mantissa: int = DEFAULT_MANTISSA, tail: bool = True):
    """Upper bound for <G, G> from the truncated-fundamental-domain integral.

    Terms n <= N_tail use the exact coefficients of G.  If ``tail`` is set the
    remaining terms are bounded with the A_k(m, n) envelope: the factor
    n^-(k-1) sum_i (k-2)!/i! (2 pi sqrt3 n)^i is decreasing in n, and what
    remains is a geometric series with ratio <= e^-0.01288.
    """
    mantissa = check_mantissa(mantissa)
    ell = dim_cusp(k)
    if G.prec <= N_tail:
        raise ValueError(f"G known only to O(q^{G.prec}); need N_tail < prec")
    with mp.workprec(mantissa):
        c0 = 12 / (4 * mpmath.pi) ** k
        x1 = 2 * mpmath.pi * mpmath.sqrt(3)
        head = mpmath.fsum(
            to_mpf(G[n]) ** 2 / mpmath.mpf(n) ** (k - 1) * incomplete_gamma_int(k - 2, x1 * n, mantissa)
            for n in range(1, N_tail + 1) if G[n])
        total = c0 * head
        if tail:
            if N_tail < ell:
                raise ValueError("the envelope bound needs N_tail >= ell")
            s = mpmath.fsum(abs(to_mpf(G[m])) * mpmath.exp(-2 * mpmath.pi * const(V_TAU) * m)
                            for m in range(1, ell + 1))
            env2 = (const(ENVELOPE) * const(DELTA_RATIO) ** ell * s) ** 2
            N1 = N_tail + 1
            xN = x1 * N1
            dec_piece = incomplete_gamma_int(k - 2, xN, mantissa) * mpmath.exp(xN) / mpmath.mpf(N1) ** (k - 1)
            r = mpmath.exp(-const(GEOM_EXP))
            geo = r ** N1 / (1 - r)
            total += c0 * env2 * dec_piece * geo
    return total


def geometric_ratio_exponent(mantissa: int = DEFAULT_MANTISSA):
    """4 pi 0.865 - 2 pi sqrt3 (should be <= -0.01288)."""
    with mp.workprec(mantissa):
        return 4 * mpmath.pi * const(Y_Z) - 2 * mpmath.pi * mpmath.sqrt(3)
