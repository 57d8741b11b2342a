"""Level-one modular forms: E_k, Delta, j, the Miller basis and F_{k,0}."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .series import InsufficientPrecision, QLaurent, bernoulli, sigma_table

# E8 Cartan matrix; Q(x) = x^T A x / 2 is the 8-variable form
#   sum x_i^2 - x1x3 - x2x4 - x3x4 - x4x5 - x5x6 - x6x7 - x7x8
E8_GRAM = (
    (2, 0, -1, 0, 0, 0, 0, 0),
    (0, 2, 0, -1, 0, 0, 0, 0),
    (-1, 0, 2, -1, 0, 0, 0, 0),
    (0, -1, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, -1),
    (0, 0, 0, 0, 0, 0, -1, 2),
)


def _check_weight(k, minimum=4):
    if not isinstance(k, int) or k % 2 or k < minimum:
        raise ValueError(f"weight must be an even integer >= {minimum}, got {k!r}")


@lru_cache(maxsize=256)
def eisenstein(k: int, prec: int) -> QLaurent:
    """Normalized E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, to O(q^prec)."""
    _check_weight(k)
    if prec < 1:
        raise ValueError("prec must be >= 1")
    c = Fraction(-2 * k) / bernoulli(k)
    sig = sigma_table(k - 1, prec)
    return QLaurent([1] + [c * s for s in sig[1:]], 0, prec)


def _e(k, prec):
    # E_0 = 1 keeps the k' = 0 and 14 - k' = 0 cases uniform
    return QLaurent.one(prec) if k == 0 else eisenstein(k, prec)


@lru_cache(maxsize=64)
def delta(prec: int) -> QLaurent:
    """Delta = (E_4^3 - E_6^2)/1728 = q - 24q^2 + ..."""
    if prec < 2:
        raise ValueError("delta needs prec >= 2")
    e4 = eisenstein(4, prec)
    e6 = eisenstein(6, prec)
    return (e4 * e4 * e4 - e6 * e6) / 1728


@lru_cache(maxsize=64)
def jfun(prec: int) -> QLaurent:
    """j = E_4^3/Delta = q^-1 + 744 + 196884q + ..., to O(q^prec)."""
    if prec < 1:
        raise ValueError("jfun needs prec >= 1")
    p = prec + 2
    return (eisenstein(4, p) ** 3 * delta(p).inverse()).truncate(prec)


def dim_cusp(k: int) -> int:
    """dim S_k for level one."""
    if not isinstance(k, int) or k % 2:
        raise ValueError(f"weight must be an even integer, got {k!r}")
    if k < 4:
        return 0
    return k // 12 - 1 if k % 12 == 2 else k // 12


@dataclass(frozen=True)
class WeightProfile:
    k: int
    ell: int
    k_prime: int
    nu: int | None

    def to_dict(self):
        return {"k": self.k, "ell": self.ell, "k_prime": self.k_prime, "nu": self.nu}


def weight_profile(k: int) -> WeightProfile:
    _check_weight(k)
    ell = dim_cusp(k)
    kp = k - 12 * ell
    return WeightProfile(k, ell, kp, kp // 4 if k % 4 == 0 else None)


def _e4e6_monomial(w, prec):
    # some E_4^a E_6^b of weight w (w even, w != 2)
    if w == 0:
        return QLaurent.one(prec)
    b = 0 if w % 4 == 0 else 1
    a = (w - 6 * b) // 4
    out = eisenstein(4, prec) ** a
    if b:
        out = out * eisenstein(6, prec)
    return out


@dataclass(frozen=True)
class MillerBasis:
    """Echelon basis of M_k: ``rows[0] = F_{k,0}``, ``rows[m] = F_{k,m}``."""

    profile: WeightProfile
    prec: int
    rows: tuple

    @property
    def k(self):
        return self.profile.k

    @property
    def ell(self):
        return self.profile.ell

    def cusp_rows(self):
        return self.rows[1:]

    def A(self, m, n):
        return akm_coefficient(self, m, n)

    def to_json(self):
        header = {"k": self.k, "ell": self.ell, "prec": self.prec}
        return json.dumps({"header": header, "rows": [r.to_dict() for r in self.rows]})

    @classmethod
    def from_json(cls, s):
        d = json.loads(s)
        h = d["header"]
        prof = weight_profile(h["k"])
        if prof.ell != h["ell"]:
            raise ValueError("header ell does not match weight")
        return cls(prof, h["prec"], tuple(QLaurent.from_json_dict(r) for r in d["rows"]))


@lru_cache(maxsize=32)
def miller_basis(k: int, prec: int) -> MillerBasis:
    """Miller basis to O(q^prec) by exact elimination.

    Starts from the triangular family Delta^i * E_4^a E_6^b (weight k), whose
    i-th member is q^i + O(q^(i+1)), and clears the entries above the diagonal
    from the bottom row up.
    """
    prof = weight_profile(k)
    ell = prof.ell
    if prec < ell + 2:
        raise ValueError(f"prec must be at least ell+2 = {ell + 2}")
    d = delta(prec)
    rows = []
    dpow = QLaurent.one(prec)
    for i in range(ell + 1):
        rows.append((dpow * _e4e6_monomial(k - 12 * i, prec)).truncate(prec))
        dpow = (dpow * d).truncate(prec)
    for i in range(ell, -1, -1):
        r = rows[i]
        for j in range(i + 1, ell + 1):
            c = r[j]
            if c:
                r = r - rows[j].scale(c)
        rows[i] = r
    return MillerBasis(prof, prec, tuple(rows))


def akm_coefficient(basis: MillerBasis, m: int, n: int):
    """A_k(m, n), the q^n coefficient of F_{k,m}; delta_{mn} for n <= ell."""
    if not 1 <= m <= basis.ell:
        raise ValueError(f"m must lie in 1..{basis.ell}")
    if n >= basis.prec:
        raise InsufficientPrecision(f"basis known to O(q^{basis.prec}), need coefficient {n}")
    if n <= basis.ell:
        return int(n == m)
    return basis.rows[m][n]


def extremal_form(k: int, prec: int) -> QLaurent:
    """F_{k,0} = 1 + O(q^(ell+1)) for 4 | k.

    Triangular solve in the family E_4^(k/4 - 3i) Delta^i = E_4^(k/4) t^i with
    t = Delta/E_4^3 = 1/j; everything stays integral.
    """
    _check_weight(k)
    if k % 4:
        raise ValueError("extremal_form needs k divisible by 4")
    ell = dim_cusp(k)
    if prec < ell + 2:
        raise ValueError(f"prec must be at least ell+2 = {ell + 2}")
    e4 = eisenstein(4, prec)
    b = e4 ** (k // 4)
    f = b
    if ell:
        t = (delta(prec) * (e4 ** 3).inverse()).truncate(prec)
        for i in range(1, ell + 1):
            b = (b * t).truncate(prec)
            c = f[i]
            if c:
                f = f - b.scale(c)
    return f


# ---------------------------------------------------------------------------
# E8 theta series by exact Fincke-Pohst enumeration


def _fincke_pohst_form(gram):
    n = len(gram)
    q = [[Fraction(x) for x in row] for row in gram]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for a in range(i + 1, n):
            for b in range(a, n):
                q[a][b] -= q[a][i] * q[i][b]
    return q


def _lcm(a, b):
    return a * b // gcd(a, b)


def _int_range(w, L, center, bound):
    # all integers x with w * (L*x - center)^2 <= bound, exactly
    if bound < 0:
        return range(0)
    s = isqrt(bound // w) + 1
    lo = (center - s) // L - 1
    hi = (center + s) // L + 1
    while lo <= hi and w * (L * lo - center) ** 2 > bound:
        lo += 1
    while hi >= lo and w * (L * hi - center) ** 2 > bound:
        hi -= 1
    return range(lo, hi + 1)


def lattice_vector_counts(gram, max_norm):
    """``r[n]`` = #{x in Z^d : x^T gram x / 2 = n} for n <= max_norm.

    Fincke-Pohst recursion on the exact rational Cholesky form, rescaled to
    integers so that every range test is exact.
    """
    d = len(gram)
    q = _fincke_pohst_form(gram)
    L = 1
    B = 1
    for i in range(d):
        B = _lcm(B, q[i][i].denominator)
        for j in range(i + 1, d):
            L = _lcm(L, q[i][j].denominator)
    M = L * L * B
    w = [int(q[i][i] * B) for i in range(d)]
    mu = [[int(q[i][j] * L) for j in range(d)] for i in range(d)]
    counts = [0] * (max_norm + 1)
    x = [0] * d
    total = 2 * max_norm * M

    def rec(i, remaining):
        center = -sum(mu[i][j] * x[j] for j in range(i + 1, d))
        wi = w[i]
        for xi in _int_range(wi, L, center, remaining):
            rest = remaining - wi * (L * xi - center) ** 2
            if i == 0:
                n2, r = divmod(total - rest, M)
                # x^T gram x = n2; odd values have no half-integral bucket
                if r == 0 and n2 % 2 == 0:
                    counts[n2 // 2] += 1
            else:
                x[i] = xi
                rec(i - 1, rest)

    rec(d - 1, total)
    return counts


def theta_e8(prec: int) -> QLaurent:
    """Theta series of the E8 form by direct enumeration, to O(q^prec)."""
    if not 1 <= prec <= 12:
        raise ValueError("theta_e8 enumerates directly; prec must be in 1..12")
    return QLaurent(lattice_vector_counts(E8_GRAM, prec - 1), 0, prec)


# ---------------------------------------------------------------------------
# generating-kernel identity, expanded formally in p


def kernel_p_coefficients(k: int, q_prec: int):
    """Coefficients of p^(-m), m = 0..ell, of the two-variable kernel.

    Returns a list whose m-th entry is the q-series multiplying p^(-m) in
    Delta^l(z) E_{k'}(z) E_{14-k'}(tau) / (Delta^(1+l)(tau) (j(tau) - j(z))),
    expanded around p = 0 with q-Laurent coefficients.
    """
    prof = weight_profile(k)
    ell, kp = prof.ell, prof.k_prime
    P = q_prec + ell + 4
    jz = jfun(P)
    # j(tau) - j(z) = p^-1 W(p),  W = 1 + (744 - j(z)) p + sum_{i>=1} c(i) p^(i+1)
    cj = jfun(ell + 2)
    W = [QLaurent.one(P), 744 - jz] + [QLaurent.one(P).scale(cj[i]) for i in range(1, ell)]
    R = [QLaurent.one(P)]
    for n in range(1, ell + 1):
        acc = QLaurent([], P, P)
        for i in range(1, min(n, len(W) - 1) + 1):
            acc = acc + W[i] * R[n - i]
        R.append(-acc)
    # E_{14-k'}(tau) / Delta^(1+l)(tau) = p^-(1+l) S(p)
    dq = delta(ell + 3).shift(-1)
    S = _e(14 - kp, ell + 2) * dq.inverse() ** (ell + 1)
    front = delta(P) ** ell * _e(kp, P) if ell else _e(kp, P)
    out = []
    for m in range(ell + 1):
        idx = ell - m
        acc = QLaurent([], P, P)
        for i in range(idx + 1):
            if S[i]:
                acc = acc + R[idx - i].scale(S[i])
        out.append(front * acc)
    return out


def generating_kernel_check(k: int, M: int, q_prec: int) -> dict:
    """Check that p-coefficient extraction reproduces F_{k,m}, 0 <= m <= M."""
    prof = weight_profile(k)
    if M > prof.ell:
        raise InsufficientPrecision(f"only m <= ell = {prof.ell} can be extracted")
    if q_prec < prof.ell + 2:
        raise ValueError("q_prec must be at least ell+2")
    coeffs = kernel_p_coefficients(k, q_prec)
    basis = miller_basis(k, q_prec)
    matches = {}
    for m in range(M + 1):
        got = coeffs[m]
        if got.prec < q_prec:
            raise InsufficientPrecision("kernel expansion lost too much precision")
        matches[m] = got.agrees_with(basis.rows[m], q_prec)
    return {"k": k, "M": M, "q_prec": q_prec, "matches": matches, "ok": all(matches.values())}
