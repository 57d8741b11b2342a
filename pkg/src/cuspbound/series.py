"""Exact truncated Laurent series in q, plus small integer helpers.

Coefficients are Python ints or :class:`fractions.Fraction` (never floats).
A :class:`QLaurent` is known modulo ``q**prec``; every operation tracks that
precision pessimistically and never extends it.

Multiplication goes through Kronecker substitution: both operands are packed
into one big integer, multiplied once with GMP, and unpacked.  This is what
makes weight-2000 forms affordable in pure Python.
"""

from __future__ import annotations

import json
import threading
from fractions import Fraction
from math import gcd, isqrt
from numbers import Rational

import gmpy2

DEFAULT_MANTISSA = 256

# exact scalars are ints or Fractions; approximate reals are mpmath.mpf at an
# explicit precision (see to_mpf)
ExactRational = Fraction


class InsufficientPrecision(ValueError):
    """Raised when a coefficient beyond the known precision is requested."""


def _norm(c):
    if isinstance(c, bool):
        raise TypeError("bool is not a series coefficient")
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if type(c).__name__ == "mpz":
        return int(c)
    if isinstance(c, Rational):
        return _norm(Fraction(c.numerator, c.denominator))
    raise TypeError(f"series coefficients must be exact rationals, got {type(c).__name__}")


# ---------------------------------------------------------------------------
# integer polynomial multiplication


def _pack(c, nbytes):
    pos = b"".join((x if x > 0 else 0).to_bytes(nbytes, "little") for x in c)
    neg = b"".join((-x if x < 0 else 0).to_bytes(nbytes, "little") for x in c)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def mul_ints(a, b, n):
    """First ``n`` coefficients of the product of two integer coefficient lists."""
    a = a[:n]
    b = b[:n]
    m = min(n, len(a) + len(b) - 1)
    if m <= 0:
        return []
    ma = max(abs(x) for x in a)
    mb = max(abs(x) for x in b)
    if ma == 0 or mb == 0:
        return [0] * m
    if len(a) * len(b) <= 64:
        out = [0] * m
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b[: m - i]):
                    out[i + j] += x * y
        return out
    bound = ma * mb * min(len(a), len(b))
    nbytes = (bound.bit_length() + 2 + 7) // 8
    half = 1 << (8 * nbytes - 1)
    total = len(a) + len(b) - 1
    z = _pack(a, nbytes) * _pack(b, nbytes)
    # offset every digit by half so that all digits are non-negative
    z += gmpy2.mpz(int.from_bytes(half.to_bytes(nbytes, "little") * total, "little"))
    raw = int(z).to_bytes(nbytes * total, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half for i in range(m)]


def _common_denominator(coeffs):
    d = 1
    for c in coeffs:
        if isinstance(c, Fraction):
            d = d * c.denominator // gcd(d, c.denominator)
    return d


def _mul_exact(a, b, n):
    da = _common_denominator(a)
    db = _common_denominator(b)
    if da == 1 and db == 1:
        return mul_ints(list(a), list(b), n)
    ia = [int(c * da) for c in a[:n]]
    ib = [int(c * db) for c in b[:n]]
    d = da * db
    return [_norm(Fraction(c, d)) for c in mul_ints(ia, ib, n)]


# ---------------------------------------------------------------------------


class QLaurent:
    """Truncated Laurent series ``sum c_n q**n + O(q**prec)``.

    ``coeffs[i]`` is the coefficient of ``q**(valuation + i)``.  After
    construction the valuation is exact (leading coefficient nonzero); the
    zero series is stored with ``valuation == prec`` and no coefficients.
    """

    __slots__ = ("valuation", "coeffs", "prec")

    def __init__(self, coeffs, valuation=0, prec=None):
        cs = [_norm(c) for c in coeffs]
        if prec is None:
            prec = valuation + len(cs)
        if prec < valuation:
            raise ValueError("prec must be >= valuation")
        cs = cs[: prec - valuation]
        cs.extend([0] * (prec - valuation - len(cs)))
        lead = 0
        while lead < len(cs) and cs[lead] == 0:
            lead += 1
        self.valuation = valuation + lead
        self.coeffs = tuple(cs[lead:])
        self.prec = prec

    # construction helpers -------------------------------------------------

    @classmethod
    def one(cls, prec):
        return cls([1], 0, prec)

    @classmethod
    def monomial(cls, n, prec, c=1):
        return cls([c], n, prec)

    @classmethod
    def from_dict(cls, coeffs: dict, prec):
        lo = min(coeffs, default=prec)
        lo = min(lo, prec)
        dense = [0] * (prec - lo)
        for n, c in coeffs.items():
            if n < prec:
                dense[n - lo] = c
        return cls(dense, lo, prec)

    # access ---------------------------------------------------------------

    def is_zero(self):
        return not self.coeffs

    def __getitem__(self, n):
        if n >= self.prec:
            raise InsufficientPrecision(f"coefficient of q^{n} requested, series known to O(q^{self.prec})")
        if n < self.valuation:
            return 0
        return self.coeffs[n - self.valuation]

    def list(self, start=None, stop=None):
        """Dense coefficient list for exponents ``start .. stop-1``."""
        start = self.valuation if start is None else start
        stop = self.prec if stop is None else stop
        return [self[n] for n in range(start, stop)]

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.valuation + i, c

    def is_integral(self):
        return all(isinstance(c, int) for c in self.coeffs)

    # ring operations ------------------------------------------------------

    def _dense(self, lo, hi):
        return [self[n] if n >= self.valuation else 0 for n in range(lo, hi)]

    def __add__(self, other):
        if not isinstance(other, QLaurent):
            c = _norm(other)
            if c == 0 or self.prec <= 0:
                return self
            other = QLaurent([c], 0, self.prec)
        prec = min(self.prec, other.prec)
        lo = min(self.valuation, other.valuation, prec)
        a = self._dense(lo, prec)
        b = other._dense(lo, prec)
        return QLaurent([x + y for x, y in zip(a, b)], lo, prec)

    __radd__ = __add__

    def __neg__(self):
        return QLaurent([-c for c in self.coeffs], self.valuation, self.prec)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QLaurent) else -_norm(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _norm(c)
        if c == 0:
            return QLaurent([], self.prec, self.prec)
        return QLaurent([c * x for x in self.coeffs], self.valuation, self.prec)

    def __mul__(self, other):
        if not isinstance(other, QLaurent):
            return self.scale(other)
        prec = min(self.valuation + other.prec, other.valuation + self.prec)
        val = self.valuation + other.valuation
        if self.is_zero() or other.is_zero() or prec <= val:
            return QLaurent([], prec, prec)
        cs = _mul_exact(self.coeffs, other.coeffs, prec - val)
        return QLaurent(cs, val, prec)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, QLaurent):
            return self * c.inverse()
        return self.scale(Fraction(1) / Fraction(_norm(c)))

    def __pow__(self, e):
        if not isinstance(e, int) or isinstance(e, bool):
            raise TypeError("exponent must be an int")
        if e < 0:
            raise ValueError("negative exponent; use inverse() first")
        if self.is_zero():
            if e == 0:
                raise ValueError("0**0 for a truncated zero series is undefined")
            return QLaurent([], e * self.prec, e * self.prec)
        # the relative precision prec - valuation is preserved by products
        result = QLaurent.one(self.prec - self.valuation)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, m):
        """Multiply by ``q**m`` exactly."""
        return QLaurent(self.coeffs, self.valuation + m, self.prec + m)

    def truncate(self, prec):
        if prec > self.prec:
            raise InsufficientPrecision("cannot raise precision by truncation")
        return QLaurent(self.coeffs, self.valuation, prec)

    def inverse(self):
        """Multiplicative inverse; precision drops to ``prec - 2*valuation``."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of a series that is zero to the known precision")
        v = self.valuation
        n = self.prec - v
        u = self.coeffs
        b = [_norm(Fraction(1) / Fraction(u[0]))]
        m = 1
        while m < n:
            m = min(2 * m, n)
            e = [-c for c in _mul_exact(u, b, m)]
            e.extend([0] * (m - len(e)))
            e[0] += 2
            b = _mul_exact(b, e, m)
        return QLaurent(b, -v, n - v)

    def theta(self):
        """``q d/dq``: coefficient n becomes n times itself."""
        v = self.valuation
        return QLaurent([(v + i) * c for i, c in enumerate(self.coeffs)], v, self.prec)

    def derivative(self):
        """``d/dq``."""
        return self.theta().shift(-1)

    # comparison / display -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, QLaurent):
            return NotImplemented
        return (self.valuation, self.coeffs, self.prec) == (other.valuation, other.coeffs, other.prec)

    def __hash__(self):
        return hash((self.valuation, self.coeffs, self.prec))

    def agrees_with(self, other, prec=None):
        """True if both series agree through ``O(q**prec)`` (default: common precision)."""
        p = min(self.prec, other.prec) if prec is None else prec
        lo = min(self.valuation, other.valuation)
        return all(self[n] == other[n] for n in range(lo, p))

    def __repr__(self):
        terms = []
        for n, c in list(self.items())[:6]:
            terms.append(f"{c}*q^{n}")
        body = " + ".join(terms) if terms else "0"
        return f"QLaurent({body} + O(q^{self.prec}))"

    # serialization ---------------------------------------------------------

    def to_dict(self):
        return {"valuation": self.valuation, "prec": self.prec, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json_dict(cls, d):
        coeffs = [Fraction(s) for s in d["coeffs"]]
        out = cls(coeffs, d["valuation"], d["prec"])
        if out.valuation != d["valuation"] and coeffs:
            raise ValueError("serialized valuation is not exact")
        return out

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s):
        return cls.from_json_dict(json.loads(s))


def ql_invert(a: QLaurent) -> QLaurent:
    return a.inverse()


def ql_theta(a: QLaurent) -> QLaurent:
    return a.theta()


# ---------------------------------------------------------------------------
# Bernoulli numbers via tangent numbers (integer-only recurrence)

_bern_lock = threading.Lock()
_bern_cache: dict[int, Fraction] = {}


def _tangent_numbers(n):
    t = [0] * (n + 1)
    t[1] = 1
    for k in range(2, n + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return t


def bernoulli(k: int) -> Fraction:
    """Exact Bernoulli number B_k for even k >= 2 (B_2 = 1/6)."""
    if not isinstance(k, int) or k < 2 or k % 2:
        raise ValueError(f"bernoulli needs an even integer k >= 2, got {k!r}")
    with _bern_lock:
        if k not in _bern_cache:
            n = max(k // 2, 2 * max((m // 2 for m in _bern_cache), default=0))
            t = _tangent_numbers(n)
            for i in range(1, n + 1):
                four = 1 << (2 * i)
                _bern_cache[2 * i] = (-1) ** (i - 1) * Fraction(2 * i * t[i], four * (four - 1))
        return _bern_cache[k]


# ---------------------------------------------------------------------------
# divisor functions


def _factor(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def sigma(s: int, n: int) -> int:
    """Sum of the s-th powers of the divisors of n."""
    if n <= 0:
        raise ValueError("sigma needs n >= 1")
    if s < 0:
        raise ValueError("sigma needs s >= 0")
    r = 1
    for p, e in _factor(n):
        r *= sum(p ** (s * i) for i in range(e + 1))
    return r


def divisor_count(n: int) -> int:
    if n <= 0:
        raise ValueError("divisor_count needs n >= 1")
    r = 1
    for _, e in _factor(n):
        r *= e + 1
    return r


def sigma_table(s: int, N: int) -> list[int]:
    """``[0, sigma_s(1), ..., sigma_s(N-1)]`` by sieving."""
    out = [0] * N
    for d in range(1, N):
        dp = d ** s
        for m in range(d, N, d):
            out[m] += dp
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, isqrt(n) + 1))


def check_mantissa(bits):
    if int(bits) < 64:
        raise ValueError("mantissa precision must be at least 64 bits")
    return int(bits)


def to_mpf(x):
    """Exact rational (or anything mpmath accepts) to an mpf at the current precision."""
    import mpmath

    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)
