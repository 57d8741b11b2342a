"""Positivity of F_{k,0}: the explicit window, Burmann coefficients and scans.

A scan computes F_{k,0} exactly up to a window end N(k) (plus a margin) and
records every negative coefficient.  Scans over many weights append JSON
lines to a checkpoint file so an interrupted search resumes where it
stopped; on completion the file is rewritten sorted by weight.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from .bounds import const
from .forms import delta, dim_cusp, eisenstein, extremal_form, weight_profile
from .series import DEFAULT_MANTISSA, QLaurent, bernoulli, check_mantissa, sigma

log = logging.getLogger(__name__)

THM2_EXP = "58.366"
THM2_FACTOR = "1.0242382"
CH_EXP = "28.466"
ZETA_LOWER = "0.9997"
FULL_SCALE_FLOOR = 10000
# weights above which a(l+2) < 0 is known analytically, per residue nu = 0, 1, 2
NEGATIVE_FROM = {0: 84636, 1: 83332, 2: 82532}
# largest all-nonnegative weight per k mod 12, for the full-scale mode
REPORTED_LARGEST = {0: 81288, 4: 81460, 8: 81632}


class CheckpointError(RuntimeError):
    pass


def version_hash() -> str:
    """Short hash of this package's source, stamped into scan records."""
    h = hashlib.sha256()
    pkg = Path(__file__).parent
    for p in sorted(pkg.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:12]


def _check_k(k):
    if not isinstance(k, int) or k % 4 or k < 4:
        raise ValueError(f"need a weight k divisible by 4, got {k!r}")


# ---------------------------------------------------------------------------
# window and envelope


def theorem2_threshold(k: int, mantissa: int = DEFAULT_MANTISSA):
    """Return (threshold, N) with a(n) > 0 for n >= threshold; N = ceil(threshold).

    For ell = 0 (F_{k,0} = E_k) the window is empty and N = 0.
    """
    _check_k(k)
    ell = dim_cusp(k)
    if ell == 0:
        return mpmath.mpf(0), 0
    with mp.workprec(check_mantissa(mantissa)):
        e = mpmath.mpf(1) / (k - 2)
        t = (mpmath.exp(const(THM2_EXP, "u") * e) * (mpmath.mpf(ell) ** 3 * mpmath.log(k)) ** e
             * const(THM2_FACTOR, "u") * ell)
        # nudge outward by a few ulps before taking the ceiling
        t_up = t * (1 + mpmath.mpf(2) ** (8 - mp.prec))
        return t, int(mpmath.ceil(t_up))


def eisenstein_part_b(k: int, m: int) -> Fraction:
    """b(m) = (2k/B_k) sigma_{k-1}(m), the q^m coefficient of F_{k,0} - E_k for m <= ell."""
    _check_k(k)
    ell = dim_cusp(k)
    if not 1 <= m <= ell:
        raise ValueError(f"m must lie in 1..{ell}")
    return Fraction(2 * k) / bernoulli(k) * sigma(k - 1, m)


def ch_envelope(k: int, mantissa: int = DEFAULT_MANTISSA):
    """(2pi)^k/(k-1)! e^28.466 sqrt(ell log k) (1.0242382 ell)^(k/2)."""
    _check_k(k)
    ell = dim_cusp(k)
    with mp.workprec(check_mantissa(mantissa)):
        logv = (k * mpmath.log(2 * mpmath.pi) - mpmath.loggamma(k) + const(CH_EXP)
                + (mpmath.log(ell) + mpmath.log(mpmath.log(k))) / 2
                + mpmath.mpf(k) / 2 * mpmath.log(const(THM2_FACTOR) * ell)) if ell else mpmath.ninf
        return mpmath.exp(logv)


def positivity_criterion(k: int, n: int, mantissa: int = DEFAULT_MANTISSA) -> bool:
    """True when 0.9997 (2pi)^k/(k-1)! n^(k-1) > 2 C(h) n^(k/2)."""
    _check_k(k)
    ell = dim_cusp(k)
    if n <= ell:
        return False
    with mp.workprec(check_mantissa(mantissa)):
        lhs = (mpmath.log(const(ZETA_LOWER)) + k * mpmath.log(2 * mpmath.pi) - mpmath.loggamma(k)
               + (k - 1) * mpmath.log(n))
        rhs = mpmath.log(2 * ch_envelope(k, mantissa)) + mpmath.mpf(k) / 2 * mpmath.log(n)
        return bool(lhs > rhs)


def smallest_positive_n(k: int, mantissa: int = DEFAULT_MANTISSA) -> int:
    """Least n for which positivity_criterion holds (it is monotone in n)."""
    ell = dim_cusp(k)
    lo, hi = ell, max(ell + 1, 2)
    while not positivity_criterion(k, hi, mantissa):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if positivity_criterion(k, mid, mantissa):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Burmann coefficients


@dataclass
class BurmannCoefficient:
    k: int
    n: int
    A: Fraction
    a_ell1: Fraction | None = None
    a_ell2: Fraction | None = None

    def to_dict(self):
        return {"k": self.k, "n": self.n, "A": str(self.A),
                "a_ell1": None if self.a_ell1 is None else str(self.a_ell1),
                "a_ell2": None if self.a_ell2 is None else str(self.a_ell2)}


def _burmann_raw(k, n):
    # (-k/4n) * [q^(n-1)] (dE4/dq * E4^(3n-k/4-1) * q^n / Delta^n)
    prec = n + 3
    e4 = eisenstein(4, prec)
    e = 3 * n - k // 4 - 1
    pw = e4 ** e if e >= 0 else (e4 ** (-e)).inverse()
    dinv = delta(prec + 2).inverse() ** n
    s = e4.derivative() * pw * dinv.shift(n)
    return Fraction(-k, 4 * n) * Fraction(s[n - 1])


def burmann_A(k: int, n: int) -> BurmannCoefficient:
    """A(n) in E_4^(-k/4) = sum A(n) j^-n; for n = ell+1, ell+2 also the values
    a(ell+1) = -A(ell+1) and a(ell+2) = -A(ell+2) + A(ell+1)(24 ell - 240 nu + 744)."""
    _check_k(k)
    if n < 1:
        raise ValueError("n must be >= 1")
    prof = weight_profile(k)
    ell, nu = prof.ell, prof.nu
    A = _burmann_raw(k, n)
    out = BurmannCoefficient(k, n, A)
    if n == ell + 1:
        out.a_ell1 = -A
    elif n == ell + 2:
        A1 = _burmann_raw(k, ell + 1)
        out.a_ell1 = -A1
        out.a_ell2 = -A + A1 * (24 * ell - 240 * nu + 744)
    return out


def mos_values(k: int):
    """(a(ell+1), a(ell+2)) of F_{k,0} via Burmann coefficients."""
    ell = dim_cusp(k)
    r = burmann_A(k, ell + 2)
    return r.a_ell1, r.a_ell2


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanRecord:
    k: int
    ell: int
    window_end: int
    scanned_to: int
    negative_indices: list = field(default_factory=list)
    min_value_index: int | None = None
    a_ell1_positive: bool | None = None
    status: str = "done"
    resume_index: int | None = None
    version: str = ""
    full_scale: bool = False
    wall_time: float | None = None

    def to_dict(self, timing=False):
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return d

    def to_json(self, timing=False):
        return json.dumps(self.to_dict(timing), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        missing = {"k", "ell", "window_end", "scanned_to", "negative_indices", "status"} - d.keys()
        if missing:
            raise ValueError(f"scan record missing fields {sorted(missing)}")
        if d["status"] not in ("done", "partial"):
            raise ValueError(f"bad status {d['status']!r}")
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in d.items() if k in known})


def scan_window(k: int, prec_margin: int = 200, full_scale: bool = False, max_prec: int | None = None,
                mantissa: int = DEFAULT_MANTISSA) -> ScanRecord:
    """Scan F_{k,0} for negative coefficients up to N(k) + prec_margin.

    ``max_prec`` is a size guard: if the window needs more coefficients the
    scan stops there and returns a partial record with a resume index.
    """
    _check_k(k)
    t0 = time.perf_counter()
    ell = dim_cusp(k)
    _, N = theorem2_threshold(k, mantissa)
    window_end = max(N, FULL_SCALE_FLOOR) if full_scale else N
    last = max(window_end + prec_margin, ell + 2)
    status, resume = "done", None
    if max_prec is not None and last + 1 > max_prec:
        last = max_prec - 1
        status, resume = "partial", max_prec
    f = extremal_form(k, last + 1)
    coeffs = f.list(0, last + 1)
    neg = [n for n in range(ell + 1, last + 1) if coeffs[n] < 0]
    tail = range(ell + 1, last + 1)
    min_idx = min(tail, key=lambda n: (coeffs[n], n)) if len(tail) else None
    rec = ScanRecord(k=k, ell=ell, window_end=window_end, scanned_to=last, negative_indices=neg,
                     min_value_index=min_idx,
                     a_ell1_positive=(coeffs[ell + 1] > 0) if last >= ell + 1 else None,
                     status=status, resume_index=resume, version=version_hash(), full_scale=full_scale,
                     wall_time=round(time.perf_counter() - t0, 3))
    return rec


def _scan_task(args):
    k, margin, full, max_prec = args
    return scan_window(k, margin, full, max_prec)


def read_checkpoint(path, repair=False):
    """Records from a JSON-lines checkpoint; later lines override earlier ones."""
    path = Path(path)
    records = {}
    if not path.exists():
        return records
    good_lines = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = ScanRecord.from_dict(json.loads(line))
        except (ValueError, TypeError) as exc:
            if not repair:
                raise CheckpointError(f"{path}:{lineno}: corrupt checkpoint line ({exc}); rerun with repair") from exc
            log.warning("dropping corrupt checkpoint line %d: %s", lineno, exc)
            continue
        good_lines.append(line)
        prev = records.get(rec.k)
        if prev is None or prev.status != "done":
            records[rec.k] = rec
    if repair:
        path.write_text("".join(l + "\n" for l in good_lines), encoding="utf-8")
    return records


def write_checkpoint(path, records):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for k in sorted(records):
            fh.write(records[k].to_json() + "\n")
    os.replace(tmp, path)


def weights_in_range(kmin, kmax, residue):
    if residue not in (0, 4, 8):
        raise ValueError("residue mod 12 must be 0, 4 or 8")
    return [k for k in range(kmin, kmax + 1) if k % 12 == residue and k % 4 == 0 and k >= 4]


def largest_nonneg_search(k_range, residue, checkpoint_path=None, thread_count=1, prec_margin=200,
                          full_scale=False, max_prec=None, repair=False, on_record=None):
    """Scan every weight k = residue (mod 12) in ``k_range`` = (kmin, kmax).

    Completed weights found in the checkpoint are skipped.  Returns the list of
    records sorted by k.  ``thread_count`` worker processes share the work;
    results do not depend on it.
    """
    kmin, kmax = k_range
    ks = weights_in_range(kmin, kmax, residue)
    records = read_checkpoint(checkpoint_path, repair) if checkpoint_path else {}
    todo = [k for k in ks if not (k in records and records[k].status == "done"
                                   and (max_prec is None or records[k].scanned_to + 1 <= max_prec))]
    args = [(k, prec_margin, full_scale, max_prec) for k in todo]
    fh = open(checkpoint_path, "a", encoding="utf-8", newline="\n") if checkpoint_path else None
    try:
        if thread_count <= 1:
            results = map(_scan_task, args)
            for rec in results:
                _accept(rec, records, fh, on_record)
        else:
            with ProcessPoolExecutor(max_workers=thread_count) as ex:
                for rec in ex.map(_scan_task, args, chunksize=1):
                    _accept(rec, records, fh, on_record)
    finally:
        if fh:
            fh.close()
    if checkpoint_path:
        write_checkpoint(checkpoint_path, records)
    return [records[k] for k in sorted(records) if k in set(ks)]


def _accept(rec, records, fh, on_record):
    records[rec.k] = rec
    if fh:
        fh.write(rec.to_json() + "\n")
        fh.flush()
    if on_record:
        on_record(rec)


def summarize(records) -> dict:
    clean = [r.k for r in records if r.status == "done" and not r.negative_indices]
    dirty = [r.k for r in records if r.negative_indices]
    partial = [r.k for r in records if r.status != "done"]
    return {"weights": len(records), "all_nonnegative": len(clean), "with_negatives": dirty,
            "partial": partial, "largest_all_nonnegative": max(clean) if clean else None,
            "negatives_outside_window": [r.k for r in records
                                         if any(n > r.window_end for n in r.negative_indices)]}


# ---------------------------------------------------------------------------
# consistency records for ranges of weights


def extremal_consistency(k: int, extra: int = 3) -> dict:
    """Exact checks on F_{k,0}: normalization, agreement with the Miller basis
    row 0, and the Burmann values for a(ell+1), a(ell+2)."""
    from .forms import miller_basis

    _check_k(k)
    ell = dim_cusp(k)
    prec = ell + extra
    f = extremal_form(k, prec)
    row0 = miller_basis(k, prec).rows[0]
    a1, a2 = mos_values(k)
    return {
        "k": k,
        "ell": ell,
        "constant_term_one": f[0] == 1,
        "gap_zero": all(f[n] == 0 for n in range(1, ell + 1)),
        "matches_miller_row0": f == row0,
        "a_ell1": str(f[ell + 1]),
        "a_ell2": str(f[ell + 2]),
        "burmann_a_ell1": a1 == f[ell + 1],
        "mos_a_ell2": a2 == f[ell + 2],
    }


def _consistency_task(k):
    return extremal_consistency(k)


def consistency_range(kmin: int, kmax: int, thread_count: int = 1) -> list:
    ks = [k for k in range(kmin, kmax + 1) if k % 4 == 0 and k >= 4]
    if thread_count <= 1:
        return [extremal_consistency(k) for k in ks]
    with ProcessPoolExecutor(max_workers=thread_count) as ex:
        return list(ex.map(_consistency_task, ks, chunksize=1))
