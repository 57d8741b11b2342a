"""Shared fixtures and the one-line-per-criterion acceptance report."""

from collections import OrderedDict

import pytest

ACCEPTANCE = OrderedDict()


def record(criterion, title, ok, detail=""):
    """Register the outcome of one part of an acceptance criterion."""
    entry = ACCEPTANCE.setdefault(criterion, {"title": title, "parts": []})
    entry["parts"].append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        e = ACCEPTANCE[crit]
        ok = all(p[0] for p in e["parts"])
        details = "; ".join(d for _, d in e["parts"] if d)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {crit:>2}. {e['title']}: {details}")


@pytest.fixture(scope="session")
def full_scan(tmp_path_factory):
    """Scan of every k = 0 (mod 4), 4 <= k <= 2000, single worker, with its checkpoints."""
    from cuspbound.scan import largest_nonneg_search

    d = tmp_path_factory.mktemp("scan1")
    recs, files = [], {}
    for r in (0, 4, 8):
        cp = d / f"mod{r}.jsonl"
        recs += largest_nonneg_search((4, 2000), r, cp, thread_count=1)
        files[r] = cp.read_bytes()
    recs.sort(key=lambda x: x.k)
    return recs, files
