import contextlib
import time

import pytest

RESULTS: list = []


@pytest.fixture
def criterion():
    """Context manager recording one acceptance line, pass or fail, with its runtime."""

    @contextlib.contextmanager
    def record(number: int, title: str, limit: float):
        start = time.perf_counter()
        entry = {"number": number, "title": title, "limit": limit, "detail": ""}
        try:
            yield entry
        except BaseException:
            entry["status"] = "FAIL"
            raise
        else:
            entry["status"] = "PASS"
        finally:
            entry["elapsed"] = time.perf_counter() - start
            if entry["elapsed"] > limit and entry["status"] == "PASS":
                entry["status"] = "FAIL"
                entry["detail"] += f" (over the {limit:g} s limit)"
            print(_line(entry))
            RESULTS.append(entry)
        if entry["status"] == "FAIL" and entry["elapsed"] > limit:
            pytest.fail(f"criterion {number} exceeded its {limit:g} s runtime limit")

    return record


def _line(e):
    return f"[{e['status']}] criterion {e['number']}: {e['title']} ({e['elapsed']:.2f} s){' ' + e['detail'] if e['detail'] else ''}"


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for e in sorted(RESULTS, key=lambda r: r["number"]):
        terminalreporter.write_line(_line(e))
