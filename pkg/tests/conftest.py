import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

_ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, description: str, ok: bool, detail: str = "") -> None:
    """Collect one acceptance-criterion outcome for the end-of-run summary."""
    _ACCEPTANCE_RESULTS.append((number, description, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, desc, ok, detail in sorted(_ACCEPTANCE_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {num:2d} [{verdict}] {desc}"
        if detail:
            line += f" ({detail})"
        tr.write_line(line)
