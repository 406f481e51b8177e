import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                name = nodeid.split("::")[-1]
                outcomes[name] = status.upper() if status != "passed" else "PASS"
    if not outcomes:
        return
    try:
        from tests.test_acceptance import CRITERIA
    except Exception:
        CRITERIA = {}
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(outcomes):
        number = int(name.split("_")[2])
        text = CRITERIA.get(number, "")
        status = outcomes[name]
        status = "FAIL" if status in ("FAILED", "ERROR") else status
        terminalreporter.write_line(f"ACCEPTANCE criterion {number:2d}: {status:4s} - {text}")
