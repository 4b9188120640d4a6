import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    import bridge_report

    if not bridge_report.RESULTS:
        return
    terminalreporter.section("bridge acceptance criteria")
    for name, passed in bridge_report.RESULTS.items():
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"{verdict}: {name}")
