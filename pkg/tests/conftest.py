import sys
from pathlib import Path

import pytest

CORPUS = Path(__file__).parent / "corpus"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def demo_bytes() -> bytes:
    return (CORPUS / "demo.tex").read_bytes()


@pytest.fixture(scope="session")
def article_bytes() -> bytes:
    return (CORPUS / "article.tex").read_bytes()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance tests register one line per criterion; show them even when
    # pytest captures stdout
    try:
        import acceptance_report
    except ImportError:
        return
    if not acceptance_report.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in acceptance_report.RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}: {name}")
