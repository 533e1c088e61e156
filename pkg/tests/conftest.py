import pytest

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def acceptance_record():
    def record(cid: str, status: str, detail: str = "") -> None:
        ACCEPTANCE[cid] = (status, detail)
        print(f"[{status}] {cid} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{status:4} {cid}: {detail}")
