import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (status, title, detail)
ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props or (report.when != "call" and report.passed):
        return
    num, title = props["criterion"]
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE[num] = (status, title, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[num]
        line = f"criterion {num:2d}: {status}  {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
