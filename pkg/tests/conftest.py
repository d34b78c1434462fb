import pytest

from adaptmine import parse_kb_text


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

WORKED_KB_TEXT = """
# the breast-surgery style worked example used throughout the tests
[ontology]
Partial-Mastectomy isa Mastectomy
Mastectomy isa Surgery
Surgery isa Therapeutic-Decision
Left-Breast isa Breast
Age-Under-30 := (age < 30)
Age-Over-30 := (age >= 30)
Age-Under-45 := (age < 45)
Age-Over-70 := (age >= 70)
Small-Tumor := some tumor.(size < 4)
[cases]
c1 | Patient and (age >= 45) and (age < 70) and some tumor.((size >= 4) and some localization.Left-Breast) | Partial-Mastectomy
"""

LETTERS_KB_TEXT = """
[ontology]
[cases]
k1 | a and b and c | A, B
k2 | b and c and d | B, C
"""


@pytest.fixture
def worked_kb():
    return parse_kb_text(WORKED_KB_TEXT)


@pytest.fixture
def letters_kb():
    return parse_kb_text(LETTERS_KB_TEXT)
