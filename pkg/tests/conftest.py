import pytest

from flutekind.flute_model import FluteSurface, SequenceSpec as Q

# name -> (lengths, twists, expected side of the criterion)
FAMILIES = {
    "const1_t0": (Q.constant(1.0), Q.constant(0.0), "divergent"),
    "const3_quarter": (Q.constant(3.0), Q.constant(0.25), "divergent"),
    "const6_half": (Q.constant(6.0), Q.constant(0.5), "divergent"),
    "periodic_lengths": (Q.periodic([1.0, 4.0]), Q.constant(0.0), "divergent"),
    "2log_t0": (Q.logarithmic(2, 1), Q.constant(0.0), "divergent"),
    "3log_half": (Q.logarithmic(3, 1), Q.constant(0.5), "divergent"),
    "4log_t0": (Q.logarithmic(4, 1), Q.constant(0.0), "convergent"),
    "lin_half": (Q.linear(1, 1), Q.constant(0.5), "convergent"),
    "pow_t0": (Q.power(1, 0.5), Q.constant(0.0), "convergent"),
}


def family(name: str) -> FluteSurface:
    lengths, twists, _ = FAMILIES[name]
    return FluteSurface(lengths, twists)


@pytest.fixture
def surface_factory():
    return family


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
