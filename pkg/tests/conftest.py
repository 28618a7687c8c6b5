import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("erwlab acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class ScriptedRng:
    """Feeds a fixed list of uniforms, for pinning individual sampler decisions."""

    def __init__(self, values):
        self.values = list(values)

    def uniform(self):
        return self.values.pop(0)


@pytest.fixture
def scripted_rng():
    return ScriptedRng
