import pytest

from urbanca.synthkit import SynthScenario, generate, write_scenario


@pytest.fixture(scope="session")
def small_scenario(tmp_path_factory):
    """A 40x40 scenario on disk: raster.ppm, builtup_0..2.pgm."""
    sc = SynthScenario(width=40, height=40, seed=3, lattice=8)
    raster, maps = generate(sc)
    out = tmp_path_factory.mktemp("scenario")
    write_scenario(sc, raster, maps, out)
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
