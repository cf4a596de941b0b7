import numpy as np
import pytest

from fracsica import focp as fc
from fracsica import sica
from fracsica.config import morocco_initial_state
from fracsica.frackit import TimeGrid

SWEEP_ALPHAS = (1.0, 0.85, 0.7, 0.3)

# Lines collected by the acceptance module, echoed in the terminal summary.
ACCEPTANCE_LINES = []


class Morocco:
    """The Moroccan scenario: fitted rates, bilinear incidence, [0, 5] with 2000 steps."""

    def __init__(self):
        self.params = sica.SicaParams.moroccan_fit()
        self.incidence = sica.Bilinear(0.755)
        self.y0 = np.array(morocco_initial_state())
        self.grid = TimeGrid(0.0, 5.0, 2000)
        base = sica.simulate(self.params, self.incidence, self.y0, 1.0, self.grid)
        self.delta = float(base.values[:, 1].max())
        self._sweeps = {}
        self.timings = {}

    def sweep(self, alpha, B=2.5):
        key = (alpha, B)
        if key not in self._sweeps:
            import time
            start = time.perf_counter()
            self._sweeps[key] = fc.forward_backward_sweep(
                self.params, self.incidence, self.y0, alpha, self.grid,
                fc.CostWeights(B, B, self.delta))
            self.timings[key] = time.perf_counter() - start
        return self._sweeps[key]


@pytest.fixture(scope="session")
def morocco():
    return Morocco()


@pytest.fixture(scope="session")
def params():
    return sica.SicaParams.moroccan_fit()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
