import numpy as np
import pytest

from strichartz.optimizer import default_setup, maximize_quotient, random_smooth_field, random_wave_data
from strichartz.propagators import SCHRODINGER


class AscentCache:
    """Ascent runs from the CLI's random seeds, computed once per session."""

    def __init__(self):
        self._runs = {}

    def get(self, case: str, seed: int, max_iters: int = 500):
        key = (case, seed, max_iters)
        if key not in self._runs:
            grid, spec, cfg = default_setup(case, max_iters=max_iters, seed=seed)
            rng = np.random.default_rng(seed)
            f0 = random_smooth_field(grid, rng) if spec.equation == SCHRODINGER else random_wave_data(grid, rng)
            self._runs[key] = (grid, spec, maximize_quotient(f0, spec, cfg))
        return self._runs[key]


@pytest.fixture(scope="session")
def ascents():
    return AscentCache()


# criterion number -> (status, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
