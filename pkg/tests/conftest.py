import numpy as np
import pytest

from papt.fcidump import IntegralSet, set_eri


def random_integrals(norb, nelec, seed, ms2=0):
    """Random integrals with full 8-fold symmetry but no other structure."""
    rng = np.random.default_rng(seed)
    s = IntegralSet.empty(norb, nelec, ms2=ms2, core_energy=float(rng.normal()))
    x = rng.normal(size=(norb, norb))
    s.h[:] = 0.5 * (x + x.T)
    for p in range(norb):
        for q in range(p + 1):
            for r in range(norb):
                for t in range(r + 1):
                    set_eri(s.g, p, q, r, t, rng.normal(scale=0.3))
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def record(label, ok, detail=""):
    """Log one acceptance verdict; printed now and repeated in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
