import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from frontlab.evans import coefficient_fields
from frontlab.model import cubic_model
from frontlab.profile import compute_front

# alpha x (g=1 tau=0, g=1 tau=1, cattaneo-maxwell tau=1)
CANONICAL = [(a, kind, tau) for a in (0.3, 0.5)
             for kind, tau in (("constant-one", 0.0), ("constant-one", 1.0), ("cattaneo-maxwell", 1.0))]


def canonical_id(case):
    a, kind, tau = case
    return f"a{a}-{kind}-tau{tau:g}"


@functools.lru_cache(maxsize=None)
def front_for(alpha, kind="constant-one", tau=0.0, kappa=1.0):
    model = cubic_model(alpha, kind, tau, kappa=kappa)
    return model, compute_front(model)


@functools.lru_cache(maxsize=None)
def fields_for(alpha, kind="constant-one", tau=0.0):
    model, front = front_for(alpha, kind, tau)
    return coefficient_fields(model, front)


ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Record and print one pass/fail line for an acceptance criterion."""
    def emit(number, passed, detail):
        line = f"[acceptance {number:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("]")[0].split()[-1])):
            terminalreporter.write_line(line)


@pytest.fixture(params=CANONICAL, ids=canonical_id)
def canonical(request):
    return request.param
