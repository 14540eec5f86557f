from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from jspec.algebra.scalars import ExactComplex
from jspec.io import parse_tuple

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


@pytest.fixture
def load():
    def _load(name, **kw):
        return parse_tuple(fixture_path(name), **kw)

    return _load


small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
exact_scalars = st.builds(ExactComplex, small_fractions, small_fractions)
real_exact_scalars = st.builds(ExactComplex, small_fractions)


def exact_matrices(N: int, real: bool = False):
    elems = real_exact_scalars if real else exact_scalars
    return st.lists(st.lists(elems, min_size=N, max_size=N), min_size=N, max_size=N).map(
        lambda rows: np.array(rows, dtype=object)
    )


def random_complex(rng, N):
    return rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))


def random_hermitian(rng, N):
    G = random_complex(rng, N)
    return (G + G.conj().T) / 2


def fr(x) -> ExactComplex:
    return ExactComplex(Fraction(x))


# acceptance lines are collected here and printed after the run, so they show up without -s
ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, title: str, checks, runtime: float | None = None) -> list:
    """Store a one-line verdict for an acceptance criterion; returns the failed checks."""
    failed = [name for name, ok, _ in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    details = "; ".join(f"{name}={'ok' if ok else 'FAIL'} ({info})" for name, ok, info in checks)
    rt = "" if runtime is None else f" [{runtime:.2f} s]"
    line = f"criterion {number} {status}: {title}{rt} :: {details}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return failed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
