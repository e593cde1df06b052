"""Shared fixtures: bundled cases and one session-scoped four-variant run
of the desk14 case whose wall-clock time feeds the runtime criterion."""
import time
from pathlib import Path

import pytest

from reservemarket import all_variants, load_case, run_suite

CASES = Path(__file__).resolve().parent.parent / "cases"

# tight enough that incumbent noise cannot flip any 1e-6-relative ordering
SUITE_GAP = 1e-6


@pytest.fixture(scope="session")
def t1_case():
    return load_case(CASES / "t1.json")


@pytest.fixture(scope="session")
def t1x2_case():
    return load_case(CASES / "t1x2.json")


@pytest.fixture(scope="session")
def desk14_case():
    return load_case(CASES / "desk14.json")


@pytest.fixture(scope="session")
def desk14_suite(desk14_case, tmp_path_factory):
    """(SuiteResult, wall_seconds, out_dir) for all four variants of desk14."""
    out = tmp_path_factory.mktemp("desk14_suite")
    start = time.perf_counter()
    suite = run_suite(desk14_case, all_variants(), out, gap=SUITE_GAP,
                      serial=True, figures=False)
    seconds = time.perf_counter() - start
    return suite, seconds, out
