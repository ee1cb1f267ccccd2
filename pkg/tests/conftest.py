import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes oracles importable

from elltwist import characters as ch
from elltwist import curve as cv
from elltwist import lvalue as lv


@pytest.fixture(scope="session")
def E11():
    return cv.fixture("11a1")


@pytest.fixture(scope="session")
def E14():
    return cv.fixture("14a1")


@pytest.fixture(scope="session")
def coeffs11(E11):
    return cv.coefficient_table(E11, 20000)


@pytest.fixture(scope="session")
def coeffs14(E14):
    return cv.coefficient_table(E14, 20000)


def sweep_records(E, table, k, f_max, digits=8):
    """Plain in-memory sweep used by the unit tests (no store)."""
    records = []
    seen = set()
    for chi in ch.enumerate_characters(k, E.conductor, (3, f_max)):
        key = (chi.conductor, min(c.label for c in ch.galois_orbit(chi)))
        if key in seen:
            continue
        seen.add(key)
        records.extend(lv.evaluate_orbit(E, chi, digits, table))
    return records


@pytest.fixture(scope="session")
def records11_k3(E11, coeffs11):
    return sweep_records(E11, coeffs11, 3, 600)


@pytest.fixture(scope="session")
def records14_k3(E14, coeffs14):
    return sweep_records(E14, coeffs14, 3, 600)


@pytest.fixture(scope="session")
def records11_k5(E11, coeffs11):
    return sweep_records(E11, coeffs11, 5, 900)
