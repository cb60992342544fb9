"""Reduced-trial runs of the property suites.

The full 200-trial suites run as acceptance criterion 9.
"""

import pytest

from gdft import properties
from gdft.core import ground_energy
from gdft.properties import random_theory

QUICK = 12


@pytest.mark.parametrize("suite", properties.SUITES, ids=lambda s: s.__name__)
def test_suite_passes_on_few_trials(suite):
    kwargs = {"trials": QUICK}
    if suite is properties.legendre_duality:
        kwargs["theories"] = 1
    report = suite(**kwargs)
    assert report.passed, report.line()


def test_report_line_format():
    rep = properties.PropertyReport("demo", 3, 0.5, 1.0)
    assert rep.passed and "demo" in rep.line()
    assert not properties.PropertyReport("demo", 3, 2.0, 1.0).passed


def test_energy_is_concave_along_a_segment(rng):
    th = random_theory(rng, 4, 2)
    a, b = rng.normal(size=2), rng.normal(size=2)
    mid = ground_energy(th, (a + b) / 2)
    assert mid >= (ground_energy(th, a) + ground_energy(th, b)) / 2 - 1e-12
