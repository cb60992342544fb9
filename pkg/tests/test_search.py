import math

import numpy as np
import pytest

from gdft.abelian import weight_decomposition
from gdft.core import QuantumState, density_of_state, ground_energy, make_theory, qubit_theory
from gdft.errors import DegenerateGroundState, NotRepresentable
from gdft.properties import random_degenerate_theory
from gdft.search import (
    SearchOptions,
    SearchResult,
    ensemble_functional,
    hk_functional_sample,
    minimize_phases,
    no_mixing_residuals,
    options_from_env,
    pure_functional,
)

FAST = SearchOptions(multistarts=6, near_facet_multistarts=12, early_stop=3)


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("rho", [-0.95, -0.3, 0.0, 0.6])
def test_qubit_pure_and_ensemble(lam, rho):
    th = qubit_theory(lam)
    want = -abs(lam) * math.sqrt(1 - rho * rho)
    pure = pure_functional(th, [rho], FAST)
    assert pure.value == pytest.approx(want, abs=1e-8)
    assert pure.constraint_residual < 1e-8
    assert density_of_state(th, pure.state)[0] == pytest.approx(rho, abs=1e-8)
    ens = ensemble_functional(th, [rho], FAST, pure=pure)
    assert ens.value == pytest.approx(want, abs=1e-8)
    assert ens.state.kind == "ensemble"


def test_qubit_at_the_vertex():
    assert pure_functional(qubit_theory(), [1.0], FAST).value == pytest.approx(0.0, abs=1e-10)


def test_zero_interaction_gives_zero(rng):
    th = make_theory([np.diag([0.0, 1, 2, 1])], np.zeros((4, 4)))
    for rho in (0.2, 1.0, 1.7):
        assert pure_functional(th, [rho], FAST).value == pytest.approx(0.0, abs=1e-12)
        assert ensemble_functional(th, [rho], FAST).value == pytest.approx(0.0, abs=1e-12)


def test_diagonal_interaction_is_lower_convex_envelope():
    # points (0, 0), (1, 5), (2, 1): the envelope is rho / 2
    th = make_theory([np.diag([0.0, 1.0, 2.0])], np.diag([0.0, 5.0, 1.0]))
    for rho in (0.25, 1.0, 1.5):
        assert pure_functional(th, [rho], FAST).value == pytest.approx(rho / 2, abs=1e-8)
        assert ensemble_functional(th, [rho], FAST).value == pytest.approx(rho / 2, abs=1e-8)


def test_pure_can_exceed_ensemble():
    # two weight-1 states that cannot both be used in a pure state with this phase structure
    th = make_theory([np.diag([0.0, 1.0, 2.0])], np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0.0]]))
    rho = [1.0]
    fp = pure_functional(th, rho, FAST).value
    fe = ensemble_functional(th, rho, FAST).value
    assert fe <= fp + 1e-9
    assert fp == pytest.approx(-1.0, abs=1e-8)


def test_hk_qubit_example():
    th = qubit_theory(1.0)
    v = 0.75
    rho, w = hk_functional_sample(th, [v])
    assert rho[0] == pytest.approx(-v / math.sqrt(1 + v * v))
    assert w == pytest.approx(-1 / math.sqrt(1 + v * v))
    assert pure_functional(th, rho, FAST).value == pytest.approx(w, abs=1e-8)
    assert ground_energy(th, [v]) == pytest.approx(v * rho[0] + w)


def test_hk_reports_degeneracy():
    th = make_theory([np.diag([1.0, 0.0, 0.0])], np.zeros((3, 3)))
    with pytest.raises(DegenerateGroundState) as info:
        hk_functional_sample(th, [1.0])
    assert len(info.value.branches) == 2


def test_no_mixing_holds_at_minimizer_and_fails_off_it(rng):
    checked = 0
    for _ in range(5):
        th = random_degenerate_theory(rng)
        wd = weight_decomposition(th)
        rho = wd.weights.mean(axis=0)
        res = pure_functional(th, rho, FAST)
        resid = no_mixing_residuals(th, wd, res)
        checked += len(resid)
        assert all(r < 1e-5 for _, r in resid)
    assert checked > 0
    # negative control: a feasible state that is not a minimizer
    th = make_theory([np.diag([0.0, 1.0, 1.0, 2.0])], np.ones((4, 4)))
    wd = weight_decomposition(th)
    psi = np.array([1.0, 1.0, 0.0, 1.0]) / math.sqrt(3)
    state = QuantumState.pure(psi)
    fake = SearchResult(state.expectation(th.interaction).real, state, 0.0, 1, 0)
    resid = no_mixing_residuals(th, wd, fake)
    assert resid and max(r for _, r in resid) > 0.1


def test_search_is_deterministic():
    th = random_degenerate_theory(np.random.default_rng(9))
    rho = weight_decomposition(th).weights.mean(axis=0)
    a = pure_functional(th, rho, FAST)
    b = pure_functional(th, rho, FAST)
    assert a.value == b.value
    assert np.array_equal(a.state.amplitudes, b.state.amplitudes)


def test_early_stop_agrees_with_full_search():
    th = random_degenerate_theory(np.random.default_rng(3))
    rho = weight_decomposition(th).weights.mean(axis=0)
    full = pure_functional(th, rho, SearchOptions(multistarts=16))
    quick = pure_functional(th, rho, SearchOptions(multistarts=16, early_stop=3))
    assert quick.value == pytest.approx(full.value, abs=1e-7)
    assert quick.starts_total <= full.starts_total


def test_not_representable():
    th = qubit_theory()
    with pytest.raises(NotRepresentable):
        pure_functional(th, [1.5], FAST)
    with pytest.raises(NotRepresentable):
        pure_functional(th, [0.1, 0.2], FAST)


def test_option_validation(monkeypatch):
    with pytest.raises(ValueError):
        SearchOptions(multistarts=0)
    with pytest.raises(ValueError):
        SearchOptions(early_stop=-1)
    monkeypatch.setenv("GDFT_WORKERS", "3")
    assert options_from_env().workers == 3


def test_minimize_phases_two_by_two():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    value, theta = minimize_phases(m)
    assert value == pytest.approx(-2.0, abs=1e-10)
    assert abs(np.cos(theta[1]) + 1) < 1e-8
