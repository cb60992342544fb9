import math

import numpy as np
import pytest

from gdft.abelian import FacetInequality, representable_polytope, weight_decomposition
from gdft.boundary import (
    abelian_boundary_force,
    finite_difference_force,
    fit_sqrt_law,
    make_query,
    nonabelian_boundary_force,
    nonabelian_query,
    simplex_force,
)
from gdft.bosonic import bosonic_domain, build_bosonic_theory
from gdft.core import make_theory, qubit_theory
from gdft.liegroup import dimer_algebra, dimer_theory, two_three_theory
from gdft.search import pure_functional


def _upper_qubit_query():
    facet = FacetInequality(np.array([-1.0]), -1.0)
    return make_query(facet, [1.0], [-1.0])


def test_qubit_force_formula_and_fit():
    th = qubit_theory(1.0)
    query = _upper_qubit_query()
    res = abelian_boundary_force(th, None, query)
    assert res.G == pytest.approx(math.sqrt(2), abs=1e-12)
    fd = finite_difference_force(th, query, seed_from=res)
    assert fd.G_fit == pytest.approx(math.sqrt(2), rel=0.01)
    assert fd.model == "sqrt+linear"


def test_zero_interaction_has_zero_force():
    th = make_theory([np.diag([1.0, -1.0])], np.zeros((2, 2)))
    assert abelian_boundary_force(th, None, _upper_qubit_query()).G == 0.0


def test_query_validation():
    facet = FacetInequality(np.array([-1.0]), -1.0)
    with pytest.raises(ValueError):
        make_query(facet, [1.0], [1.0])
    with pytest.raises(ValueError):
        make_query(facet, [0.5], [-1.0])


def test_query_normalizes_eta_pairing():
    facet = FacetInequality(np.array([-1.0]), -1.0)
    q = make_query(facet, [1.0], [-2.0])
    assert float(q.eta @ q.facet.S) == pytest.approx(1.0)


def test_random_five_weight_theory_fit():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    th = make_theory([np.diag(np.arange(5.0))], (a + a.conj().T) / 2)
    facet = FacetInequality(np.array([1.0]), 0.0)
    query = make_query(facet, [0.0], [1.0])
    res = abelian_boundary_force(th, None, query)
    w = th.interaction
    want = 2 * math.sqrt(sum(abs(w[k, 0]) ** 2 / k for k in range(1, 5)))
    assert res.G == pytest.approx(want, rel=1e-12)
    fd = finite_difference_force(th, query, seed_from=res)
    assert fd.G_fit == pytest.approx(want, rel=0.05)


def test_simplex_force_matches_general_formula():
    th = build_bosonic_theory(3, 3, 1)
    wd = weight_decomposition(th)
    dom = bosonic_domain(3, 3, 1)
    for facet in dom.inequalities:
        on = [w for w in wd.weights if abs(facet.D(w)) < 1e-9]
        rho = 0.3 * on[0] + 0.7 * on[1]
        query = make_query(facet, rho, facet.S)
        res = abelian_boundary_force(th, wd, query)
        assert simplex_force(th, wd, query, res.minimizer_used) == pytest.approx(res.G, rel=1e-10)


def test_hubbard_m_star_force_and_warning():
    n = 6
    th = build_bosonic_theory(3, n, 0)
    dom = bosonic_domain(3, n, 0)
    ms = np.array([0.0, 3.0, 3.0])
    facet = next(f for f in dom.inequalities if abs(f.D(ms)) < 1e-9)
    with pytest.warns(RuntimeWarning, match="critical value"):
        res = abelian_boundary_force(th, None, make_query(facet, ms, facet.S))
    assert res.G == pytest.approx(4 * 2**0.25 * 3**0.75 / 9 * math.sqrt(n * (n - 1)), rel=1e-10)
    assert res.notes


def test_nonabelian_force_never_exceeds_abelian_value():
    # v = 0 is admissible in the minimization, which gives the abelian expression
    alg, th = two_three_theory()
    query = nonabelian_query(alg, (-1, 0), -1, (1, 1), (-1, 0))
    res = nonabelian_boundary_force(alg, th, query)
    abelian = make_theory(alg.cartan_basis, th.interaction)
    aq = make_query(FacetInequality(np.array([-1.0, 0.0]), -1.0, normalized=False), [1.0, 1.0], [-1.0, 0.0])
    ab = abelian_boundary_force(abelian, None, aq, phi=res.minimizer_used)
    assert res.G <= ab.G + 1e-12
    assert res.G == pytest.approx(math.sqrt(6) / 4 * 1.5, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_dimer_formula(n):
    theta = math.pi / 3
    alg = dimer_algebra(n, theta)
    res = nonabelian_boundary_force(alg, dimer_theory(n, theta), nonabelian_query(alg, (-1,), -n, (n,), (-1,)))
    assert res.G == pytest.approx(math.sqrt(n * (n - 1)) * math.sin(theta) ** 2 / math.sqrt(2), abs=1e-10)
    assert res.G_spread < 1e-9
    assert res.optimal_v is not None


def test_dimer_fit():
    n, theta = 5, math.pi / 6
    alg = dimer_algebra(n, theta)
    th = dimer_theory(n, theta)
    query = nonabelian_query(alg, (-1,), -n, (n,), (-1,))
    res = nonabelian_boundary_force(alg, th, query)
    fd = finite_difference_force(th, query, seed_from=res)
    assert fd.G_fit == pytest.approx(res.G, rel=0.02)
    assert abs(fd.G_fit_sqrt - res.G) > abs(fd.G_fit - res.G)


def test_fit_recovers_synthetic_law():
    eps = np.array([1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
    g, a, rms = fit_sqrt_law(eps, 2.0 - 1.7 * np.sqrt(eps))
    assert (g, a) == pytest.approx((1.7, 2.0), abs=1e-12)
    assert rms < 1e-12


def test_fit_validation():
    th = qubit_theory()
    q = _upper_qubit_query()
    with pytest.raises(ValueError):
        finite_difference_force(th, q, eps_list=[1e-2, 1e-3, 1e-4])
    with pytest.raises(ValueError):
        finite_difference_force(th, q, eps_list=[1e-3, 1e-2])
    with pytest.raises(ValueError):
        finite_difference_force(th, q, model="cubic")
