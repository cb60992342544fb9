import itertools
import math

import numpy as np
import pytest

from gdft.abelian import (
    FacetInequality,
    classical_density,
    classical_fiber_point,
    decompose_operators,
    facet_theory,
    facet_weights,
    hull_of_points,
    in_convex_hull,
    is_critical_value,
    is_representable,
    representable_polytope,
    state_from_classical,
    weight_decomposition,
    weights_table,
)
from gdft.bosonic import bosonic_domain, build_bosonic_theory
from gdft.core import density_of_state, make_theory, qubit_theory, spin_chain_theory
from gdft.errors import EmptyFacet, NotAbelian, NotRepresentable


def _inside_by_halfspaces(poly, pts):
    return [poly.contains(p) for p in pts]


def test_qubit_weights_and_interval():
    wd = weight_decomposition(qubit_theory())
    assert sorted(wd.weights[:, 0]) == [-1.0, 1.0]
    poly = representable_polytope(wd)
    assert poly.dim == 1
    assert sorted(v[0] for v in poly.vertices) == [-1.0, 1.0]


def test_noncommuting_potentials_are_rejected():
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    th = make_theory([x, z], np.zeros((2, 2)))
    with pytest.raises(NotAbelian):
        weight_decomposition(th)


def test_weight_basis_diagonalizes_potentials(rng):
    u, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    diag = [np.diag([0, 1, 1, 2, 0.0]), np.diag([1, 1, 1, 0, 0.0])]
    ops = [u @ d @ u.conj().T for d in diag]
    wd = decompose_operators(ops, 5)
    assert sorted(wd.multiplicities.tolist()) == [1, 1, 1, 2]
    for op in ops:
        m = wd.in_basis(op)
        assert np.allclose(m, np.diag(np.diag(m)), atol=1e-10)
    assert np.allclose(wd.basis.conj().T @ wd.basis, np.eye(5), atol=1e-12)


def test_hexagonal_domain_d3_n12_p1():
    poly = bosonic_domain(3, 12, 1)
    assert poly.dim == 2
    assert len(poly.vertices) == 6
    assert len(poly.inequalities) == 6


def test_hull_contains_matches_lp_oracle(rng):
    pts = rng.integers(-3, 4, size=(9, 2)).astype(float)
    poly = hull_of_points(pts)
    for q in rng.uniform(-4, 4, size=(200, 2)):
        assert poly.contains(q, 1e-9) == in_convex_hull(pts, q)


def test_facets_are_normalized_and_tangent():
    th = build_bosonic_theory(3, 6, 0)
    poly = representable_polytope(weight_decomposition(th))
    for f in poly.inequalities:
        assert np.linalg.norm(f.S) == pytest.approx(1.0)
        assert abs(f.S @ np.ones(3)) < 1e-12
        assert f.lattice is not None and math.gcd(*f.lattice[0]) == 1


def test_point_polytope():
    th = build_bosonic_theory(1, 4, 0)
    poly = representable_polytope(weight_decomposition(th))
    assert poly.dim == 0 and not poly.inequalities
    assert poly.contains([4.0]) and not poly.contains([3.0])


def test_facet_theory_restricts_to_facet_weights():
    th = build_bosonic_theory(3, 6, 0)
    wd = weight_decomposition(th)
    poly = representable_polytope(wd)
    ms = np.array([0.0, 3.0, 3.0])
    facet = next(f for f in poly.inequalities if abs(f.D(ms)) < 1e-9)
    on = facet_weights(wd, facet)
    assert all(wd.weights[i][0] == 0 for i in on)
    ft = facet_theory(th, wd, facet)
    assert ft.hilbert_dim == len(on)


def test_empty_facet_raises():
    wd = weight_decomposition(qubit_theory())
    with pytest.raises(EmptyFacet):
        facet_theory(qubit_theory(), wd, FacetInequality(np.array([1.0]), -5.0))


def test_critical_values_of_a_square():
    th = spin_chain_theory(2)
    wd = weight_decomposition(th)
    assert is_critical_value(wd, [0.0, 0.0])
    assert is_critical_value(wd, [1.0, 0.3])
    assert not is_critical_value(wd, [0.2, 0.5])
    with pytest.raises(NotRepresentable):
        is_critical_value(wd, [2.0, 0.0])


def test_classical_fiber_round_trip(rng):
    th = build_bosonic_theory(3, 6, 0)
    wd = weight_decomposition(th)
    for _ in range(20):
        y = rng.dirichlet(np.ones(wd.dim))
        rho = classical_density(wd, y)
        y0 = classical_fiber_point(wd, rho)
        assert np.min(y0) >= 0
        assert np.allclose(classical_density(wd, y0), rho, atol=1e-10)
        psi = state_from_classical(wd, y0, rng.uniform(0, 6, size=wd.dim))
        assert np.allclose(density_of_state(th, psi), rho, atol=1e-10)


def test_representability_and_table():
    wd = weight_decomposition(build_bosonic_theory(2, 4, 1))
    assert is_representable(wd, [2.0, 2.0])
    assert not is_representable(wd, [4.0, 0.0])
    table = weights_table(wd)
    assert sorted(map(tuple, table)) == [(1.0, 3.0, 1), (3.0, 1.0, 1)]
