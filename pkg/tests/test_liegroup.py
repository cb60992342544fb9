import math

import numpy as np
import pytest

from gdft.core import QuantumState
from gdft.errors import NotNiceFacet, NotOnFacet, UnsupportedAlgebra
from gdft.liegroup import (
    builtin_algebra,
    chamber_projection,
    classify_facets,
    density_from_state,
    dimer_algebra,
    dimer_interaction,
    facet_theory_nonabelian,
    kirwan_polytope,
    rep_weights,
    selection_rule_check,
    spin_matrices,
    su2_product,
    su3_adjoint,
    two_three_theory,
)


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_spin_matrices_commutation(dim):
    x, y, z, jp = spin_matrices(dim)
    assert np.allclose(x @ y - y @ x, 2j * z)
    assert np.allclose(z @ jp - jp @ z, 2 * jp)


def test_algebras_pass_root_checks():
    su2_product([2, 3], [0.4, 1.1]).check()
    su3_adjoint().check()
    assert builtin_algebra({"su2_product": 2, "irreps": [2, 3]}).hilbert_dim == 6
    with pytest.raises(UnsupportedAlgebra):
        builtin_algebra({"so5": True})
    with pytest.raises(UnsupportedAlgebra):
        su2_product([1])


def test_su3_adjoint_weights_are_the_roots():
    wd = rep_weights(su3_adjoint())
    got = sorted(map(tuple, wd.weights))
    roots = [(2, -1), (-1, 2), (1, 1)]
    want = sorted(roots + [(-a, -b) for a, b in roots] + [(0, 0)])
    assert got == want
    zero = [i for i, w in enumerate(wd.weights) if np.allclose(w, 0)]
    assert len(wd.columns(zero[0])) == 2


def _ineqs(res):
    return sorted((tuple(int(s) for s in q.sigma), round(q.c, 9)) for q in res.reported_inequalities)


def test_kirwan_two_three():
    res = kirwan_polytope(su2_product([2, 3]))
    assert _ineqs(res) == sorted([((-1, 0), -1), ((0, -1), -2), ((1, -1), -1)])
    verts = sorted(map(tuple, np.round(res.polytope.vertices, 9)))
    assert (1.0, 2.0) in verts and (0.0, 1.0) in verts


def test_kirwan_su3_adjoint():
    res = kirwan_polytope(su3_adjoint())
    assert _ineqs(res) == sorted([((-1, 0), -1), ((0, -1), -1)])


def test_kirwan_is_deterministic():
    a = kirwan_polytope(su2_product([2, 3]))
    b = kirwan_polytope(su2_product([2, 3]))
    assert a.to_dict() == b.to_dict()


def test_facet_classes_two_three():
    alg = su2_product([2, 3])
    classes = {f.sigma: f.kind for f in classify_facets(kirwan_polytope(alg), rep_weights(alg))}
    assert classes[(-1, 0)] == "nice"
    assert "trivial" in classes.values()


def test_chamber_projection_is_weyl_invariant(rng):
    alg = su2_product([2, 3])
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    rho = density_from_state(alg, psi)
    cart = chamber_projection(alg, rho)
    assert np.all(cart >= -1e-12)
    # each su(2) factor contributes the length of its Bloch vector
    for k in range(2):
        idx = [k, 2 + 2 * k, 3 + 2 * k]
        assert cart[k] == pytest.approx(np.linalg.norm(rho[idx]), abs=1e-10)


def test_facet_theory_nonabelian_two_three():
    alg, th = two_three_theory()
    nf = facet_theory_nonabelian(alg, th, (-1, 0), -1)
    assert nf.isometry.shape == (6, 3)
    assert nf.parallel_roots == (1,)
    assert nf.nonparallel_roots == (0,)
    with pytest.raises(NotNiceFacet):
        facet_theory_nonabelian(alg, th, (1, -1), -1)


def test_selection_rule_on_facet_states(rng):
    alg = su2_product([2, 3])
    wd = rep_weights(alg)
    on = np.abs(wd.column_weights @ np.array([-1.0, 0.0]) + 1) < 1e-9
    for _ in range(5):
        coeffs = rng.normal(size=on.sum()) + 1j * rng.normal(size=on.sum())
        psi = wd.basis[:, on] @ coeffs
        psi /= np.linalg.norm(psi)
        cart = alg.cartan_coordinates(density_from_state(alg, psi))
        if np.min(cart) <= 1e-6:
            continue
        rep = selection_rule_check(alg, (-1, 0), -1, QuantumState.pure(psi))
        assert rep.passed and rep.residual < 1e-12


def test_selection_rule_rejects_off_facet_state():
    alg = su2_product([2, 3])
    psi = np.ones(6) / math.sqrt(6)
    with pytest.raises(NotOnFacet):
        selection_rule_check(alg, (-1, 0), -1, QuantumState.pure(psi))


def test_dimer_interaction_identity():
    n = 4
    z = spin_matrices(n + 1)[2]
    assert np.allclose(dimer_interaction(n), (n * n * np.eye(n + 1) + z @ z) / 2)
    alg = dimer_algebra(n, 0.7)
    assert alg.rank == 1 and alg.hilbert_dim == n + 1
