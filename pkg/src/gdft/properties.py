"""Randomized property suites with fixed seeds.

Each suite returns a PropertyReport with the worst residual over its
trials.  The suites are shared by the acceptance runner and the tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .abelian import FacetInequality, weight_decomposition
from .boundary import abelian_boundary_force, make_query
from .bosonic import bosonic_domain, build_bosonic_theory
from .core import FunctionalTheory, QuantumState, ground_energy, make_theory
from .errors import DegenerateGroundState, NotOnFacet
from .search import (
    SearchOptions,
    ensemble_functional,
    hk_functional_sample,
    no_mixing_residuals,
    pure_functional,
)

TRIALS = 200
FAST_OPTS = SearchOptions(multistarts=6, near_facet_multistarts=12, early_stop=3)


@dataclass(frozen=True)
class PropertyReport:
    name: str
    trials: int
    worst: float
    tol: float
    checked: int = 0

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.worst <= self.tol

    def line(self) -> str:
        extra = f", {self.checked} checked quantities" if self.checked else ""
        return f"{self.name}: {self.trials} trials, worst {self.worst:.3e} (tol {self.tol:.0e}){extra}"


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_theory(rng, dim: int, n_pots: int) -> FunctionalTheory:
    """Generic theory with GUE potentials and interaction."""
    while True:
        try:
            return make_theory([random_hermitian(rng, dim) for _ in range(n_pots)], random_hermitian(rng, dim))
        except Exception:
            continue


def random_line_theory(rng, dim: int) -> FunctionalTheory:
    """One diagonal integer potential with at least two distinct weights."""
    weights = rng.integers(0, 3, size=dim).astype(float)
    weights[0], weights[-1] = 0.0, 2.0
    return make_theory([np.diag(weights)], random_hermitian(rng, dim))


def energy_concavity(trials: int = TRIALS, seed: int = 1) -> PropertyReport:
    """E(t v1 + (1-t) v2) >= t E(v1) + (1-t) E(v2)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        th = random_theory(rng, int(rng.integers(2, 6)), int(rng.integers(1, 4)))
        v1, v2 = rng.normal(size=(2, th.n_params)) * 2
        t = rng.uniform()
        gap = ground_energy(th, t * v1 + (1 - t) * v2) - t * ground_energy(th, v1) - (1 - t) * ground_energy(th, v2)
        worst = max(worst, -gap)
    return PropertyReport("energy concavity", trials, worst, 1e-10)


def ensemble_convexity(trials: int = TRIALS, seed: int = 2, opts: SearchOptions = FAST_OPTS) -> PropertyReport:
    """F_e(mid) <= t F_e(a) + (1-t) F_e(b) and F_e <= F_p at all three points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        th = random_line_theory(rng, int(rng.integers(2, 4)))
        a, b = rng.uniform(0.02, 1.98, size=2)
        t = rng.uniform()
        pts = [a, b, t * a + (1 - t) * b]
        fe = [ensemble_functional(th, [r], opts).value for r in pts]
        fp = [pure_functional(th, [r], opts).value for r in pts]
        worst = max(worst, fe[2] - t * fe[0] - (1 - t) * fe[1])
        worst = max(worst, max(e - p for e, p in zip(fe, fp)))
    return PropertyReport("ensemble convexity and F_e <= F_p", trials, worst, 1e-6)


def legendre_duality(trials: int = TRIALS, seed: int = 3, grid: int = 201, theories: int = 3,
                     opts: SearchOptions = FAST_OPTS) -> PropertyReport:
    """E(v) = min over a density grid of v rho + F_e(rho) on one-dimensional domains."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    per = math.ceil(trials / theories)
    for _ in range(theories):
        th = random_line_theory(rng, 3)
        rhos = np.linspace(0.0, 2.0, grid)
        fe = np.array([ensemble_functional(th, [r], opts).value for r in rhos])
        for v in rng.uniform(-2.0, 2.0, size=per):
            worst = max(worst, abs(float(np.min(v * rhos + fe)) - ground_energy(th, [v])))
            done += 1
    return PropertyReport("Legendre duality", done, worst, 2e-3)


def weak_hk(trials: int = TRIALS, seed: int = 4, opts: SearchOptions = FAST_OPTS) -> PropertyReport:
    """Ground-state interaction energy equals F_p at the ground-state density."""
    rng = np.random.default_rng(seed)
    hubbard = build_bosonic_theory(3, 3, 1)
    worst = 0.0
    done = 0
    while done < trials:
        th = hubbard if done % 2 == 0 else random_theory(rng, 3, 2)
        v = rng.normal(size=th.n_params)
        try:
            rho, value = hk_functional_sample(th, v)
        except DegenerateGroundState:
            continue
        worst = max(worst, abs(pure_functional(th, rho, opts).value - value))
        done += 1
    return PropertyReport("weak Hohenberg-Kohn consistency", done, worst, 1e-6)


def _interior_point(rng, weights, margin: float = 0.05):
    lam = rng.dirichlet(np.ones(len(weights)))
    lam = (1 - margin * len(weights)) * lam + margin
    return lam @ weights


def random_degenerate_theory(rng, dim: int = 6) -> FunctionalTheory:
    """Two diagonal potentials with repeated weights and a dense random interaction."""
    palette = np.array([[0, 0], [2, 0], [0, 2], [1, 1], [2, 2]], dtype=float)
    weights = palette[rng.integers(0, len(palette), size=dim)]
    weights[:3] = palette[:3]
    weights[3] = weights[int(rng.integers(0, 3))]
    return make_theory([np.diag(weights[:, 0]), np.diag(weights[:, 1])], random_hermitian(rng, dim))


def no_mixing(trials: int = TRIALS, seed: int = 5, opts: SearchOptions = FAST_OPTS) -> PropertyReport:
    """|<E|W|Phi>| vanishes for weight vectors E strongly orthogonal to the minimizer."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = 0
    for _ in range(trials):
        th = random_degenerate_theory(rng)
        wd = weight_decomposition(th)
        rho = _interior_point(rng, wd.weights)
        res = pure_functional(th, rho, opts)
        resid = no_mixing_residuals(th, wd, res)
        checked += len(resid)
        worst = max([worst] + [r for _, r in resid])
    if checked < trials:
        worst = math.inf
    return PropertyReport("No-Mixing residuals", trials, worst, 1e-5, checked)


def _su2_align(alg, psi, factor: int) -> np.ndarray:
    """Rotate one su(2) factor so its density lies on the positive Cartan axis."""
    h = alg.cartan_basis[factor]
    x, y = alg.xy_generators[factor]
    vec = np.array([np.vdot(psi, op @ psi).real for op in (x, y, h)])
    r = np.linalg.norm(vec)
    axis = np.cross(vec, [0.0, 0.0, 1.0])
    if r < 1e-14 or np.linalg.norm(axis) < 1e-14:
        if vec[2] >= 0:
            return psi
        axis, angle = np.array([1.0, 0.0, 0.0]), math.pi
    else:
        angle = math.acos(np.clip(vec[2] / r, -1, 1))
        axis = axis / np.linalg.norm(axis)
    gen = axis[0] * x + axis[1] * y + axis[2] * h
    best = None
    for sign in (1, -1):
        out = scipy.linalg.expm(-0.5j * sign * angle * gen) @ psi
        off = abs(np.vdot(out, x @ out)) + abs(np.vdot(out, y @ out))
        if best is None or off < best[0]:
            best = (off, out)
    return best[1]


def _random_group_element(alg, rng) -> np.ndarray:
    gens = list(alg.cartan_basis) + [g for pair in alg.xy_generators for g in pair]
    return scipy.linalg.expm(-1j * sum(rng.normal() * g for g in gens))


def selection_rule(trials: int = TRIALS, seed: int = 6) -> PropertyReport:
    """States whose chamber density lies on a nice facet are eigenvectors of the facet normal.

    States are built in the facet weight space, scrambled by a random group
    element and brought back into the Weyl chamber by an independent
    diagonalization of each su(2) factor.
    """
    from .liegroup import dimer_algebra, selection_rule_check, two_three_theory

    rng = np.random.default_rng(seed)
    cases = [
        (two_three_theory()[0], np.array([-1.0, 0.0]), -1.0),
        (dimer_algebra(4, math.pi / 3), np.array([-1.0]), -4.0),
    ]
    worst = 0.0
    done = 0
    while done < trials:
        alg, sigma, c = cases[done % len(cases)]
        weights = np.array([np.diag(h).real for h in _cartan_diagonal(alg)]).T
        on = np.flatnonzero(np.abs(weights @ sigma - c) < 1e-9)
        frame = _cartan_frame(alg)
        psi = np.zeros(alg.hilbert_dim, dtype=complex)
        psi[on] = rng.normal(size=len(on)) + 1j * rng.normal(size=len(on))
        psi = frame @ (psi / np.linalg.norm(psi))
        psi = _random_group_element(alg, rng) @ psi
        for f in range(alg.rank):
            psi = _su2_align(alg, psi, f)
        try:
            report = selection_rule_check(alg, sigma, c, QuantumState.pure(psi, normalize=True))
        except NotOnFacet:
            continue
        worst = max(worst, report.residual)
        done += 1
    return PropertyReport("Selection Rule residuals", done, worst, 1e-7)


def _cartan_frame(alg) -> np.ndarray:
    """Unitary whose columns are joint eigenvectors of the Cartan basis."""
    return weight_decomposition(make_theory(list(alg.cartan_basis), None)).basis


def _cartan_diagonal(alg):
    u = _cartan_frame(alg)
    return [u.conj().T @ h @ u for h in alg.cartan_basis]


def gamma_gauge(trials: int = TRIALS, seed: int = 7) -> PropertyReport:
    """G is unchanged by the gauge choices of the formula.

    These are gamma anywhere in aff(F), rescaling (S, nu), shifting S by
    the annihilator of the affine hull and adding a facet-tangent vector
    to eta.
    """
    rng = np.random.default_rng(seed)
    th = build_bosonic_theory(3, 6, 0)
    wd = weight_decomposition(th)
    dom = bosonic_domain(3, 6, 0)
    ms = np.array([0.0, 3.0, 3.0])
    facet = next(f for f in dom.inequalities if abs(f.D(ms)) < 1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        base = abelian_boundary_force(th, wd, make_query(facet, ms, facet.S))
    phi = base.minimizer_used
    along = dom.tangent - np.outer(facet.S, facet.S @ dom.tangent)
    normal_out = np.ones(3) / math.sqrt(3)
    worst = 0.0
    for _ in range(trials):
        gamma = ms + along @ rng.normal(size=along.shape[1]) * 5
        eta = facet.S + along @ rng.normal(size=along.shape[1])
        scale = math.exp(rng.normal())
        shift = rng.normal()
        s = scale * facet.S + shift * normal_out
        nu = scale * facet.nu + shift * float(normal_out @ ms)
        q = make_query(FacetInequality(s, nu, normalized=False), ms, eta, gamma)
        g = abelian_boundary_force(th, wd, q, phi).G
        worst = max(worst, abs(g - base.G))
    return PropertyReport("gamma-gauge invariance of G", trials, worst, 1e-10)


SUITES = (
    energy_concavity,
    ensemble_convexity,
    legendre_duality,
    weak_hk,
    no_mixing,
    selection_rule,
    gamma_gauge,
)


def run_all(trials: int = TRIALS) -> list[PropertyReport]:
    return [suite(trials=trials) for suite in SUITES]
