"""Acceptance suite: one check per criterion with a runtime budget.

Used by ``gdft verify`` and by tests/test_acceptance.py.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .abelian import weight_decomposition
from .boundary import (
    abelian_boundary_force,
    finite_difference_force,
    make_query,
    nonabelian_boundary_force,
    nonabelian_query,
)
from .bosonic import (
    bosonic_domain,
    build_bosonic_theory,
    enumerate_permanents,
    functional_form,
    simplex_coefficients,
    simplex_functional,
)
from .core import qubit_theory
from .liegroup import dimer_algebra, dimer_theory, kirwan_polytope, su3_adjoint, su2_product, two_three_theory
from .search import SearchOptions, ensemble_functional, pure_functional


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number}. {self.title} ({self.seconds:.1f} s, budget {self.budget:.0f} s)"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": round(self.seconds, 1),
            "budget": self.budget,
            "details": list(self.details),
        }


class _Checks:
    """Collects named comparisons; every failing one marks the criterion red."""

    def __init__(self):
        self.ok = True
        self.details = []

    def close(self, label: str, got: float, want: float, tol: float, relative: bool = False):
        err = abs(got - want) / (abs(want) if relative and want else 1.0)
        good = bool(err <= tol)
        self.ok &= good
        kind = "rel" if relative else "abs"
        self.details.append(f"{label}: got {got:.12g}, want {want:.12g}, {kind} err {err:.2e} (tol {tol:.0e})"
                            + ("" if good else "  <-- FAIL"))
        return good

    def true(self, label: str, cond: bool):
        self.ok &= bool(cond)
        self.details.append(label + ("" if cond else "  <-- FAIL"))


def qubit_closed_forms(c: _Checks):
    opts = SearchOptions(early_stop=3)
    worst_p = worst_e = 0.0
    for lam in (0.5, 1.0, 2.0):
        th = qubit_theory(lam)
        for rho in np.linspace(-0.9, 0.9, 19):
            pure = pure_functional(th, [rho], opts)
            fp = pure.value
            fe = ensemble_functional(th, [rho], opts, pure=pure).value
            worst_p = max(worst_p, abs(fp + abs(lam) * math.sqrt(1 - rho**2)))
            worst_e = max(worst_e, abs(fe - fp))
    c.close("max |F_p + |lambda| sqrt(1 - rho^2)| over 57 points", worst_p, 0.0, 1e-6)
    c.close("max |F_e - F_p| over 57 points", worst_e, 0.0, 1e-6)


def bosonic_domains(c: _Checks):
    for p, lo, hi in ((0, 0, 4), (1, 1, 3)):
        dom = bosonic_domain(2, 4, p)
        n1 = sorted(float(v[1]) for v in dom.vertices)
        c.true(f"(2,4,{p}) vertices have n1 in {n1}, want [{lo}, {hi}]", n1 == [lo, hi])
        lattice = [f.lattice for f in dom.inequalities]
        c.true(f"(2,4,{p}) facets carry integer forms {lattice}",
               all(f is not None and all(isinstance(a, int) for a in f[0]) for f in lattice))
        inside = [m for m in range(5) if dom.contains([4 - m, m])]
        c.true(f"(2,4,{p}) integer points n1 in {inside}", inside == list(range(lo, hi + 1)))


def functional_form_240(c: _Checks):
    dom = bosonic_domain(2, 4, 0)
    ff = functional_form(dom, enumerate_permanents(2, 4, 0))
    t_want = np.array([[4, 2, 0], [0, 2, 4]], dtype=float)
    tp_want = np.array([[5, -1], [2, 2], [-1, 5]]) / 24
    c.close("max |T - [[4,2,0],[0,2,4]]|", float(np.max(np.abs(ff.T - t_want))), 0.0, 1e-12)
    c.close("max |T+ - (1/24)[[5,-1],[2,2],[-1,5]]|", float(np.max(np.abs(ff.T_plus - tp_want))), 0.0, 1e-12)
    k = ff.kernel_basis[:, 0]
    ref = np.array([-1.0, 2.0, -1.0]) / math.sqrt(6)
    c.close("kernel alignment 1 - |<k, (-1,2,-1)/sqrt 6>|", 1 - abs(float(k @ ref)), 0.0, 1e-12)
    c.true(f"kernel dimension {ff.kernel_basis.shape[1]} == 1", ff.kernel_basis.shape[1] == 1)


def _triangle_points(rng, count: int):
    out = []
    while len(out) < count:
        y = rng.dirichlet(np.ones(3))
        r = np.sqrt(y)
        if 2 * r.max() < r.sum() - 1e-3:
            out.append(y)
    return out


def simplex_331(c: _Checks):
    th = build_bosonic_theory(3, 3, 1)
    dom = bosonic_domain(3, 3, 1)
    w = th.interaction.real
    u0, u1 = float(w[0, 0]), float(w[0, 1])
    perms = np.array(enumerate_permanents(3, 3, 1), dtype=float)
    rng = np.random.default_rng(331)
    worst_closed = worst_search = 0.0
    for y in _triangle_points(rng, 10):
        rho = y @ perms
        y_back, _ = simplex_coefficients(th, dom, rho)
        fs = simplex_functional(th, dom, rho)
        fp = pure_functional(th, rho).value
        worst_closed = max(worst_closed, abs(fs - (u0 - u1)), float(np.max(np.abs(np.sort(y_back) - np.sort(y)))))
        worst_search = max(worst_search, abs(fs - fp))
    c.details.append(f"U0 = {u0:.12g}, U1 = {u1:.12g}")
    c.close("max |F_simplex - (U0 - U1)| over 10 points", worst_closed, 0.0, 1e-7)
    c.close("max |F_simplex - F_search| over 10 points", worst_search, 0.0, 1e-6)


def hubbard_force(c: _Checks):
    for n in (6, 12):
        th = build_bosonic_theory(3, n, 0)
        wd = weight_decomposition(th)
        dom = bosonic_domain(3, n, 0)
        ms = np.array([0.0, n / 2, n / 2])
        facet = next(f for f in dom.inequalities if abs(f.D(ms)) < 1e-9)
        query = make_query(facet, ms, facet.S)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = abelian_boundary_force(th, wd, query)
        exact = 4 * 2**0.25 * 3**0.75 / 9 * math.sqrt(n * (n - 1))
        c.close(f"N={n} G_formula", res.G, exact, 1e-9)
        c.close(f"N={n} F_p(m*)", pure_functional(th, ms).value, n * (n - 1) / 3, 1e-6)
        fd = finite_difference_force(th, query, seed_from=res)
        c.close(f"N={n} G_fit", fd.G_fit, exact, 0.05, relative=True)


def _same_inequalities(got, want) -> bool:
    """Equality of inequality sets up to positive scaling."""
    def norm(sigma, cval):
        v = np.array(list(sigma) + [cval], dtype=float)
        return tuple(np.round(v / np.linalg.norm(v[:-1]), 9))

    return sorted(norm(s, cv) for s, cv in got) == sorted(norm(s, cv) for s, cv in want)


def kirwan_examples(c: _Checks):
    two_three = kirwan_polytope(su2_product([2, 3]))
    got = [(i.sigma, i.c) for i in two_three.reported_inequalities]
    want = [((0, -1), -2), ((-1, 0), -1), ((1, -1), -1)]
    c.true(f"2x3 inequalities {got}", _same_inequalities(got, want))
    su3 = kirwan_polytope(su3_adjoint())
    got = [(i.sigma, i.c) for i in su3.reported_inequalities]
    want = [((-1, 0), -1), ((0, -1), -1)]
    c.true(f"su(3) adjoint inequalities {got}", _same_inequalities(got, want))


def two_three_force(c: _Checks):
    u1, u2, u3, k1, k3 = 1.0, 0.3, -0.5, 0.2, -0.1
    alg, th = two_three_theory(u1, u2, u3, k1, k3)
    query = nonabelian_query(alg, (-1, 0), -1, (1, 1), (-1, 0))
    res = nonabelian_boundary_force(alg, th, query)
    exact = math.sqrt(6) / 4 * abs(u1 - u3)
    c.close("G_formula", res.G, exact, 1e-9)
    fd = finite_difference_force(th, query, seed_from=res)
    c.close("G_fit", fd.G_fit, exact, 0.10, relative=True)


def dimer_force(c: _Checks):
    for n in (2, 5, 10):
        for name, theta in (("pi/6", math.pi / 6), ("pi/3", math.pi / 3), ("pi/2", math.pi / 2)):
            alg = dimer_algebra(n, theta)
            th = dimer_theory(n, theta)
            query = nonabelian_query(alg, (-1,), -n, (n,), (-1,))
            res = nonabelian_boundary_force(alg, th, query)
            exact = math.sqrt(n * (n - 1)) * math.sin(theta) ** 2 / math.sqrt(2)
            c.close(f"N={n} theta={name} G_formula", res.G, exact, 1e-9)
            if exact == 0.0:
                c.true(f"N={n} theta={name} zero force, fit skipped", True)
                continue
            fd = finite_difference_force(th, query, seed_from=res)
            c.close(f"N={n} theta={name} G_fit", fd.G_fit, exact, 0.05, relative=True)


def property_suites(c: _Checks):
    from .properties import run_all

    for report in run_all():
        c.true(report.line(), report.passed)


CRITERIA = (
    (1, "Qubit closed forms", qubit_closed_forms, 5),
    (2, "Bosonic domains", bosonic_domains, 1),
    (3, "Functional-form matrices for (2,4,0)", functional_form_240, 1),
    (4, "Simplex functional (3,3,1)", simplex_331, 30),
    (5, "Abelian boundary force, Hubbard (3,N,0)", hubbard_force, 300),
    (6, "Kirwan polytopes", kirwan_examples, 30),
    (7, "Nonabelian boundary force, 2x3", two_three_force, 600),
    (8, "Hubbard dimer boundary force", dimer_force, 600),
    (9, "Property suites", property_suites, 900),
)


def run_criterion(number: int) -> CriterionResult:
    _, title, fn, budget = next(item for item in CRITERIA if item[0] == number)
    checks = _Checks()
    start = time.perf_counter()
    try:
        fn(checks)
    except Exception as exc:
        checks.true(f"raised {type(exc).__name__}: {exc}", False)
    seconds = time.perf_counter() - start
    if seconds > budget:
        checks.true(f"runtime {seconds:.1f} s exceeds {budget} s", False)
    return CriterionResult(number, title, checks.ok, seconds, budget, checks.details)


def run(numbers=None, echo=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default); ``echo`` receives each result."""
    results = []
    for number, *_ in CRITERIA:
        if numbers is not None and number not in numbers:
            continue
        result = run_criterion(number)
        if echo is not None:
            echo(result)
        results.append(result)
    return results
