"""Constrained search for the pure, ensemble and Hohenberg-Kohn functionals.

The constrained search minimizes <psi|W|psi> over unit vectors with a
prescribed density.  Writing psi = u + i w, the objective and all density
constraints are real quadratic forms in x = (u, w), so every local solve is a
quadratically constrained quadratic program.

Abelian theories are handled in the weight-adapted basis, where every start
is an exact point sum_i xi_i sqrt(y_i) E_i of the classical fiber.  Other
theories use a quadratic penalty method on the unit sphere with a growing
penalty.  Both finish with an equality-constrained SQP polish.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.optimize import linprog, minimize

from .abelian import (
    WeightDecomposition,
    classical_fiber_point,
    hull_of_points,
    is_representable,
    weight_decomposition,
)
from .core import (
    FunctionalTheory,
    QuantumState,
    convexify,
    density_of_state,
    ground_states,
    partial_trace_ancilla,
)
from .errors import (
    DegenerateGroundState,
    DidNotConverge,
    NotAbelian,
    NotInRelativeInterior,
    NotRepresentable,
)


@dataclass(frozen=True)
class SearchOptions:
    multistarts: int = 32
    near_facet_multistarts: int = 256
    near_facet_fraction: float = 0.05
    max_iters: int = 500
    constraint_tol: float = 1e-8
    value_tol: float = 1e-9
    penalty_growth: float = 10.0
    penalty_rounds: int = 6
    seed: int = 0
    workers: int = 1
    early_stop: int = 0

    def __post_init__(self):
        if self.multistarts < 1 or self.max_iters < 1 or self.penalty_rounds < 1:
            raise ValueError("multistarts, max_iters and penalty_rounds must be positive")
        if self.early_stop < 0 or self.near_facet_multistarts < 1 or self.workers < 1:
            raise ValueError("early_stop must be nonnegative, start and worker counts positive")
        if not 0 < self.constraint_tol < 1e-3:
            raise ValueError("constraint_tol must lie in (0, 1e-3)")
        if self.value_tol <= 0 or self.penalty_growth <= 1:
            raise ValueError("value_tol must be positive and penalty_growth > 1")


def options_from_env(**overrides) -> SearchOptions:
    """SearchOptions with the worker count taken from GDFT_WORKERS."""
    workers = int(os.environ.get("GDFT_WORKERS", "1") or 1)
    return SearchOptions(workers=max(1, workers), **overrides)


@dataclass(frozen=True, eq=False)
class SearchResult:
    value: float
    state: QuantumState
    constraint_residual: float
    starts_converged: int
    best_start_index: int
    candidates: tuple = field(default=())
    starts_total: int = 0


def real_form(h: np.ndarray) -> np.ndarray:
    """Real symmetric matrix A with x^T A x = psi^dag H psi for psi = u + i w."""
    h = np.asarray(h)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _to_complex(x: np.ndarray) -> np.ndarray:
    n = len(x) // 2
    return x[:n] + 1j * x[n:]


def _to_real(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi.real, psi.imag])


@dataclass(frozen=True, eq=False)
class _Problem:
    objective: np.ndarray
    density_forms: np.ndarray
    rho: np.ndarray
    forms: np.ndarray
    targets: np.ndarray
    basis: np.ndarray
    penalty_scale: float
    ftol: float
    interaction: np.ndarray | None = None
    fiber_point: np.ndarray | None = None
    fiber_kernel: np.ndarray | None = None
    fiber_rows: np.ndarray | None = None


def _reduce_constraints(ops, rho, scale_tol: float = 1e-10):
    """Independent combinations of the density operators and the identity."""
    dim = ops.shape[1] if len(ops) else 0
    eye = np.eye(dim)[None]
    allops = np.concatenate([ops, eye]) if len(ops) else eye
    targets = np.concatenate([rho, [1.0]])
    vecs = np.array([np.concatenate([o.real.ravel(), o.imag.ravel()]) for o in allops])
    u, s, _ = np.linalg.svd(vecs, full_matrices=True)
    rank = int(np.sum(s > scale_tol * s[0]))
    null = u[:, rank:]
    if null.size and np.max(np.abs(null.T @ targets)) > 1e-9 * max(1.0, np.linalg.norm(targets)):
        raise NotRepresentable("density violates a linear relation among the potentials")
    comb = (u[:, :rank] / s[:rank]).T
    new_ops = np.einsum("jk,kab->jab", comb, allops)
    return new_ops, comb @ targets


def _build_problem(theory: FunctionalTheory, rho, basis=None) -> _Problem:
    rho = np.asarray(rho, dtype=float)
    if basis is None:
        basis = np.eye(theory.hilbert_dim, dtype=complex)
    w = basis.conj().T @ theory.interaction @ basis
    n = basis.shape[1]
    ops = np.array([basis.conj().T @ b @ basis for b in theory.potential_basis]).reshape(theory.n_params, n, n)
    new_ops, targets = _reduce_constraints(ops, rho)
    forms = np.array([real_form(o) for o in new_ops])
    dens = np.array([real_form(o) for o in ops]).reshape(len(ops), 2 * n, 2 * n)
    wscale = max(1.0, float(np.max(np.abs(w))))
    bscale = max(1.0, float(np.max(np.abs(ops)))) if len(ops) else 1.0
    return _Problem(real_form(w), dens, rho, forms, targets, basis, 10.0 * wscale / bscale**2, 1e-10 * wscale)


def _evaluate(problem: _Problem, x: np.ndarray):
    x = x / np.linalg.norm(x)
    value = float(x @ problem.objective @ x)
    if len(problem.rho):
        dens = np.einsum("i,kij,j->k", x, problem.density_forms, x)
        resid = float(np.linalg.norm(dens - problem.rho))
    else:
        resid = 0.0
    return value, resid, x


def _penalty_descent(problem: _Problem, x0: np.ndarray, opts: SearchOptions) -> np.ndarray:
    a, forms, rho = problem.objective, problem.density_forms, problem.rho

    def fun(x, mu):
        s = x @ x
        ax = a @ x
        val = (x @ ax) / s
        grad = 2 * (ax - val * x) / s
        if len(rho):
            fx = np.einsum("kij,j->ki", forms, x)
            q = fx @ x / s
            r = q - rho
            val += mu * r @ r
            grad += mu * 2 * (2 * (fx - q[:, None] * x[None, :]) / s).T @ r
        return val, grad

    x = x0 / np.linalg.norm(x0)
    mu = problem.penalty_scale
    for _ in range(opts.penalty_rounds):
        res = minimize(fun, x, args=(mu,), jac=True, method="L-BFGS-B",
                       options={"maxiter": opts.max_iters, "gtol": 1e-12, "ftol": 1e-15})
        x = res.x / np.linalg.norm(res.x)
        if _evaluate(problem, x)[1] <= opts.constraint_tol:
            break
        mu *= opts.penalty_growth
    return x


def _gauge_fix(x: np.ndarray):
    """Rotate the global phase so the largest amplitude is real.

    Returns the rotated vector and the index of the imaginary part that is
    held at zero, which removes the phase degeneracy from the local solve.
    """
    psi = _to_complex(x)
    j = int(np.argmax(np.abs(psi)))
    psi = psi * np.exp(-1j * np.angle(psi[j]))
    return _to_real(psi), len(psi) + j


def _kkt_residual(a, forms, targets, z, lam):
    qz = np.einsum("kij,j->ki", forms, z)
    return np.concatenate([a @ z - lam @ qz, 0.5 * (qz @ z - targets)]), qz


def _kkt_newton(a, forms, targets, z, steps: int = 8) -> np.ndarray:
    """Newton iterations on the KKT system of the quadratic program.

    SQP stalls a few digits short of machine precision on these problems;
    Newton on the first-order conditions converges quadratically from there.
    Steps that do not reduce the residual are rejected.
    """
    qz = np.einsum("kij,j->ki", forms, z)
    lam, *_ = np.linalg.lstsq(qz.T, a @ z, rcond=None)
    r, qz = _kkt_residual(a, forms, targets, z, lam)
    best = np.linalg.norm(r)
    n = len(z)
    for _ in range(steps):
        if best < 1e-15:
            break
        hess = a - np.einsum("k,kij->ij", lam, forms)
        jac = np.block([[hess, -qz.T], [qz, np.zeros((len(lam), len(lam)))]])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=1e-10)
        for t in (1.0, 0.5, 0.25, 0.1):
            z_new, lam_new = z + t * step[:n], lam + t * step[n:]
            r_new, qz_new = _kkt_residual(a, forms, targets, z_new, lam_new)
            norm_new = np.linalg.norm(r_new)
            if norm_new < best:
                break
        else:
            break
        z, lam, r, qz, best = z_new, lam_new, r_new, qz_new, norm_new
    return z


def _sqp_polish(problem: _Problem, x0: np.ndarray, opts: SearchOptions) -> np.ndarray:
    x0, fixed = _gauge_fix(x0)
    free = np.ones(len(x0), dtype=bool)
    free[fixed] = False
    a = problem.objective[np.ix_(free, free)]
    forms = problem.forms[:, free][:, :, free]
    targets = problem.targets
    cons = {
        "type": "eq",
        "fun": lambda z: np.einsum("i,kij,j->k", z, forms, z) - targets,
        "jac": lambda z: 2 * np.einsum("kij,j->ki", forms, z),
    }
    z0 = x0[free]
    res = minimize(lambda z: z @ a @ z, z0, jac=lambda z: 2 * a @ z, method="SLSQP",
                   constraints=[cons], options={"maxiter": opts.max_iters, "ftol": problem.ftol})
    z = res.x if np.all(np.isfinite(res.x)) else z0
    z = _kkt_newton(a, forms, targets, z)
    x = np.zeros_like(x0)
    x[free] = z
    return x


def _fiber_descent(problem: _Problem, y_start: np.ndarray, theta_start: np.ndarray, opts: SearchOptions):
    """Local solve over the classical fiber and the phases.

    The density constraints are linear in y = |c|^2.  The moduli are scaled
    by the start, y = y_start * w, so that components of very different size
    are equally well conditioned; the constraints are linear in w with w >= 0.
    """
    w_op, y0, kern = problem.interaction, problem.fiber_point, problem.fiber_kernel
    n = len(y0)
    y_start = np.maximum(y_start, 1e-12 * np.max(y_start))
    j = int(np.argmax(y_start))
    free = np.arange(n) != j
    rows = problem.fiber_rows

    def unpack(v):
        theta = np.zeros(n)
        theta[free] = v[n:]
        return y_start * np.clip(v[:n], 0.0, None), theta

    def fun(v):
        y, theta = unpack(v)
        c = np.sqrt(y) * np.exp(1j * theta)
        wc = w_op @ c
        prod = c.conj() * wc
        gy = prod.real / np.maximum(y, 1e-300)
        return float(np.vdot(c, wc).real), np.concatenate([y_start * gy, 2 * prod.imag[free]])

    a_eq = np.hstack([rows * y_start[None, :], np.zeros((len(rows), n - 1))])
    b_eq = rows @ y0
    cons = [{"type": "eq", "fun": lambda v: a_eq @ v - b_eq, "jac": lambda v: a_eq}]
    v0 = np.concatenate([np.ones(n), (theta_start - theta_start[j])[free]])
    bounds = [(0, None)] * n + [(None, None)] * (n - 1)
    res = minimize(fun, v0, jac=True, method="SLSQP", constraints=cons, bounds=bounds,
                   options={"maxiter": opts.max_iters, "ftol": problem.ftol})
    v = res.x if np.all(np.isfinite(res.x)) else v0
    y, theta = unpack(v)
    y = _project_to_fiber(y, y0, kern)
    return _to_real(np.sqrt(np.clip(y, 0.0, None)) * np.exp(1j * theta))


def _newton_refine(problem: _Problem, x: np.ndarray) -> np.ndarray:
    x, fixed = _gauge_fix(x)
    free = np.ones(len(x), dtype=bool)
    free[fixed] = False
    a = problem.objective[np.ix_(free, free)]
    forms = problem.forms[:, free][:, :, free]
    out = np.zeros_like(x)
    out[free] = _kkt_newton(a, forms, problem.targets, x[free])
    return out


def _phase_descent(problem: _Problem, theta_start: np.ndarray) -> np.ndarray:
    """Minimize over the phases alone when the moduli are fixed by the density."""
    y0 = problem.fiber_point
    amps = np.sqrt(np.clip(y0, 0.0, None))
    m = amps[:, None] * problem.interaction * amps[None, :]
    j = int(np.argmax(amps))
    free = np.arange(len(amps)) != j

    def fun(t):
        theta = np.zeros(len(amps))
        theta[free] = t
        xi = np.exp(1j * theta)
        mx = m @ xi
        return float(np.vdot(xi, mx).real), 2 * np.imag(xi.conj() * mx)[free]

    t0 = (theta_start - theta_start[j])[free]
    res = minimize(fun, t0, jac=True, method="L-BFGS-B", options={"gtol": 1e-13, "ftol": 1e-16})
    theta = np.zeros(len(amps))
    theta[free] = res.x
    return _to_real(amps * np.exp(1j * theta))


def _run_start(problem: _Problem, x0: np.ndarray, opts: SearchOptions, penalty: bool):
    if problem.fiber_point is not None and problem.fiber_kernel.shape[1] == 0:
        x = _phase_descent(problem, np.angle(_to_complex(x0)))
        return min([_evaluate(problem, x0), _evaluate(problem, x)], key=lambda t: (t[1] > opts.constraint_tol, t[0]))
    if problem.fiber_point is not None:
        psi = _to_complex(x0)
        x = _fiber_descent(problem, np.abs(psi) ** 2, np.angle(psi), opts)
        # Newton may leave the fiber or climb to a saddle, so keep the best feasible point
        tried = [_evaluate(problem, x0), _evaluate(problem, x)]
        tried.append(_evaluate(problem, _newton_refine(problem, x)))
        feasible = [t for t in tried if t[1] <= opts.constraint_tol] or tried
        return min(feasible, key=lambda t: (t[0], t[1]))
    x = _penalty_descent(problem, x0, opts) if penalty else x0
    x = _sqp_polish(problem, x, opts)
    return _evaluate(problem, x)


def _run_start_packed(args):
    return _run_start(*args)


class _FiberSampler:
    """Random points of the classical fiber {y >= 0, A(y) = rho}."""

    def __init__(self, wd: WeightDecomposition, rho, seed: int, n_vertices: int = 8, y0=None):
        cw = wd.column_weights
        n = cw.shape[0]
        a_eq = np.vstack([cw.T, np.ones(n)])
        b_eq = np.concatenate([rho, [1.0]])
        rng = np.random.default_rng([seed, 2**31 - 1])
        points = [classical_fiber_point(wd, rho) if y0 is None else y0]
        for _ in range(n_vertices):
            res = linprog(rng.normal(size=n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
            if res.status == 0:
                points.append(np.clip(res.x, 0.0, None))
        self.points = np.array(points)

    def sample(self, rng) -> np.ndarray:
        # keep a share of the strictly positive point so no amplitude starts at zero
        lam = rng.dirichlet(np.full(len(self.points), rng.uniform(0.2, 2.0)))
        return 0.1 * self.points[0] + 0.9 * (lam @ self.points)


def _project_to_fiber(y, y0, kern):
    """Closest fiber point along the kernel, pulled toward y0 to stay nonnegative."""
    step = kern @ (kern.T @ (y - y0))
    neg = step < 0
    t = 1.0
    if np.any(neg):
        t = min(1.0, float(np.min(y0[neg] / -step[neg])) * (1 - 1e-9))
    return y0 + t * step


def _abelian_starts(wd, rho, n_starts, seed, seeds, y0, kern):
    """Seeds projected to the fiber, then random fiber points; generated lazily."""
    for s in seeds:
        c = wd.basis.conj().T @ np.asarray(s, dtype=complex)
        y = _project_to_fiber(np.abs(c) ** 2 / max(np.vdot(c, c).real, 1e-300), y0, kern)
        yield _to_real(np.sqrt(y) * np.exp(1j * np.angle(c)))
    sampler = None
    for i in range(n_starts):
        if sampler is None:
            sampler = _FiberSampler(wd, rho, seed, n_vertices=min(8, 2 * kern.shape[1]), y0=y0)
        rng = np.random.default_rng([seed, i])
        y = sampler.sample(rng)
        phases = rng.uniform(0, 2 * np.pi, size=len(y))
        phases[0] = 0.0
        yield _to_real(np.sqrt(y) * np.exp(1j * phases))


def _general_starts(dim, n_starts, seed, seeds):
    for s in seeds:
        yield _to_real(np.asarray(s, dtype=complex))
    for i in range(n_starts):
        rng = np.random.default_rng([seed, i])
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        yield _to_real(psi / np.linalg.norm(psi))


def _face_support(wd: WeightDecomposition, rho, tol: float = 1e-12) -> np.ndarray:
    """Columns whose weight lies on the smallest face of the hull containing rho.

    Every other column has zero amplitude in any state with density rho.
    """
    poly = hull_of_points(wd.weights)
    keep = np.ones(len(wd.column_weight), dtype=bool)
    cw = wd.column_weights
    for i in poly.tight(rho, tol):
        keep &= np.abs(poly.inequalities[i].D(cw)) <= 1e-9
    return keep


def _restrict(wd: WeightDecomposition, keep: np.ndarray) -> WeightDecomposition:
    return WeightDecomposition(wd.weights, wd.basis[:, keep], wd.column_weight[keep])


def _try_weights(theory: FunctionalTheory):
    try:
        return weight_decomposition(theory)
    except NotAbelian:
        return None


def _near_facet(wd: WeightDecomposition, rho, fraction: float) -> bool:
    poly = hull_of_points(wd.weights)
    if not poly.inequalities:
        return False
    for f in poly.inequalities:
        spread = float(np.max(f.D(wd.weights)))
        if spread > 0 and f.D(rho) < fraction * spread:
            return True
    return False


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def pure_functional(theory: FunctionalTheory, rho, opts: SearchOptions | None = None,
                    seeds=(), wd: WeightDecomposition | None = None) -> SearchResult:
    """Minimum of <psi|W|psi> over unit vectors psi with density rho.

    ``seeds`` are extra starting vectors (in the Hilbert space of the theory)
    tried before the random starts.
    """
    opts = opts or SearchOptions()
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if rho.shape != (theory.n_params,):
        raise NotRepresentable(f"density must have {theory.n_params} components")
    if wd is None:
        wd = _try_weights(theory)
    if wd is not None:
        if not is_representable(wd, rho):
            raise NotRepresentable("density lies outside the convex hull of the weights")
        sub = _restrict(wd, _face_support(wd, rho))
        problem = _build_problem(theory, rho, sub.basis)
        cw = sub.column_weights
        y0 = classical_fiber_point(sub, rho)
        kern = scipy.linalg.null_space(np.vstack([cw.T, np.ones(len(cw))]), rcond=1e-10)
        w_sub = sub.in_basis(theory.interaction)
        rows = scipy.linalg.orth(np.vstack([cw.T, np.ones(len(cw))]).T).T
        problem = replace(problem, interaction=w_sub, fiber_point=y0, fiber_kernel=kern, fiber_rows=rows)
        n_starts = opts.multistarts
        if _near_facet(wd, rho, opts.near_facet_fraction):
            n_starts = max(n_starts, opts.near_facet_multistarts)
        starts = _abelian_starts(sub, rho, n_starts, opts.seed, seeds, y0, kern)
        penalty = False
    else:
        problem = _build_problem(theory, rho)
        starts = _general_starts(theory.hilbert_dim, opts.multistarts, opts.seed, seeds)
        penalty = True
    # single-state fibers need no optimization
    if problem.objective.shape[0] == 2:
        starts = itertools.islice(starts, 1)
    outcomes = _run_starts(problem, starts, opts, penalty)
    return _collect(problem, outcomes, opts)


def _run_starts(problem: _Problem, starts, opts: SearchOptions, penalty: bool):
    """Run the starts in order; with early_stop > 0 stop once that many agree on the best value."""
    jobs = ((problem, x0, opts, penalty) for x0 in starts)
    if opts.early_stop <= 0:
        return _map(_run_start_packed, list(jobs), opts.workers)
    outcomes = []
    while True:
        batch = list(itertools.islice(jobs, opts.workers))
        if not batch:
            break
        outcomes += _map(_run_start_packed, batch, opts.workers)
        ok = [v for v, r, _ in outcomes if r <= opts.constraint_tol]
        if len(outcomes) < 2 * opts.early_stop or not ok:
            continue
        best = min(ok)
        tol = max(opts.value_tol, 1e-9 * abs(best))
        if sum(v <= best + tol for v in ok) >= opts.early_stop:
            break
    return outcomes


def _collect(problem: _Problem, outcomes, opts: SearchOptions) -> SearchResult:
    ok = [(v, i, x) for i, (v, r, x) in enumerate(outcomes) if r <= opts.constraint_tol]
    if not ok:
        best_resid = min(r for _, r, _ in outcomes)
        raise DidNotConverge(f"no start met the constraint tolerance (best residual {best_resid:.3e})")
    best_value, best_index, best_x = min(ok, key=lambda t: (t[0], t[1]))
    tol = max(opts.value_tol, 1e-9 * abs(best_value))
    candidates = []
    for v, _, x in sorted(ok, key=lambda t: (t[0], t[1])):
        if v <= best_value + tol:
            candidates.append(QuantumState.pure(problem.basis @ _to_complex(x), normalize=True))
    state = candidates[0]
    resid = _evaluate(problem, best_x)[1]
    return SearchResult(best_value, state, resid, len(ok), best_index, tuple(candidates), len(outcomes))


def ensemble_functional(theory: FunctionalTheory, rho, opts: SearchOptions | None = None,
                        k: int | None = None, seed_with_pure: bool = True,
                        pure: SearchResult | None = None) -> SearchResult:
    """Ensemble functional as the pure functional of the k-convexification.

    The returned state is the reduced ensemble state on the original space.
    ``pure`` reuses an already computed pure minimizer as the seed.
    """
    opts = opts or SearchOptions()
    dim = theory.hilbert_dim
    k = dim if k is None else max(1, min(k, dim))
    big = convexify(theory, k)
    seeds = []
    if seed_with_pure:
        try:
            pure = pure or pure_functional(theory, rho, opts)
            seeds.append(np.kron(pure.state.amplitudes, np.eye(k)[0]))
        except DidNotConverge:
            pass
    wd = _try_weights(big)
    result = pure_functional(big, rho, opts, seeds=seeds, wd=wd)
    gamma = partial_trace_ancilla(result.state.amplitudes, dim, k)
    gamma = gamma / np.trace(gamma).real
    state = QuantumState.ensemble(gamma)
    return replace(result, state=state, candidates=(state,))


def hk_functional_sample(theory: FunctionalTheory, v, degeneracy_tol: float | None = None):
    """Density and interaction energy of the ground state at potential v."""
    states = ground_states(theory, v, degeneracy_tol)
    branches = [(density_of_state(theory, s), float(s.expectation(theory.interaction).real)) for s in states]
    if len(branches) > 1:
        raise DegenerateGroundState(f"ground space has dimension {len(branches)}", branches)
    return branches[0]


def no_mixing_residuals(theory: FunctionalTheory, wd: WeightDecomposition, result: SearchResult,
                        zero_tol: float = 1e-8) -> list[tuple[int, float]]:
    """|<E_i|W|Phi>| for every weight vector E_i strongly orthogonal to Phi.

    Within each weight space the basis is adapted to Phi: its first vector
    is parallel to the projection of Phi and the others are orthogonal to
    it, so every E_i with vanishing coefficient is reported.  Indices refer
    to this adapted basis, which coincides with the columns of ``wd`` for
    multiplicity-one weights.
    """
    if result.state.kind != "pure":
        raise NotInRelativeInterior("no-mixing check needs a pure state")
    phi = result.state.amplitudes
    rho = density_of_state(theory, result.state)
    poly = hull_of_points(wd.weights)
    if poly.inequalities and poly.margin(rho) <= 1e-9:
        raise NotInRelativeInterior("density is on the boundary of the domain")
    basis = adapted_weight_basis(wd, phi, zero_tol)
    coeffs = basis.conj().T @ phi
    w_phi = basis.conj().T @ (theory.interaction @ phi)
    return [(int(i), float(abs(w_phi[i]))) for i in np.flatnonzero(np.abs(coeffs) <= zero_tol)]


def adapted_weight_basis(wd: WeightDecomposition, phi, zero_tol: float = 1e-8) -> np.ndarray:
    """Weight basis whose first vector in each weight space is parallel to Pi_omega phi."""
    out = wd.basis.copy()
    for i in range(len(wd.weights)):
        cols = wd.columns(i)
        block = wd.basis[:, cols]
        c = block.conj().T @ phi
        if len(cols) == 1 or np.linalg.norm(c) <= zero_tol:
            continue
        # QR of [c, I] puts c / |c| first
        q, _ = np.linalg.qr(np.column_stack([c, np.eye(len(cols))]))
        out[:, cols] = block @ q[:, : len(cols)]
    return out


def minimize_phases(m: np.ndarray, seed: int = 0, starts: int = 16):
    """Minimum of xi^dag M xi over vectors of unit-modulus entries.

    Returns the value and the phases (first phase fixed to zero).
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0].real), np.zeros(1)

    def fun(theta):
        xi = np.exp(1j * np.concatenate([[0.0], theta]))
        mx = m @ xi
        val = float(np.vdot(xi, mx).real)
        grad = 2 * np.imag(xi.conj() * mx)[1:]
        return val, grad

    best = (np.inf, None)
    for i in range(starts):
        rng = np.random.default_rng([seed, i])
        theta0 = np.zeros(n - 1) if i == 0 else rng.uniform(0, 2 * np.pi, n - 1)
        res = minimize(fun, theta0, jac=True, method="L-BFGS-B", options={"gtol": 1e-13, "ftol": 1e-16})
        if res.fun < best[0]:
            best = (float(res.fun), res.x)
    return best[0], np.concatenate([[0.0], best[1]])
