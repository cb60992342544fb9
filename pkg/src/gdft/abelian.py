"""Abelian theories: weights, the representable polytope and facet theories."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .core import FunctionalTheory, QuantumState
from .errors import (
    DegeneratePolytope,
    EmptyFacet,
    NotAbelian,
    NotRepresentable,
    NotSimultaneouslyDiagonalizable,
    Unsupported,
)

WEIGHT_TOL = 1e-8
COMMUTATOR_TOL = 1e-9
FACET_MERGE_TOL = 1e-7
MAX_SUBSETS = 10**6


@dataclass(frozen=True, eq=False)
class WeightDecomposition:
    """Distinct weights with an orthonormal weight-adapted basis.

    ``weights`` has one row per distinct weight.  Column ``i`` of ``basis``
    spans part of the weight space of ``weights[column_weight[i]]``.
    """

    weights: np.ndarray
    basis: np.ndarray
    column_weight: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.column_weight, minlength=len(self.weights))

    @property
    def column_weights(self) -> np.ndarray:
        """Weight of every basis column, shape (dim, n_params)."""
        return self.weights[self.column_weight]

    def columns(self, index: int) -> np.ndarray:
        return np.flatnonzero(self.column_weight == index)

    def isometry(self, index: int) -> np.ndarray:
        return self.basis[:, self.columns(index)]

    def projector(self, index: int) -> np.ndarray:
        e = self.isometry(index)
        return e @ e.conj().T

    @property
    def projectors(self) -> list[np.ndarray]:
        return [self.projector(i) for i in range(len(self.weights))]

    def in_basis(self, op) -> np.ndarray:
        """Matrix of an operator in the weight-adapted basis."""
        return self.basis.conj().T @ op @ self.basis


def check_commuting(ops, tol: float = COMMUTATOR_TOL) -> float:
    worst = 0.0
    for a, b in itertools.combinations(ops, 2):
        worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    if worst > tol:
        raise NotAbelian(f"potential operators do not commute (commutator norm {worst:.3e})")
    return worst


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def simultaneous_eigenbasis(ops, dim: int, tol: float = WEIGHT_TOL):
    """Common eigenbasis of commuting Hermitian operators.

    Blocks are refined one operator at a time, so degenerate eigenspaces of
    earlier operators are split by later ones.  Returns the list of blocks
    (isometries) and the weight of each block.
    """
    blocks = [np.eye(dim, dtype=complex)]
    for op in ops:
        refined = []
        for q in blocks:
            sub = q.conj().T @ op @ q
            evals, evecs = np.linalg.eigh(0.5 * (sub + sub.conj().T))
            start = 0
            for i in range(1, len(evals) + 1):
                if i == len(evals) or evals[i] - evals[i - 1] > tol:
                    refined.append(q @ evecs[:, start:i])
                    start = i
        blocks = refined
    weights = []
    for q in blocks:
        weights.append([float(np.mean(np.einsum("ij,ik,kj->j", q.conj(), op, q).real)) for op in ops])
    return blocks, np.array(weights, dtype=float).reshape(len(blocks), len(ops))


def decompose_operators(ops, dim: int, tol: float = WEIGHT_TOL) -> WeightDecomposition:
    """Weight decomposition of a family of commuting Hermitian operators."""
    blocks, block_weights = simultaneous_eigenbasis(ops, dim, tol)
    # merge blocks that share a weight, then order weights descending
    order = sorted(range(len(blocks)), key=lambda i: tuple(-block_weights[i]))
    weights, groups = [], []
    for i in order:
        w = block_weights[i]
        if weights and np.max(np.abs(weights[-1] - w), initial=0.0) <= tol:
            groups[-1].append(i)
        else:
            weights.append(w)
            groups.append([i])
    cols, labels = [], []
    for k, group in enumerate(groups):
        for i in group:
            for j in range(blocks[i].shape[1]):
                cols.append(_fix_phase(blocks[i][:, j]))
                labels.append(k)
    basis = np.array(cols).T if cols else np.zeros((dim, 0), dtype=complex)
    weights = np.array(weights, dtype=float).reshape(len(weights), len(ops))
    wd = WeightDecomposition(weights, basis, np.array(labels, dtype=int))
    for a, op in enumerate(ops):
        resid = op @ basis - basis * wd.column_weights[:, a]
        if resid.size and np.max(np.abs(resid)) > 1e-9 * max(1.0, np.max(np.abs(op))):
            raise NotSimultaneouslyDiagonalizable("operators are not simultaneously diagonalizable")
    return wd


def weight_decomposition(theory: FunctionalTheory) -> WeightDecomposition:
    """Simultaneous diagonalization of the potential basis."""
    check_commuting(theory.potential_basis)
    try:
        return decompose_operators(theory.potential_basis, theory.hilbert_dim)
    except NotSimultaneouslyDiagonalizable as exc:
        raise NotAbelian(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class FacetInequality:
    """Half-space D(rho) = <rho, S> - nu >= 0.

    ``lattice`` optionally stores an exact primitive integer normal and
    offset ``(n, nu_int)`` describing the same hyperplane.
    """

    S: np.ndarray
    nu: float
    normalized: bool = True
    lattice: tuple | None = None

    def D(self, rho):
        return np.asarray(rho, dtype=float) @ self.S - self.nu

    def scaled(self, factor: float) -> "FacetInequality":
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return FacetInequality(self.S * factor, self.nu * factor, factor == 1.0 and self.normalized, self.lattice)

    def renormalized(self, offset, tangent) -> "FacetInequality":
        """Tangent, unit-norm form on the affine hull offset + span(tangent)."""
        s = np.asarray(self.S, dtype=float)
        p = tangent @ (tangent.T @ s)
        nu = self.nu - (s - p) @ offset
        norm = np.linalg.norm(p)
        if norm == 0:
            raise EmptyFacet("inequality is constant on the affine hull")
        return FacetInequality(p / norm, nu / norm, True, self.lattice)

    def to_dict(self) -> dict:
        return {"S": [float(x) for x in self.S], "nu": float(self.nu)}


@dataclass(frozen=True, eq=False)
class Polytope:
    """Vertex and inequality description inside an affine hull."""

    ambient_dim: int
    vertices: np.ndarray
    inequalities: tuple
    offset: np.ndarray
    tangent: np.ndarray

    @property
    def dim(self) -> int:
        return self.tangent.shape[1]

    def affine_residual(self, rho) -> float:
        d = np.asarray(rho, dtype=float) - self.offset
        return float(np.linalg.norm(d - self.tangent @ (self.tangent.T @ d)))

    def margin(self, rho) -> float:
        """Smallest inequality slack (inf for polytopes without facets)."""
        if not self.inequalities:
            return math.inf
        return float(min(f.D(rho) for f in self.inequalities))

    def contains(self, rho, tol: float = 1e-9) -> bool:
        if self.affine_residual(rho) > tol:
            return False
        if not self.inequalities:
            return bool(np.linalg.norm(np.asarray(rho) - self.vertices[0]) <= tol)
        return self.margin(rho) >= -tol

    def tight(self, rho, tol: float = 1e-9) -> list[int]:
        return [i for i, f in enumerate(self.inequalities) if abs(f.D(rho)) <= tol]

    def to_dict(self) -> dict:
        return {
            "vertices": [[float(x) for x in v] for v in self.vertices],
            "inequalities": [f.to_dict() for f in self.inequalities],
        }


def affine_hull(points: np.ndarray, tol: float = 1e-9):
    points = np.asarray(points, dtype=float)
    offset = points[0].copy()
    diffs = points - offset
    if len(points) == 1 or not np.any(diffs):
        return offset, np.zeros((points.shape[1], 0))
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return offset, vt[:rank].T


def _is_integral(points: np.ndarray) -> bool:
    return bool(np.all(np.abs(points - np.round(points)) <= 1e-9))


def _lattice_form(S: np.ndarray, points: np.ndarray, tangent: np.ndarray):
    """Exact primitive integer normal for a facet of an integral polytope.

    The float normal is rationalized and then checked in integer arithmetic;
    returns None if the check fails.
    """
    big = np.max(np.abs(S))
    ratios = [Fraction(float(x / big)).limit_denominator(10_000) for x in S]
    lcm = math.lcm(*(r.denominator for r in ratios))
    n = [int(r * lcm) for r in ratios]
    g = math.gcd(*n)
    n = [x // g for x in n]
    nv = np.array(n, dtype=float)
    if np.linalg.norm(nv - tangent @ (tangent.T @ nv)) > 1e-9 * np.linalg.norm(nv):
        return None
    ints = np.round(points).astype(np.int64)
    vals = [sum(a * int(b) for a, b in zip(n, p)) for p in ints]
    nu = min(vals)
    on = [p for p, v in zip(points, vals) if v == nu]
    if len(on) < tangent.shape[1]:
        return None
    return tuple(n), nu


def hull_of_points(points, tol: float = FACET_MERGE_TOL) -> Polytope:
    """Convex hull in vertex and normalized inequality form."""
    points = np.unique(np.asarray(points, dtype=float), axis=0)[::-1]
    ambient = points.shape[1]
    offset, tangent = affine_hull(points)
    r = tangent.shape[1]
    if r == 0:
        return Polytope(ambient, points[:1].copy(), (), offset, tangent)
    coords = (points - offset) @ tangent
    raw = []
    if r == 1:
        t = tangent[:, 0]
        lo, hi = int(np.argmin(coords[:, 0])), int(np.argmax(coords[:, 0]))
        raw.append((t, float(t @ points[lo])))
        raw.append((-t, float(-t @ points[hi])))
    else:
        hull = ConvexHull(coords)
        seen = []
        for eq in hull.equations:
            normal, b = eq[:-1], eq[-1]
            if any(np.max(np.abs(normal - other)) <= tol for other in seen):
                continue
            seen.append(normal)
            S = -tangent @ normal
            raw.append((S, float(S @ offset + b)))
    integral = _is_integral(points)
    ineqs = []
    for S, nu in raw:
        lattice = _lattice_form(S, points, tangent) if integral else None
        if lattice is not None:
            n = np.array(lattice[0], dtype=float)
            norm = np.linalg.norm(n)
            S, nu = n / norm, lattice[1] / norm
        ineqs.append(FacetInequality(np.asarray(S, dtype=float), float(nu), True, lattice))
    scale = max(1.0, float(np.max(np.abs(points))))
    vertex_mask = []
    for p in points:
        tight = [f for f in ineqs if abs(f.D(p)) <= tol * scale]
        vertex_mask.append(_is_vertex(p, tight, tangent))
    vertices = points[np.array(vertex_mask)]
    return Polytope(ambient, vertices, tuple(ineqs), offset, tangent)


def _is_vertex(p, tight, tangent) -> bool:
    r = tangent.shape[1]
    if len(tight) < r:
        return False
    normals = np.array([tangent.T @ f.S for f in tight])
    return np.linalg.matrix_rank(normals, tol=1e-9) == r


def representable_polytope(wd: WeightDecomposition) -> Polytope:
    """conv of the weights, the pure and ensemble representable set."""
    if len(wd.weights) == 0:
        raise DegeneratePolytope("no weights")
    return hull_of_points(wd.weights)


def facet_weights(wd: WeightDecomposition, facet: FacetInequality, tol: float = 1e-9) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(wd.weights), initial=0.0)))
    return np.flatnonzero(np.abs(facet.D(wd.weights)) <= tol * scale)


def facet_isometry(wd: WeightDecomposition, facet: FacetInequality):
    """Isometry onto the direct sum of weight spaces on the facet hyperplane."""
    on = facet_weights(wd, facet)
    if len(on) == 0:
        raise EmptyFacet("no weight lies on the facet hyperplane")
    if np.min(facet.D(wd.weights)) < -1e-7:
        raise EmptyFacet("inequality is violated by some weight")
    cols = np.flatnonzero(np.isin(wd.column_weight, on))
    return wd.basis[:, cols], cols


def facet_theory(theory: FunctionalTheory, wd: WeightDecomposition, facet: FacetInequality) -> FunctionalTheory:
    """Restricted theory on the facet Hilbert space.

    The compressed potentials may be linearly dependent (for example an
    operator that vanishes on the facet), so no independence check is made.
    """
    if len(wd.weights) < 2:
        raise EmptyFacet("a point polytope has no facets")
    iso, _ = facet_isometry(wd, facet)
    ops = []
    for b in theory.potential_basis:
        c = iso.conj().T @ b @ iso
        c = 0.5 * (c + c.conj().T)
        c.setflags(write=False)
        ops.append(c)
    w = iso.conj().T @ theory.interaction @ iso
    w = 0.5 * (w + w.conj().T)
    w.setflags(write=False)
    return FunctionalTheory(tuple(ops), w, theory.labels)


_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def in_convex_hull(points, rho, tol: float = 1e-9) -> bool:
    points = np.asarray(points, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = len(points)
    a_eq = np.vstack([points.T, np.ones(n)])
    b_eq = np.concatenate([rho, [1.0]])
    res = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs", options=_LP_OPTS)
    if res.status != 0:
        return False
    return bool(np.linalg.norm(a_eq @ res.x - b_eq) <= max(tol, 1e-8) * max(1.0, np.linalg.norm(b_eq)))


def is_representable(wd: WeightDecomposition, rho, tol: float = 1e-9) -> bool:
    return in_convex_hull(wd.weights, rho, tol)


def polytope_dim(wd: WeightDecomposition) -> int:
    return affine_hull(wd.weights)[1].shape[1]


def is_critical_value(wd: WeightDecomposition, rho, tol: float = 1e-9) -> bool:
    """True iff rho lies in the convex hull of dim conv(Omega) weights."""
    rho = np.asarray(rho, dtype=float)
    if not is_representable(wd, rho, tol):
        raise NotRepresentable("density is outside the convex hull of the weights")
    r = polytope_dim(wd)
    if r == 0:
        return True
    n = len(wd.weights)
    if math.comb(n, r) > MAX_SUBSETS:
        raise Unsupported(f"C({n}, {r}) weight subsets exceed the enumeration cap")
    for subset in itertools.combinations(range(n), r):
        if in_convex_hull(wd.weights[list(subset)], rho, tol):
            return True
    return False


def classical_density(wd: WeightDecomposition, y) -> np.ndarray:
    """Classical density map y -> sum_i y_i omega(i)."""
    return np.asarray(y, dtype=float) @ wd.column_weights


def state_from_classical(wd: WeightDecomposition, y, phases=None) -> QuantumState:
    """Pure state sum_i xi_i sqrt(y_i) E_i."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, None)
    amps = np.sqrt(y).astype(complex)
    if phases is not None:
        amps = amps * np.exp(1j * np.asarray(phases, dtype=float))
    return QuantumState.pure(wd.basis @ amps, normalize=True)


def classical_fiber_point(wd: WeightDecomposition, rho) -> np.ndarray:
    """A classical state y with A(y) = rho, strictly positive when possible."""
    rho = np.asarray(rho, dtype=float)
    cw = wd.column_weights
    n = cw.shape[0]
    a_eq = np.hstack([np.vstack([cw.T, np.ones(n)]), np.zeros((cw.shape[1] + 1, 1))])
    b_eq = np.concatenate([rho, [1.0]])
    # y_i - t >= 0 for all i, maximize t
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(0, None)] * n + [(0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=_LP_OPTS)
    if res.status != 0:
        raise NotRepresentable("density is not in the image of the classical density map")
    y = res.x[:n]
    # polish onto the affine constraints, keeping the support
    support = y > 1e-14
    m = np.vstack([cw.T, np.ones(n)])[:, support]
    corr, *_ = np.linalg.lstsq(m, b_eq - m @ y[support], rcond=None)
    y_new = y.copy()
    y_new[support] += corr
    if np.min(y_new) >= 0:
        y = y_new
    if np.linalg.norm(np.vstack([cw.T, np.ones(n)]) @ y - b_eq) > 1e-9 * max(1.0, np.linalg.norm(b_eq)):
        raise NotRepresentable("density is not in the image of the classical density map")
    return y


def weights_table(wd: WeightDecomposition) -> list[list[float]]:
    """Rows (weight components..., multiplicity)."""
    return [list(map(float, w)) + [int(m)] for w, m in zip(wd.weights, wd.multiplicities)]
