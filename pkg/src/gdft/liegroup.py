"""Momentum map theories for su(2) products and su(3).

A Lie theory uses the represented basis of i g as potentials: first the
Cartan generators H_a, then X_alpha and Y_alpha for every positive root.
Cartan coordinates of a density are rho_a = <H_a>.  The Cartan generators
are simple coroots, so the positive Weyl chamber is rho_a >= 0, and an
inequality is written sigma . rho >= c.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .abelian import (
    FacetInequality,
    Polytope,
    WeightDecomposition,
    affine_hull,
    decompose_operators,
    hull_of_points,
)
from .core import FunctionalTheory, QuantumState, as_hermitian, make_theory, parse_complex_matrix
from .errors import (
    ConfigParseError,
    NoCandidates,
    NotFullDimensional,
    NotNiceFacet,
    NotOnFacet,
    NotSimultaneouslyDiagonalizable,
    UnsupportedAlgebra,
)

RANK_CUTOFF = 1e-9
_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Represented generators and root data.

    ``raising[k]`` is tau(L+_alpha) for ``roots[k]``; the lowering operator
    is its adjoint.  ``defining`` holds the same basis of i g in a faithful
    matrix representation, used for chamber projection.
    """

    name: str
    cartan_basis: tuple
    roots: np.ndarray
    raising: tuple
    defining: tuple
    defining_blocks: tuple
    inner_product: np.ndarray = field(init=False)

    def __post_init__(self):
        gram = np.array([[np.trace(a @ b).real for b in self.defining] for a in self.defining])
        object.__setattr__(self, "inner_product", gram)

    @property
    def rank(self) -> int:
        return len(self.cartan_basis)

    @property
    def hilbert_dim(self) -> int:
        return self.cartan_basis[0].shape[0]

    @property
    def xy_generators(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(e + e.conj().T, -1j * e + 1j * e.conj().T) for e in self.raising]

    @property
    def potentials(self) -> list[np.ndarray]:
        out = list(self.cartan_basis)
        for x, y in self.xy_generators:
            out += [x, y]
        return out

    @property
    def labels(self) -> list[str]:
        out = [f"H{a}" for a in range(self.rank)]
        for k in range(len(self.roots)):
            out += [f"X{k}", f"Y{k}"]
        return out

    @property
    def weyl_chamber(self) -> list[FacetInequality]:
        return [FacetInequality(np.eye(self.rank)[a], 0.0) for a in range(self.rank)]

    def check(self, tol: float = 1e-9):
        """Verify the commutation relations of the root data."""
        for a, h in enumerate(self.cartan_basis):
            for h2 in self.cartan_basis:
                if np.max(np.abs(h @ h2 - h2 @ h), initial=0.0) > 1e-10:
                    raise NotSimultaneouslyDiagonalizable("Cartan generators do not commute")
            for alpha, e in zip(self.roots, self.raising):
                if np.max(np.abs(h @ e - e @ h - alpha[a] * e), initial=0.0) > tol:
                    raise UnsupportedAlgebra("raising operator is not a root vector")
        return self

    def cartan_coordinates(self, rho_full) -> np.ndarray:
        return np.asarray(rho_full, dtype=float)[: self.rank]


def spin_matrices(dim: int):
    """2 J_x, 2 J_y, 2 J_z and J_+ on the irrep of dimension ``dim``, m descending."""
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    jp = np.zeros((dim, dim))
    for i in range(1, dim):
        jp[i - 1, i] = math.sqrt((j - m[i]) * (j + m[i] + 1))
    jp = jp.astype(complex)
    jm = jp.conj().T
    return jp + jm, -1j * (jp - jm), np.diag(2 * m).astype(complex), jp


def _rotated(x, y, z, theta: float):
    """Frame (e1, e2, e0) with e0 = sin t X + cos t Z; right-handed like (X, Y, Z)."""
    s, c = math.sin(theta), math.cos(theta)
    return c * x - s * z, y, s * x + c * z


def su2_product(irreps, angles=None) -> LieAlgebraData:
    """su(2)^n acting on the tensor product of the given irreps.

    ``angles[k]`` rotates the Cartan axis of factor k about Y, so the Cartan
    generator becomes sin t X_k + cos t Z_k.
    """
    irreps = [int(d) for d in irreps]
    if not irreps or min(irreps) < 2:
        raise UnsupportedAlgebra("every su(2) factor needs an irrep of dimension >= 2")
    angles = [0.0] * len(irreps) if angles is None else [float(t) for t in angles]
    if len(angles) != len(irreps):
        raise UnsupportedAlgebra("one angle per su(2) factor")
    n = len(irreps)

    def embed(op, k):
        mats = [np.eye(d, dtype=complex) for d in irreps]
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    cartan, raising, def_cartan, def_xy = [], [], [], []
    for k, (d, t) in enumerate(zip(irreps, angles)):
        x, y, z, _ = spin_matrices(d)
        e1, e2, e0 = _rotated(x, y, z, t)
        cartan.append(embed(e0, k))
        raising.append(embed((e1 + 1j * e2) / 2, k))
        px, py, pz, _ = spin_matrices(2)
        f1, f2, f0 = _rotated(px, py, pz, t)
        blk = lambda op: np.kron(np.diag(np.eye(n)[k]), op)
        def_cartan.append(blk(f0))
        def_xy += [blk(f1), blk(f2)]
    roots = 2 * np.eye(n)
    name = "su2^" + str(n) + "(" + ",".join(map(str, irreps)) + ")"
    blocks = tuple((2 * k, 2 * k + 2) for k in range(n))
    return LieAlgebraData(name, tuple(cartan), roots, tuple(raising), tuple(def_cartan + def_xy), blocks).check()


def _unit(i, j, n=3):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1
    return e


def su3_adjoint() -> LieAlgebraData:
    """Adjoint action of sl(3) on itself with an orthonormal basis.

    Cartan generators Z = diag(1,-1,0) and Z' = diag(0,1,-1); positive roots
    E12 -> (2,-1), E23 -> (-1,2), E13 -> (1,1).
    """
    basis = [_unit(i, j) for i in range(3) for j in range(3) if i != j]
    basis += [np.diag([1, -1, 0]).astype(complex) / math.sqrt(2), np.diag([1, 1, -2]).astype(complex) / math.sqrt(6)]

    def ad(a):
        return np.array([[np.trace(bk.conj().T @ (a @ bl - bl @ a)) for bl in basis] for bk in basis])

    z1 = np.diag([1, -1, 0]).astype(complex)
    z2 = np.diag([0, 1, -1]).astype(complex)
    pos = [(0, 1), (1, 2), (0, 2)]
    raising = [ad(_unit(i, j)) for i, j in pos]
    roots = np.array([[2, -1], [-1, 2], [1, 1]], dtype=float)
    def_xy = []
    for i, j in pos:
        e = _unit(i, j)
        def_xy += [e + e.T, -1j * e + 1j * e.T]
    return LieAlgebraData(
        "su3_adjoint", (ad(z1), ad(z2)), roots, tuple(raising), (z1, z2, *def_xy), ((0, 3),)
    ).check()


def builtin_algebra(spec) -> LieAlgebraData:
    if not isinstance(spec, dict):
        raise UnsupportedAlgebra(f"unknown algebra {spec!r}")
    if spec.get("su3_adjoint"):
        return su3_adjoint()
    if "su2_product" in spec:
        n = int(spec["su2_product"])
        irreps = spec.get("irreps", [2] * n)
        if len(irreps) != n:
            raise UnsupportedAlgebra("irreps must list one dimension per factor")
        return su2_product(irreps, spec.get("angles"))
    raise UnsupportedAlgebra(f"unknown algebra {spec!r}")


def momentum_theory(alg: LieAlgebraData, interaction=None) -> FunctionalTheory:
    return make_theory(alg.potentials, interaction, alg.labels)


def dimer_algebra(n: int, theta: float = 0.0) -> LieAlgebraData:
    return su2_product([n + 1], [theta])


def dimer_interaction(n: int) -> np.ndarray:
    """n1^2 + n2^2 on |m, N-m>, m = N..0, which is (N^2 + Z^2) / 2."""
    m = np.arange(n, -1, -1)
    return np.diag(m**2 + (n - m) ** 2).astype(complex)


def dimer_theory(n: int, theta: float = 0.0) -> FunctionalTheory:
    """Bosonic Hubbard dimer on Sym^N C^2 with the Cartan axis at angle theta."""
    if n < 1:
        raise ConfigParseError("dimer needs N >= 1")
    return momentum_theory(dimer_algebra(n, theta), dimer_interaction(n))


def two_three_interaction(u1, u2, u3, k1, k3) -> np.ndarray:
    """Interaction on C^2 (x) C^3 in the basis |s, m>, s in (1,-1), m in (2,0,-2)."""
    idx = {(s, m): 3 * a + b for a, s in enumerate((1, -1)) for b, m in enumerate((2, 0, -2))}
    w = np.zeros((6, 6), dtype=complex)

    def put(p, q, val):
        w[idx[p], idx[q]] += val
        if p != q:
            w[idx[q], idx[p]] += np.conj(val)

    put((1, 2), (-1, 2), u1)
    put((1, 0), (-1, 0), u2)
    put((1, -2), (-1, -2), u3)
    put((1, 2), (1, 2), k1)
    put((1, -2), (1, -2), k3)
    put((1, 2), (1, 0), 1.0)
    put((1, -2), (1, 0), 1.0)
    return w


def two_three_theory(u1=1.0, u2=0.3, u3=-0.5, k1=0.2, k3=-0.1):
    alg = su2_product([2, 3])
    return alg, momentum_theory(alg, two_three_interaction(u1, u2, u3, k1, k3))


def algebra_from_config(config: dict) -> LieAlgebraData:
    if config.get("kind") == "dimer":
        return dimer_algebra(int(config["N"]), float(config.get("theta", 0.0)))
    if "algebra" not in config:
        raise ConfigParseError("lie config needs an 'algebra' field")
    return builtin_algebra(config["algebra"])


def lie_theory_from_config(config: dict) -> FunctionalTheory:
    alg = algebra_from_config(config)
    inter = config.get("interaction")
    if inter is None:
        w = None
    elif isinstance(inter, dict) and "two_three" in inter:
        if alg.hilbert_dim != 6:
            raise ConfigParseError("two_three interaction needs the su2 product with irreps (2, 3)")
        p = inter["two_three"]
        w = two_three_interaction(*(float(p[k]) for k in ("u1", "u2", "u3", "k1", "k3")))
    else:
        w = parse_complex_matrix(inter, "interaction")
    return momentum_theory(alg, w)


def rep_weights(alg: LieAlgebraData) -> WeightDecomposition:
    return decompose_operators(alg.cartan_basis, alg.hilbert_dim)


def chamber_projection(alg: LieAlgebraData, rho_full) -> np.ndarray:
    """Cartan coordinates of the Weyl-chamber representative of a density."""
    rho_full = np.asarray(rho_full, dtype=float)
    coef = np.linalg.solve(alg.inner_product, rho_full)
    m = sum(c * d for c, d in zip(coef, alg.defining))
    out = np.zeros(alg.rank)
    for lo, hi in alg.defining_blocks:
        blk = m[lo:hi, lo:hi]
        hs = [d[lo:hi, lo:hi] for d in alg.defining[: alg.rank]]
        _, vecs = np.linalg.eigh(sum((k + 1.3) * h for k, h in enumerate(hs)))
        evals = np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))
        hdiag = np.array([np.real(np.diag(vecs.conj().T @ h @ vecs)) for h in hs])
        best = None
        # try every placement of the spectrum on the Cartan eigenbasis
        for perm in itertools.permutations(range(len(evals))):
            e = evals[list(perm)]
            coords = hdiag @ e
            relevant = np.any(np.abs(hdiag) > 1e-12, axis=1)
            score = np.min(coords[relevant], initial=0.0)
            if best is None or score > best[0] + 1e-12:
                best = (score, coords)
        out += best[1]
    return out


def density_from_state(alg: LieAlgebraData, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.array([np.vdot(psi, p @ psi).real for p in alg.potentials])


@dataclass(frozen=True)
class KirwanInequality:
    sigma: tuple
    c: float
    n_minus: int
    h_less: int
    witness_ranks: tuple = ()
    verdict: str = ""

    @property
    def trivial(self) -> bool:
        return self.n_minus == 0 and self.h_less == 0

    def as_facet(self) -> FacetInequality:
        return FacetInequality(np.array(self.sigma, dtype=float), float(self.c), normalized=False)

    def to_dict(self) -> dict:
        return {
            "sigma": [float(s) for s in self.sigma],
            "c": float(self.c),
            "dim_n_minus": self.n_minus,
            "dim_H_less": self.h_less,
            "verdict": self.verdict,
            "witness_ranks": list(self.witness_ranks),
        }


@dataclass(frozen=True, eq=False)
class KirwanResult:
    polytope: Polytope
    accepted_inequalities: tuple
    rejected_inequalities: tuple
    reported_inequalities: tuple

    def to_dict(self) -> dict:
        return {
            "polytope": self.polytope.to_dict(),
            "inequalities": [k.to_dict() for k in self.reported_inequalities],
            "accepted": [k.to_dict() for k in self.accepted_inequalities],
            "rejected": [k.to_dict() for k in self.rejected_inequalities],
        }


def _primitive(normal: np.ndarray) -> tuple[int, ...] | None:
    big = np.max(np.abs(normal))
    ratios = [Fraction(float(x / big)).limit_denominator(1000) for x in normal]
    lcm = math.lcm(*(r.denominator for r in ratios))
    ints = [int(r * lcm) for r in ratios]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    if np.linalg.norm(np.array(ints) / np.linalg.norm(ints) - normal / np.linalg.norm(normal)) > 1e-9:
        return None
    return tuple(ints)


def _candidate_hyperplanes(weights: np.ndarray) -> list[tuple[tuple[int, ...], int]]:
    """Primitive (sigma, c) for hyperplanes spanned by ``rank`` weights."""
    r = weights.shape[1]
    out = set()
    for subset in itertools.combinations(range(len(weights)), r):
        pts = weights[list(subset)]
        diffs = pts[1:] - pts[0]
        if r == 1:
            normal = np.array([1.0])
        else:
            _, s, vt = np.linalg.svd(diffs)
            if np.sum(s > 1e-9) != r - 1:
                continue
            normal = vt[-1]
        prim = _primitive(normal)
        if prim is None:
            continue
        c = float(np.array(prim) @ pts[0])
        if abs(c - round(c)) > 1e-9:
            continue
        c = int(round(c))
        for sign in (1, -1):
            out.add((tuple(sign * x for x in prim), sign * c))
    return sorted(out)


def _meets_open_chamber(sigma, c) -> bool:
    r = len(sigma)
    # maximize t subject to rho_a >= t, sigma . rho = c, t <= 1
    cost = np.zeros(r + 1)
    cost[-1] = -1
    a_ub = np.hstack([-np.eye(r), np.ones((r, 1))])
    a_eq = np.concatenate([np.asarray(sigma, dtype=float), [0.0]])[None]
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(r), A_eq=a_eq, b_eq=[c],
                  bounds=[(None, None)] * r + [(None, 1.0)], method="highs", options=_LP_OPTS)
    return res.status == 0 and -res.fun > 1e-9


def _witness_ranks(alg, wd, sigma, c, k, seed):
    sig = np.asarray(sigma, dtype=float)
    vals = wd.column_weights @ sig
    eq_cols = wd.basis[:, np.abs(vals - c) <= 1e-9]
    less_cols = wd.basis[:, vals < c - 1e-9]
    lowering = [e.conj().T for alpha, e in zip(alg.roots, alg.raising) if alpha @ sig > 1e-9]
    rng = np.random.default_rng([seed, abs(hash(tuple(sigma))) % (2**31), int(c) % (2**31)])
    ranks = []
    for _ in range(k):
        z = rng.normal(size=eq_cols.shape[1]) + 1j * rng.normal(size=eq_cols.shape[1])
        psi = eq_cols @ z
        mat = np.array([less_cols.conj().T @ (lo @ psi) for lo in lowering]).T
        s = np.linalg.svd(mat, compute_uv=False)
        ranks.append(int(np.sum(s > RANK_CUTOFF * max(1.0, s[0] if len(s) else 1.0))))
    return ranks


def _implied(sigma, c, system) -> bool:
    """Whether sigma . rho >= c holds on {rho >= 0} intersected with ``system``."""
    r = len(sigma)
    a_ub = [-np.asarray(s, dtype=float) for s, _ in system]
    b_ub = [-float(cc) for _, cc in system]
    res = linprog(np.asarray(sigma, dtype=float), A_ub=np.array(a_ub).reshape(len(a_ub), r) if a_ub else None,
                  b_ub=b_ub or None, bounds=[(0, None)] * r, method="highs", options=_LP_OPTS)
    return res.status == 0 and res.fun >= c - 1e-9


def _check_full_dimensional(alg, wd, seed=0, samples=64):
    rng = np.random.default_rng([seed, 7])
    pts = [chamber_projection(alg, density_from_state(alg, wd.basis[:, i])) for i in range(wd.basis.shape[1])]
    for _ in range(samples):
        psi = rng.normal(size=alg.hilbert_dim) + 1j * rng.normal(size=alg.hilbert_dim)
        psi /= np.linalg.norm(psi)
        pts.append(chamber_projection(alg, density_from_state(alg, psi)))
    if affine_hull(np.array(pts), tol=1e-7)[1].shape[1] < alg.rank:
        raise NotFullDimensional("the chamber image is not full dimensional")


def _polytope_from_halfspaces(ineqs, rank) -> Polytope:
    """Bounded polytope {sigma . rho >= c} in vertex and facet form."""
    sig = np.array([s for s, _ in ineqs], dtype=float)
    cs = np.array([c for _, c in ineqs], dtype=float)
    if rank == 1:
        lo = max((cc / s[0] for s, cc in zip(sig, cs) if s[0] > 0), default=-np.inf)
        hi = min((cc / s[0] for s, cc in zip(sig, cs) if s[0] < 0), default=np.inf)
        if not np.isfinite(lo) or not np.isfinite(hi) or hi < lo:
            raise NotFullDimensional("the Kirwan polytope is unbounded or empty")
        return hull_of_points(np.array([[lo], [hi]]))
    # Chebyshev center for an interior point
    norms = np.linalg.norm(sig, axis=1)
    cost = np.zeros(rank + 1)
    cost[-1] = -1
    res = linprog(cost, A_ub=np.hstack([-sig, norms[:, None]]), b_ub=-cs,
                  bounds=[(None, None)] * rank + [(0, None)], method="highs", options=_LP_OPTS)
    if res.status != 0 or res.x[-1] <= 1e-9:
        raise NotFullDimensional("the Kirwan polytope is unbounded or has empty interior")
    hs = HalfspaceIntersection(np.hstack([-sig, cs[:, None]]), res.x[:rank])
    return hull_of_points(np.round(hs.intersections, 12))


def kirwan_polytope(alg: LieAlgebraData, k: int = 8, seed: int = 0) -> KirwanResult:
    """Screen weight hyperplanes for the inequalities cutting out the Kirwan polytope."""
    wd = rep_weights(alg)
    _check_full_dimensional(alg, wd, seed)
    candidates = _candidate_hyperplanes(wd.weights)
    mult = wd.multiplicities
    accepted, rejected = [], []
    for sigma, c in candidates:
        if not _meets_open_chamber(sigma, c):
            continue
        sig = np.array(sigma, dtype=float)
        n_minus = int(np.sum(alg.roots @ sig > 1e-9))
        h_less = int(np.sum(mult[wd.weights @ sig < c - 1e-9]))
        if n_minus != h_less:
            rejected.append(KirwanInequality(sigma, c, n_minus, h_less, (), "dimension mismatch"))
            continue
        if n_minus == 0:
            accepted.append(KirwanInequality(sigma, c, 0, 0, (), "accepted"))
            continue
        kk, ranks = k, []
        for _ in range(3):
            ranks = _witness_ranks(alg, wd, sigma, c, kk, seed)
            if len(set(ranks)) == 1:
                break
            kk *= 2
        if max(ranks) == n_minus:
            accepted.append(KirwanInequality(sigma, c, n_minus, h_less, tuple(ranks), "accepted"))
        else:
            rejected.append(KirwanInequality(sigma, c, n_minus, h_less, tuple(ranks), "not an isomorphism"))
    if not accepted:
        raise NoCandidates("no candidate inequality passed the screening")
    trivial = [q for q in accepted if q.trivial]
    nontrivial = [q for q in accepted if not q.trivial]
    base = [(q.sigma, q.c) for q in trivial]
    kept_n = [q for q in nontrivial if not _implied(q.sigma, q.c, base)]
    kept_t = [q for q in trivial if not _implied(q.sigma, q.c, [(p.sigma, p.c) for p in kept_n])]
    reported = tuple(sorted(kept_n + kept_t, key=lambda q: (q.sigma, q.c)))
    chamber = [(tuple(np.eye(alg.rank, dtype=int)[a]), 0) for a in range(alg.rank)]
    poly = _polytope_from_halfspaces([(q.sigma, q.c) for q in accepted] + chamber, alg.rank)
    return KirwanResult(poly, tuple(accepted), tuple(rejected), reported)


@dataclass(frozen=True)
class ClassifiedFacet:
    sigma: tuple
    c: float
    kind: str

    def to_dict(self) -> dict:
        return {"sigma": [float(s) for s in self.sigma], "c": float(self.c), "class": self.kind}


def _facet_primitive(f: FacetInequality):
    prim = _primitive(f.S)
    if prim is None:
        return tuple(f.S), float(f.nu)
    scale = np.linalg.norm(prim) / np.linalg.norm(f.S)
    return prim, float(round(f.nu * scale, 9))


def classify_facets(kirwan: KirwanResult, weights: WeightDecomposition) -> list[ClassifiedFacet]:
    """Split the facets of the Kirwan polytope into trivial, nice and other."""
    poly = kirwan.polytope
    out = []
    for f in poly.inequalities:
        sigma, c = _facet_primitive(f)
        verts = [v for v in poly.vertices if abs(f.D(v)) <= 1e-9]
        walls = [a for a in range(poly.ambient_dim) if all(abs(v[a]) <= 1e-9 for v in verts)]
        if walls:
            kind = "trivial"
        elif abs(float(np.min(weights.weights @ np.asarray(sigma, dtype=float))) - c) <= 1e-9:
            kind = "nice"
        else:
            kind = "other"
        out.append(ClassifiedFacet(tuple(sigma), c, kind))
    return out


@dataclass(frozen=True, eq=False)
class NonabelianFacet:
    theory: FunctionalTheory
    isometry: np.ndarray
    parallel_roots: tuple
    nonparallel_roots: tuple
    potential_index: tuple
    sigma: np.ndarray
    c: float


def _check_nice(alg, wd, sigma, c):
    vals = wd.weights @ sigma
    if abs(np.min(vals) - c) > 1e-9:
        raise NotNiceFacet("the hyperplane does not support the convex hull of the weights")
    on = wd.weights[np.abs(vals - c) <= 1e-9]
    if alg.rank > 1 and affine_hull(on)[1].shape[1] != alg.rank - 1:
        raise NotNiceFacet("the hyperplane meets the weights in less than a facet")


def facet_theory_nonabelian(alg: LieAlgebraData, theory: FunctionalTheory, sigma, c) -> NonabelianFacet:
    """Restriction to the weight spaces on a nice facet hyperplane.

    The potentials are the Cartan generators and the X, Y generators of the
    roots with <alpha, S> = 0; ``potential_index`` locates them in the full
    potential list.
    """
    sigma = np.asarray(sigma, dtype=float)
    wd = rep_weights(alg)
    _check_nice(alg, wd, sigma, c)
    cols = np.abs(wd.column_weights @ sigma - c) <= 1e-9
    iso = wd.basis[:, cols]
    par = tuple(k for k, a in enumerate(alg.roots) if abs(a @ sigma) <= 1e-9)
    nonpar = tuple(k for k in range(len(alg.roots)) if k not in par)
    index = list(range(alg.rank))
    for k in par:
        index += [alg.rank + 2 * k, alg.rank + 2 * k + 1]
    ops = []
    for i in index:
        o = iso.conj().T @ theory.potential_basis[i] @ iso
        o = 0.5 * (o + o.conj().T)
        o.setflags(write=False)
        ops.append(o)
    w = iso.conj().T @ theory.interaction @ iso
    w = 0.5 * (w + w.conj().T)
    w.setflags(write=False)
    labels = tuple(theory.labels[i] for i in index) if theory.labels else ()
    restricted = FunctionalTheory(tuple(ops), w, labels)
    return NonabelianFacet(restricted, iso, par, nonpar, tuple(index), sigma, float(c))


@dataclass(frozen=True)
class SelectionRuleReport:
    residual: float
    facet_residual: float
    passed: bool


def selection_rule_check(alg: LieAlgebraData, sigma, c, psi: QuantumState, tol: float = 1e-7) -> SelectionRuleReport:
    """Residual of (tau(S) - c) psi for a state whose density is on the facet."""
    sigma = np.asarray(sigma, dtype=float)
    phi = psi.amplitudes
    rho = density_from_state(alg, phi)
    cart = alg.cartan_coordinates(rho)
    off = float(cart @ sigma - c)
    if abs(off) > 1e-8:
        raise NotOnFacet(f"density is {off:.3e} away from the facet")
    if np.min(cart) <= 1e-12:
        raise NotOnFacet("density is not in the open Weyl chamber")
    s_op = sum(s * h for s, h in zip(sigma, alg.cartan_basis))
    resid = float(np.linalg.norm(s_op @ phi - c * phi))
    return SelectionRuleReport(resid, off, resid <= tol)
