"""Boundary force prefactors and their finite-difference check.

Near a facet D(rho) = <rho, S> - nu >= 0 the pure functional behaves as
F(rho* + eps eta) = F(rho*) - G sqrt(eps) + o(sqrt(eps)) with <eta, S> = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .abelian import (
    FacetInequality,
    WeightDecomposition,
    facet_isometry,
    facet_theory,
    is_critical_value,
    weight_decomposition,
)
from .core import FunctionalTheory, QuantumState, density_of_state
from .errors import CriticalFacetPoint, NotSimplexSetting, ZeroDenominator
from .search import SearchOptions, pure_functional

DEFAULT_EPS = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)
FACET_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BoundaryForceQuery:
    """Facet, base point and inward direction, scaled so that <eta, S> = 1."""

    facet: FacetInequality
    rho_star: np.ndarray
    eta: np.ndarray
    gamma: np.ndarray


def make_query(facet: FacetInequality, rho_star, eta, gamma=None) -> BoundaryForceQuery:
    rho_star = np.asarray(rho_star, dtype=float)
    eta = np.asarray(eta, dtype=float)
    pairing = float(eta @ facet.S)
    if pairing <= 0:
        raise ValueError("eta must point into the half-space (<eta, S> > 0)")
    facet = facet.scaled(1.0 / pairing)
    gamma = rho_star.copy() if gamma is None else np.asarray(gamma, dtype=float)
    scale = max(1.0, float(np.max(np.abs(rho_star))))
    if abs(facet.D(rho_star)) > FACET_TOL * scale:
        raise ValueError(f"rho_star is {facet.D(rho_star):.3e} away from the facet")
    if abs(facet.D(gamma)) > FACET_TOL * scale:
        raise ValueError("gamma must lie on the facet hyperplane")
    return BoundaryForceQuery(facet, rho_star, eta, gamma)


@dataclass(frozen=True, eq=False)
class BoundaryForceResult:
    G: float
    contributions: tuple
    minimizer_used: QuantumState
    first_order: np.ndarray
    G_candidates: tuple = ()
    optimal_v: np.ndarray | None = None
    notes: tuple = field(default=())

    @property
    def G_spread(self) -> float:
        return float(np.ptp(self.G_candidates)) if len(self.G_candidates) else 0.0

    def to_dict(self) -> dict:
        return {
            "G_formula": self.G,
            "contributions": [{"omega": [float(x) for x in w], "value": float(v)} for w, v in self.contributions],
            "G_candidates": [float(g) for g in self.G_candidates],
            "notes": list(self.notes),
        }


def _candidate_states(phi) -> list[QuantumState]:
    if phi is None:
        return []
    if isinstance(phi, QuantumState):
        return [phi]
    return list(phi)


def _weight_terms(wd: WeightDecomposition, vecs, denominators):
    """sum over columns of |coefficient|^2 grouped by weight, divided by D."""
    out = []
    for i, w in enumerate(wd.weights):
        cols = wd.columns(i)
        if denominators[i] is None:
            continue
        out.append((w, float(np.sum(np.abs(vecs[cols]) ** 2) / denominators[i])))
    return out


def _denominators(wd: WeightDecomposition, dvals):
    """D(omega) for off-facet weights, None on the facet."""
    scale = max(1.0, float(np.max(np.abs(wd.weights))))
    out = []
    for d in dvals:
        if abs(d) <= FACET_TOL * scale:
            out.append(None)
        elif d < 0:
            raise ZeroDenominator("a weight lies on the wrong side of the facet")
        else:
            out.append(float(d))
    return out


def _first_order(wd: WeightDecomposition, coeffs, denominators) -> np.ndarray:
    """Off-facet part sum_omega Pi_omega V Phi / D(omega) in the original basis."""
    scaled = np.zeros_like(coeffs)
    for i, d in enumerate(denominators):
        if d is not None:
            cols = wd.columns(i)
            scaled[cols] = coeffs[cols] / d
    return wd.basis @ scaled


def facet_minimizers(theory: FunctionalTheory, wd: WeightDecomposition, query: BoundaryForceQuery,
                     opts: SearchOptions | None = None):
    """Constrained-search minimizers of the facet theory at rho_star."""
    ft = facet_theory(theory, wd, query.facet)
    result = pure_functional(ft, query.rho_star, opts)
    iso, _ = facet_isometry(wd, query.facet)
    return [QuantumState.pure(iso @ s.amplitudes, normalize=True) for s in result.candidates], ft, result


def abelian_boundary_force(theory: FunctionalTheory, wd: WeightDecomposition | None, query: BoundaryForceQuery,
                           phi=None, opts: SearchOptions | None = None) -> BoundaryForceResult:
    """G = 2 [sum_{omega off F} |Pi_omega W Phi|^2 / D(omega)]^(1/2).

    With several minimizers the largest G is returned; the per-candidate
    values are kept in ``G_candidates``.
    """
    wd = wd or weight_decomposition(theory)
    notes = []
    candidates = _candidate_states(phi)
    if not candidates:
        try:
            candidates, ft, _ = facet_minimizers(theory, wd, query, opts)
        except Exception as exc:
            raise CriticalFacetPoint(f"facet search failed: {exc}") from exc
        try:
            if is_critical_value(weight_decomposition(ft), query.rho_star):
                notes.append("rho_star is a critical value of the facet density map")
                warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        except Exception:
            pass
    denominators = _denominators(wd, query.facet.D(wd.weights) - query.facet.D(query.gamma))
    best = None
    gs = []
    for cand in candidates:
        coeffs = wd.basis.conj().T @ (theory.interaction @ cand.amplitudes)
        terms = _weight_terms(wd, coeffs, denominators)
        g = 2 * math.sqrt(sum(v for _, v in terms))
        gs.append(g)
        if best is None or g > best[0]:
            best = (g, terms, cand, _first_order(wd, coeffs, denominators))
    g, terms, cand, first = best
    return BoundaryForceResult(g, tuple(terms), cand, first, tuple(gs), None, tuple(notes))


def simplex_force(theory: FunctionalTheory, wd: WeightDecomposition, query: BoundaryForceQuery,
                  phi: QuantumState) -> float:
    """Single off-facet weight: G = 2 |<m|W|Phi>| / sqrt(L) with L = D(m)."""
    dvals = query.facet.D(wd.weights)
    off = [i for i, d in enumerate(dvals) if d > FACET_TOL]
    if len(off) != 1 or len(wd.columns(off[0])) != 1:
        raise NotSimplexSetting("exactly one off-facet weight of multiplicity one is required")
    col = wd.columns(off[0])[0]
    amp = np.vdot(wd.basis[:, col], theory.interaction @ phi.amplitudes)
    return float(2 * abs(amp) / math.sqrt(dvals[off[0]]))


def nonabelian_query(alg, sigma, c, rho_star_cartan, eta_cartan) -> BoundaryForceQuery:
    """Query in full density coordinates for a facet given in Cartan coordinates."""
    n_full = alg.rank + 2 * len(alg.roots)
    pad = lambda x: np.concatenate([np.asarray(x, dtype=float), np.zeros(n_full - alg.rank)])
    facet = FacetInequality(pad(sigma), float(c), normalized=False)
    return make_query(facet, pad(rho_star_cartan), pad(eta_cartan))


def nonabelian_boundary_force(alg, theory: FunctionalTheory, query: BoundaryForceQuery, phi=None,
                              opts: SearchOptions | None = None) -> BoundaryForceResult:
    """G = 2 min_v [sum_{omega off F} |Pi_omega (tau(v) + W) Phi|^2 / D(omega)]^(1/2).

    v ranges over the real span of X_alpha, Y_alpha with <alpha, S> != 0.
    The minimization is a real linear least-squares problem.
    """
    from .liegroup import facet_theory_nonabelian, rep_weights

    sigma = query.facet.S[: alg.rank]
    c = query.facet.nu
    nf = facet_theory_nonabelian(alg, theory, sigma, c)
    wd = rep_weights(alg)
    notes = []
    candidates = _candidate_states(phi)
    if not candidates:
        rho_f = query.rho_star[list(nf.potential_index)]
        res = pure_functional(nf.theory, rho_f, opts)
        candidates = [QuantumState.pure(nf.isometry @ s.amplitudes, normalize=True) for s in res.candidates]
    dvals = wd.weights @ sigma - c
    denominators = _denominators(wd, dvals)
    gens = []
    for k in nf.nonparallel_roots:
        gens += [theory.potential_basis[alg.rank + 2 * k], theory.potential_basis[alg.rank + 2 * k + 1]]
    off_cols = np.concatenate([wd.columns(i) for i, d in enumerate(denominators) if d is not None] or [np.zeros(0, int)])
    col_scale = np.zeros(wd.basis.shape[1])
    for i, d in enumerate(denominators):
        if d is not None:
            col_scale[wd.columns(i)] = 1 / math.sqrt(d)
    best = None
    gs = []
    for cand in candidates:
        psi = cand.amplitudes
        b = (wd.basis.conj().T @ (theory.interaction @ psi)) * col_scale
        if gens:
            a = np.array([(wd.basis.conj().T @ (g @ psi)) * col_scale for g in gens]).T
            a_r = np.vstack([a.real, a.imag])[np.concatenate([off_cols, off_cols + len(b)])]
            b_r = np.concatenate([b.real, b.imag])[np.concatenate([off_cols, off_cols + len(b)])]
            t, *_ = np.linalg.lstsq(a_r, -b_r, rcond=None)
        else:
            t = np.zeros(0)
        v_op = theory.interaction + sum(ti * g for ti, g in zip(t, gens))
        coeffs = wd.basis.conj().T @ (v_op @ psi)
        terms = _weight_terms(wd, coeffs, denominators)
        g = 2 * math.sqrt(sum(v for _, v in terms))
        gs.append(g)
        if best is None or g > best[0]:
            best = (g, terms, cand, _first_order(wd, coeffs, denominators), t)
    g, terms, cand, first, t = best
    return BoundaryForceResult(g, tuple(terms), cand, first, tuple(gs), t, tuple(notes))


@dataclass(frozen=True)
class FiniteDifferenceFit:
    G_fit: float
    intercept: float
    rms: float
    eps: tuple
    values: tuple
    model: str = "sqrt+linear"
    G_fit_sqrt: float = float("nan")
    linear: float = 0.0

    def to_dict(self) -> dict:
        return {
            "G_fit": self.G_fit,
            "intercept": self.intercept,
            "rms": self.rms,
            "model": self.model,
            "G_fit_sqrt": self.G_fit_sqrt,
            "linear": self.linear,
            "eps_points": [{"eps": e, "F": v} for e, v in zip(self.eps, self.values)],
        }

    def __iter__(self):
        return iter((self.G_fit, self.intercept, self.rms))


def ansatz_seeds(result: BoundaryForceResult, eps: float) -> list[np.ndarray]:
    """Phi - kappa chi with chi the first-order off-facet vector and kappa = 2 sqrt(eps) / G."""
    phi = result.minimizer_used.amplitudes
    if result.G <= 0:
        return [phi]
    kappa = 2 * math.sqrt(eps) / result.G
    seed = phi - kappa * result.first_order
    return [seed / np.linalg.norm(seed)]


def fit_sqrt_law(eps, values, linear_term: bool = False):
    """Weighted least squares of values against a - G sqrt(eps).

    Rows are scaled by 1/eps so the smallest eps dominate, where the square
    root law is most accurate.  ``linear_term`` adds b eps to the model.
    Returns (G, a, rms of the unweighted residuals).
    """
    coef, rms = _fit_coefficients(eps, values, linear_term)
    return float(coef[1]), float(coef[0]), rms


def _fit_coefficients(eps, values, linear_term: bool):
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    cols = [np.ones_like(eps), -np.sqrt(eps)] + ([eps] if linear_term else [])
    design = np.column_stack(cols)
    w = 1 / eps
    coef, *_ = np.linalg.lstsq(design * w[:, None], values * w, rcond=None)
    rms = float(np.sqrt(np.mean((design @ coef - values) ** 2)))
    return coef, rms


def finite_difference_force(theory: FunctionalTheory, query: BoundaryForceQuery, eps_list=DEFAULT_EPS,
                            opts: SearchOptions | None = None, seed_from: BoundaryForceResult | None = None,
                            model: str = "sqrt+linear") -> FiniteDifferenceFit:
    """Fit F_p(rho* + eps eta) over the given eps values.

    ``model`` is "sqrt+linear" (a - G sqrt(eps) + b eps, the default) or
    "sqrt" (a - G sqrt(eps)).  The pure square-root fit is always reported
    as ``G_fit_sqrt``.
    """
    if model not in ("sqrt", "sqrt+linear"):
        raise ValueError(f"unknown fit model {model!r}")
    eps_list = [float(e) for e in eps_list]
    if not eps_list or min(eps_list) <= 0 or eps_list != sorted(eps_list):
        raise ValueError("eps_list must be positive and sorted")
    linear = model == "sqrt+linear"
    if len(eps_list) < (3 if linear else 2):
        raise ValueError("too few eps values for the fit model")
    values = []
    for eps in eps_list:
        seeds = ansatz_seeds(seed_from, eps) if seed_from is not None else ()
        res = pure_functional(theory, query.rho_star + eps * query.eta, opts, seeds=seeds)
        values.append(res.value)
    g_sqrt = fit_sqrt_law(eps_list, values)[0]
    coef, rms = _fit_coefficients(eps_list, values, linear)
    b = float(coef[2]) if linear else 0.0
    return FiniteDifferenceFit(float(coef[1]), float(coef[0]), rms, tuple(eps_list), tuple(values), model, g_sqrt, b)
