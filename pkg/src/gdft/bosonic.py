"""Translation-invariant bosons on a ring of d sites, in momentum space.

A sector (d, N, P) is spanned by the permanents |m> with sum(m) = N and
total momentum sum_k k m_k = P mod d.  The potentials are the momentum
number operators, so the theory is abelian with the permanents as weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .abelian import Polytope, FacetInequality, representable_polytope, weight_decomposition
from .core import FunctionalTheory, make_theory, parse_complex_matrix
from .errors import ConfigParseError, NotSimplexSetting


def _check_sector(d: int, n: int, p: int):
    if d < 1 or n < 0 or not 0 <= p < d:
        raise ConfigParseError(f"invalid sector (d={d}, N={n}, P={p})")


def _compositions(n: int, parts: int):
    """All length-``parts`` vectors of nonnegative ints summing to n, descending lex."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_permanents(d: int, n: int, p: int) -> list[tuple[int, ...]]:
    """Occupation vectors of the sector in descending lexicographic order."""
    _check_sector(d, n, p)
    return [m for m in _compositions(n, d) if sum(k * mk for k, mk in enumerate(m)) % d == p]


def hubbard_tensor(d: int) -> np.ndarray:
    """w[k1,k2,k3,k4] = delta(k1+k2 = k3+k4 mod d) / d."""
    k = np.arange(d)
    total_in = (k[:, None] + k[None, :]) % d
    return (total_in[:, :, None, None] == total_in[None, None, :, :]).astype(float) / d


def parse_interaction(spec, d: int):
    """Named interaction or explicit coefficient tensor from a config value."""
    if spec is None or spec == "hubbard":
        return None
    if isinstance(spec, dict) and "tensor" in spec:
        arr = np.array(spec["tensor"], dtype=float)
        if arr.shape == (d, d, d, d, 2):
            arr = arr[..., 0] + 1j * arr[..., 1]
        if arr.shape != (d, d, d, d):
            raise ConfigParseError(f"interaction tensor must have shape ({d},{d},{d},{d})")
        return arr
    raise ConfigParseError(f"unknown interaction {spec!r}")


def _lower(m: list[int], k: int):
    r = m[k]
    if r == 0:
        return 0, m
    out = list(m)
    out[k] -= 1
    return r, out


def _raise(m: list[int], k: int):
    out = list(m)
    out[k] += 1
    return out[k], out


def two_body_operator(perms, tensor) -> np.ndarray:
    """Matrix of sum w[k1,k2,k3,k4] b+_k1 b+_k2 b_k3 b_k4 on the permanents.

    Ladder factors are multiplied as exact integers and the square root is
    taken once per matrix element.
    """
    tensor = np.asarray(tensor)
    d = tensor.shape[0]
    index = {tuple(m): i for i, m in enumerate(perms)}
    out = np.zeros((len(perms), len(perms)), dtype=complex)
    nonzero = [tuple(idx) for idx in np.argwhere(tensor != 0)]
    for col, m in enumerate(perms):
        for k1, k2, k3, k4 in nonzero:
            r1, m1 = _lower(list(m), k4)
            if r1 == 0:
                continue
            r2, m2 = _lower(m1, k3)
            if r2 == 0:
                continue
            r3, m3 = _raise(m2, k2)
            r4, m4 = _raise(m3, k1)
            row = index.get(tuple(m4))
            if row is None:
                raise ConfigParseError("interaction couples the sector to another momentum sector")
            out[row, col] += tensor[k1, k2, k3, k4] * math.sqrt(r1 * r2 * r3 * r4)
    return out


def hubbard_interaction(d: int, n: int, p: int, tensor=None) -> np.ndarray:
    """Interaction matrix on the sector; the momentum-space Hubbard term by default."""
    perms = enumerate_permanents(d, n, p)
    if tensor is None:
        tensor = hubbard_tensor(d)
    return two_body_operator(perms, tensor)


def build_bosonic_theory(d: int, n: int, p: int, interaction=None) -> FunctionalTheory:
    """Theory with the number operators n_k as potential basis.

    The number operators may be linearly dependent on small sectors, which
    the potential map is allowed to be.
    """
    perms = enumerate_permanents(d, n, p)
    if not perms:
        raise ConfigParseError(f"sector (d={d}, N={n}, P={p}) is empty")
    occ = np.array(perms, dtype=float)
    pots = [np.diag(occ[:, k]) for k in range(d)]
    w = hubbard_interaction(d, n, p, interaction)
    return make_theory(pots, w, labels=[f"n{k}" for k in range(d)], allow_dependent=True)


def bosonic_domain(d: int, n: int, p: int) -> Polytope:
    return representable_polytope(weight_decomposition(build_bosonic_theory(d, n, p)))


@dataclass(frozen=True, eq=False)
class FunctionalForm:
    """Constraint matrix T[j, alpha] = D_j(m_alpha) with its pseudoinverse.

    The constraints D_j are primitive integer affine functions on the
    lattice {sum(m) = N}.
    """

    permanents: tuple
    T: np.ndarray
    T_plus: np.ndarray
    kernel_basis: np.ndarray
    constraints: tuple

    def constraint_values(self, rho) -> np.ndarray:
        return np.array([c.D(rho) for c in self.constraints])

    def coefficients(self, rho, x=None) -> np.ndarray:
        """Squared moduli y = T+ D(rho) + K x."""
        y = self.T_plus @ self.constraint_values(rho)
        if x is not None and self.kernel_basis.shape[1]:
            y = y + self.kernel_basis @ np.asarray(x, dtype=float)
        return y

    def evaluate(self, interaction, rho, x=None, phases=None) -> float:
        """sum_ab conj(xi_a) xi_b W_ab sqrt(y_a y_b) for given x and phases.

        No optimization over x is attempted.
        """
        y = self.coefficients(rho, x)
        if np.min(y) < -1e-12:
            raise ValueError("kernel shift x gives negative coefficients")
        amps = np.sqrt(np.clip(y, 0.0, None)).astype(complex)
        if phases is not None:
            amps *= np.exp(1j * np.asarray(phases, dtype=float))
        return float(np.vdot(amps, np.asarray(interaction) @ amps).real)


def functional_form(domain: Polytope, permanents) -> FunctionalForm:
    """T, its Moore-Penrose inverse and kernel for the sector's facets."""
    perms = [tuple(m) for m in permanents]
    occ = np.array(perms, dtype=np.int64)
    n_total = int(occ[0].sum())
    rows, constraints = [], []
    for facet in domain.inequalities:
        if facet.lattice is None:
            raise ValueError("functional form needs integral facets with a lattice form")
        n, nu = facet.lattice
        shifted = [a - n[0] for a in n]
        nu_shifted = nu - n[0] * n_total
        g = math.gcd(*shifted)
        vals = [(sum(a * int(b) for a, b in zip(shifted, m)) - nu_shifted) // g for m in occ]
        rows.append(vals)
        constraints.append(
            FacetInequality(
                np.array(shifted, dtype=float) / g,
                nu_shifted / g,
                normalized=False,
                lattice=(tuple(a // g for a in shifted), nu_shifted // g),
            )
        )

    def key(j):
        first = next((a for a, v in enumerate(rows[j]) if v > 0), len(perms))
        return (first, tuple(-v for v in rows[j]))

    order = sorted(range(len(rows)), key=key)
    t = np.array([rows[j] for j in order], dtype=float).reshape(len(rows), len(perms))
    constraints = tuple(constraints[j] for j in order)
    t_plus = np.linalg.pinv(t, rcond=1e-10) if t.size else np.zeros((len(perms), 0))
    kernel = scipy.linalg.null_space(t, rcond=1e-10) if t.size else np.eye(len(perms))
    for i in range(kernel.shape[1]):
        col = kernel[:, i]
        if col[np.argmax(np.abs(col))] < 0:
            kernel[:, i] = -col
    return FunctionalForm(tuple(perms), t, t_plus, kernel, constraints)


def is_simplex_setting(theory: FunctionalTheory, domain: Polytope) -> bool:
    wd = weight_decomposition(theory)
    return (
        len(domain.vertices) == theory.hilbert_dim
        and len(wd.weights) == theory.hilbert_dim
        and domain.dim == theory.hilbert_dim - 1
    )


def simplex_coefficients(theory: FunctionalTheory, domain: Polytope, rho):
    """Exact |c_beta|^2 = D_beta(rho) / L_beta and the weight decomposition."""
    if not is_simplex_setting(theory, domain):
        raise NotSimplexSetting("every weight must be a vertex of a simplex with dim H vertices")
    wd = weight_decomposition(theory)
    y = np.empty(len(wd.weights))
    for b, omega in enumerate(wd.weights):
        opposite = [f for f in domain.inequalities if abs(f.D(omega)) > 1e-9]
        if len(opposite) != 1:
            raise NotSimplexSetting("could not identify the facet opposite a vertex")
        f = opposite[0]
        y[b] = f.D(rho) / f.D(omega)
    return y, wd


def simplex_functional(theory: FunctionalTheory, domain: Polytope, rho, seed: int = 0, starts: int = 16) -> float:
    """Pure functional in the simplex setting.

    The moduli of the coefficients are fixed by the density and only the
    phases are minimized.
    """
    from .search import minimize_phases

    rho = np.asarray(rho, dtype=float)
    if not domain.contains(rho, 1e-9):
        from .errors import NotRepresentable

        raise NotRepresentable("density is outside the domain")
    y, wd = simplex_coefficients(theory, domain, rho)
    amps = np.sqrt(np.clip(y, 0.0, None))
    w = wd.in_basis(theory.interaction)
    m = amps[:, None] * w * amps[None, :]
    value, _ = minimize_phases(m, seed=seed, starts=starts)
    return value


def permanents_table(perms) -> list[list[int]]:
    """Rows (m components..., row index)."""
    return [list(m) + [i] for i, m in enumerate(perms)]


def coordinate_table(matrix, tol: float = 0.0) -> list[tuple[int, int, float, float]]:
    """Nonzero entries as (row, col, re, im)."""
    out = []
    for (i, j), v in np.ndenumerate(np.asarray(matrix)):
        if abs(v) > tol:
            out.append((i, j, float(v.real), float(v.imag)))
    return out
