"""Generalized functional theories on finite-dimensional Hilbert spaces.

A theory is the data of a potential basis (the images of a basis of the
potential space under the potential map), an interaction and the Hilbert
dimension.  Densities are real vectors indexed like the potential basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    ConfigParseError,
    DimensionMismatch,
    EigensolverFailure,
    LinearlyDependentBasis,
    NonHermitianInput,
    NonRealExpectation,
)

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10


def as_hermitian(matrix, tol: float = HERMITIAN_TOL, name: str = "operator") -> np.ndarray:
    """Validate a square matrix and return its Hermitian part.

    Round-off asymmetry up to ``tol`` is symmetrized away, anything larger
    is rejected.
    """
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if asym > tol * max(1.0, np.max(np.abs(a))):
        raise NonHermitianInput(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    h = 0.5 * (a + a.conj().T)
    h.setflags(write=False)
    return h


@dataclass(frozen=True, eq=False)
class FunctionalTheory:
    """The tuple (V, H, iota, W) with V given by its basis images."""

    potential_basis: tuple
    interaction: np.ndarray
    labels: tuple = ()
    _stack: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dim = self.interaction.shape[0]
        if self.potential_basis:
            stack = np.array(self.potential_basis)
        else:
            stack = np.zeros((0, dim, dim), dtype=complex)
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)

    @property
    def hilbert_dim(self) -> int:
        return self.interaction.shape[0]

    @property
    def n_params(self) -> int:
        return len(self.potential_basis)

    @property
    def stack(self) -> np.ndarray:
        """Potential basis as an array of shape (n_params, dim, dim)."""
        return self._stack

    def potential(self, v) -> np.ndarray:
        v = _param_vector(self, v)
        if self.n_params == 0:
            return np.zeros((self.hilbert_dim, self.hilbert_dim), dtype=complex)
        return np.tensordot(v, self._stack, axes=1)

    def hamiltonian(self, v) -> np.ndarray:
        return self.potential(v) + self.interaction


def make_theory(potentials, interaction=None, labels=None, hilbert_dim=None, allow_dependent=False) -> FunctionalTheory:
    """Validate operators and assemble a :class:`FunctionalTheory`.

    ``allow_dependent`` admits a non-injective potential map.
    """
    ops = [as_hermitian(p, name=f"potential[{i}]") for i, p in enumerate(potentials)]
    if interaction is None:
        if hilbert_dim is None:
            if not ops:
                raise DimensionMismatch("cannot infer the Hilbert dimension")
            hilbert_dim = ops[0].shape[0]
        w = np.zeros((hilbert_dim, hilbert_dim), dtype=complex)
        w.setflags(write=False)
    else:
        w = as_hermitian(interaction, name="interaction")
    dim = w.shape[0]
    if hilbert_dim is not None and hilbert_dim != dim:
        raise DimensionMismatch(f"declared dimension {hilbert_dim} but interaction has {dim}")
    for i, p in enumerate(ops):
        if p.shape[0] != dim:
            raise DimensionMismatch(f"potential[{i}] has dimension {p.shape[0]}, expected {dim}")
    if ops and not allow_dependent:
        vecs = np.array([np.concatenate([p.real.ravel(), p.imag.ravel()]) for p in ops])
        sv = np.linalg.svd(vecs, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise LinearlyDependentBasis("potential basis is linearly dependent")
    labels = tuple(labels) if labels is not None else tuple(f"B{i}" for i in range(len(ops)))
    if len(labels) != len(ops):
        raise DimensionMismatch("labels must match the potential basis")
    return FunctionalTheory(tuple(ops), w, labels)


def _param_vector(theory: FunctionalTheory, v) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (theory.n_params,):
        raise DimensionMismatch(f"expected {theory.n_params} potential parameters, got {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state (unit vector) or an ensemble state (density matrix)."""

    kind: str
    amplitudes: np.ndarray | None = None
    matrix: np.ndarray | None = None

    @classmethod
    def pure(cls, amplitudes, normalize: bool = False) -> "QuantumState":
        psi = np.array(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if normalize:
            if norm == 0:
                raise DimensionMismatch("cannot normalize the zero vector")
            psi = psi / norm
        elif abs(norm - 1.0) > STATE_TOL:
            raise DimensionMismatch(f"pure state has norm {norm}")
        psi.setflags(write=False)
        return cls("pure", amplitudes=psi)

    @classmethod
    def ensemble(cls, matrix) -> "QuantumState":
        gamma = as_hermitian(matrix, tol=1e-10, name="ensemble state")
        evals = np.linalg.eigvalsh(gamma)
        if evals[0] < -STATE_TOL:
            raise DimensionMismatch(f"ensemble state is not positive (min eigenvalue {evals[0]:.3e})")
        tr = np.trace(gamma).real
        if abs(tr - 1.0) > STATE_TOL:
            raise DimensionMismatch(f"ensemble state has trace {tr}")
        return cls("ensemble", matrix=gamma)

    @property
    def dim(self) -> int:
        return len(self.amplitudes) if self.kind == "pure" else self.matrix.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return np.array(self.matrix)

    def expectation(self, op) -> complex:
        if self.kind == "pure":
            return np.vdot(self.amplitudes, op @ self.amplitudes)
        return np.trace(self.matrix @ op)


def density_of_state(theory: FunctionalTheory, state: QuantumState) -> np.ndarray:
    """Density vector rho_a = Tr(Gamma iota(B_a))."""
    if state.dim != theory.hilbert_dim:
        raise DimensionMismatch(f"state dimension {state.dim} != {theory.hilbert_dim}")
    if theory.n_params == 0:
        return np.zeros(0)
    if state.kind == "pure":
        psi = state.amplitudes
        vals = np.einsum("i,aij,j->a", psi.conj(), theory.stack, psi)
    else:
        vals = np.einsum("ji,aij->a", state.matrix, theory.stack)
    scale = 1.0 + np.max(np.abs(theory.stack))
    if np.max(np.abs(vals.imag)) > STATE_TOL * scale:
        raise NonRealExpectation("density has a non-negligible imaginary part")
    return vals.real.copy()


def _eigh(h: np.ndarray):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc


def ground_energy(theory: FunctionalTheory, v) -> float:
    """Smallest eigenvalue of iota(v) + W."""
    try:
        evals = scipy.linalg.eigvalsh(theory.hamiltonian(v), subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    return float(evals[0])


def ground_states(theory: FunctionalTheory, v, degeneracy_tol: float | None = None) -> list[QuantumState]:
    """Orthonormal basis of the (numerically) degenerate ground space."""
    evals, evecs = _eigh(theory.hamiltonian(v))
    if degeneracy_tol is None:
        spread = evals[-1] - evals[0]
        degeneracy_tol = 1e-8 * spread if spread > 0 else 1e-12
    if degeneracy_tol <= 0:
        raise DimensionMismatch("degeneracy_tol must be positive")
    count = int(np.sum(evals - evals[0] <= degeneracy_tol))
    return [QuantumState.pure(evecs[:, i], normalize=True) for i in range(count)]


def convexify(theory: FunctionalTheory, k: int) -> FunctionalTheory:
    """k-convexification: potentials iota(v) x 1_k and interaction W x 1_k."""
    if k < 1:
        raise DimensionMismatch("k must be at least 1")
    eye = np.eye(k)
    ops = [np.kron(b, eye) for b in theory.potential_basis]
    w = np.kron(theory.interaction, eye)
    for a in ops + [w]:
        a.setflags(write=False)
    return FunctionalTheory(tuple(ops), w, theory.labels)


def partial_trace_ancilla(psi: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Reduce a vector on H x C^k to a density matrix on H."""
    m = np.asarray(psi).reshape(dim, k)
    return m @ m.conj().T


def identity_kernel_dim(theory: FunctionalTheory, tol: float = 1e-10) -> int:
    """Dimension of the preimage of span{1} under the potential map."""
    if theory.n_params == 0:
        return 0
    eye = np.eye(theory.hilbert_dim)
    cols = [np.concatenate([b.real.ravel(), b.imag.ravel()]) for b in theory.potential_basis]
    a = np.array(cols).T
    target = np.concatenate([eye.ravel(), np.zeros(eye.size)])
    coef, *_ = np.linalg.lstsq(a, target, rcond=None)
    resid = np.linalg.norm(a @ coef - target) / np.linalg.norm(target)
    return 1 if resid <= tol else 0


def pauli():
    """Pauli matrices X, Y, Z."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return x, y, z


def qubit_theory(lam: float = 1.0) -> FunctionalTheory:
    """iota(v) = vZ and W = lambda X."""
    x, _, z = pauli()
    return make_theory([z], lam * x, labels=["Z"])


def spin_chain_theory(n: int, lam: float = 1.0, interaction=None) -> FunctionalTheory:
    """n qubits with iota(v) = sum_i v_i Z_i.

    The default interaction is a transverse field lambda * sum_i X_i.
    """
    if n < 1:
        raise ConfigParseError("spin chain needs at least one site")
    x, _, z = pauli()

    def site(op, i):
        mats = [np.eye(2)] * n
        mats[i] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    zs = [site(z, i) for i in range(n)]
    if interaction is None:
        interaction = lam * sum(site(x, i) for i in range(n))
    return make_theory(zs, interaction, labels=[f"Z{i}" for i in range(n)])


def parse_complex_matrix(data, name: str = "matrix") -> np.ndarray:
    """Parse nested lists whose entries are numbers or [re, im] pairs."""
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"{name}: malformed matrix") from exc
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ConfigParseError(f"{name}: expected a 2-d matrix of numbers or [re, im] pairs")


def build_theory(config: dict) -> FunctionalTheory:
    """Build a validated theory from a config mapping."""
    if not isinstance(config, dict) or "kind" not in config:
        raise ConfigParseError("config must be an object with a 'kind' field")
    kind = config["kind"]
    try:
        if kind == "qubit":
            return qubit_theory(float(config.get("lambda", 1.0)))
        if kind == "spin":
            inter = config.get("interaction")
            if inter is not None:
                inter = parse_complex_matrix(inter, "interaction")
            return spin_chain_theory(int(config["N"]), float(config.get("lambda", 1.0)), inter)
        if kind == "explicit":
            mats = config["matrices"]
            pots = [parse_complex_matrix(m, f"potentials[{i}]") for i, m in enumerate(mats.get("potentials", []))]
            inter = mats.get("interaction")
            inter = None if inter is None else parse_complex_matrix(inter, "interaction")
            return make_theory(pots, inter, config.get("labels"), config.get("hilbert_dim"))
        if kind == "bosonic":
            from .bosonic import build_bosonic_theory, parse_interaction

            d, n, p = int(config["d"]), int(config["N"]), int(config.get("P", 0))
            return build_bosonic_theory(d, n, p, parse_interaction(config.get("interaction", "hubbard"), d))
        if kind == "dimer":
            from .liegroup import dimer_theory

            return dimer_theory(int(config["N"]), float(config.get("theta", 0.0)))
        if kind == "lie":
            from .liegroup import lie_theory_from_config

            return lie_theory_from_config(config)
    except KeyError as exc:
        raise ConfigParseError(f"missing config field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(str(exc)) from exc
    raise ConfigParseError(f"unknown theory kind {kind!r}")
