"""The lattice Hamiltonian on the fake-flat basis.

Operators are scipy.sparse matrices indexed by the basis order.  Permutation
operators send basis state i to state perm[i]; diagonal operators evaluate a
weight on a holonomy.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .algebra import CrossedModule, kernel, special_subgroups
from .complexes import CellComplex, PathWord, SphereWord
from .configuration import (DEFAULT_STATE_CAP, Configuration, fake_flat_arrays,
                            path_product, sphere_product)
from .errors import CapExceeded, GaugeInvarianceError, StructureError, WeightError
from .gauge import edge_action, generator_transforms, plaquette_action, vertex_action

DEGENERACY_TOL = 1e-9
DENSE_CAP = 4096
HERMITIAN_TOL = 1e-12

MODEL_TERMS = {"HE": "VW", "HAW": "AW", "HM": "AB", "HBV": "BV", "full": "ABVW"}
MODEL_GAUGE = {"HE": "ker", "HAW": "ker", "HM": "ker", "HBV": "full", "full": "ker"}


class StateBasis:
    """Fake-flat configurations in lexicographic order, with index lookup."""

    def __init__(self, cm: CrossedModule, X: CellComplex, cap: int = DEFAULT_STATE_CAP):
        self.cm, self.X = cm, X
        self.eps, self.phi = fake_flat_arrays(cm, X, cap)
        radix = [cm.E.order] * X.n_edges + [cm.Phi.order] * X.n_faces
        self._weights = None
        if np.sum(np.log2(radix)) < 62:
            w = np.ones(len(radix), dtype=np.int64)
            for i in range(len(radix) - 2, -1, -1):
                w[i] = w[i + 1] * radix[i + 1]
            self._weights = w
            self._codes = self._encode(self.eps, self.phi)
        else:
            self._lookup = {row.tobytes(): i for i, row in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.eps)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.ascontiguousarray(np.hstack([self.eps, self.phi]))

    def _encode(self, eps, phi) -> np.ndarray:
        return np.hstack([eps, phi]) @ self._weights

    def index(self, eps: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Basis indices of the given label rows; raises if a row is not a basis state."""
        if self._weights is not None:
            codes = self._encode(eps, phi)
            idx = np.searchsorted(self._codes, codes)
            idx = np.minimum(idx, len(self) - 1)
            if not np.array_equal(self._codes[idx], codes):
                raise StructureError("transformed labels left the fake-flat basis")
            return idx
        rows = np.ascontiguousarray(np.hstack([eps, phi]).astype(np.int64))
        try:
            return np.array([self._lookup[r.tobytes()] for r in rows], dtype=np.int64)
        except KeyError:
            raise StructureError("transformed labels left the fake-flat basis") from None

    def configuration(self, i: int) -> Configuration:
        return Configuration(self.cm, self.X, tuple(self.eps[i]), tuple(self.phi[i]))

    def permutation(self, fn: Callable) -> np.ndarray:
        eps, phi = fn(self.eps, self.phi)
        return self.index(np.broadcast_to(eps, self.eps.shape), np.broadcast_to(phi, self.phi.shape))

    def permutation_matrix(self, perm: np.ndarray) -> sp.csr_matrix:
        n = len(self)
        return sp.csr_matrix((np.ones(n), (perm, np.arange(n))), shape=(n, n))

    def diagonal(self, values: np.ndarray) -> sp.csr_matrix:
        return sp.diags(np.asarray(values), format="csr")


# ---------------------------------------------------------------- weights

ROLES = ("mu", "nu", "eta", "theta")


@dataclass(frozen=True)
class WeightFunction:
    """Weights for one term type.

    mu is indexed by Phi elements, eta by E elements, nu and theta by position
    in ker(delta).
    """
    role: str
    values: tuple[complex, ...]

    def __post_init__(self):
        if self.role not in ROLES:
            raise WeightError(f"unknown weight role {self.role!r}")
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.values, dtype=complex)
        return a.real.copy() if np.all(a.imag == 0) else a


def domain_size(cm: CrossedModule, role: str) -> int:
    return {"mu": cm.Phi.order, "eta": cm.E.order}.get(role, kernel(cm).order)


def canonical_weight(cm: CrossedModule, role: str) -> WeightFunction:
    n = domain_size(cm, role)
    delta0 = np.zeros(n)
    delta0[0] = 1.0
    if role in ("mu", "nu"):
        return WeightFunction(role, tuple(delta0 - 1.0 / n))
    return WeightFunction(role, tuple(1.0 - delta0))


def _convolution_problems(G, values, role) -> list[str]:
    n = G.order
    C = np.array([[values[G.mul[a][G.inverse(b)]] for b in range(n)] for a in range(n)])
    ev, vecs = np.linalg.eigh((C + C.conj().T) / 2)
    if ev.min() < -1e-10:
        return [f"{role}: convolution operator is not positive semidefinite"]
    null = vecs[:, np.abs(ev) <= 1e-10]
    if null.shape[1] != 1 or not np.allclose(np.abs(null[:, 0]), 1 / np.sqrt(n)):
        return [f"{role}: convolution kernel is not exactly the constant vector"]
    return []


def weight_problems(cm: CrossedModule, w: WeightFunction) -> list[str]:
    """Reasons `w` violates the conditions for its role; empty when valid."""
    n = domain_size(cm, w.role)
    v = np.array(w.values, dtype=complex)
    if len(v) != n:
        return [f"{w.role}: expected {n} values, got {len(v)}"]
    E, act = cm.E, cm.act
    problems = []
    if w.role in ("mu", "nu", "theta"):
        if w.role == "mu":
            members, G = list(range(cm.Phi.order)), cm.Phi
        else:
            K = kernel(cm)
            members, G = list(K.members), K.as_group()
        pos = {m: i for i, m in enumerate(members)}
        if any(abs(v[pos[act(x, m)]] - v[i]) > 1e-12 for x in range(E.order)
               for i, m in enumerate(members)):
            problems.append(f"{w.role}: not invariant under the E action")
        if w.role == "theta":
            if np.any(np.abs(v.imag) > 1e-12) or v.real[0] != 0 or np.any(v.real[1:] <= 0):
                problems.append("theta: must be real, zero at the identity and positive elsewhere")
        else:
            if any(abs(v[G.inverse(i)] - np.conj(v[i])) > 1e-12 for i in range(n)):
                problems.append(f"{w.role}: not self-adjoint")
            problems += _convolution_problems(G, v, w.role)
    else:
        if any(abs(v[E.conj(g, h)] - v[h]) > 1e-12 for g in range(E.order) for h in range(n)):
            problems.append("eta: not a class function")
        if np.any(np.abs(v.imag) > 1e-12) or v.real[0] != 0 or np.any(v.real[1:] <= 0):
            problems.append("eta: must be real, zero at the identity and positive elsewhere")
    return problems


def validate_weight(cm: CrossedModule, w: WeightFunction) -> WeightFunction:
    problems = weight_problems(cm, w)
    if problems:
        raise WeightError("; ".join(problems))
    return w


@dataclass
class Weights:
    """One weight per role, or one per site (edge for mu, face for nu/eta, ball for theta)."""
    mu: WeightFunction | Sequence[WeightFunction]
    nu: WeightFunction | Sequence[WeightFunction]
    eta: WeightFunction | Sequence[WeightFunction]
    theta: WeightFunction | Sequence[WeightFunction]

    @classmethod
    def canonical(cls, cm: CrossedModule) -> "Weights":
        return cls(*(canonical_weight(cm, r) for r in ROLES))

    def at(self, role: str, site: int) -> WeightFunction:
        w = getattr(self, role)
        return w if isinstance(w, WeightFunction) else w[site]

    def validate(self, cm: CrossedModule) -> None:
        for role in ROLES:
            w = getattr(self, role)
            for x in ([w] if isinstance(w, WeightFunction) else w):
                if x.role != role:
                    raise WeightError(f"{role} slot holds a {x.role} weight")
                validate_weight(cm, x)


# ---------------------------------------------------------------- operators

def _values(basis: StateBasis, n: int, values, what: str) -> np.ndarray:
    a = np.asarray(values, dtype=np.int64)
    if a.shape != (n,):
        raise StructureError(f"{what} transform needs {n} values")
    return a


def op_G(basis: StateBasis, xi) -> sp.csr_matrix:
    xi = _values(basis, basis.X.n_vertices, xi, "vertex")
    return basis.permutation_matrix(
        basis.permutation(lambda e, p: vertex_action(basis.cm, basis.X, xi, e, p)))


def op_V(basis: StateBasis, psi) -> sp.csr_matrix:
    psi = _values(basis, basis.X.n_edges, psi, "edge")
    return basis.permutation_matrix(
        basis.permutation(lambda e, p: edge_action(basis.cm, basis.X, psi, e, p)))


def op_W(basis: StateBasis, chi) -> sp.csr_matrix:
    chi = _values(basis, basis.X.n_faces, chi, "plaquette")
    K = kernel(basis.cm)
    if any(c not in K for c in chi.tolist()):
        raise StructureError("plaquette transform must take values in ker(delta)")
    return basis.permutation_matrix(
        basis.permutation(lambda e, p: plaquette_action(basis.cm, basis.X, chi, e, p)))


def op_Ve(basis: StateBasis, e: int, psi_value: int) -> sp.csr_matrix:
    psi = np.zeros(basis.X.n_edges, dtype=np.int64)
    psi[e] = psi_value
    return op_V(basis, psi)


def op_Wf(basis: StateBasis, f: int, chi_value: int) -> sp.csr_matrix:
    chi = np.zeros(basis.X.n_faces, dtype=np.int64)
    chi[f] = chi_value
    return op_W(basis, chi)


def _zero(basis: StateBasis, dtype=float) -> sp.csr_matrix:
    return sp.csr_matrix((len(basis), len(basis)), dtype=dtype)


def op_Ve_mu(basis: StateBasis, e: int, mu: WeightFunction, check: bool = True) -> sp.csr_matrix:
    """sum over psi in Phi of mu(psi) V_e(psi)."""
    if check:
        validate_weight(basis.cm, mu)
    out = _zero(basis, mu.array.dtype)
    for psi, w in enumerate(mu.array):
        if w != 0:
            out = out + w * op_Ve(basis, e, psi)
    return out.tocsr()


def op_Wf_nu(basis: StateBasis, f: int, nu: WeightFunction, check: bool = True) -> sp.csr_matrix:
    """sum over chi in ker(delta) of nu(chi) W_f(chi)."""
    if check:
        validate_weight(basis.cm, nu)
    K = kernel(basis.cm)
    out = _zero(basis, nu.array.dtype)
    for i, w in enumerate(nu.array):
        if w != 0:
            out = out + w * op_Wf(basis, f, K.members[i])
    return out.tocsr()


def op_A(basis: StateBasis, gamma: PathWord, eta: WeightFunction,
         check: bool = True) -> sp.csr_matrix:
    """Diagonal eta(eps_gamma)."""
    if check:
        validate_weight(basis.cm, eta)
        if gamma:
            s, t = basis.X.endpoints(gamma)
            if s != t:
                raise GaugeInvarianceError("A needs a closed path to be gauge invariant")
    return basis.diagonal(eta.array[path_product(basis.cm.E, basis.eps, gamma)])


def op_B(basis: StateBasis, sigma: SphereWord, theta: WeightFunction,
         check: bool = True) -> sp.csr_matrix:
    """Diagonal theta(phi_sigma); phi_sigma must lie in ker(delta)."""
    if check:
        validate_weight(basis.cm, theta)
    K = kernel(basis.cm)
    lookup = np.full(basis.cm.Phi.order, -1, dtype=np.int64)
    lookup[list(K.members)] = np.arange(K.order)
    pos = lookup[sphere_product(basis.cm, basis.eps, basis.phi, sigma)]
    if np.any(pos < 0):
        raise GaugeInvarianceError("sphere word holonomy leaves ker(delta); boundary is not trivial")
    return basis.diagonal(theta.array[pos])


def term_operator(basis: StateBasis, term: str, weights: Weights) -> sp.csr_matrix:
    X = basis.X
    parts = []
    if term == "A":
        parts = [op_A(basis, f.boundary, weights.at("eta", i), check=False)
                 for i, f in enumerate(X.faces)]
    elif term == "B":
        parts = [op_B(basis, q, weights.at("theta", i), check=False) for i, q in enumerate(X.balls)]
    elif term == "V":
        parts = [op_Ve_mu(basis, e, weights.at("mu", e), check=False) for e in range(X.n_edges)]
    elif term == "W":
        parts = [op_Wf_nu(basis, f, weights.at("nu", f), check=False) for f in range(X.n_faces)]
    else:
        raise ValueError(f"unknown term {term!r}")
    out = _zero(basis)
    for p in parts:
        out = out + p
    return out.tocsr()


def assemble(basis: StateBasis, weights: Weights | None = None, terms: Iterable[str] = "ABVW",
             threads: int = 1) -> sp.csr_matrix:
    """Sum of the selected term families; weights default to the canonical ones."""
    weights = Weights.canonical(basis.cm) if weights is None else weights
    weights.validate(basis.cm)
    terms = sorted(set(terms))
    if threads > 1 and len(terms) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda t: term_operator(basis, t, weights), terms))
    else:
        parts = [term_operator(basis, t, weights) for t in terms]
    H = _zero(basis)
    for p in parts:
        H = H + p
    H = H.tocsr()
    if not is_hermitian(H):
        raise WeightError("assembled Hamiltonian is not Hermitian")
    return H


def is_hermitian(H, tol: float = HERMITIAN_TOL) -> bool:
    D = H - H.conj().T
    if sp.issparse(D):
        return D.nnz == 0 or abs(D).max() <= tol
    return np.abs(D).max(initial=0) <= tol


# ---------------------------------------------------------------- physical subspace

@dataclass(frozen=True)
class PhysicalSubspace:
    basis_size: int
    labels: np.ndarray          # orbit index of every basis state
    n_orbits: int

    @cached_property
    def isometry(self) -> sp.csr_matrix:
        """Columns are normalized orbit sums."""
        sizes = np.bincount(self.labels, minlength=self.n_orbits)
        data = 1.0 / np.sqrt(sizes[self.labels])
        return sp.csr_matrix((data, (np.arange(self.basis_size), self.labels)),
                             shape=(self.basis_size, self.n_orbits))

    @cached_property
    def projector(self) -> sp.csr_matrix:
        P = self.isometry
        return (P @ P.T).tocsr()

    def __len__(self) -> int:
        return self.n_orbits


def gauge_permutations(basis: StateBasis, gauge: str = "ker",
                       plaquette: bool = False) -> list[np.ndarray]:
    if gauge not in ("ker", "full"):
        raise ValueError("gauge must be 'ker' or 'full'")
    families = ["vertex", "edge_ker" if gauge == "ker" else "edge_full"]
    if plaquette:
        families.append("plaquette")
    return [basis.permutation(fn) for *_, fn in generator_transforms(basis.cm, basis.X, families)]


def orbit_partition(n: int, perms: Sequence[np.ndarray]) -> tuple[int, np.ndarray]:
    if not perms:
        return n, np.arange(n)
    rows = np.concatenate([np.arange(n)] * len(perms))
    cols = np.concatenate(perms)
    graph = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_orbits, labels = connected_components(graph, directed=True, connection="weak")
    # relabel so orbit ids follow the first state of each orbit
    first = {}
    for i, lab in enumerate(labels.tolist()):
        first.setdefault(lab, len(first))
    return n_orbits, np.array([first[l] for l in labels.tolist()], dtype=np.int64)


def physical_projector(basis: StateBasis, gauge_choice: str = "ker",
                       extra: Sequence[np.ndarray] = (), plaquette: bool = False) -> PhysicalSubspace:
    """Orbit sums under vertex transforms and ker(delta) (or all) edge transforms.

    `extra` adds further permutations of the basis, e.g. a global symmetry
    whose singlet sector is wanted.
    """
    perms = gauge_permutations(basis, gauge_choice, plaquette) + list(extra)
    n_orbits, labels = orbit_partition(len(basis), perms)
    return PhysicalSubspace(len(basis), labels, n_orbits)


# ---------------------------------------------------------------- spectrum

@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    ground_multiplicity: int
    tol: float = DEGENERACY_TOL

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def levels(self) -> list[tuple[float, int]]:
        """Distinct eigenvalues (within tolerance) with multiplicities."""
        out: list[list] = []
        for x in self.eigenvalues.tolist():
            if out and abs(x - out[-1][0]) <= self.tol:
                out[-1][1] += 1
            else:
                out.append([x, 1])
        return [(a, b) for a, b in out]


def spectrum(H, physical: PhysicalSubspace | None = None, dense_cap: int = DENSE_CAP,
             tol: float = DEGENERACY_TOL) -> Spectrum:
    """Exact eigenvalues, optionally restricted to the physical subspace."""
    if not is_hermitian(H):
        raise ValueError("spectrum needs a Hermitian matrix")
    if physical is not None:
        if physical.n_orbits > dense_cap:
            raise CapExceeded(f"physical dimension {physical.n_orbits} exceeds dense cap {dense_cap}")
        P = physical.isometry
        M = P.T @ H @ P
    else:
        if H.shape[0] > dense_cap:
            raise CapExceeded(f"dimension {H.shape[0]} exceeds dense cap {dense_cap}")
        M = H
    M = M.toarray() if sp.issparse(M) else np.asarray(M)
    if M.shape[0] == 0:
        return Spectrum(np.zeros(0), 0, tol)
    if np.iscomplexobj(M) and np.abs(M.imag).max() == 0:
        M = M.real
    ev = np.linalg.eigvalsh(M)
    return Spectrum(ev, int(np.sum(ev <= ev[0] + tol)), tol)


# ---------------------------------------------------------------- symmetries

def zeta_ok(cm: CrossedModule, X: CellComplex, zeta) -> bool:
    E0, _ = special_subgroups(cm)
    zeta = np.asarray(zeta, dtype=np.int64)
    return all(z in E0 for z in zeta.tolist()) and \
        all(int(path_product(cm.E, zeta, f.boundary)) == 0 for f in X.faces)


def kappa_ok(cm: CrossedModule, X: CellComplex, kappa) -> bool:
    _, Phi0 = special_subgroups(cm)
    kappa = np.asarray(kappa, dtype=np.int64)
    trivial = np.zeros(X.n_edges, dtype=np.int64)
    return all(k in Phi0 for k in kappa.tolist()) and \
        all(int(sphere_product(cm, trivial, kappa, q)) == 0 for q in X.balls)


def valid_zetas(cm: CrossedModule, X: CellComplex) -> list[tuple[int, ...]]:
    E0, _ = special_subgroups(cm)
    return [z for z in product(E0.members, repeat=X.n_edges) if zeta_ok(cm, X, z)]


def valid_kappas(cm: CrossedModule, X: CellComplex) -> list[tuple[int, ...]]:
    _, Phi0 = special_subgroups(cm)
    return [k for k in product(Phi0.members, repeat=X.n_faces) if kappa_ok(cm, X, k)]


def op_L1(basis: StateBasis, zeta) -> sp.csr_matrix:
    """eps_e -> zeta_e eps_e for zeta valued in E0 with zeta_{df} = 1."""
    cm, X = basis.cm, basis.X
    zeta = _values(basis, X.n_edges, zeta, "edge")
    if not zeta_ok(cm, X, zeta):
        raise GaugeInvarianceError("zeta must take values in E0 and be trivial around every face")
    return basis.permutation_matrix(basis.permutation(lambda e, p: (cm.E.table[zeta, e], p)))


def op_L2(basis: StateBasis, kappa) -> sp.csr_matrix:
    """phi_f -> kappa_f phi_f for kappa valued in Phi0 with kappa_{dq} = 1."""
    cm, X = basis.cm, basis.X
    kappa = _values(basis, X.n_faces, kappa, "face")
    if not kappa_ok(cm, X, kappa):
        raise GaugeInvarianceError("kappa must take values in Phi0 and be trivial on every ball")
    return basis.permutation_matrix(basis.permutation(lambda e, p: (e, cm.Phi.table[kappa, p])))


def op_K(basis: StateBasis, E_map, F_map) -> sp.csr_matrix:
    """Relabel every edge by E_map and every face by F_map."""
    from .algebra import crossed_module_hom
    cm = basis.cm
    report = crossed_module_hom(cm, cm, E_map, F_map)
    if not report.is_hom or len(set(E_map)) != cm.E.order or len(set(F_map)) != cm.Phi.order:
        raise GaugeInvarianceError("(E, F) is not an automorphism of the crossed module")
    return basis.permutation_matrix(relabel_permutation(basis, E_map, F_map))


def relabel_permutation(basis: StateBasis, E_map, F_map) -> np.ndarray:
    """Basis permutation relabelling every edge by E_map and every face by F_map."""
    Em, Fm = np.asarray(E_map, dtype=np.int64), np.asarray(F_map, dtype=np.int64)
    return basis.permutation(lambda e, p: (Em[e], Fm[p]))


# ---------------------------------------------------------------- models

@dataclass(frozen=True)
class ModelResult:
    model: str
    spectrum: Spectrum
    basis_size: int
    physical_dim: int

    @property
    def ground_multiplicity(self) -> int:
        return self.spectrum.ground_multiplicity


def solve_model(cm: CrossedModule, X: CellComplex, model: str = "HE",
                weights: Weights | None = None, terms: str | None = None,
                gauge: str | None = None, state_cap: int = DEFAULT_STATE_CAP,
                dense_cap: int = DENSE_CAP, threads: int = 1,
                basis: StateBasis | None = None) -> ModelResult:
    """Build, project and diagonalize one model."""
    terms = MODEL_TERMS[model] if terms is None else terms
    gauge = MODEL_GAUGE.get(model, "ker") if gauge is None else gauge
    basis = StateBasis(cm, X, state_cap) if basis is None else basis
    H = assemble(basis, weights, terms, threads)
    phys = physical_projector(basis, gauge)
    spec = spectrum(H, phys, dense_cap)
    return ModelResult(model, spec, len(basis), phys.n_orbits)
