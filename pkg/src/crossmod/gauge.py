"""Vertex, edge and plaquette transformations, orbits and vertex stabilizers.

Transforms are integer arrays: xi per vertex (E), psi per edge (Phi), chi per
face (ker delta).  The `*_action` functions work on batched label arrays;
`apply_*` wrap them for single configurations.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import CrossedModule, Subgroup, kernel
from .complexes import CellComplex, PathWord
from .configuration import Configuration, fake_flat_mask
from .errors import CapExceeded, StructureError

VertexTransform = Sequence[int]
EdgeTransform = Sequence[int]
PlaquetteTransform = Sequence[int]

GAUGE_FAMILIES = ("vertex", "edge_full", "edge_ker", "plaquette")


def psi_path(cm: CrossedModule, eps: np.ndarray, psi: np.ndarray, w: PathWord) -> np.ndarray:
    """psi extended along `w` using psi_{g g'} = psi_g (eps_g > psi_g')."""
    E, P, act = cm.E, cm.Phi, cm.act_table
    eps, psi = np.asarray(eps), np.asarray(psi)
    shape = np.broadcast_shapes(eps.shape[:-1], psi.shape[:-1])
    acc = np.zeros(shape, dtype=np.int64)
    prefix = np.zeros(shape, dtype=np.int64)
    for e, s in w:
        x, y = eps[..., e], psi[..., e]
        if s < 0:
            x = E.inv[x]
            y = P.inv[act[x, y]]
        acc = P.table[acc, act[prefix, y]]
        prefix = E.table[prefix, x]
    return acc


def vertex_action(cm: CrossedModule, X: CellComplex, xi, eps, phi):
    xi, eps, phi = np.asarray(xi), np.asarray(eps), np.asarray(phi)
    E = cm.E
    src = np.array([s for s, _ in X.edges], dtype=np.int64)
    dst = np.array([t for _, t in X.edges], dtype=np.int64)
    base = np.array([f.base for f in X.faces], dtype=np.int64)
    new_eps = E.table[E.table[xi[..., dst], eps], E.inv[xi[..., src]]]
    new_phi = cm.act_table[xi[..., base], phi]
    return new_eps, new_phi


def edge_action(cm: CrossedModule, X: CellComplex, psi, eps, phi):
    psi, eps, phi = np.asarray(psi), np.asarray(eps), np.asarray(phi)
    new_eps = cm.E.table[cm.delta_table[psi], eps]
    new_phi = np.empty(np.broadcast_shapes(phi.shape, psi.shape[:-1] + (X.n_faces,)),
                       dtype=np.int64)
    for i, f in enumerate(X.faces):
        new_phi[..., i] = cm.Phi.table[psi_path(cm, eps, psi, f.boundary), phi[..., i]]
    return new_eps, new_phi


def plaquette_action(cm: CrossedModule, X: CellComplex, chi, eps, phi):
    chi, eps, phi = np.asarray(chi), np.asarray(eps), np.asarray(phi)
    return eps, cm.Phi.table[chi, phi]


def _check_lengths(values, n, what):
    if len(values) != n:
        raise StructureError(f"{what} transform needs {n} values, got {len(values)}")


def psi_extend(psi: EdgeTransform, cfg: Configuration, gamma: PathWord) -> int:
    _check_lengths(psi, cfg.X.n_edges, "edge")
    if gamma:
        cfg.X.endpoints(gamma)
    return int(psi_path(cfg.cm, cfg.eps_array, np.asarray(psi, dtype=np.int64), gamma))


def apply_vertex(xi: VertexTransform, cfg: Configuration) -> Configuration:
    _check_lengths(xi, cfg.X.n_vertices, "vertex")
    e, p = vertex_action(cfg.cm, cfg.X, np.asarray(xi, dtype=np.int64), cfg.eps_array, cfg.phi_array)
    return cfg.replace(e, p)


def apply_edge(psi: EdgeTransform, cfg: Configuration) -> Configuration:
    _check_lengths(psi, cfg.X.n_edges, "edge")
    e, p = edge_action(cfg.cm, cfg.X, np.asarray(psi, dtype=np.int64), cfg.eps_array, cfg.phi_array)
    return cfg.replace(e, p)


def apply_plaquette(chi: PlaquetteTransform, cfg: Configuration) -> Configuration:
    _check_lengths(chi, cfg.X.n_faces, "plaquette")
    K = kernel(cfg.cm)
    if any(c not in K for c in chi):
        raise StructureError("plaquette transform must take values in ker(delta)")
    e, p = plaquette_action(cfg.cm, cfg.X, np.asarray(chi, dtype=np.int64), cfg.eps_array, cfg.phi_array)
    return cfg.replace(e, p)


def vertex_as_edge(rho: Sequence[int], cfg: Configuration) -> tuple[int, ...]:
    """Edge transform psi_e = rho_t (eps_e > rho_s^-1), equivalent to xi = delta(rho)."""
    cm, X = cfg.cm, cfg.X
    _check_lengths(rho, X.n_vertices, "vertex")
    P, act = cm.Phi, cm.act
    return tuple(P.mul[rho[t]][act(cfg.eps[e], P.inverse(rho[s]))]
                 for e, (s, t) in enumerate(X.edges))


def generator_transforms(cm: CrossedModule, X: CellComplex, allowed: Iterable[str]):
    """Single-site generator transforms for each selected family.

    Yields (family, site, value, function) where the function maps batched
    (eps, phi) to the transformed pair.
    """
    allowed = set(allowed)
    unknown = allowed - set(GAUGE_FAMILIES)
    if unknown:
        raise ValueError(f"unknown gauge families {sorted(unknown)}")
    if "edge_full" in allowed:
        allowed.discard("edge_ker")
    K = kernel(cm)
    out = []
    if "vertex" in allowed:
        for v in range(X.n_vertices):
            for g in cm.E.generators:
                xi = np.zeros(X.n_vertices, dtype=np.int64)
                xi[v] = g
                out.append(("vertex", v, g, lambda e, p, xi=xi: vertex_action(cm, X, xi, e, p)))
    edge_values = ()
    if "edge_full" in allowed:
        edge_values = cm.Phi.generators
    elif "edge_ker" in allowed:
        edge_values = tuple(K.members[i] for i in K.as_group().generators)
    for e in range(X.n_edges):
        for g in edge_values:
            psi = np.zeros(X.n_edges, dtype=np.int64)
            psi[e] = g
            out.append(("edge", e, g, lambda a, b, psi=psi: edge_action(cm, X, psi, a, b)))
    if "plaquette" in allowed:
        for f in range(X.n_faces):
            for g in (K.members[i] for i in K.as_group().generators):
                chi = np.zeros(X.n_faces, dtype=np.int64)
                chi[f] = g
                out.append(("plaquette", f, g, lambda a, b, chi=chi: plaquette_action(cm, X, chi, a, b)))
    return out


@dataclass(frozen=True)
class Orbit:
    members: tuple[Configuration, ...]   # sorted in enumeration order

    @property
    def representative(self) -> Configuration:
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, cfg: Configuration) -> bool:
        return cfg in set(self.members)


def orbit(cfg: Configuration, allowed: Iterable[str] = ("vertex", "edge_ker"),
          cap: int = 10**6) -> Orbit:
    """Closure of `cfg` under the selected generator families."""
    gens = generator_transforms(cfg.cm, cfg.X, allowed)
    start = cfg.key()
    n_e = cfg.X.n_edges
    seen = {start}
    queue = deque([start])
    while queue:
        key = queue.popleft()
        eps = np.array(key[:n_e], dtype=np.int64)
        phi = np.array(key[n_e:], dtype=np.int64)
        for *_, fn in gens:
            a, b = fn(eps, phi)
            k = tuple(a.tolist()) + tuple(b.tolist())
            if k not in seen:
                seen.add(k)
                if len(seen) > cap:
                    raise CapExceeded(f"orbit larger than {cap}")
                queue.append(k)
    members = tuple(cfg.replace(k[:n_e], k[n_e:]) for k in sorted(seen))
    return Orbit(members)


def stabilizer_vertex(cfg: Configuration) -> Subgroup:
    """Values xi_* at the base vertex that extend to a vertex transform fixing eps.

    The value is transported along a spanning tree (xi_t = eps_e xi_s eps_e^-1)
    and kept if every remaining edge is fixed as well.
    """
    cm, X = cfg.cm, cfg.X
    E = cm.E
    order = _tree_order(X)
    members = []
    for g in range(E.order):
        xi = [None] * X.n_vertices
        xi[0] = g
        for e, forward in order:
            s, t = X.edges[e]
            if forward:
                xi[t] = E.conj(cfg.eps[e], xi[s])
            else:
                xi[s] = E.conj(E.inverse(cfg.eps[e]), xi[t])
        if all(E.mul[E.mul[xi[t]][cfg.eps[e]]][E.inverse(xi[s])] == cfg.eps[e]
               for e, (s, t) in enumerate(X.edges)):
            members.append(g)
    return Subgroup(E, tuple(members))


def _tree_order(X: CellComplex) -> list[tuple[int, bool]]:
    """Tree edges from vertex 0 in visiting order, with the direction they are crossed."""
    seen = {0}
    out = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for e, (s, t) in enumerate(X.edges):
            if s == v and t not in seen:
                seen.add(t)
                out.append((e, True))
                queue.append(t)
            elif t == v and s not in seen:
                seen.add(s)
                out.append((e, False))
                queue.append(s)
    if len(seen) != X.n_vertices:
        raise StructureError("complex is disconnected")
    return out


def preserves_fake_flatness(cm: CrossedModule, X: CellComplex, eps, phi) -> bool:
    return bool(np.all(fake_flat_mask(cm, X, eps, phi)))
