"""Topological predictions for ground-state degeneracies, by exhaustive search.

Nothing here builds a Hamiltonian or a gauge orbit of basis states: counts
come from homomorphisms of the fundamental group, twisted cohomology and a
direct search for flat lifts.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .algebra import CrossedModule, FiniteGroup, cokernel, induced_action, kernel
from .cohomology import Twist, twisted_H
from .complexes import CellComplex, Pi1Presentation, maximal_tree
from .configuration import ReducedGaugeField, path_product, sphere_product
from .errors import CapExceeded, StructureError

MODELS = ("HE", "HAW", "HM", "HBV")
SEARCH_CAP = 2 * 10**6


def hom_pi1_all(X: CellComplex, G: FiniteGroup, base: int = 0, edge_order=None,
                cap: int = SEARCH_CAP) -> tuple[Pi1Presentation, np.ndarray]:
    """Every tuple of generator images satisfying all relators."""
    pres = maximal_tree(X, base, edge_order)
    n = pres.n_generators
    if G.order ** n > cap:
        raise CapExceeded(f"{G.order}^{n} candidate homomorphisms exceed the cap {cap}")
    images = np.indices((G.order,) * n).reshape(n, -1).T.astype(np.int64) if n \
        else np.zeros((1, 0), dtype=np.int64)
    for rel in pres.relators:
        images = images[path_product(G, images, rel) == 0]
    return pres, images


def hom_pi1(X: CellComplex, G: FiniteGroup, base: int = 0, edge_order=None,
            cap: int = SEARCH_CAP) -> list[tuple[int, ...]]:
    """Representatives of Hom(pi_1(X), G) modulo simultaneous conjugation.

    Each representative is the lexicographically smallest tuple in its class;
    the list is sorted.
    """
    _, images = hom_pi1_all(X, G, base, edge_order, cap)
    conj = G.table[G.table[np.arange(G.order)[:, None], np.arange(G.order)[None, :]],
                   G.inv[:, None]]            # conj[g, h] = g h g^-1
    reps = set()
    for row in images:
        orbit = conj[:, row]                  # one row per conjugating element
        reps.add(min(map(tuple, orbit.tolist())))
    return sorted(reps)


def field_from_images(pres: Pi1Presentation, n_edges: int, images) -> tuple[int, ...]:
    """Edge labels equal to the identity on the tree and to the images elsewhere."""
    out = [0] * n_edges
    for e, g in zip(pres.generators, images):
        out[e] = int(g)
    return tuple(out)


def _lift_choices(cm: CrossedModule, eps_bar) -> list[tuple[int, ...]]:
    Q = cokernel(cm)
    return [Q.lifts(c) for c in eps_bar]


def _preimages(cm: CrossedModule) -> dict[int, tuple[int, ...]]:
    out: dict[int, list[int]] = {}
    for p, g in enumerate(cm.delta.map):
        out.setdefault(g, []).append(p)
    return {g: tuple(v) for g, v in out.items()}


def fake_flat_phis(cm: CrossedModule, X: CellComplex, eps, cap: int = SEARCH_CAP) -> np.ndarray:
    """All phi with delta(phi_f) = eps_{df}; empty when some holonomy is not in im(delta)."""
    pre = _preimages(cm)
    eps = np.asarray(eps, dtype=np.int64)
    choices = []
    for f in X.faces:
        g = int(path_product(cm.E, eps, f.boundary))
        if g not in pre:
            return np.zeros((0, X.n_faces), dtype=np.int64)
        choices.append(pre[g])
    total = int(np.prod([len(c) for c in choices])) if choices else 1
    if total > cap:
        raise CapExceeded(f"{total} face labellings exceed the cap {cap}")
    return np.array(list(product(*choices)), dtype=np.int64).reshape(total, X.n_faces)


def flat_phis(cm: CrossedModule, X: CellComplex, eps, cap: int = SEARCH_CAP) -> np.ndarray:
    phis = fake_flat_phis(cm, X, eps, cap)
    eps = np.asarray(eps, dtype=np.int64)
    keep = np.ones(len(phis), dtype=bool)
    for q in X.balls:
        keep &= sphere_product(cm, eps, phis, q) == 0
    return phis[keep]


def find_flat_lift(cm: CrossedModule, X: CellComplex, eps_bar,
                   cap: int = SEARCH_CAP) -> tuple[tuple[int, ...], np.ndarray] | None:
    """First lift eps of eps_bar (in lexicographic order) admitting a flat phi."""
    values = eps_bar.values if isinstance(eps_bar, ReducedGaugeField) else tuple(eps_bar)
    if len(values) != X.n_edges:
        raise StructureError("reduced field needs one value per edge")
    choices = _lift_choices(cm, values)
    n_lifts = int(np.prod([len(c) for c in choices])) if choices else 1
    if n_lifts > cap:
        raise CapExceeded(f"{n_lifts} lifts exceed the cap {cap}")
    for eps in product(*choices):
        phis = flat_phis(cm, X, eps, cap)
        if len(phis):
            return tuple(eps), phis
    return None


def flat_phi_exists(cm: CrossedModule, X: CellComplex, eps_bar, cap: int = SEARCH_CAP) -> bool:
    """Whether some lift of eps_bar carries a fake-flat phi with phi_{dq} = 1 on every ball."""
    return find_flat_lift(cm, X, eps_bar, cap) is not None


@dataclass(frozen=True)
class ClassCount:
    eps_bar_repr: tuple[int, ...]
    subcount: int


@dataclass(frozen=True)
class OracleReport:
    model: str
    count: int
    classes: tuple[ClassCount, ...]
    complex_name: str = ""
    module_name: str = ""

    def to_dict(self) -> dict:
        return {"model": self.model, "count": self.count,
                "classes": [{"eps_bar_repr": list(c.eps_bar_repr), "subcount": c.subcount}
                            for c in self.classes]}


def kernel_twist(cm: CrossedModule, X: CellComplex, eps) -> Twist:
    """The coker-twist on ker(delta) induced by an E-valued edge field."""
    Q = cokernel(cm)
    alpha = tuple(int(Q.projection[e]) for e in eps)
    return Twist(X, induced_action(cm), alpha)


def _orbit_count(n: int, moves: list[list[int]]) -> int:
    """Number of orbits of {0..n-1} under the given maps (union-find)."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for m in moves:
        for a, b in enumerate(m):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    return len({find(a) for a in range(n)})


def _hm_class(cm: CrossedModule, X: CellComplex, pres, images, cap) -> int:
    eps = field_from_images(pres, X.n_edges, images)
    H2 = twisted_H(X, kernel_twist(cm, X, eps), 2, cap)
    K = kernel(cm)
    stab = cm.E.centralizer(images).members
    # a stabilizing vertex transform is constant (eps is trivial on the tree)
    moves = []
    for xi in stab:
        row = []
        for rep in H2.representatives:
            moved = [K.position[cm.act(xi, K.members[k])] for k in rep]
            row.append(H2.class_of(moved))
        moves.append(row)
    return _orbit_count(H2.order, moves)


def _phi_path(cm: CrossedModule, eps, psi, w) -> int:
    """psi extended along a path with the raw E-action (psi need not lie in ker)."""
    E, P, act = cm.E, cm.Phi, cm.act
    acc, prefix = 0, 0
    for e, s in w:
        x, y = eps[e], psi[e]
        if s < 0:
            x = E.inverse(x)
            y = P.inverse(act(x, y))
        acc = P.mul[acc][act(prefix, y)]
        prefix = E.mul[prefix][x]
    return acc


def _hbv_class(cm: CrossedModule, X: CellComplex, pres, images, cap) -> int:
    eps_bar = field_from_images(pres, X.n_edges, images)
    found = find_flat_lift(cm, X, eps_bar, cap)
    if found is None:
        return 0
    eps, phis = found
    return _flat_phi_orbits(cm, X, eps, phis, images, cap)


def _flat_phi_orbits(cm, X, eps, phis, images_bar, cap) -> int:
    """|F(eps) // Stab_V(eps_bar)| for a lift eps carrying the flat phis."""
    Q = cokernel(cm)
    K = kernel(cm)
    H2 = twisted_H(X, kernel_twist(cm, X, eps), 2, cap)
    boundaries = np.array(H2.coboundaries, dtype=np.int64).reshape(len(H2.coboundaries), -1)
    kmembers = np.array(K.members, dtype=np.int64)
    # classes of flat phi modulo ker-valued edge transforms: phi ~ phi' iff phi' phi^-1 in B
    keys = {tuple(p): i for i, p in enumerate(phis.tolist())}
    cls = [-1] * len(phis)
    n_cls = 0
    for i, p in enumerate(phis):
        if cls[i] >= 0:
            continue
        for b in boundaries:
            q = cm.Phi.table[kmembers[b], p]
            cls[keys[tuple(q.tolist())]] = n_cls
        n_cls += 1
    if n_cls != H2.order:
        raise StructureError("flat 2-form classes do not form a torsor over H^2")

    pre = _preimages(cm)
    moves = []
    for xi_bar in Q.group.centralizer(images_bar).members:
        xi = Q.representative(xi_bar)
        psi = []
        for e in eps:
            mu = cm.E.mul[cm.E.mul[cm.E.inverse(xi)][e]][cm.E.mul[xi][cm.E.inverse(e)]]
            psi.append(pre[mu][0])
        move = list(range(n_cls))
        for k, p in enumerate(phis.tolist()):
            moved = tuple(cm.act(xi, cm.Phi.mul[_phi_path(cm, eps, psi, f.boundary)][p[i]])
                          for i, f in enumerate(X.faces))
            if moved not in keys:
                raise StructureError("lifted stabilizer does not preserve the flat set")
            move[cls[k]] = cls[keys[moved]]
        moves.append(move)
    return _orbit_count(n_cls, moves)


def ground_count(X: CellComplex, cm: CrossedModule, model: str,
                 cap: int = SEARCH_CAP) -> OracleReport:
    """Predicted ground-state degeneracy of one of the four solvable models."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    classes = []
    if model in ("HE", "HBV"):
        G = cokernel(cm).group
    else:
        G = cm.E
    pres = maximal_tree(X)
    for images in hom_pi1(X, G, cap=cap):
        if model in ("HE", "HAW"):
            sub = 1
        elif model == "HM":
            sub = _hm_class(cm, X, pres, images, cap)
        else:
            sub = _hbv_class(cm, X, pres, images, cap)
        classes.append(ClassCount(tuple(images), sub))
    return OracleReport(model, sum(c.subcount for c in classes), tuple(classes),
                        X.name, cm.name)
