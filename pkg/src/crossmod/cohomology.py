"""Twisted cochains on a cell complex and their cohomology, by brute force.

Coefficients live in an abelian group K (indexed by its own elements), acted
on by a group G; the twist assigns an element of G to every edge.  Cochains
are integer arrays and may carry leading batch axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import FiniteGroup, GroupAction
from .complexes import CellComplex, PathWord, SphereWord
from .configuration import path_product
from .errors import CapExceeded, StructureError

COCHAIN_CAP = 2 * 10**6


@dataclass(frozen=True)
class Twist:
    X: CellComplex
    action: GroupAction      # G acting on the abelian coefficient group K
    alpha: tuple[int, ...]   # element of G on each edge

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if len(self.alpha) != self.X.n_edges:
            raise StructureError("twist needs one value per edge")
        if not self.action.space.is_abelian:
            raise StructureError("coefficient group must be abelian")

    @property
    def G(self) -> FiniteGroup:
        return self.action.actor

    @property
    def K(self) -> FiniteGroup:
        return self.action.space

    @cached_property
    def alpha_array(self) -> np.ndarray:
        return np.array(self.alpha, dtype=np.int64)

    def along(self, w: PathWord) -> int:
        return int(path_product(self.G, self.alpha_array, w))

    def is_flat(self) -> bool:
        return all(self.along(f.boundary) == 0 for f in self.X.faces)


def trivial_twist(X: CellComplex, K: FiniteGroup) -> Twist:
    from .algebra import trivial_group
    G = trivial_group()
    return Twist(X, GroupAction(G, K, [list(range(K.order))]), (0,) * X.n_edges)


def n_cells(X: CellComplex, degree: int) -> int:
    return [X.n_vertices, X.n_edges, X.n_faces, X.n_balls][degree]


@dataclass(frozen=True)
class TwistedCochain:
    degree: int
    twist: Twist
    data: tuple[int, ...]

    def __post_init__(self):
        if self.degree not in (0, 1, 2, 3):
            raise StructureError(f"unsupported cochain degree {self.degree}")
        object.__setattr__(self, "data", tuple(int(x) for x in self.data))
        if len(self.data) != n_cells(self.twist.X, self.degree):
            raise StructureError("cochain length differs from the number of cells")

    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.data)


def extend_path(twist: Twist, psi: np.ndarray, w: PathWord) -> np.ndarray:
    """A 1-cochain on a path: psi_{g g'} = psi_g + alpha_g > psi_g'."""
    K, G, act = twist.K, twist.G, twist.action.table
    psi = np.asarray(psi)
    acc = np.zeros(psi.shape[:-1], dtype=np.int64)
    prefix = 0
    for e, s in w:
        a, y = twist.alpha[e], psi[..., e]
        if s < 0:
            a = int(G.inv[a])
            y = K.inv[act[a, y]]
        acc = K.table[acc, act[prefix, y]]
        prefix = G.mul[prefix][a]
    return acc


def extend_sphere(twist: Twist, chi: np.ndarray, sw: SphereWord) -> np.ndarray:
    """A 2-cochain on a sphere word: sum of (alpha_whisker > chi_face)^sign."""
    K, act = twist.K, twist.action.table
    chi = np.asarray(chi)
    acc = np.zeros(chi.shape[:-1], dtype=np.int64)
    for t in sw.terms:
        x = act[twist.along(t.whisker), chi[..., t.face]]
        if t.sign < 0:
            x = K.inv[x]
        acc = K.table[acc, x]
    return acc


def delta(twist: Twist, degree: int, data: np.ndarray) -> np.ndarray:
    """Batched differential from `degree` to `degree + 1`."""
    X, K, act = twist.X, twist.K, twist.action.table
    data = np.asarray(data, dtype=np.int64)
    if degree == 0:
        out = np.empty(data.shape[:-1] + (X.n_edges,), dtype=np.int64)
        for e, (s, t) in enumerate(X.edges):
            out[..., e] = K.table[data[..., t], act[twist.alpha[e], K.inv[data[..., s]]]]
        return out
    if degree == 1:
        out = np.empty(data.shape[:-1] + (X.n_faces,), dtype=np.int64)
        for i, f in enumerate(X.faces):
            out[..., i] = extend_path(twist, data, f.boundary)
        return out
    if degree == 2:
        out = np.empty(data.shape[:-1] + (X.n_balls,), dtype=np.int64)
        for i, q in enumerate(X.balls):
            out[..., i] = extend_sphere(twist, data, q)
        return out
    raise StructureError(f"no differential out of degree {degree}")


def differential(c: TwistedCochain) -> TwistedCochain:
    out = delta(c.twist, c.degree, np.array(c.data, dtype=np.int64))
    return TwistedCochain(c.degree + 1, c.twist, tuple(out.tolist()))


def all_cochains(K: FiniteGroup, n: int, cap: int = COCHAIN_CAP) -> np.ndarray:
    if K.order ** n > cap:
        raise CapExceeded(f"{K.order}^{n} cochains exceed the cap {cap}")
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((K.order,) * n).reshape(n, -1).T
    return grid.astype(np.int64)


def _codes(rows: np.ndarray, base: int) -> np.ndarray:
    n = rows.shape[1]
    weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return rows @ weights if n else np.zeros(len(rows), dtype=np.int64)


@dataclass(frozen=True)
class CohomologyGroup:
    degree: int
    twist: Twist
    representatives: tuple[tuple[int, ...], ...]
    n_cocycles: int
    n_coboundaries: int
    invariant_factors: tuple[int, ...]
    coboundaries: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.representatives)

    @cached_property
    def _boundary_array(self) -> np.ndarray:
        return np.array(self.coboundaries, dtype=np.int64).reshape(len(self.coboundaries), -1)

    @cached_property
    def _class_of_code(self) -> dict[int, int]:
        K = self.twist.K
        table = {}
        for i, r in enumerate(self.representatives):
            shifted = K.table[np.array(r, dtype=np.int64)[None, :], self._boundary_array]
            for c in _codes(shifted, K.order).tolist():
                table[c] = i
        return table

    def class_of(self, cocycle) -> int:
        """Index of the representative cohomologous to `cocycle`."""
        row = np.array(cocycle, dtype=np.int64)[None, :]
        code = int(_codes(row, self.twist.K.order)[0])
        try:
            return self._class_of_code[code]
        except KeyError:
            raise StructureError("not a cocycle of this group") from None


def twisted_H(X: CellComplex, twist: Twist, degree: int,
              cap: int = COCHAIN_CAP) -> CohomologyGroup:
    """H^degree(X, K, alpha) by enumerating cocycles and coboundaries."""
    if degree not in (0, 1, 2):
        raise StructureError("cohomology is computed in degrees 0, 1 and 2 only")
    if twist.X != X:
        raise StructureError("twist lives on a different complex")
    if not twist.is_flat():
        raise StructureError("twist is not flat")
    K = twist.K
    cochains = all_cochains(K, n_cells(X, degree), cap)
    if degree < 2 or X.n_balls:
        d = delta(twist, degree, cochains)
        cocycles = cochains[np.all(d == 0, axis=1)]
    else:
        cocycles = cochains
    if degree == 0:
        boundaries = np.zeros((1, X.n_vertices), dtype=np.int64)
    else:
        boundaries = delta(twist, degree - 1, all_cochains(K, n_cells(X, degree - 1), cap))
    b_codes, idx = np.unique(_codes(boundaries, K.order), return_index=True)
    boundaries = boundaries[idx]

    z_codes = _codes(cocycles, K.order)
    assigned = np.zeros(len(cocycles), dtype=bool)
    position = {c: i for i, c in enumerate(z_codes.tolist())}
    reps = []
    for i in range(len(cocycles)):
        if assigned[i]:
            continue
        reps.append(tuple(cocycles[i].tolist()))
        shifted = K.table[cocycles[i][None, :], boundaries]
        for c in _codes(shifted, K.order).tolist():
            assigned[position[c]] = True
    factors = _invariant_factors(K, cocycles, set(b_codes.tolist()), len(boundaries))
    return CohomologyGroup(degree, twist, tuple(reps), len(cocycles), len(boundaries),
                           factors, tuple(tuple(r) for r in boundaries.tolist()))


def _power(K: FiniteGroup, x: np.ndarray, n: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for _ in range(n):
        acc = K.table[acc, x]
    return acc


def _primes(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _invariant_factors(K, cocycles, boundary_codes, n_boundaries) -> tuple[int, ...]:
    """Invariant factors of Z/B read off from the sizes of its p^k-torsion subgroups."""
    order = len(cocycles) // n_boundaries

    def torsion(n):
        powered = _codes(_power(K, cocycles, n), K.order).tolist()
        return sum(c in boundary_codes for c in powered) // n_boundaries

    columns = []
    for p in _primes(order):
        # at_least[k-1] = number of cyclic factors of order >= p^k
        at_least, prev, k = [], 1, 1
        while True:
            size = torsion(p ** k)
            r = round(math.log(size / prev, p))
            if r == 0:
                break
            at_least.append(r)
            prev, k = size, k + 1
        powers = []
        for k, r in enumerate(at_least, start=1):
            nxt = at_least[k] if k < len(at_least) else 0
            powers.extend([p ** k] * (r - nxt))
        columns.append(sorted(powers, reverse=True))
    width = max((len(c) for c in columns), default=0)
    factors = [1] * width
    for powers in columns:
        for i, q in enumerate(powers):
            factors[i] *= q
    return tuple(sorted(factors))
