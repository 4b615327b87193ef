"""Finite groups as Cayley tables, group actions and crossed modules.

Every group keeps its identity at index 0.  Elements are plain integers and
all semantics live in the tables; names are only for display.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import StructureError

Table = tuple[tuple[int, ...], ...]


def _as_table(rows: Iterable[Iterable[int]]) -> Table:
    return tuple(tuple(int(x) for x in row) for row in rows)


def group_problems(mul: Sequence[Sequence[int]]) -> list[str]:
    """Return the reasons `mul` is not a group table with identity 0."""
    n = len(mul)
    if n == 0:
        return ["empty table"]
    if any(len(row) != n for row in mul):
        return ["table is not square"]
    t = np.asarray(mul, dtype=np.int64)
    if t.min() < 0 or t.max() >= n:
        return ["entry out of range"]
    problems = []
    idx = np.arange(n)
    if not (np.array_equal(t[0], idx) and np.array_equal(t[:, 0], idx)):
        problems.append("index 0 is not a two-sided identity")
    # t[t[a,b],c] == t[a,t[b,c]] over all triples
    left = t[t[:, :, None], idx[None, None, :]]
    right = t[idx[:, None, None], t[None, :, :]]
    if not np.array_equal(left, right):
        a, b, c = map(int, np.argwhere(left != right)[0])
        problems.append(f"not associative at {(a, b, c)}")
    for a in range(n):
        if not np.any((t[a] == 0) & (t[:, a] == 0)):
            problems.append(f"element {a} has no two-sided inverse")
            break
    return problems


@dataclass(frozen=True, eq=True)
class FiniteGroup:
    mul: Table
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mul", _as_table(self.mul))
        problems = group_problems(self.mul)
        if problems:
            raise StructureError("; ".join(problems))
        if self.names is not None:
            names = tuple(str(x) for x in self.names)
            if len(names) != len(self.mul):
                raise StructureError("names do not match group order")
            object.__setattr__(self, "names", names)

    identity = 0

    @property
    def order(self) -> int:
        return len(self.mul)

    def __len__(self) -> int:
        return len(self.mul)

    @cached_property
    def table(self) -> np.ndarray:
        t = np.array(self.mul, dtype=np.int64)
        t.setflags(write=False)
        return t

    @cached_property
    def inv(self) -> np.ndarray:
        t = self.table
        out = np.argmax(t == 0, axis=1)
        out.setflags(write=False)
        return out

    def op(self, a: int, b: int) -> int:
        return self.mul[a][b]

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def prod(self, elements: Iterable[int]) -> int:
        acc = 0
        for x in elements:
            acc = self.mul[acc][x]
        return acc

    def conj(self, g: int, h: int) -> int:
        """g h g^-1"""
        return self.mul[self.mul[g][h]][self.inverse(g)]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.mul[x][a]
            k += 1
        return k

    def name(self, a: int) -> str:
        return self.names[a] if self.names else str(a)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def center(self) -> "Subgroup":
        t = self.table
        members = [a for a in range(self.order) if np.array_equal(t[a], t[:, a])]
        return Subgroup(self, tuple(members))

    def centralizer(self, elements: Iterable[int]) -> "Subgroup":
        elements = list(elements)
        members = [g for g in range(self.order)
                   if all(self.mul[g][x] == self.mul[x][g] for x in elements)]
        return Subgroup(self, tuple(members))

    def generated(self, gens: Iterable[int]) -> "Subgroup":
        return Subgroup(self, tuple(sorted(closure(self, gens))))

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """A small generating set, chosen greedily by decreasing element order."""
        by_order = sorted(range(1, self.order), key=lambda a: (-self.element_order(a), a))
        gens: list[int] = []
        seen = {0}
        for a in by_order:
            if a not in seen:
                gens.append(a)
                seen = closure(self, gens)
                if len(seen) == self.order:
                    break
        return tuple(gens)


def closure(G: FiniteGroup, gens: Iterable[int]) -> set[int]:
    gens = list(gens)
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.mul[x][g]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        object.__setattr__(self, "members", members)
        s = set(members)
        if 0 not in s:
            raise StructureError("subgroup must contain the identity")
        for a in members:
            if self.parent.inverse(a) not in s:
                raise StructureError(f"subgroup not closed under inverse at {a}")
            for b in members:
                if self.parent.mul[a][b] not in s:
                    raise StructureError(f"subgroup not closed at {(a, b)}")

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, a: int) -> bool:
        return a in self._set

    def __iter__(self):
        return iter(self.members)

    @cached_property
    def _set(self) -> frozenset[int]:
        return frozenset(self.members)

    @cached_property
    def position(self) -> dict[int, int]:
        return {m: i for i, m in enumerate(self.members)}

    def is_normal(self) -> bool:
        G = self.parent
        return all(G.conj(g, h) in self for g in range(G.order) for h in self.members)

    def as_group(self) -> FiniteGroup:
        """The subgroup as a group in its own right, indexed by position in `members`."""
        pos = self.position
        mul = [[pos[self.parent.mul[a][b]] for b in self.members] for a in self.members]
        names = None
        if self.parent.names:
            names = tuple(self.parent.names[a] for a in self.members)
        return FiniteGroup(mul, names)


@dataclass(frozen=True)
class QuotientGroup:
    parent: FiniteGroup
    normal: Subgroup

    def __post_init__(self):
        if not self.normal.is_normal():
            raise StructureError("quotient by a subgroup that is not normal")

    @cached_property
    def cosets(self) -> tuple[tuple[int, ...], ...]:
        """Left cosets ordered by smallest member; the identity coset comes first."""
        G = self.parent
        seen: set[int] = set()
        out = []
        for g in range(G.order):
            if g in seen:
                continue
            coset = tuple(sorted(G.mul[g][h] for h in self.normal.members))
            seen.update(coset)
            out.append(coset)
        return tuple(out)

    @cached_property
    def projection(self) -> np.ndarray:
        proj = np.empty(self.parent.order, dtype=np.int64)
        for i, coset in enumerate(self.cosets):
            proj[list(coset)] = i
        proj.setflags(write=False)
        return proj

    @cached_property
    def group(self) -> FiniteGroup:
        G = self.parent
        proj = self.projection
        mul = [[int(proj[G.mul[a[0]][b[0]]]) for b in self.cosets] for a in self.cosets]
        names = None
        if G.names:
            names = tuple("[" + G.names[c[0]] + "]" for c in self.cosets)
        return FiniteGroup(mul, names)

    @property
    def order(self) -> int:
        return len(self.cosets)

    def representative(self, c: int) -> int:
        return self.cosets[c][0]

    def lifts(self, c: int) -> tuple[int, ...]:
        return self.cosets[c]


@dataclass(frozen=True)
class GroupHomomorphism:
    source: FiniteGroup
    target: FiniteGroup
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(x) for x in self.map))
        if len(self.map) != self.source.order:
            raise StructureError("homomorphism table length differs from source order")
        if any(not 0 <= x < self.target.order for x in self.map):
            raise StructureError("homomorphism value out of range")

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.map, dtype=np.int64)
        a.setflags(write=False)
        return a

    def __call__(self, a: int) -> int:
        return self.map[a]

    def violations(self) -> list[tuple[int, int]]:
        S, T, f = self.source, self.target, self.map
        return [(a, b) for a in range(S.order) for b in range(S.order)
                if f[S.mul[a][b]] != T.mul[f[a]][f[b]]]

    def is_homomorphism(self) -> bool:
        return self.map[0] == 0 and not self.violations()

    def kernel(self) -> Subgroup:
        return Subgroup(self.source, tuple(a for a, x in enumerate(self.map) if x == 0))

    def image(self) -> Subgroup:
        return Subgroup(self.target, tuple(sorted(set(self.map))))

    def is_bijective(self) -> bool:
        return sorted(self.map) == list(range(self.target.order)) and \
            self.source.order == self.target.order


@dataclass(frozen=True)
class GroupAction:
    actor: FiniteGroup
    space: FiniteGroup
    act: Table

    def __post_init__(self):
        object.__setattr__(self, "act", _as_table(self.act))
        if len(self.act) != self.actor.order or \
                any(len(row) != self.space.order for row in self.act):
            raise StructureError("action table shape differs from (actor, space) orders")
        if any(not 0 <= x < self.space.order for row in self.act for x in row):
            raise StructureError("action value out of range")

    @cached_property
    def table(self) -> np.ndarray:
        t = np.array(self.act, dtype=np.int64)
        t.setflags(write=False)
        return t

    def __call__(self, g: int, h: int) -> int:
        return self.act[g][h]

    def violations(self) -> dict[str, list[tuple[int, ...]]]:
        """Witnesses for each failed action axiom, keyed by axiom name."""
        G, H, a = self.actor, self.space, self.act
        out: dict[str, list[tuple[int, ...]]] = {}
        bad = [(h,) for h in range(H.order) if a[0][h] != h]
        if bad:
            out["action_identity"] = bad
        bad = [(g, g2, h) for g in range(G.order) for g2 in range(G.order)
               for h in range(H.order) if a[G.mul[g][g2]][h] != a[g][a[g2][h]]]
        if bad:
            out["action_compatibility"] = bad
        bad = [(g, h, h2) for g in range(G.order) for h in range(H.order)
               for h2 in range(H.order) if a[g][H.mul[h][h2]] != H.mul[a[g][h]][a[g][h2]]]
        if bad:
            out["action_automorphism"] = bad
        return out

    def is_action(self) -> bool:
        return not self.violations()


@dataclass(frozen=True)
class CrossedModule:
    E: FiniteGroup
    Phi: FiniteGroup
    delta: GroupHomomorphism
    act: GroupAction
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.delta.source != self.Phi or self.delta.target != self.E:
            raise StructureError("delta must map Phi to E")
        if self.act.actor != self.E or self.act.space != self.Phi:
            raise StructureError("action must be of E on Phi")

    @classmethod
    def from_tables(cls, E: FiniteGroup, Phi: FiniteGroup, delta: Sequence[int],
                    act: Sequence[Sequence[int]], name: str = "") -> "CrossedModule":
        return cls(E, Phi, GroupHomomorphism(Phi, E, tuple(delta)),
                   GroupAction(E, Phi, _as_table(act)), name)

    @cached_property
    def delta_table(self) -> np.ndarray:
        return self.delta.array

    @cached_property
    def act_table(self) -> np.ndarray:
        return self.act.table

    def __repr__(self) -> str:
        return f"CrossedModule({self.name or '?'}: |E|={self.E.order}, |Phi|={self.Phi.order})"


@dataclass(frozen=True)
class Violation:
    axiom: str
    witnesses: tuple[tuple[int, ...], ...]

    @property
    def witness(self) -> tuple[int, ...]:
        return self.witnesses[0]


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def axioms(self) -> list[str]:
        return [v.axiom for v in self.violations]

    def get(self, axiom: str) -> Violation | None:
        for v in self.violations:
            if v.axiom == axiom:
                return v
        return None

    def to_dict(self) -> dict:
        return {"ok": self.ok,
                "violations": [{"axiom": v.axiom, "witness": list(v.witness),
                                "count": len(v.witnesses)} for v in self.violations]}


def validate_crossed_module(cm: CrossedModule) -> ValidationReport:
    """Check the action axioms, that delta is a homomorphism, and both Peiffer identities."""
    E, P = cm.E, cm.Phi
    d, a = cm.delta.map, cm.act.act
    found: list[Violation] = []
    bad = cm.delta.violations()
    if d[0] != 0:
        bad = [(0, 0)] + bad
    if bad:
        found.append(Violation("delta_homomorphism", tuple(bad)))
    for axiom, bad in cm.act.violations().items():
        found.append(Violation(axiom, tuple(bad)))
    bad = [(e, p) for e in range(E.order) for p in range(P.order)
           if d[a[e][p]] != E.conj(e, d[p])]
    if bad:
        found.append(Violation("peiffer_1", tuple(bad)))
    bad = [(p, q) for p in range(P.order) for q in range(P.order)
           if a[d[p]][q] != P.conj(p, q)]
    if bad:
        found.append(Violation("peiffer_2", tuple(bad)))
    return ValidationReport(tuple(found))


def kernel(cm: CrossedModule) -> Subgroup:
    return cm.delta.kernel()


def image(cm: CrossedModule) -> Subgroup:
    return cm.delta.image()


def cokernel(cm: CrossedModule) -> QuotientGroup:
    return QuotientGroup(cm.E, image(cm))


def induced_action(cm: CrossedModule) -> GroupAction:
    """coker(delta) acting on ker(delta); ker is indexed by position in `kernel(cm).members`."""
    K, Q = kernel(cm), cokernel(cm)
    pos = K.position
    rows = []
    for coset in Q.cosets:
        row = [pos[cm.act.act[coset[0]][k]] for k in K.members]
        for g in coset[1:]:
            if [pos[cm.act.act[g][k]] for k in K.members] != row:
                raise StructureError("induced action depends on the coset representative")
        rows.append(row)
    return GroupAction(Q.group, K.as_group(), rows)


def special_subgroups(cm: CrossedModule) -> tuple[Subgroup, Subgroup]:
    """(E0, Phi0): central elements of E acting trivially, and E-fixed elements of ker."""
    E, a = cm.E, cm.act.act
    center = E.center()
    e0 = tuple(g for g in center.members if all(a[g][p] == p for p in range(cm.Phi.order)))
    phi0 = tuple(k for k in kernel(cm).members if all(a[g][k] == k for g in range(E.order)))
    return Subgroup(E, e0), Subgroup(cm.Phi, phi0)


@dataclass(frozen=True)
class HomReport:
    is_hom: bool
    is_weak_iso: bool
    problems: tuple[str, ...] = ()


def crossed_module_hom(src: CrossedModule, dst: CrossedModule,
                       E_map: Sequence[int], F_map: Sequence[int]) -> HomReport:
    """Decide whether (E_map, F_map) is a crossed-module map, and a weak isomorphism."""
    Em = GroupHomomorphism(src.E, dst.E, tuple(E_map))
    Fm = GroupHomomorphism(src.Phi, dst.Phi, tuple(F_map))
    problems = []
    if not Em.is_homomorphism():
        problems.append("E map is not a homomorphism")
    if not Fm.is_homomorphism():
        problems.append("F map is not a homomorphism")
    if any(dst.delta.map[Fm.map[p]] != Em.map[src.delta.map[p]] for p in range(src.Phi.order)):
        problems.append("delta' F != E delta")
    if any(Fm.map[src.act.act[e][p]] != dst.act.act[Em.map[e]][Fm.map[p]]
           for e in range(src.E.order) for p in range(src.Phi.order)):
        problems.append("F does not intertwine the actions")
    if problems:
        return HomReport(False, False, tuple(problems))

    Qs, Qd = cokernel(src), cokernel(dst)
    coker_map = [int(Qd.projection[Em.map[c[0]]]) for c in Qs.cosets]
    Ks, Kd = kernel(src), kernel(dst)
    ker_map = [Fm.map[k] for k in Ks.members]
    weak = True
    if sorted(coker_map) != list(range(Qd.order)):
        problems.append("induced cokernel map is not bijective")
        weak = False
    if len(ker_map) != Kd.order or set(ker_map) != set(Kd.members):
        problems.append("induced kernel map is not bijective")
        weak = False
    return HomReport(True, weak, tuple(problems))


def group_homomorphisms(S: FiniteGroup, T: FiniteGroup) -> list[tuple[int, ...]]:
    """All homomorphisms S -> T, by assigning images to a generating set."""
    gens = S.generators
    if not gens:
        return [(0,) * S.order]
    choices = [[t for t in range(T.order) if S.element_order(g) % T.element_order(t) == 0]
               for g in gens]
    out = []
    for images in itertools.product(*choices):
        f = _extend_on_generators(S, T, gens, images)
        if f is not None and GroupHomomorphism(S, T, f).is_homomorphism():
            out.append(f)
    return out


def _extend_on_generators(S, T, gens, images) -> tuple[int, ...] | None:
    f = {0: 0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g, t in zip(gens, images):
            y, fy = S.mul[x][g], T.mul[f[x]][t]
            if y in f:
                if f[y] != fy:
                    return None
            else:
                f[y] = fy
                queue.append(y)
    return tuple(f[a] for a in range(S.order))


def group_automorphisms(G: FiniteGroup) -> list[tuple[int, ...]]:
    return [f for f in group_homomorphisms(G, G) if len(set(f)) == G.order]


def crossed_module_homs(src: CrossedModule, dst: CrossedModule) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    out = []
    Fs = group_homomorphisms(src.Phi, dst.Phi)
    for Em in group_homomorphisms(src.E, dst.E):
        for Fm in Fs:
            if crossed_module_hom(src, dst, Em, Fm).is_hom:
                out.append((Em, Fm))
    return out


def weak_isomorphisms(src: CrossedModule, dst: CrossedModule):
    return [(Em, Fm) for Em, Fm in crossed_module_homs(src, dst)
            if crossed_module_hom(src, dst, Em, Fm).is_weak_iso]


def automorphisms(cm: CrossedModule) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs (E, F) of group automorphisms forming a crossed-module automorphism."""
    out = []
    Fs = group_automorphisms(cm.Phi)
    for Em in group_automorphisms(cm.E):
        for Fm in Fs:
            if crossed_module_hom(cm, cm, Em, Fm).is_hom:
                out.append((Em, Fm))
    return out


def inner_automorphism(cm: CrossedModule, xi: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    E = cm.E
    return (tuple(E.conj(xi, e) for e in range(E.order)),
            tuple(cm.act.act[xi][p] for p in range(cm.Phi.order)))


# ---------------------------------------------------------------- constructors

def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)],
                       tuple(str(a) for a in range(n)))


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], ("1",))


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n.  Element r^k s^j has index k + n*j."""
    def mul(a, b):
        k1, j1 = a % n, a // n
        k2, j2 = b % n, b // n
        # r^k1 s^j1 r^k2 s^j2 = r^(k1 + (-1)^j1 k2) s^(j1+j2)
        k = (k1 + (k2 if j1 == 0 else -k2)) % n
        return k + n * ((j1 + j2) % 2)
    names = tuple(("r%d" % k if k else "1") if j == 0 else ("r%ds" % k if k else "s")
                  for j in range(2) for k in range(n))
    return FiniteGroup([[mul(a, b) for b in range(2 * n)] for a in range(2 * n)], names)


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Pairs (g, h) indexed g*|H| + h."""
    m = H.order
    mul = [[G.mul[a // m][b // m] * m + H.mul[a % m][b % m]
            for b in range(G.order * m)] for a in range(G.order * m)]
    names = tuple(f"({G.name(a // m)},{H.name(a % m)})" for a in range(G.order * m))
    return FiniteGroup(mul, names)


def d4_with_xyz() -> tuple[FiniteGroup, dict[str, int]]:
    """D4 with the reflections x, y and central z = (xy)^2 singled out.

    x^2 = y^2 = z^2 = 1, z central, xy = zyx.
    """
    G = dihedral(4)
    x = 4          # s
    y = 1 + 4      # r s
    z = 2          # r^2
    return G, {"x": x, "y": y, "z": z}


def identity_module(G: FiniteGroup, name: str = "") -> CrossedModule:
    """Delta = id and conjugation action: ordinary lattice gauge theory."""
    return CrossedModule.from_tables(
        G, G, range(G.order),
        [[G.conj(g, h) for h in range(G.order)] for g in range(G.order)], name)


def two_form_module(A: FiniteGroup, name: str = "") -> CrossedModule:
    """Trivial E over an abelian group: pure 2-form gauge theory."""
    E = trivial_group()
    return CrossedModule.from_tables(E, A, [0] * A.order, [list(range(A.order))], name)


def trivial_delta_module(E: FiniteGroup, A: FiniteGroup, act, name: str = "") -> CrossedModule:
    return CrossedModule.from_tables(E, A, [0] * A.order, act, name)


def g44() -> CrossedModule:
    Z4 = cyclic(4)
    return CrossedModule.from_tables(
        Z4, Z4, [(2 * n) % 4 for n in range(4)],
        [[n if m % 2 == 0 else (-n) % 4 for n in range(4)] for m in range(4)], "G44")


def d4_z2() -> CrossedModule:
    D4, gens = d4_with_xyz()
    z = gens["z"]
    Z2 = cyclic(2)
    return CrossedModule.from_tables(D4, Z2, [0, z], [[0, 1]] * D4.order, "D4_Z2")


def embed_z2_z4() -> CrossedModule:
    """E = Z4, Phi = Z2, delta(1) = 2, trivial action."""
    return CrossedModule.from_tables(cyclic(4), cyclic(2), [0, 2], [[0, 1]] * 4, "EMBED_Z2_Z4")


def pure_group_module(G: FiniteGroup, name: str = "") -> CrossedModule:
    """Phi trivial: a flat E gauge field with no 2-form part."""
    return CrossedModule.from_tables(G, trivial_group(), [0], [[0]] * G.order, name)


def builtin_modules() -> dict[str, CrossedModule]:
    Z2, Z3, Z4 = cyclic(2), cyclic(3), cyclic(4)
    D4, _ = d4_with_xyz()
    z4_rp2 = g44()
    z4_rp2 = CrossedModule(z4_rp2.E, z4_rp2.Phi, z4_rp2.delta, z4_rp2.act, "Z4_RP2")
    return {
        "G44": g44(),
        "Z4_RP2": z4_rp2,
        "D4_Z2": d4_z2(),
        "YM_Z2": identity_module(Z2, "YM_Z2"),
        "YM_Z4": identity_module(Z4, "YM_Z4"),
        "YM_D4": identity_module(D4, "YM_D4"),
        "2FORM_Z2": two_form_module(Z2, "2FORM_Z2"),
        "2FORM_Z4": two_form_module(Z4, "2FORM_Z4"),
        "TWIST_Z2_Z3": trivial_delta_module(Z2, Z3, [[0, 1, 2], [0, 2, 1]], "TWIST_Z2_Z3"),
        "EMBED_Z2_Z4": embed_z2_z4(),
        "PURE_Z2": pure_group_module(Z2, "PURE_Z2"),
    }


def two_form_part(cm: CrossedModule) -> CrossedModule:
    """The 2-form theory over ker(delta) with trivial E."""
    K = kernel(cm).as_group()
    if not K.is_abelian:
        raise StructureError("kernel of delta is not abelian")
    return two_form_module(K, (cm.name or "cm") + "_ker")


def yang_mills_part(cm: CrossedModule) -> CrossedModule:
    """Ordinary gauge theory with gauge group im(delta)."""
    return identity_module(image(cm).as_group(), (cm.name or "cm") + "_im")
