"""Combinatorial cell complexes of dimension <= 3.

A path word is a tuple of (edge, sign) letters.  Words compose like
functions: the last listed letter is traversed first, so the word for
e_n ... e_1 lists e_n first.  A sphere word is an ordered product of
whiskered, signed faces; its boundary is the product of the conjugated face
boundaries and must cancel freely.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algebra import ValidationReport, Violation
from .errors import MalformedWord, StructureError

Letter = tuple[int, int]
PathWord = tuple[Letter, ...]


def word(letters: Iterable[Sequence[int]]) -> PathWord:
    out = tuple((int(e), int(s)) for e, s in letters)
    for _, s in out:
        if s not in (1, -1):
            raise MalformedWord(f"sign must be +1 or -1, got {s}")
    return out


def inverse(w: PathWord) -> PathWord:
    return tuple((e, -s) for e, s in reversed(w))


def free_reduce(w: PathWord) -> PathWord:
    """Cancel adjacent e e^-1 pairs until none remain."""
    stack: list[Letter] = []
    for e, s in w:
        if stack and stack[-1] == (e, -s):
            stack.pop()
        else:
            stack.append((e, s))
    return tuple(stack)


@dataclass(frozen=True)
class Face:
    base: int
    boundary: PathWord

    def __post_init__(self):
        object.__setattr__(self, "boundary", word(self.boundary))


@dataclass(frozen=True)
class FaceTerm:
    whisker: PathWord
    face: int
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "whisker", word(self.whisker))
        if self.sign not in (1, -1):
            raise MalformedWord("face term sign must be +1 or -1")


@dataclass(frozen=True)
class SphereWord:
    base: int
    terms: tuple[FaceTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class CellComplex:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    faces: tuple[Face, ...] = ()
    balls: tuple[SphereWord, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(t)) for s, t in self.edges))
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "balls", tuple(self.balls))
        for s, t in self.edges:
            if not (0 <= s < self.n_vertices and 0 <= t < self.n_vertices):
                raise StructureError(f"edge ({s}, {t}) has an endpoint out of range")
        for f in self.faces:
            if not 0 <= f.base < self.n_vertices:
                raise StructureError("face base out of range")
            for e, _ in f.boundary:
                if not 0 <= e < len(self.edges):
                    raise StructureError(f"face uses unknown edge {e}")
        for q in self.balls:
            if not 0 <= q.base < self.n_vertices:
                raise StructureError("ball base out of range")
            for t in q.terms:
                if not 0 <= t.face < len(self.faces):
                    raise StructureError(f"ball uses unknown face {t.face}")
                for e, _ in t.whisker:
                    if not 0 <= e < len(self.edges):
                        raise StructureError(f"whisker uses unknown edge {e}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_balls(self) -> int:
        return len(self.balls)

    def src(self, e: int) -> int:
        return self.edges[e][0]

    def dst(self, e: int) -> int:
        return self.edges[e][1]

    def letter_ends(self, letter: Letter) -> tuple[int, int]:
        e, s = letter
        a, b = self.edges[e]
        return (a, b) if s > 0 else (b, a)

    def endpoints(self, w: PathWord, at: int | None = None) -> tuple[int, int]:
        """(source, target) of a word; `at` supplies the vertex for the empty word."""
        if not w:
            if at is None:
                raise MalformedWord("empty word has no endpoints without a base vertex")
            return at, at
        src = cur = None
        for letter in reversed(w):
            a, b = self.letter_ends(letter)
            if src is not None and a != cur:
                raise MalformedWord(f"letter {letter} starts at {a}, previous ended at {cur}")
            if src is None:
                src = a
            cur = b
        return src, cur

    def sphere_boundary(self, sw: SphereWord) -> PathWord:
        """The unreduced boundary word: product of whisker * (face boundary)^sign * whisker^-1."""
        out: list[Letter] = []
        for t in sw.terms:
            b = self.faces[t.face].boundary
            out.extend(t.whisker)
            out.extend(b if t.sign > 0 else inverse(b))
            out.extend(inverse(t.whisker))
        return tuple(out)

    def incident_faces(self, e: int) -> list[int]:
        return [i for i, f in enumerate(self.faces) if any(x == e for x, _ in f.boundary)]


def validate_complex(X: CellComplex) -> ValidationReport:
    found: list[Violation] = []
    bad = []
    for i, f in enumerate(X.faces):
        try:
            s, t = X.endpoints(f.boundary, at=f.base)
        except MalformedWord:
            bad.append((i,))
            continue
        if s != f.base or t != f.base:
            bad.append((i,))
    if bad:
        found.append(Violation("face_not_closed", tuple(bad)))

    bad = []
    for i, q in enumerate(X.balls):
        ok = True
        for t in q.terms:
            try:
                s, d = X.endpoints(t.whisker, at=q.base)
            except MalformedWord:
                ok = False
                break
            if s != X.faces[t.face].base or d != q.base:
                ok = False
                break
        if ok:
            try:
                X.endpoints(X.sphere_boundary(q), at=q.base)
            except MalformedWord:
                ok = False
        if ok and free_reduce(X.sphere_boundary(q)):
            ok = False
        if not ok:
            bad.append((i,))
    if bad:
        found.append(Violation("ball_boundary_invalid", tuple(bad)))

    if X.n_vertices and len(_component(X, 0)) != X.n_vertices:
        found.append(Violation("disconnected", ((X.n_vertices,),)))
    return ValidationReport(tuple(found))


def _component(X: CellComplex, v: int) -> set[int]:
    adj: dict[int, list[int]] = {u: [] for u in range(X.n_vertices)}
    for s, t in X.edges:
        adj[s].append(t)
        adj[t].append(s)
    seen = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass(frozen=True)
class Pi1Presentation:
    base: int
    tree: frozenset[int]
    tree_paths: tuple[PathWord, ...]      # base -> v for each vertex v
    generators: tuple[int, ...]           # the non-tree edges, one loop each
    generator_words: tuple[PathWord, ...]
    relators: tuple[tuple[Letter, ...], ...]  # letters are (generator index, sign)

    @property
    def n_generators(self) -> int:
        return len(self.generators)


def maximal_tree(X: CellComplex, base: int = 0,
                 edge_order: Sequence[int] | None = None) -> Pi1Presentation:
    """Breadth-first spanning tree at `base` and the induced presentation of pi_1."""
    if len(_component(X, base)) != X.n_vertices:
        raise StructureError("complex is disconnected")
    order = list(range(X.n_edges)) if edge_order is None else list(edge_order)
    adj: dict[int, list[int]] = {v: [] for v in range(X.n_vertices)}
    for e in order:
        s, t = X.edges[e]
        adj[s].append(e)
        if t != s:
            adj[t].append(e)
    paths: dict[int, PathWord] = {base: ()}
    tree = set()
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for e in adj[v]:
            s, t = X.edges[e]
            if s == v and t not in paths:
                paths[t] = ((e, 1),) + paths[v]
            elif t == v and s not in paths:
                paths[s] = ((e, -1),) + paths[v]
            else:
                continue
            tree.add(e)
            queue.append(t if s == v else s)
    gens = tuple(e for e in range(X.n_edges) if e not in tree)
    gen_index = {e: i for i, e in enumerate(gens)}
    words = tuple(free_reduce(inverse(paths[X.dst(e)]) + ((e, 1),) + paths[X.src(e)])
                  for e in gens)
    relators = tuple(free_reduce(tuple((gen_index[e], s) for e, s in f.boundary if e in gen_index))
                     for f in X.faces)
    return Pi1Presentation(base, frozenset(tree),
                           tuple(paths[v] for v in range(X.n_vertices)),
                           gens, words, relators)


# ---------------------------------------------------------------- fixtures

def _faces(spec) -> tuple[Face, ...]:
    return tuple(Face(b, word(w)) for b, w in spec)


def pentagon() -> CellComplex:
    # e1: 0->1, e2: 2->1, e3: 2->3, e4: 4->3, e5: 4->0 ; boundary e5 e4^-1 e3 e2^-1 e1
    edges = [(0, 1), (2, 1), (2, 3), (4, 3), (4, 0)]
    return CellComplex(5, edges, _faces([(0, [(4, 1), (3, -1), (2, 1), (1, -1), (0, 1)])]),
                       name="PENTAGON")


def rp2() -> CellComplex:
    return CellComplex(1, [(0, 0)], _faces([(0, [(0, 1), (0, 1)])]), name="RP2")


def rp2_generator() -> SphereWord:
    """(e > f) f^-1, the generator whose boundary e.e^2.e^-1.e^-2 cancels."""
    return SphereWord(0, (FaceTerm(((0, 1),), 0, 1), FaceTerm((), 0, -1)))


def rp3() -> CellComplex:
    base = rp2()
    return CellComplex(1, base.edges, base.faces, (rp2_generator(),), name="RP3")


# Tetrahedron: vertices a=0 (base), b=1, c=2, d=3; edges e1..e6 are 0..5.
_TETRA_EDGES = [(0, 1), (0, 3), (0, 2), (3, 1), (2, 3), (2, 1)]
_TETRA_FACES = [
    (0, [(1, -1), (3, -1), (0, 1)]),   # f1 = e2^-1 e4^-1 e1
    (0, [(2, -1), (4, -1), (1, 1)]),   # f2 = e3^-1 e5^-1 e2
    (0, [(0, -1), (5, 1), (2, 1)]),    # f3 = e1^-1 e6 e3
    (1, [(3, 1), (4, 1), (5, -1)]),    # f4 = e4 e5 e6^-1, based at t(e1)
]


def tetrahedron_sphere_words() -> tuple[SphereWord, SphereWord]:
    """sigma = (e1^-1 > f4) f3 f2 f1 and sigma' = ((e4 e2)^-1 > f4) f1 f3 f2."""
    sigma = SphereWord(0, (FaceTerm(((0, -1),), 3), FaceTerm((), 2),
                           FaceTerm((), 1), FaceTerm((), 0)))
    sigma_p = SphereWord(0, (FaceTerm(((1, -1), (3, -1)), 3), FaceTerm((), 0),
                             FaceTerm((), 2), FaceTerm((), 1)))
    return sigma, sigma_p


def tetrahedron() -> CellComplex:
    """Hollow tetrahedron: a 2-sphere with no 3-cell."""
    return CellComplex(4, _TETRA_EDGES, _faces(_TETRA_FACES), name="S2")


def tetrahedron_ball() -> CellComplex:
    """Tetrahedron with its interior attached along sigma (a 3-ball)."""
    return CellComplex(4, _TETRA_EDGES, _faces(_TETRA_FACES),
                       (tetrahedron_sphere_words()[0],), name="S2_BALL")


def two_triangle_disc() -> CellComplex:
    # vertices a1..a4 = 0..3; e1: 0->1, e2: 1->2, e3: 2->3, e4: 3->0, e5: 1->3
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]
    faces = _faces([(0, [(3, 1), (4, 1), (0, 1)]),      # f1 = e4 e5 e1
                    (1, [(4, -1), (2, 1), (1, 1)])])    # f2 = e5^-1 e3 e2, based at s(e2)
    return CellComplex(4, edges, faces, name="DISC2")


def torus() -> CellComplex:
    # a = 0, b = 1; boundary b^-1 a^-1 b a
    return CellComplex(1, [(0, 0), (0, 0)], _faces([(0, [(1, -1), (0, -1), (1, 1), (0, 1)])]),
                       name="T2")


def two_loop_graph() -> CellComplex:
    """A graph with six vertices, seven edges and two independent loops, based at 2."""
    edges = [(2, 3), (2, 1), (1, 0), (0, 2), (3, 4), (4, 5), (5, 3)]
    return CellComplex(6, edges, name="FIG1")


def cubic_lattice(L: int) -> CellComplex:
    """Periodic L x L x L cubic lattice.

    Vertex (x, y, z) has index x + L y + L^2 z.  Edge 3v + d leaves v in
    direction d.  Face 3v + d has normal d, spans directions d+1, d+2 (mod 3)
    in that order and is based at v, so its boundary is
    e_{d2}(v)^-1 e_{d1}(v+d2)^-1 e_{d2}(v+d1) e_{d1}(v).  Ball v is the unit
    cube at v; its far faces are whiskered back to v along e_d(v)^-1 and its
    near faces enter inverted.
    """
    if L < 1:
        raise StructureError("lattice size must be positive")

    def vid(x, y, z):
        return x % L + L * (y % L) + L * L * (z % L)

    def shift(v, d):
        x, y, z = v % L, (v // L) % L, v // (L * L)
        c = [x, y, z]
        c[d] += 1
        return vid(*c)

    n = L ** 3
    edges = [(v, shift(v, d)) for v in range(n) for d in range(3)]
    faces = []
    for v in range(n):
        for d in range(3):
            d1, d2 = (d + 1) % 3, (d + 2) % 3
            faces.append(Face(v, ((3 * v + d2, -1), (3 * shift(v, d2) + d1, -1),
                                  (3 * shift(v, d1) + d2, 1), (3 * v + d1, 1))))
    balls = []
    for v in range(n):
        terms = []
        for kind, d in _CUBE_BALL_ORDER:
            if kind == "far":
                terms.append(FaceTerm(((3 * v + d, -1),), 3 * shift(v, d) + d, 1))
            else:
                terms.append(FaceTerm((), 3 * v + d, -1))
        balls.append(SphereWord(v, tuple(terms)))
    return CellComplex(n, edges, tuple(faces), tuple(balls), name=f"CUBE_L{L}")


# An ordering of the six cube faces whose boundary cancels freely; found by
# search over all orderings on the L = 2 lattice (see tests/test_complexes.py).
_CUBE_BALL_ORDER = (("far", 0), ("near", 2), ("far", 1), ("near", 0), ("far", 2), ("near", 1))


def builtin_complexes() -> dict[str, CellComplex]:
    return {
        "PENTAGON": pentagon(),
        "RP2": rp2(),
        "RP3": rp3(),
        "S2": tetrahedron(),
        "S2_BALL": tetrahedron_ball(),
        "DISC2": two_triangle_disc(),
        "T2": torus(),
        "FIG1": two_loop_graph(),
        "CUBE_L1": cubic_lattice(1),
        "CUBE_L2": cubic_lattice(2),
    }
