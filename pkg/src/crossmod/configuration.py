"""Field configurations: E-labels on edges and Phi-labels on faces.

The array helpers below accept labels with arbitrary leading batch axes, so
the same code evaluates one configuration or a whole basis at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import numpy as np

from .algebra import CrossedModule, FiniteGroup, QuotientGroup, cokernel, image, kernel
from .complexes import CellComplex, PathWord, SphereWord
from .errors import CapExceeded, StructureError

DEFAULT_STATE_CAP = 10**6


def path_product(G: FiniteGroup, labels: np.ndarray, w: PathWord) -> np.ndarray:
    """Ordered product of edge labels along `w`, inverted on -1 letters."""
    labels = np.asarray(labels)
    acc = np.zeros(labels.shape[:-1], dtype=np.int64)
    for e, s in w:
        x = labels[..., e]
        if s < 0:
            x = G.inv[x]
        acc = G.table[acc, x]
    return acc


def sphere_product(cm: CrossedModule, eps: np.ndarray, phi: np.ndarray,
                   sw: SphereWord) -> np.ndarray:
    """Ordered product of (eps_whisker > phi_face)^sign over the terms of `sw`."""
    P = cm.Phi
    eps, phi = np.asarray(eps), np.asarray(phi)
    acc = np.zeros(phi.shape[:-1], dtype=np.int64)
    for t in sw.terms:
        g = path_product(cm.E, eps, t.whisker)
        x = cm.act_table[g, phi[..., t.face]]
        if t.sign < 0:
            x = P.inv[x]
        acc = P.table[acc, x]
    return acc


def face_holonomies(cm: CrossedModule, X: CellComplex, eps: np.ndarray) -> np.ndarray:
    eps = np.asarray(eps)
    out = np.empty(eps.shape[:-1] + (X.n_faces,), dtype=np.int64)
    for i, f in enumerate(X.faces):
        out[..., i] = path_product(cm.E, eps, f.boundary)
    return out


def fake_flat_mask(cm: CrossedModule, X: CellComplex, eps, phi) -> np.ndarray:
    phi = np.asarray(phi)
    return np.all(cm.delta_table[phi] == face_holonomies(cm, X, eps), axis=-1)


@dataclass(frozen=True)
class Configuration:
    cm: CrossedModule
    X: CellComplex
    eps: tuple[int, ...]
    phi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(int(x) for x in self.eps))
        object.__setattr__(self, "phi", tuple(int(x) for x in self.phi))
        if len(self.eps) != self.X.n_edges or len(self.phi) != self.X.n_faces:
            raise StructureError("label counts differ from the complex's edge/face counts")
        if any(not 0 <= x < self.cm.E.order for x in self.eps) or \
                any(not 0 <= x < self.cm.Phi.order for x in self.phi):
            raise StructureError("label out of range")

    @cached_property
    def eps_array(self) -> np.ndarray:
        return np.array(self.eps, dtype=np.int64)

    @cached_property
    def phi_array(self) -> np.ndarray:
        return np.array(self.phi, dtype=np.int64)

    def key(self) -> tuple[int, ...]:
        return self.eps + self.phi

    def replace(self, eps=None, phi=None) -> "Configuration":
        return Configuration(self.cm, self.X,
                             self.eps if eps is None else tuple(int(x) for x in eps),
                             self.phi if phi is None else tuple(int(x) for x in phi))


@dataclass(frozen=True)
class FakeFlatResult:
    ok: bool
    face: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_fake_flat(cfg: Configuration) -> FakeFlatResult:
    hol = face_holonomies(cfg.cm, cfg.X, cfg.eps_array)
    bad = np.nonzero(cfg.cm.delta_table[cfg.phi_array] != hol)[0]
    return FakeFlatResult(True) if len(bad) == 0 else FakeFlatResult(False, int(bad[0]))


def holonomy1(cfg: Configuration, gamma: PathWord) -> int:
    if gamma:
        cfg.X.endpoints(gamma)
    return int(path_product(cfg.cm.E, cfg.eps_array, gamma))


def holonomy2(cfg: Configuration, sigma: SphereWord) -> int:
    X = cfg.X
    for t in sigma.terms:
        s, d = X.endpoints(t.whisker, at=sigma.base)
        if d != sigma.base or s != X.faces[t.face].base:
            raise StructureError("whisker does not join the face base to the sphere base")
    return int(sphere_product(cfg.cm, cfg.eps_array, cfg.phi_array, sigma))


def is_flat_phi(cfg: Configuration) -> bool:
    return all(holonomy2(cfg, q) == 0 for q in cfg.X.balls)


@dataclass(frozen=True)
class ReducedGaugeField:
    coker: QuotientGroup
    values: tuple[int, ...]

    def holonomy(self, w: PathWord) -> int:
        return int(path_product(self.coker.group, np.array(self.values, dtype=np.int64), w))

    def is_flat(self, X: CellComplex) -> bool:
        return all(self.holonomy(f.boundary) == 0 for f in X.faces)


def reduce(cfg: Configuration) -> ReducedGaugeField:
    Q = cokernel(cfg.cm)
    return ReducedGaugeField(Q, tuple(int(Q.projection[e]) for e in cfg.eps))


def fake_flat_arrays(cm: CrossedModule, X: CellComplex,
                     cap: int = DEFAULT_STATE_CAP) -> tuple[np.ndarray, np.ndarray]:
    """All fake-flat (eps, phi) as two integer arrays, in lexicographic order.

    Edges are labelled one at a time; a face is checked as soon as its last
    edge is labelled, keeping only eps with eps_{df} in im(delta).  Faces then
    range over the preimages of their holonomy.
    """
    E = cm.E
    im = np.zeros(E.order, dtype=bool)
    im[list(image(cm).members)] = True
    ker_size = kernel(cm).order
    last_edge = [max((e for e, _ in f.boundary), default=-1) for f in X.faces]

    eps = np.zeros((1, X.n_edges), dtype=np.int64)
    for e in range(X.n_edges):
        n = eps.shape[0]
        eps = np.repeat(eps, E.order, axis=0)
        eps[:, e] = np.tile(np.arange(E.order), n)
        for i, f in enumerate(X.faces):
            if last_edge[i] == e:
                eps = eps[im[path_product(E, eps, f.boundary)]]
        if eps.shape[0] > cap:
            raise CapExceeded(f"more than {cap} fake-flat configurations")
    if eps.shape[0] * ker_size ** X.n_faces > cap:
        raise CapExceeded(f"more than {cap} fake-flat configurations")

    preimages = np.full((E.order, ker_size), -1, dtype=np.int64)
    for g in range(E.order):
        pre = np.nonzero(cm.delta_table == g)[0]
        if len(pre):
            preimages[g] = np.sort(pre)
    hol = face_holonomies(cm, X, eps)
    choices = np.array(np.meshgrid(*[np.arange(ker_size)] * X.n_faces, indexing="ij"))
    choices = choices.reshape(X.n_faces, -1).T if X.n_faces else np.zeros((1, 0), np.int64)
    n_eps, n_ch = eps.shape[0], choices.shape[0]
    phi = preimages[hol[:, None, :], choices[None, :, :]].reshape(n_eps * n_ch, X.n_faces)
    eps = np.repeat(eps, n_ch, axis=0)
    return eps, phi


def enumerate_fake_flat(cm: CrossedModule, X: CellComplex,
                        cap: int = DEFAULT_STATE_CAP) -> list[Configuration]:
    eps, phi = fake_flat_arrays(cm, X, cap)
    return [Configuration(cm, X, tuple(a), tuple(b)) for a, b in zip(eps.tolist(), phi.tolist())]
