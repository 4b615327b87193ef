import numpy as np
import pytest
from hypothesis import given, strategies as st

from crossmod.algebra import CrossedModule, builtin_modules, cyclic, d4_with_xyz, kernel
from crossmod.complexes import builtin_complexes, tetrahedron_sphere_words
from crossmod.configuration import Configuration, fake_flat_arrays, holonomy1, holonomy2
from crossmod.errors import CapExceeded, StructureError
from crossmod.gauge import (apply_edge, apply_plaquette, apply_vertex, edge_action,
                            generator_transforms, orbit, plaquette_action, preserves_fake_flatness,
                            psi_extend, stabilizer_vertex, vertex_action, vertex_as_edge)

MODULES = builtin_modules()
COMPLEXES = builtin_complexes()
PAIRS = [(m, c) for m in ["G44", "D4_Z2", "YM_D4", "2FORM_Z2", "TWIST_Z2_Z3", "EMBED_Z2_Z4"]
         for c in ["T2", "RP2", "RP3", "DISC2", "S2", "CUBE_L1"]]


@st.composite
def config_and_transforms(draw, pairs=PAIRS):
    mname, cname = draw(st.sampled_from(pairs))
    cm, X = MODULES[mname], COMPLEXES[cname]
    eps, phi = _arrays(mname, cname)
    i = draw(st.integers(0, len(eps) - 1))
    c = Configuration(cm, X, eps[i].tolist(), phi[i].tolist())
    K = kernel(cm).members
    xi = [draw(st.integers(0, cm.E.order - 1)) for _ in range(X.n_vertices)]
    psi = [draw(st.integers(0, cm.Phi.order - 1)) for _ in range(X.n_edges)]
    chi = [draw(st.sampled_from(K)) for _ in range(X.n_faces)]
    return c, xi, psi, chi


_CACHE = {}


def _arrays(mname, cname):
    if (mname, cname) not in _CACHE:
        _CACHE[mname, cname] = fake_flat_arrays(MODULES[mname], COMPLEXES[cname])
    return _CACHE[mname, cname]


def _walk(X, draw, max_len=8):
    """Random edge walk from vertex 0, as letters in traversal order."""
    v, steps = 0, []
    for _ in range(draw(st.integers(0, max_len))):
        moves = [(e, 1) for e, (s, _) in enumerate(X.edges) if s == v] + \
                [(e, -1) for e, (_, t) in enumerate(X.edges) if t == v]
        e, s = draw(st.sampled_from(moves))
        steps.append((e, s))
        v = X.edges[e][1] if s > 0 else X.edges[e][0]
    return steps


# ---------------------------------------------------------------- fake-flatness

@given(config_and_transforms())
def test_transforms_preserve_fake_flatness(data):
    c, xi, psi, chi = data
    for d in (apply_vertex(xi, c), apply_edge(psi, c), apply_plaquette(chi, c)):
        assert preserves_fake_flatness(c.cm, c.X, d.eps_array, d.phi_array)


@pytest.mark.parametrize("mname,cname", [("G44", "T2"), ("YM_D4", "S2"), ("D4_Z2", "CUBE_L1")])
def test_batched_generators_preserve_fake_flatness(mname, cname):
    cm, X = MODULES[mname], COMPLEXES[cname]
    eps, phi = _arrays(mname, cname)
    for *_, fn in generator_transforms(cm, X, ("vertex", "edge_full", "plaquette")):
        a, b = fn(eps, phi)
        assert preserves_fake_flatness(cm, X, a, b)


def test_plaquette_values_must_lie_in_kernel(modules, complexes):
    c = Configuration(modules["G44"], complexes["T2"], [0, 0], [0])
    with pytest.raises(StructureError):
        apply_plaquette([1], c)
    assert apply_plaquette([2], c).phi == (2,)


def test_transform_length_checked(modules, complexes):
    c = Configuration(modules["G44"], complexes["T2"], [0, 0], [0])
    with pytest.raises(StructureError):
        apply_edge([0], c)
    with pytest.raises(StructureError):
        apply_vertex([0, 0], c)


def test_unknown_gauge_family(modules, complexes):
    with pytest.raises(ValueError):
        generator_transforms(modules["G44"], complexes["T2"], ("bogus",))


# ---------------------------------------------------------------- composition laws

@given(config_and_transforms(), st.data())
def test_vertex_composition(data, draw):
    c, xi, _, _ = data
    E = c.cm.E
    xi2 = [draw.draw(st.integers(0, E.order - 1)) for _ in xi]
    both = [E.op(a, b) for a, b in zip(xi2, xi)]
    assert apply_vertex(xi2, apply_vertex(xi, c)) == apply_vertex(both, c)


@given(config_and_transforms(), st.data())
def test_edge_composition(data, draw):
    c, _, psi, _ = data
    P = c.cm.Phi
    psi2 = [draw.draw(st.integers(0, P.order - 1)) for _ in psi]
    both = [P.op(a, b) for a, b in zip(psi2, psi)]
    assert apply_edge(psi2, apply_edge(psi, c)) == apply_edge(both, c)


@given(config_and_transforms(), st.data())
def test_psi_extension_is_multiplicative(data, draw):
    """Words are read right to left, so w1 w2 traverses w2 first."""
    c, _, psi, _ = data
    cm, X = c.cm, c.X
    steps = _walk(X, draw.draw)
    k = draw.draw(st.integers(0, len(steps)))
    w2, w1 = tuple(reversed(steps[:k])), tuple(reversed(steps[k:]))
    lhs = psi_extend(psi, c, w1 + w2)
    rhs = cm.Phi.op(psi_extend(psi, c, w1), cm.act(holonomy1(c, w1), psi_extend(psi, c, w2)))
    assert lhs == rhs


def test_psi_extend_examples(modules, complexes):
    g = modules["G44"]
    t = Configuration(g, complexes["T2"], [1, 2], [0])
    psi = [3, 1]
    assert psi_extend(psi, t, ()) == 0
    assert psi_extend(psi, t, ((0, 1),)) == 3
    # e2 e1 -> psi_e2 (eps_e2 > psi_e1)
    assert psi_extend(psi, t, ((1, 1), (0, 1))) == g.Phi.op(1, g.act(2, 3))
    assert psi_extend(psi, t, ((0, 1), (0, -1))) == 0
    assert psi_extend(psi, t, ((1, -1), (1, 1))) == 0


def test_disc_edge_transform(modules, complexes):
    """psi on the shared edge only: phi_1 -> (eps_3 > psi) phi_1, phi_2 -> (eps_4^-1 > psi)^-1 phi_2."""
    cm, X = modules["G44"], complexes["DISC2"]
    E, P = cm.E, cm.Phi
    eps, phi = _arrays("G44", "DISC2")
    for e, p in zip(eps.tolist(), phi.tolist()):
        for g in range(P.order):
            psi = [0, 0, 0, 0, g]
            d = apply_edge(psi, Configuration(cm, X, e, p))
            assert d.eps[4] == E.op(cm.delta(g), e[4])
            assert d.phi[0] == P.op(cm.act(e[3], g), p[0])
            assert d.phi[1] == P.op(P.inverse(cm.act(E.inverse(e[4]), g)), p[1])


@given(config_and_transforms())
def test_vertex_edge_semidirect_relation(data):
    """xi after psi equals (xi_target > psi) after xi."""
    c, xi, psi, _ = data
    cm, X = c.cm, c.X
    moved = [cm.act(xi[t], psi[e]) for e, (_, t) in enumerate(X.edges)]
    assert apply_vertex(xi, apply_edge(psi, c)) == apply_edge(moved, apply_vertex(xi, c))


@given(config_and_transforms())
def test_plaquette_commutes_with_edge(data):
    c, _, psi, chi = data
    assert apply_plaquette(chi, apply_edge(psi, c)) == apply_edge(psi, apply_plaquette(chi, c))


@given(config_and_transforms([(m, c) for m, c in PAIRS if c in ("T2", "RP2", "RP3", "CUBE_L1", "DISC2")]),
       st.data())
def test_vertex_as_edge_identity(data, draw):
    c, _, _, _ = data
    cm = c.cm
    rho = [draw.draw(st.integers(0, cm.Phi.order - 1)) for _ in range(c.X.n_vertices)]
    xi = [cm.delta(r) for r in rho]
    assert apply_edge(vertex_as_edge(rho, c), c) == apply_vertex(xi, c)


@pytest.mark.parametrize("mname", ["G44", "D4_Z2", "TWIST_Z2_Z3", "EMBED_Z2_Z4"])
@pytest.mark.parametrize("cname", ["T2", "RP2", "RP3", "CUBE_L1"])
def test_vertex_as_edge_exhaustive(mname, cname):
    cm, X = MODULES[mname], COMPLEXES[cname]
    eps, phi = _arrays(mname, cname)
    for e, p in zip(eps.tolist(), phi.tolist()):
        c = Configuration(cm, X, e, p)
        for r in range(cm.Phi.order):
            assert apply_edge(vertex_as_edge([r], c), c) == apply_vertex([cm.delta(r)], c)


# ---------------------------------------------------------------- holonomy covariance

@given(config_and_transforms())
def test_holonomy1_covariance(data):
    """Closed loops at the base conjugate by xi_0 and pick up delta(psi) on the left."""
    c, xi, psi, _ = data
    X, E = c.X, c.cm.E
    loops = [f.boundary for f in X.faces if f.base == 0]
    for w in loops:
        h = holonomy1(c, w)
        assert holonomy1(apply_vertex(xi, c), w) == E.conj(xi[0], h)
        assert holonomy1(apply_edge(psi, c), w) == E.op(c.cm.delta(psi_extend(psi, c, w)), h)


@pytest.mark.parametrize("mname", ["G44", "YM_D4", "D4_Z2", "TWIST_Z2_Z3"])
def test_sphere_holonomy_transformation_law(mname):
    cm, X = MODULES[mname], COMPLEXES["S2"]
    sigma = tetrahedron_sphere_words()[0]
    eps, phi = _arrays(mname, "S2")
    rng = np.random.default_rng(7)
    for i in rng.choice(len(eps), size=min(40, len(eps)), replace=False):
        c = Configuration(cm, X, eps[i].tolist(), phi[i].tolist())
        h = holonomy2(c, sigma)
        psi = rng.integers(0, cm.Phi.order, X.n_edges).tolist()
        xi = rng.integers(0, cm.E.order, X.n_vertices).tolist()
        assert holonomy2(apply_edge(psi, c), sigma) == h            # boundary word reduces to nothing
        assert holonomy2(apply_vertex(xi, c), sigma) == cm.act(xi[sigma.base], h)


def test_face_transformation_law(modules, complexes):
    """phi_f -> psi_{boundary f} phi_f, face by face."""
    cm, X = modules["D4_Z2"], complexes["CUBE_L1"]
    eps, phi = _arrays("D4_Z2", "CUBE_L1")
    rng = np.random.default_rng(3)
    for i in rng.choice(len(eps), 30, replace=False):
        c = Configuration(cm, X, eps[i].tolist(), phi[i].tolist())
        psi = rng.integers(0, 2, 3).tolist()
        d = apply_edge(psi, c)
        for k, f in enumerate(X.faces):
            assert d.phi[k] == cm.Phi.op(psi_extend(psi, c, f.boundary), c.phi[k])


# ---------------------------------------------------------------- batched forms agree

def test_batched_actions_match_single(modules, complexes):
    cm, X = modules["YM_D4"], complexes["T2"]
    eps, phi = _arrays("YM_D4", "T2")
    xi = np.array([3])
    a, b = vertex_action(cm, X, xi, eps, phi)
    for k in range(len(eps)):
        d = apply_vertex([3], Configuration(cm, X, eps[k].tolist(), phi[k].tolist()))
        assert d.eps == tuple(a[k].tolist()) and d.phi == tuple(b[k].tolist())
    a, b = edge_action(cm, X, np.array([0, 0]), eps, phi)
    assert np.array_equal(a, eps) and np.array_equal(b, phi)
    a, b = plaquette_action(cm, X, np.array([0]), eps, phi)
    assert np.array_equal(b, phi)


# ---------------------------------------------------------------- orbits and stabilizers

def test_rp2_vertex_orbit_merges_odd_phi(modules, complexes):
    cm, X = modules["G44"], complexes["RP2"]
    o = orbit(Configuration(cm, X, [1], [1]))
    assert Configuration(cm, X, [1], [3]) in o
    assert all(c.eps == (1,) for c in o.members)
    assert len(o) == 2


def test_t2_orbits_are_singletons(modules, complexes):
    cm, X = modules["G44"], complexes["T2"]
    eps, phi = _arrays("G44", "T2")
    assert set(phi.ravel().tolist()) <= {0, 2}
    for e, p in zip(eps.tolist(), phi.tolist()):
        assert len(orbit(Configuration(cm, X, e, p))) == 1


def test_trivial_module_orbit_is_singleton(complexes):
    one = cyclic(1)
    cm = CrossedModule.from_tables(one, one, [0], [[0]])
    for name in ("T2", "DISC2", "S2"):
        X = complexes[name]
        c = Configuration(cm, X, [0] * X.n_edges, [0] * X.n_faces)
        assert len(orbit(c, ("vertex", "edge_full", "plaquette"))) == 1


@pytest.mark.parametrize("mname", ["G44", "D4_Z2", "2FORM_Z2", "EMBED_Z2_Z4"])
def test_full_gauge_orbit_fills_disc(mname, complexes):
    """The disc is contractible: every fake-flat configuration is gauge equivalent to the trivial one."""
    cm, X = MODULES[mname], complexes["DISC2"]
    eps, _ = _arrays(mname, "DISC2")
    trivial = Configuration(cm, X, [0] * 5, [0, 0])
    assert len(orbit(trivial, ("vertex", "edge_full", "plaquette"))) == len(eps)


def test_orbit_cap(modules, complexes):
    cm, X = modules["D4_Z2"], complexes["DISC2"]
    with pytest.raises(CapExceeded):
        orbit(Configuration(cm, X, [0] * 5, [0, 0]), ("vertex", "edge_full"), cap=5)


def test_stabilizer_of_d4_pair(modules, complexes):
    D4, g = d4_with_xyz()
    c = Configuration(modules["YM_D4"], complexes["T2"], [g["x"], g["y"]], [0])
    assert stabilizer_vertex(c).members == (0, g["z"])
    triv = Configuration(modules["YM_D4"], complexes["T2"], [0, 0], [0])
    assert stabilizer_vertex(triv).order == 8


def test_stabilizer_on_multi_vertex_complex(modules, complexes):
    cm, X = modules["YM_D4"], complexes["S2"]
    c = Configuration(cm, X, [0] * 6, [0] * 4)
    assert stabilizer_vertex(c).order == 8
    eps, phi = _arrays("YM_D4", "S2")
    flat = np.flatnonzero((phi == 0).all(axis=1))       # delta = id, so phi = 1 means flat eps
    assert len(flat) == 8 ** 3
    for i in flat[::17]:
        stab = stabilizer_vertex(Configuration(cm, X, eps[i].tolist(), phi[i].tolist()))
        assert stab.order == 8        # simply connected: no holonomy to commute with
    assert any(stabilizer_vertex(Configuration(cm, X, e, p)).order < 8
               for e, p in zip(eps[::997].tolist(), phi[::997].tolist()))
