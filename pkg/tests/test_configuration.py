import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crossmod.algebra import builtin_modules, d4_with_xyz, image, kernel
from crossmod.complexes import (FaceTerm, SphereWord, builtin_complexes,
                                rp2_generator, tetrahedron_sphere_words)
from crossmod.configuration import (Configuration, check_fake_flat, enumerate_fake_flat,
                                    face_holonomies, fake_flat_arrays, holonomy1, holonomy2,
                                    is_flat_phi, reduce, sphere_product)
from crossmod.errors import CapExceeded, MalformedWord, StructureError

SMALL_MODULES = ["G44", "D4_Z2", "YM_Z2", "YM_Z4", "2FORM_Z2", "TWIST_Z2_Z3",
                 "EMBED_Z2_Z4", "PURE_Z2"]


def cfg(cm, X, eps, phi):
    return Configuration(cm, X, eps, phi)


def test_fake_flat_examples(modules, complexes):
    G44 = modules["G44"]
    assert check_fake_flat(cfg(modules["YM_Z2"], complexes["PENTAGON"], [0] * 5, [0]))
    rp2 = complexes["RP2"]
    assert check_fake_flat(cfg(G44, rp2, [1], [1]))
    bad = check_fake_flat(cfg(G44, rp2, [1], [0]))
    assert not bad and bad.face == 0
    assert check_fake_flat(cfg(G44, complexes["T2"], [0, 0], [2]))


def test_configuration_rejects_bad_labels(modules, complexes):
    with pytest.raises(StructureError):
        cfg(modules["G44"], complexes["T2"], [0], [0])
    with pytest.raises(StructureError):
        cfg(modules["G44"], complexes["T2"], [0, 4], [0])


def test_holonomy1_examples(modules, complexes):
    c = cfg(modules["G44"], complexes["RP2"], [1], [1])
    assert holonomy1(c, ()) == 0
    assert holonomy1(c, ((0, 1), (0, 1))) == 2
    D4, g = d4_with_xyz()
    t = cfg(modules["YM_D4"], complexes["T2"], [g["x"], 1], [0])
    path = ((0, 1), (1, 1), (0, -1))
    assert holonomy1(t, path) == D4.inverse(holonomy1(t, ((0, 1), (1, -1), (0, -1))))


def test_holonomy1_malformed(modules, complexes):
    c = cfg(modules["YM_Z2"], complexes["S2"], [0] * 6, [0] * 4)
    with pytest.raises(MalformedWord):
        holonomy1(c, ((1, 1), (3, 1)))


@given(st.lists(st.integers(0, 7), min_size=2, max_size=2),
       st.lists(st.tuples(st.integers(0, 1), st.sampled_from([1, -1])), max_size=6),
       st.lists(st.tuples(st.integers(0, 1), st.sampled_from([1, -1])), max_size=6))
def test_holonomy1_composition(eps, w1, w2):
    cm = builtin_modules()["YM_D4"]
    X = builtin_complexes()["T2"]
    c = Configuration(cm, X, eps, [0])
    assert holonomy1(c, tuple(w1) + tuple(w2)) == cm.E.op(holonomy1(c, tuple(w1)), holonomy1(c, tuple(w2)))


def test_rp2_generator_holonomy(modules, complexes):
    """2 for every admissible configuration with nontrivial reduction, 0 otherwise."""
    cm, X = modules["G44"], complexes["RP2"]
    sigma = rp2_generator()
    configs = enumerate_fake_flat(cm, X)
    nontrivial = [c for c in configs if reduce(c).values != (0,)]
    trivial = [c for c in configs if reduce(c).values == (0,)]
    assert len(nontrivial) == 4 and len(trivial) == 4
    assert {holonomy2(c, sigma) for c in nontrivial} == {2}
    assert {holonomy2(c, sigma) for c in trivial} == {0}


def test_rp3_flatness(modules, complexes):
    cm, X = modules["G44"], complexes["RP3"]
    for c in enumerate_fake_flat(cm, X):
        if reduce(c).values != (0,):
            assert not is_flat_phi(c)
    assert is_flat_phi(cfg(cm, X, [0], [0]))
    assert is_flat_phi(cfg(cm, complexes["T2"], [1, 2], [0]))   # no balls


def test_tetrahedron_formula(modules, complexes):
    """phi_sigma = (eps_e1^-1 > phi_f4) phi_f3 phi_f2 phi_f1."""
    cm, X = modules["YM_D4"], complexes["S2"]
    sigma = tetrahedron_sphere_words()[0]
    E, P = cm.E, cm.Phi
    eps, phi = fake_flat_arrays(cm, X)
    for e, p in zip(eps[::997].tolist(), phi[::997].tolist()):
        c = cfg(cm, X, e, p)
        expect = P.prod([cm.act(E.inverse(e[0]), p[3]), p[2], p[1], p[0]])
        assert holonomy2(c, sigma) == expect


@pytest.mark.parametrize("name", sorted(builtin_modules()))
def test_tetrahedron_sigma_equals_sigma_prime(name, complexes):
    cm = builtin_modules()[name]
    X = complexes["S2"]
    s, sp = tetrahedron_sphere_words()
    eps, phi = fake_flat_arrays(cm, X)
    h = sphere_product(cm, eps, phi, s)
    assert np.array_equal(h, sphere_product(cm, eps, phi, sp))
    assert np.isin(h, kernel(cm).members).all()


def test_holonomy2_checks_whiskers(modules, complexes):
    c = cfg(modules["YM_Z2"], complexes["S2"], [0] * 6, [0] * 4)
    bad = SphereWord(0, (FaceTerm((), 3),))           # f4 is based at vertex 1, no whisker
    with pytest.raises(StructureError):
        holonomy2(c, bad)


@pytest.mark.parametrize("name", SMALL_MODULES)
def test_disc_relation(name, complexes):
    """f1 (e1^-1 > f2) = (e4 e5 > f2) f1 on the two-triangle disc."""
    cm = builtin_modules()[name]
    X = complexes["DISC2"]
    E, P = cm.E, cm.Phi
    for c in enumerate_fake_flat(cm, X):
        e, p = c.eps, c.phi
        lhs = P.op(p[0], cm.act(E.inverse(e[0]), p[1]))
        rhs = P.op(cm.act(E.op(e[3], e[4]), p[1]), p[0])
        assert lhs == rhs


def test_reduce_examples(modules, complexes):
    D4, g = d4_with_xyz()
    cm = modules["D4_Z2"]
    r = reduce(cfg(cm, complexes["T2"], [g["x"], g["y"]], [1]))
    assert r.values == (r.coker.projection[g["x"]], r.coker.projection[g["y"]])
    assert 0 not in r.values
    assert r.is_flat(complexes["T2"])
    ym = reduce(cfg(modules["YM_Z4"], complexes["T2"], [1, 3], [0]))
    assert ym.values == (0, 0)


def brute_force(cm, X):
    out = []
    for eps in itertools.product(range(cm.E.order), repeat=X.n_edges):
        for phi in itertools.product(range(cm.Phi.order), repeat=X.n_faces):
            if check_fake_flat(Configuration(cm, X, eps, phi)):
                out.append(eps + phi)
    return out


SMALL_COMPLEXES = ["T2", "RP2", "RP3", "DISC2", "CUBE_L1"]


@pytest.mark.parametrize("mname", ["G44", "D4_Z2", "YM_Z2", "2FORM_Z2", "TWIST_Z2_Z3"])
@pytest.mark.parametrize("cname", SMALL_COMPLEXES)
def test_enumeration_matches_brute_force(mname, cname):
    cm, X = builtin_modules()[mname], builtin_complexes()[cname]
    if cm.E.order ** X.n_edges * cm.Phi.order ** X.n_faces > 300000:
        pytest.skip("brute force too large")
    got = [c.key() for c in enumerate_fake_flat(cm, X)]
    assert got == brute_force(cm, X)


def test_enumeration_counts(modules, complexes):
    assert len(enumerate_fake_flat(modules["G44"], complexes["T2"])) == 32
    assert len(enumerate_fake_flat(modules["G44"], complexes["RP3"])) == 8
    assert len(enumerate_fake_flat(modules["YM_D4"], complexes["T2"])) == 64
    triv = modules["YM_Z2"]
    assert len(enumerate_fake_flat(triv, complexes["PENTAGON"])) == 2 ** 5


@pytest.mark.parametrize("mname", SMALL_MODULES)
@pytest.mark.parametrize("cname", ["T2", "RP2", "S2", "CUBE_L1"])
def test_count_formula(mname, cname):
    cm, X = builtin_modules()[mname], builtin_complexes()[cname]
    eps, phi = fake_flat_arrays(cm, X)
    every = np.indices((cm.E.order,) * X.n_edges).reshape(X.n_edges, -1).T
    admissible = np.isin(face_holonomies(cm, X, every), image(cm).members).all(axis=1).sum()
    assert len(eps) == admissible * kernel(cm).order ** X.n_faces
    assert len({tuple(r) for r in np.hstack([eps, phi]).tolist()}) == len(eps)


def test_enumeration_cap(modules, complexes):
    with pytest.raises(CapExceeded):
        enumerate_fake_flat(modules["G44"], complexes["T2"], cap=10)
