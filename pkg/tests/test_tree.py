import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from conftest import from_oracle
from treegroups import batch
from treegroups.tree import (
    TruncatedAutomorphism,
    Vertex,
    act_vertex,
    all_automorphisms,
    are_m_cousins,
    compose,
    count_fixed_at_level,
    fixed_vertices_at_level,
    format_permutation,
    identity,
    invert,
    perm_compose,
    perm_inverse,
    product,
    project,
    section,
    tree_distance,
    vertices_at_level,
)

SIGMA_EE = "21(12(),12())"
E_SIGMA_E = "12(21(),12())"


def P(text):
    return TruncatedAutomorphism.parse(text)


shapes = st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 2)])


# -- vertices -----------------------------------------------------------------


def test_vertex_parse_and_index_round_trip():
    for d, level in [(2, 3), (3, 2), (11, 2)]:
        for i in range(d**level):
            v = Vertex.from_index(i, level, d)
            assert v.index(d) == i
            assert Vertex.parse(str(v)) == v


def test_vertex_text_forms():
    assert str(Vertex(())) == ""
    assert Vertex.parse("21").path == (2, 1)
    assert Vertex.parse("10.2").path == (10, 2)
    assert str(Vertex((10, 2))) == "10.2"
    with pytest.raises(ValueError):
        Vertex((0, 1))


def test_tree_distance_examples():
    assert tree_distance("11", "12") == 2
    assert tree_distance("11", "21") == 4
    assert tree_distance("121", "121") == 0


def test_m_cousins_examples():
    assert are_m_cousins("11", "12", 1)
    assert not are_m_cousins("11", "21", 1)
    assert are_m_cousins("11", "21", 2)
    assert not are_m_cousins("12", "12", 3)
    assert not are_m_cousins("11", "12", 0)
    with pytest.raises(ValueError):
        are_m_cousins("1", "12", 1)


@given(st.integers(0, 26), st.integers(0, 26), st.integers(0, 4))
def test_cousins_agree_with_common_ancestor(i, j, m):
    v, w = Vertex.from_index(i, 3, 3), Vertex.from_index(j, 3, 3)
    common = max(k for k in range(4) if v.path[:k] == w.path[:k])
    assert are_m_cousins(v, w, m) == (v != w and 3 - common <= m)


# -- permutations -------------------------------------------------------------


def test_permutation_helpers():
    p, q = (2, 1, 3), (1, 3, 2)
    assert perm_compose(p, q) == (3, 1, 2)  # x -> q(p(x))
    assert perm_compose(p, perm_inverse(p)) == (1, 2, 3)
    assert format_permutation((2, 1)) == "21"
    assert format_permutation(tuple(range(10, 0, -1))) == "10.9.8.7.6.5.4.3.2.1"


# -- construction and encoding ---------------------------------------------------


def test_identity_example():
    e = identity(2, 2)
    assert e.labels == [(1, 2)] * 3
    assert all(act_vertex(e, v) == v for v in vertices_at_level(2, 2))


def test_canonical_encoding_of_sigma():
    g = TruncatedAutomorphism.from_labels(2, 2, {"": (2, 1)})
    assert g.encode() == SIGMA_EE
    assert P(SIGMA_EE) == g


def test_depth_zero_encoding():
    e = identity(3, 0)
    assert e.encode() == ""
    assert TruncatedAutomorphism.parse("", 3) == e


@given(shapes, st.randoms(use_true_random=False))
def test_encoding_round_trip_against_oracle_text(shape, rnd):
    d, n = shape
    g = oracle.random_portrait(d, n, rnd)
    ta = from_oracle(g, d, n)
    assert ta.encode() == oracle.to_text(g)
    assert P(ta.encode()) == ta


def test_dotted_encoding_for_large_arity():
    g = TruncatedAutomorphism.from_labels(10, 1, [tuple(range(10, 0, -1))])
    assert P(g.encode()) == g


def test_construction_rejects_non_tree_maps():
    with pytest.raises(ValueError):
        TruncatedAutomorphism(2, 2, [0, 2, 1, 3])
    with pytest.raises(ValueError):
        TruncatedAutomorphism(2, 2, [0, 0, 1, 2])
    with pytest.raises(ValueError):
        P("21(12())")


# -- algebra against the oracle -------------------------------------------------------


@given(shapes, st.randoms(use_true_random=False))
def test_compose_matches_oracle(shape, rnd):
    d, n = shape
    g, h = oracle.random_portrait(d, n, rnd), oracle.random_portrait(d, n, rnd)
    assert compose(from_oracle(g, d, n), from_oracle(h, d, n)) == from_oracle(oracle.compose(g, h), d, n)


@given(shapes, st.randoms(use_true_random=False))
def test_invert_matches_oracle(shape, rnd):
    d, n = shape
    g = oracle.random_portrait(d, n, rnd)
    assert invert(from_oracle(g, d, n)) == from_oracle(oracle.inverse(g), d, n)


@given(shapes, st.randoms(use_true_random=False))
def test_act_and_section_match_oracle(shape, rnd):
    d, n = shape
    g = oracle.random_portrait(d, n, rnd)
    ta = from_oracle(g, d, n)
    for level in range(n + 1):
        for v in oracle.vertices(d, level):
            vv = Vertex(tuple(x + 1 for x in v))
            assert act_vertex(ta, vv).path == tuple(x + 1 for x in oracle.act(g, v))
            for m in range(n - level + 1):
                assert section(ta, vv, m) == from_oracle(oracle.section(g, v, m), d, m)


def test_compose_example():
    assert compose(P(SIGMA_EE), P(E_SIGMA_E)).encode() == "21(12(),21())"


def test_invert_example():
    assert invert(P("21(21(),12())")).encode() == "21(12(),21())"
    assert invert(identity(2, 3)).is_identity()


def test_act_examples():
    assert str(act_vertex(P(SIGMA_EE), "11")) == "21"
    assert str(act_vertex(P(E_SIGMA_E), "21")) == "21"
    with pytest.raises(ValueError):
        act_vertex(P(SIGMA_EE), "111")


def test_section_examples():
    assert section(P("21(12(),21())"), "2", 1).encode() == "21()"
    assert section(identity(2, 3), "12", 1).is_identity()
    g, h = P(SIGMA_EE), P(E_SIGMA_E)
    lhs = section(compose(g, h), "1", 1)
    rhs = compose(section(g, "1", 1), section(h, act_vertex(g, "1"), 1))
    assert lhs == rhs and lhs.is_identity()
    with pytest.raises(ValueError):
        section(g, "11", 1)


def test_fixed_vertex_examples():
    assert len(fixed_vertices_at_level(identity(2, 2), 2)) == 4
    for level in (1, 2):
        assert fixed_vertices_at_level(P(SIGMA_EE), level) == set()
    assert {str(v) for v in fixed_vertices_at_level(P(E_SIGMA_E), 2)} == {"21", "22"}
    assert count_fixed_at_level(P(E_SIGMA_E), 1) == 2


def test_mismatched_shapes_are_rejected():
    with pytest.raises(ValueError):
        compose(identity(2, 2), identity(2, 3))
    with pytest.raises(ValueError):
        compose(identity(2, 2), identity(3, 2))
    assert compose(project(identity(2, 3), 2), identity(2, 2)).is_identity()


def test_project_restricts_labels():
    g = P("21(21(12(),21()),12(12(),12()))")
    assert project(g, 2).encode() == "21(21(),12())"
    assert project(g, 0).depth == 0


# -- exhaustive laws on small trees ------------------------------------------------


def test_group_axioms_exhaustive_depth_two():
    elems = list(all_automorphisms(2, 2))
    assert len(elems) == 8 and len(set(elems)) == 8
    e = identity(2, 2)
    for g in elems:
        assert compose(e, g) == g == compose(g, e)
        assert compose(g, invert(g)) == e == compose(invert(g), g)
        assert invert(invert(g)) == g
        for h in elems:
            assert compose(g, h) in set(elems)
            for k in elems:
                assert compose(compose(g, h), k) == compose(g, compose(h, k))


def test_action_of_product_is_sequential_exhaustive():
    elems = list(all_automorphisms(2, 2))
    for g, h in itertools.product(elems, repeat=2):
        gh = compose(g, h)
        for level in (1, 2):
            for v in vertices_at_level(2, level):
                assert act_vertex(gh, v) == act_vertex(h, act_vertex(g, v))


def test_section_product_rule_exhaustive_depth_three():
    rows = batch.stack(list(all_automorphisms(2, 3)), 2, 3)
    G = np.repeat(rows, len(rows), axis=0)
    H = np.tile(rows, (len(rows), 1))
    GH = batch.compose(G, H)
    for level in (0, 1, 2):
        for v in range(2**level):
            images = batch.act(G, 2, 3, v, level)
            lhs = batch.section(GH, 2, 3, v, level, 1)
            hs = np.stack([batch.section(H[i : i + 1], 2, 3, int(images[i]), level, 1)[0] for i in range(len(H))])
            rhs = batch.compose(batch.section(G, 2, 3, v, level, 1), hs)
            assert np.array_equal(lhs, rhs)


def test_sections_of_sections_exhaustive_depth_three():
    for g in all_automorphisms(2, 3):
        for v in vertices_at_level(2, 1):
            for w in vertices_at_level(2, 1):
                assert section(g, v + w, 1) == section(section(g, v, 2), w, 1)


def test_product_of_many():
    g, h = P(SIGMA_EE), P(E_SIGMA_E)
    assert product([g, h, invert(h)], 2, 2) == g
    assert product([], 2, 2).is_identity()


def test_elements_are_hashable_and_immutable():
    g = P(SIGMA_EE)
    assert hash(g) == hash(P(SIGMA_EE))
    with pytest.raises(ValueError):
        g.leaves[0] = 3


def test_random_large_arity_inverse():
    rnd = random.Random(5)
    g = oracle.random_portrait(5, 3, rnd)
    ta = from_oracle(g, 5, 3)
    assert compose(ta, invert(ta)).is_identity()
