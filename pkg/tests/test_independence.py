import itertools
from collections import Counter
from fractions import Fraction

import pytest

import oracle
from treegroups.haar import (
    SeededRng,
    check_section_measure_preserving,
    independence_chi_square,
    independence_exact,
    kernel_size_check,
    non_cousin_sets,
)
from treegroups.tree import Vertex
from treegroups.zoo import Affine, AbelianLevel, CyclicWreath, FullWreath, PatternModel, PatternSpec, parse_group_tag


def _oracle_joint(n, m, V):
    """Joint law of the sections of a uniform element of Aut(T^{n+m}), d=2, from nested portraits."""
    hits = Counter()
    elements = list(oracle.all_portraits(2, n + m))
    for g in elements:
        hits[tuple(oracle.to_text(oracle.section(g, v, m)) for v in V)] += 1
    return {key: Fraction(c, len(elements)) for key, c in hits.items()}


def test_full_wreath_exact_example():
    report = independence_exact(FullWreath(2), 1, 1, ["1", "2"])
    assert report.verdict and report.vertical
    assert report.cells == 4
    assert sorted(report.joint.values()) == [Fraction(1, 4)] * 4


def test_full_wreath_joint_matches_oracle():
    for n, m, V in [(1, 1, [(0,), (1,)]), (2, 1, [(0, 0), (1, 0)]), (1, 2, [(0,), (1,)])]:
        expected = _oracle_joint(n, m, V)
        report = independence_exact(FullWreath(2), n, m, ["".join(str(x + 1) for x in v) for v in V])
        assert sorted(report.joint.values()) == sorted(expected.values())
        assert report.verdict == (len(set(expected.values())) == 1 and len(expected) == report.cells)


def test_abelian_exact_is_diagonal():
    report = independence_exact(AbelianLevel(2), 1, 1, ["1", "2"])
    assert not report.verdict
    assert report.joint == {"0,0": Fraction(1, 2), "1,1": Fraction(1, 2)}


def test_single_vertex_matches_measure_preservation():
    for model in (FullWreath(2), AbelianLevel(3), CyclicWreath(3), parse_group_tag("grigorchuk")):
        for n, m in [(1, 1), (1, 2), (2, 1)]:
            for i in range(model.d**n):
                v = str(Vertex.from_index(i, n, model.d))
                assert independence_exact(model, n, m, [v]).verdict == check_section_measure_preserving(model, n, m, v)


def _cases():
    yield FullWreath(2), 1, 1, non_cousin_sets(2, 1, 0)
    yield FullWreath(2), 2, 1, non_cousin_sets(2, 2, 0)
    yield FullWreath(2), 1, 2, non_cousin_sets(2, 1, 0)
    yield FullWreath(2), 2, 2, non_cousin_sets(2, 2, 0)
    yield AbelianLevel(2), 1, 1, non_cousin_sets(2, 1, 0)
    yield AbelianLevel(2), 2, 2, non_cousin_sets(2, 2, 0)
    yield AbelianLevel(3), 1, 2, non_cousin_sets(3, 1, 0)
    yield CyclicWreath(3), 1, 1, non_cousin_sets(3, 1, 0)
    yield Affine(3), 1, 1, non_cousin_sets(3, 1, 0)
    yield parse_group_tag("grigorchuk"), 2, 1, non_cousin_sets(2, 2, 0)
    yield parse_group_tag("grigorchuk"), 1, 2, non_cousin_sets(2, 1, 0)
    yield PatternModel(PatternSpec.trivial(2, 1)), 1, 1, non_cousin_sets(2, 1, 0)


@pytest.mark.parametrize("case", list(_cases()), ids=lambda c: f"{c[0].name}-{c[1]}-{c[2]}")
def test_kernel_identity_iff_joint_independence(case):
    model, n, m, sets = case
    for V in sets:
        report = independence_exact(model, n, m, V)
        kernel = kernel_size_check(model, n, m, V, strict=False, method="enumerate")
        assert kernel.match == (report.verdict and report.vertical), (V, kernel, report.verdict, report.vertical)


def test_affine_level_two_equivalence_sample():
    model = Affine(3)
    for V in [[], ["11"], ["11", "21"], ["11", "22", "33"], ["11", "12"]]:
        report = independence_exact(model, 2, 1, V)
        kernel = kernel_size_check(model, 2, 1, V, strict=False)
        assert kernel.match == (report.verdict and report.vertical)


def test_chi_square_examples():
    ok = independence_chi_square(FullWreath(2), 2, 1, ["11", "21"], 10_000, rng=SeededRng(2024))
    assert ok.verdict and ok.df == 3 and ok.samples == 10_000
    bad = independence_chi_square(AbelianLevel(2), 1, 1, ["1", "2"], 10_000, rng=SeededRng(2024))
    assert not bad.verdict
    assert bad.statistic > 1000


def test_chi_square_is_deterministic_and_thread_invariant():
    args = (FullWreath(2), 2, 1, ["11", "21"], 5000)
    a = independence_chi_square(*args, rng=SeededRng(7, 3))
    b = independence_chi_square(*args, rng=SeededRng(7, 3), threads=4)
    assert a.to_dict() == b.to_dict()
    assert a.streams["first_stream"] == 3 and a.streams["blocks"] == 5


def test_chi_square_cell_guard():
    with pytest.raises(ValueError):
        independence_chi_square(FullWreath(2), 2, 2, ["11", "21"], 300)


def test_vertices_validated():
    with pytest.raises(ValueError):
        independence_exact(FullWreath(2), 2, 1, ["1"])
    with pytest.raises(ValueError):
        independence_exact(FullWreath(2), 1, 1, ["3"])


def test_joint_law_counts_sum_to_one():
    for model, n, m in itertools.product([FullWreath(2), AbelianLevel(2)], [1, 2], [1]):
        report = independence_exact(model, n, m, ["1" * n])
        assert sum(report.joint.values()) == 1
