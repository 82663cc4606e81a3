import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from conftest import from_oracle
from treegroups import batch
from treegroups.haar import SeededRng, fpp_exact
from treegroups.tree import (
    TruncatedAutomorphism,
    act_vertex,
    all_automorphisms,
    are_m_cousins,
    identity,
    product,
    section,
    vertices_at_level,
)
from treegroups.words import (
    ReducedWord,
    TupleSample,
    concat,
    count_reduced_words,
    cousins_along_trajectory,
    enumerate_reduced_words,
    evaluate,
    free_action_experiment,
    freeness_experiment,
    reduce,
    sample_tuple,
    single_letter_estimate,
    trajectory,
    trajectory_sections,
    word_fixed_counts,
)
from treegroups.zoo import AbelianLevel, Affine, FullWreath

SIGMA_EE = TruncatedAutomorphism.parse("21(12(),12())")
E_SIGMA_E = TruncatedAutomorphism.parse("12(21(),12())")


def W(text, k=2):
    return ReducedWord.parse(text, k)


# -- words ---------------------------------------------------------------------------


def test_reduce_examples():
    assert reduce([1, -1], 1) == ReducedWord((), 1)
    assert reduce([1, 2, -2, 1], 2) == ReducedWord((1, 1), 2)
    w = ReducedWord((1, -2, 1), 2)
    assert reduce(w.letters, 2) == w


@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30))
def test_reduce_is_idempotent_and_reduced(letters):
    w = reduce(letters, 3)
    assert reduce(w.letters, 3) == w
    assert all(a != -b for a, b in zip(w.letters, w.letters[1:]))


def test_reduce_rejects_bad_letters():
    with pytest.raises(ValueError):
        reduce([3], 2)
    with pytest.raises(ValueError):
        reduce([0], 2)
    with pytest.raises(ValueError):
        ReducedWord((1, -1), 1)


def test_text_round_trip():
    w = ReducedWord((1, -2, -2, 1), 2)
    assert str(w) == "x1 x2^-1 x2^-1 x1"
    assert W(str(w)) == w
    assert W("x1x2^-1x2^-1x1") == w
    assert W("e") == ReducedWord((), 2) and str(ReducedWord((), 2)) == "e"
    with pytest.raises(ValueError):
        W("x1 y2")


def test_enumeration_examples():
    assert [str(w) for w in enumerate_reduced_words(1, 2)] == ["x1", "x1^-1", "x1 x1", "x1^-1 x1^-1"]
    assert len(enumerate_reduced_words(2, 1)) == 4
    assert len(enumerate_reduced_words(2, 2)) == 16
    assert enumerate_reduced_words(3, 0) == []


def _brute_force_words(k, L):
    alphabet = [x for i in range(1, k + 1) for x in (i, -i)]
    seen = set()
    for length in range(1, L + 1):
        for letters in itertools.product(alphabet, repeat=length):
            if all(a != -b for a, b in zip(letters, letters[1:])):
                seen.add(letters)
    return seen


@pytest.mark.parametrize("k,L", [(1, 4), (2, 3), (2, 4), (3, 3)])
def test_enumeration_is_complete_and_ordered(k, L):
    words = enumerate_reduced_words(k, L)
    assert {w.letters for w in words} == _brute_force_words(k, L)
    assert len(words) == len({w.letters for w in words}) == count_reduced_words(k, L)
    rank = {x: i for i, x in enumerate(x for i in range(1, k + 1) for x in (i, -i))}
    keys = [(len(w), [rank[x] for x in w.letters]) for w in words]
    assert keys == sorted(keys)


def test_inverse_and_prefix():
    w = W("x1 x2^-1 x1")
    assert str(w.inverse()) == "x1^-1 x2 x1^-1"
    assert concat(w, w.inverse()) == ReducedWord((), 2)
    assert str(w.prefix(2)) == "x1 x2^-1"


# -- evaluation -----------------------------------------------------------------------


def test_evaluate_examples():
    tup = TupleSample([SIGMA_EE, E_SIGMA_E])
    assert evaluate(W("x1"), tup) == SIGMA_EE
    assert evaluate(W("x1 x2"), tup).encode() == "21(12(),21())"
    assert evaluate(W("e"), tup).is_identity()
    with pytest.raises(ValueError):
        evaluate(W("x1", 3), tup)


def test_commutator_is_trivial_in_abelian_model():
    model = AbelianLevel(3)
    for s in range(20):
        tup = sample_tuple(model, 2, 5, SeededRng(s))
        assert evaluate(W("x1 x2 x1^-1 x2^-1"), tup).is_identity()


def _batch_eval(word, columns):
    """Evaluate a word on many tuples at once; ``columns[i]`` stacks the i-th generator."""
    out = batch.identity_rows(len(columns[0]), 2, 2)
    for x in word.letters:
        g = columns[abs(x) - 1]
        out = batch.compose(out, g if x > 0 else batch.invert(g))
    return out


def test_concatenation_is_a_homomorphism():
    elems = batch.stack(list(all_automorphisms(2, 2)), 2, 2)
    pairs = np.array(list(itertools.product(range(8), repeat=2)))
    columns = [elems[pairs[:, 0]], elems[pairs[:, 1]]]
    words = [ReducedWord((), 2)] + enumerate_reduced_words(2, 3)
    values = {w: _batch_eval(w, columns) for w in words}
    for w1, w2 in itertools.product(words, repeat=2):
        assert np.array_equal(_batch_eval(concat(w1, w2), columns), batch.compose(values[w1], values[w2]))


def test_evaluation_matches_oracle_product():
    rnd = random.Random(3)
    for _ in range(30):
        gs = [oracle.random_portrait(2, 4, rnd) for _ in range(2)]
        tup = TupleSample([from_oracle(g, 2, 4) for g in gs])
        for w in enumerate_reduced_words(2, 3):
            acc = oracle.identity(2, 4)
            for x in w.letters:
                g = gs[abs(x) - 1]
                acc = oracle.compose(acc, g if x > 0 else oracle.inverse(g))
            assert evaluate(w, tup) == from_oracle(acc, 2, 4)


# -- trajectories ---------------------------------------------------------------------


def test_trajectory_sections_example():
    tup = TupleSample([SIGMA_EE, E_SIGMA_E])
    secs = trajectory_sections(W("x1 x2"), tup, "1", 1)
    assert [s.encode() for s in secs] == ["12()", "12()"]
    assert product(secs, 2, 1) == section(evaluate(W("x1 x2"), tup), "1", 1)
    assert trajectory_sections(W("e"), tup, "1", 1) == []
    assert trajectory_sections(W("x1"), tup, "2", 1) == [section(SIGMA_EE, "2", 1)]
    with pytest.raises(ValueError):
        trajectory_sections(W("x1"), tup, "12", 1)


def _trajectory_identity_holds(word, tup):
    for v in vertices_at_level(2, 1):
        secs = trajectory_sections(word, tup, v, 2)
        if product(secs, 2, 2) != section(evaluate(word, tup), v, 2):
            return False
    return True


def test_trajectory_identity_exhaustive_rank_one():
    words = enumerate_reduced_words(1, 4)
    for g in all_automorphisms(2, 3):
        tup = TupleSample([g])
        assert all(_trajectory_identity_holds(w, tup) for w in words)


def test_trajectory_identity_sampled_rank_two():
    words = enumerate_reduced_words(2, 4)
    model = FullWreath(2)
    for s in range(60):
        tup = sample_tuple(model, 2, 3, SeededRng(s))
        assert all(_trajectory_identity_holds(w, tup) for w in words)


def test_trajectory_follows_prefixes():
    tup = sample_tuple(FullWreath(2), 2, 4, SeededRng(1))
    w = W("x1 x2^-1 x1 x2")
    for v in vertices_at_level(2, 3):
        traj = trajectory(w, tup, v)
        assert traj[0] == v
        for i in range(1, len(w)):
            assert traj[i] == act_vertex(evaluate(w.prefix(i), tup), v)


# -- cousins along trajectories ---------------------------------------------------------------


def test_cousins_examples():
    # D = 1: x1 moves "12" itself
    tup = TupleSample([SIGMA_EE, E_SIGMA_E])
    rep = cousins_along_trajectory(W("x1 x2"), tup, "12", 1)
    assert rep.applicable and rep.pairwise_non_cousins
    # with D = 2 the ancestor is "1", which x2 fixes
    rep = cousins_along_trajectory(W("x2 x1"), tup, "12", 2)
    assert not rep.applicable
    with pytest.raises(ValueError):
        cousins_along_trajectory(W("x1"), tup, "1", 2)


def test_depth_one_is_always_non_cousin():
    model = FullWreath(2)
    for s in range(30):
        tup = sample_tuple(model, 2, 3, SeededRng(s))
        for w in enumerate_reduced_words(2, 3):
            for v in vertices_at_level(2, 2):
                assert cousins_along_trajectory(w, tup, v, 1).pairwise_non_cousins


def test_moved_ancestor_is_not_enough_beyond_two_letters():
    g1 = TruncatedAutomorphism.parse("21(12(),12())")
    g2 = TruncatedAutomorphism.parse("12(12(),21())")
    rep = cousins_along_trajectory(W("x1 x2 x1"), TupleSample([g1, g2]), "11", 2)
    assert rep.trajectory == ("11", "21", "22")
    assert rep.applicable and not rep.subwords_move
    assert not rep.pairwise_non_cousins and are_m_cousins("21", "22", 1)


def _check_cousin_implications(w, tup, v, D):
    rep = cousins_along_trajectory(w, tup, v, D)
    if rep.subwords_move:
        assert rep.applicable and rep.pairwise_non_cousins
    if rep.applicable and (D == 1 or len(w) <= 2):
        assert rep.pairwise_non_cousins


def test_cousin_implications_exhaustive_rank_one():
    words = enumerate_reduced_words(1, 3)
    for g in all_automorphisms(2, 3):
        tup = TupleSample([g])
        for D in (1, 2, 3):
            for v in vertices_at_level(2, 3):
                for w in words:
                    _check_cousin_implications(w, tup, v, D)


def test_cousin_implications_sampled_rank_two():
    words = enumerate_reduced_words(2, 3)
    model = FullWreath(2)
    for s in range(40):
        tup = sample_tuple(model, 2, 3, SeededRng(100 + s))
        for D in (1, 2, 3):
            for v in vertices_at_level(2, 3):
                for w in words:
                    _check_cousin_implications(w, tup, v, D)


# -- experiments ----------------------------------------------------------------------------


def test_abelian_squares_are_trivial():
    report = freeness_experiment(AbelianLevel(2), 2, 2, 6, 50, SeededRng(0))
    assert report.values["failure_rate"] == 1.0
    assert next(p for p in report.per_word if p["word"] == "x1 x1")["trivial"] == 50
    assert not report.verdicts["no_witness"]


def test_single_letter_failure_rate_is_inverse_order():
    # exactly: x1 is trivial iff g1 is, which has probability 1 / |pi_n(G)|
    for model, n in [(FullWreath(2), 1), (FullWreath(2), 2), (AbelianLevel(3), 2)]:
        trivial = sum(evaluate(W("x1", 1), TupleSample([g])).is_identity()
                      for g in batch.unstack(model.quotient(n), model.d, n))
        assert Fraction(trivial, model.order(n)) == Fraction(1, model.order(n))
        report = freeness_experiment(model, 1, 1, n, 2000, SeededRng(4))
        est = report.intervals["failure_rate"]
        assert est["ci_lo"] <= 1 / model.order(n) <= est["ci_hi"]


def test_freeness_report_is_honest_about_depth():
    report = freeness_experiment(FullWreath(2), 2, 4, 8, 10, SeededRng(9))
    statuses = {t["status"] for t in report.per_tuple}
    assert statuses <= {"witness at depth 8", "consistent at depth 8"}
    assert report.words == [str(w) for w in enumerate_reduced_words(2, 4)]
    assert [t["stream"] for t in report.per_tuple] == list(range(10))


def test_freeness_thread_invariance():
    a = freeness_experiment(FullWreath(2), 2, 3, 6, 12, SeededRng(5, 2))
    b = freeness_experiment(FullWreath(2), 2, 3, 6, 12, SeededRng(5, 2), threads=4)
    assert a.to_dict() == b.to_dict()


def test_word_fixed_counts():
    tup = TupleSample([SIGMA_EE, E_SIGMA_E])
    assert word_fixed_counts(W("x2"), tup) == [2, 2]
    assert word_fixed_counts(W("x1"), tup) == [0, 0]
    with pytest.raises(ValueError):
        word_fixed_counts(W("e"), tup)


def test_free_action_commutator_on_abelian():
    words = [W("x1 x2 x1^-1 x2^-1")]
    report = free_action_experiment(AbelianLevel(2), 2, 4, 5, 20, SeededRng(1), words=words)
    assert report.fixed_curve == [1.0] * 5
    assert report.per_word[0]["mean_fixed"] == [2.0, 4.0, 8.0, 16.0, 32.0]
    with pytest.raises(ValueError):
        free_action_experiment(AbelianLevel(2), 2, 4, 5, 20, SeededRng(1), words=[W("e")])


def test_free_action_single_letter_matches_fpp():
    report = free_action_experiment(FullWreath(2), 2, 1, 4, 3000, SeededRng(12))
    est = single_letter_estimate(report)
    assert est.trials == 6000
    assert est.covers(fpp_exact(FullWreath(2), 4))


def test_free_action_curve_is_non_increasing_and_deterministic():
    a = free_action_experiment(Affine(3), 2, 2, 4, 30, SeededRng(2))
    b = free_action_experiment(Affine(3), 2, 2, 4, 30, SeededRng(2), threads=3)
    assert a.to_dict() == b.to_dict()
    assert all(y <= x for x, y in zip(a.fixed_curve, a.fixed_curve[1:]))
    for t in a.per_tuple:
        assert t["N"] is None or 1 <= t["N"] <= 4


def test_identity_tuple_evaluates_trivially():
    tup = TupleSample([identity(2, 3)] * 2)
    assert all(evaluate(w, tup).is_identity() for w in enumerate_reduced_words(2, 2))
