"""Reduced words in free groups and word maps into tree groups.

A word is a tuple of signed generator indices: ``i`` stands for x_i and
``-i`` for its inverse. Word maps are evaluated left to right, matching the
right action on the tree: ``v * w(g)`` follows v through ``g_{i_1}``, then
``g_{i_2}``, and so on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import batch
from .haar.rng import SeededRng, run_blocks
from .haar.stats import Estimate, proportion
from .tree import (
    TruncatedAutomorphism,
    Vertex,
    VertexLike,
    act_vertex,
    are_m_cousins,
    as_vertex,
    compose,
    identity,
    invert,
    section,
)
from .zoo.models import GroupModel


def _check_letters(letters: Iterable[int], k: int) -> tuple[int, ...]:
    if k < 1:
        raise ValueError("rank must be at least 1")
    letters = tuple(int(x) for x in letters)
    for x in letters:
        if x == 0 or abs(x) > k:
            raise ValueError(f"letter {x} out of range for rank {k}")
    return letters


def _free_reduce(letters: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class ReducedWord:
    letters: tuple[int, ...]
    k: int

    def __post_init__(self):
        letters = _check_letters(self.letters, self.k)
        if _free_reduce(letters) != letters:
            raise ValueError(f"{letters} is not freely reduced; use reduce()")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(f"x{x}" if x > 0 else f"x{-x}^-1" for x in self.letters)

    @classmethod
    def parse(cls, text: str, k: int) -> "ReducedWord":
        """Inverse of ``str``; spaces are optional (``"x1x2^-1"``) and ``"e"`` is the empty word."""
        body = re.sub(r"\s+|\*", "", text)
        if body in ("", "e", "1"):
            return reduce((), k)
        tokens = re.findall(r"x(\d+)(\^-1)?", body)
        if "".join(f"x{i}{inv}" for i, inv in tokens) != body:
            raise ValueError(f"cannot parse word {text!r}")
        return reduce([-int(i) if inv else int(i) for i, inv in tokens], k)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-x for x in reversed(self.letters)), self.k)

    def prefix(self, i: int) -> "ReducedWord":
        return ReducedWord(self.letters[:i], self.k)


def reduce(letters: Iterable[int], k: int) -> ReducedWord:
    """The free reduction of a letter sequence."""
    return ReducedWord(_free_reduce(_check_letters(letters, k)), k)


def concat(w1: ReducedWord, w2: ReducedWord) -> ReducedWord:
    if w1.k != w2.k:
        raise ValueError("rank mismatch")
    return reduce(w1.letters + w2.letters, w1.k)


def letter_order(k: int) -> list[int]:
    """x1 < x1^-1 < x2 < x2^-1 < ..."""
    return [s * i for i in range(1, k + 1) for s in (1, -1)]


def enumerate_reduced_words(k: int, L: int) -> list[ReducedWord]:
    """Nonempty reduced words of length <= L, by length and then lexicographically."""
    if k < 1 or L < 0:
        raise ValueError("need k >= 1 and L >= 0")
    alphabet = letter_order(k)
    layer = [()]
    out: list[ReducedWord] = []
    for _ in range(L):
        layer = [w + (x,) for w in layer for x in alphabet if not (w and w[-1] == -x)]
        out.extend(ReducedWord(w, k) for w in layer)
    return out


def count_reduced_words(k: int, L: int) -> int:
    return sum(2 * k * (2 * k - 1) ** (l - 1) for l in range(1, L + 1))


# -- tuples and evaluation ---------------------------------------------------


@dataclass
class TupleSample:
    elements: list[TruncatedAutomorphism]
    seed: int | None = None
    stream: int | None = None

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a tuple needs at least one element")
        shapes = {(g.d, g.depth) for g in self.elements}
        if len(shapes) != 1:
            raise ValueError(f"tuple elements disagree on arity/depth: {sorted(shapes)}")

    @property
    def k(self) -> int:
        return len(self.elements)

    @property
    def d(self) -> int:
        return self.elements[0].d

    @property
    def depth(self) -> int:
        return self.elements[0].depth

    def rows(self) -> np.ndarray:
        return batch.stack(self.elements, self.d, self.depth)


def sample_tuple(model: GroupModel, k: int, n: int, rng: SeededRng) -> TupleSample:
    """k independent Haar elements of pi_n(G), all drawn from one stream."""
    rows = model.sample(n, k, rng.generator())
    elements = [TruncatedAutomorphism(model.d, n, r, check=False) for r in rows]
    return TupleSample(elements, seed=rng.seed, stream=rng.stream)


def _letter_element(tup: TupleSample, x: int) -> TruncatedAutomorphism:
    g = tup.elements[abs(x) - 1]
    return g if x > 0 else invert(g)


def _check_rank(word: ReducedWord, tup: TupleSample) -> None:
    if word.k != tup.k:
        raise ValueError(f"word of rank {word.k} evaluated on a {tup.k}-tuple")


def evaluate(word: ReducedWord, tup: TupleSample) -> TruncatedAutomorphism:
    _check_rank(word, tup)
    out = identity(tup.d, tup.depth)
    for x in word.letters:
        out = compose(out, _letter_element(tup, x))
    return out


def trajectory(word: ReducedWord, tup: TupleSample, v: VertexLike) -> list[Vertex]:
    """v, v w_1, ..., v w_{l-1} where w_i is the length-i prefix."""
    _check_rank(word, tup)
    v = as_vertex(v)
    out = []
    for x in word.letters:
        out.append(v)
        v = act_vertex(_letter_element(tup, x), v)
    return out


def trajectory_sections(word: ReducedWord, tup: TupleSample, v: VertexLike, m: int
                        ) -> list[TruncatedAutomorphism]:
    """Sections of the successive letters at the trajectory vertices.

    Their product, left to right, is ``section(evaluate(word, tup), v, m)``.
    """
    v = as_vertex(v)
    if v.level + m > tup.depth:
        raise ValueError(f"section of depth {m} at level {v.level} overflows depth {tup.depth}")
    verts = trajectory(word, tup, v)
    return [section(_letter_element(tup, x), u, m) for x, u in zip(word.letters, verts)]


@dataclass(frozen=True)
class CousinReport:
    applicable: bool
    subwords_move: bool
    pairwise_non_cousins: bool
    trajectory: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "subwords_move": self.subwords_move,
            "pairwise_non_cousins": self.pairwise_non_cousins,
            "trajectory": list(self.trajectory),
        }


def cousins_along_trajectory(word: ReducedWord, tup: TupleSample, v: VertexLike, D: int) -> CousinReport:
    """Are the trajectory vertices of v pairwise not (D-1)-cousins?

    With v on level N + D - 1, ``applicable`` says that every nonempty proper
    prefix of the word moves the level-N ancestor u of v. ``subwords_move``
    is the stronger statement that the trajectory of u never revisits a
    vertex, i.e. every nonempty proper subword w_i^{-1} w_j moves u w_i.
    Distinct level-N ancestors force the non-cousin property; a moved
    ancestor alone does not once the word is longer than two letters.
    """
    v = as_vertex(v)
    if D < 1:
        raise ValueError("pattern depth must be at least 1")
    N = v.level - D + 1
    if N < 1:
        raise ValueError(f"vertex {v} must lie on level N + {D - 1} with N >= 1")
    verts = trajectory(word, tup, v)
    u = v.ancestor(N)
    applicable = all(w.ancestor(N) != u for w in verts[1:])
    tops = [w.ancestor(N) for w in verts]
    subwords_move = len(set(tops)) == len(tops)
    non_cousins = not any(are_m_cousins(a, b, D - 1) for a, b in combinations(verts, 2))
    return CousinReport(applicable, subwords_move, non_cousins, tuple(str(w) for w in verts))


# -- experiments ---------------------------------------------------------------


def _word_tree(k: int, L: int) -> tuple[list[ReducedWord], dict[tuple[int, ...], int]]:
    words = enumerate_reduced_words(k, L)
    return words, {w.letters: i for i, w in enumerate(words)}


def _evaluate_all(rows: np.ndarray, words: list[ReducedWord], index: dict, L: int, k: int, visit) -> None:
    """Depth-first evaluation of every word, calling ``visit(i, value)``.

    ``rows`` holds the tuple (k rows); each word costs one composition.
    """
    letters = {}
    for x in letter_order(k):
        g = rows[abs(x) - 1 : abs(x)]
        letters[x] = g if x > 0 else batch.invert(g)

    def walk(prefix: tuple[int, ...], value: np.ndarray) -> None:
        if len(prefix) == L:
            return
        for x in letter_order(k):
            if prefix and prefix[-1] == -x:
                continue
            w = prefix + (x,)
            nxt = batch.compose(value, letters[x])
            visit(index[w], nxt)
            walk(w, nxt)

    walk((), rows[:1] * 0 + np.arange(rows.shape[1], dtype=rows.dtype))


def _tuple_rows(model: GroupModel, k: int, n: int, rng: SeededRng, i: int) -> np.ndarray:
    return model.sample(n, k, rng.substream(i).generator())


@dataclass
class WordExperimentReport:
    experiment: str
    group: str
    k: int
    L: int
    n: int
    samples: int
    seed: int
    first_stream: int
    words: list[str]
    values: dict = field(default_factory=dict)
    per_word: list[dict] = field(default_factory=list)
    per_tuple: list[dict] = field(default_factory=list)
    fixed_curve: list[float] = field(default_factory=list)
    intervals: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "group": self.group,
            "k": self.k,
            "L": self.L,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "first_stream": self.first_stream,
            "words": list(self.words),
            "values": dict(self.values),
            "per_word": list(self.per_word),
            "per_tuple": list(self.per_tuple),
            "fixed_curve": list(self.fixed_curve),
            "intervals": dict(self.intervals),
            "verdicts": dict(self.verdicts),
        }


def freeness_experiment(model: GroupModel, k: int, L: int, n: int, samples: int, rng: SeededRng, *,
                        threads: int = 1) -> WordExperimentReport:
    """Look for reduced words of length <= L that are trivial at depth n.

    Tuple i is drawn from stream ``rng.stream + i``. A tuple without such a
    word is only consistent with freeness at depth n.
    """
    if samples < 1 or L < 1:
        raise ValueError("need at least one sample and L >= 1")
    words, index = _word_tree(k, L)

    def work(i: int) -> list[int]:
        rows = _tuple_rows(model, k, n, rng, i)
        hits: list[int] = []
        _evaluate_all(rows, words, index, L, k,
                      lambda j, value: hits.append(j) if batch.is_identity(value)[0] else None)
        return sorted(hits)

    results = run_blocks(work, samples, threads)
    per_word = np.zeros(len(words), dtype=np.int64)
    per_tuple = []
    for i, hits in enumerate(results):
        per_word[hits] += 1
        per_tuple.append({
            "stream": rng.stream + i,
            "trivial_words": len(hits),
            "first_witness": str(words[hits[0]]) if hits else None,
            "status": f"witness at depth {n}" if hits else f"consistent at depth {n}",
        })
    failures = sum(1 for hits in results if hits)
    return WordExperimentReport(
        experiment="freeness", group=model.name, k=k, L=L, n=n, samples=samples,
        seed=rng.seed, first_stream=rng.stream, words=[str(w) for w in words],
        values={"tuples_with_witness": failures, "failure_rate": failures / samples},
        per_word=[{"word": str(w), "trivial": int(c)} for w, c in zip(words, per_word)],
        per_tuple=per_tuple,
        intervals={"failure_rate": proportion(failures, samples).to_dict()},
        verdicts={"no_witness": failures == 0},
    )


def word_fixed_counts(word: ReducedWord, tup: TupleSample) -> list[int]:
    """Number of fixed level-l vertices of the evaluation for l = 1..depth."""
    if not word.letters:
        raise ValueError("the empty word fixes everything; give a nontrivial word")
    g = evaluate(word, tup)
    return [int(batch.fixed_counts(g.leaves, g.d, g.depth, l)[0]) for l in range(1, g.depth + 1)]


def free_action_experiment(model: GroupModel, k: int, L: int, n: int, samples: int, rng: SeededRng, *,
                           threads: int = 1, words: Sequence[ReducedWord] | None = None
                           ) -> WordExperimentReport:
    """Fixed vertices of word evaluations, level by level.

    ``fixed_curve[l-1]`` is the share of (tuple, word) pairs fixing a level-l
    vertex. Each tuple also reports its empirical N: the first level from
    which no evaluated word fixes a vertex (None if not reached by depth n).
    The single-letter estimate pools the k * samples independent elements.
    """
    if L < 1 or samples < 1:
        raise ValueError("need L >= 1 and at least one sample")
    all_words, index = _word_tree(k, L)
    if words is not None:
        if any(len(w) == 0 for w in words):
            raise ValueError("the empty word fixes everything; give nontrivial words")
        if any(w.k != k or len(w) > L for w in words):
            raise ValueError("selected words must have rank k and length <= L")
        chosen = sorted(index[w.letters] for w in words)
    else:
        chosen = list(range(len(all_words)))
    position = {j: pos for pos, j in enumerate(chosen)}
    levels = np.arange(1, n + 1)

    def work(i: int) -> np.ndarray:
        rows = _tuple_rows(model, k, n, rng, i)
        counts = np.zeros((len(chosen), n), dtype=np.int64)

        def visit(j, value):
            if j in position:
                counts[position[j]] = [batch.fixed_counts(value, model.d, n, l)[0] for l in levels]

        _evaluate_all(rows, all_words, index, L, k, visit)
        return counts

    counts = np.stack(run_blocks(work, samples, threads))  # (samples, words, n)
    fixes = counts > 0
    curve = fixes.mean(axis=(0, 1))
    per_tuple = []
    for i in range(samples):
        deepest = fixes[i].any(axis=0)
        last = int(np.flatnonzero(deepest)[-1]) + 1 if deepest.any() else 0
        per_tuple.append({"stream": rng.stream + i, "N": None if last == n else last + 1})
    per_word = [
        {
            "word": str(all_words[j]),
            "fixed_at_depth": int(fixes[:, pos, -1].sum()),
            "mean_fixed": [float(x) for x in counts[:, pos, :].mean(axis=0)],
        }
        for pos, j in enumerate(chosen)
    ]
    pairs = fixes[:, :, -1]
    values = {"pair_fixed_proportion": float(pairs.mean())}
    intervals = {"pair_fixed_proportion": proportion(int(pairs.sum()), pairs.size).to_dict()}
    single = [position[index[(i,)]] for i in range(1, k + 1) if index[(i,)] in position]
    if len(single) == k:
        hits = int(fixes[:, single, -1].sum())
        est = proportion(hits, k * samples)
        values["single_letter_proportion"] = est.estimate
        intervals["single_letter_proportion"] = est.to_dict()
    return WordExperimentReport(
        experiment="free-action", group=model.name, k=k, L=L, n=n, samples=samples,
        seed=rng.seed, first_stream=rng.stream, words=[str(all_words[j]) for j in chosen],
        values=values, per_word=per_word, per_tuple=per_tuple,
        fixed_curve=[float(x) for x in curve], intervals=intervals,
    )


def single_letter_estimate(report: WordExperimentReport) -> Estimate:
    iv = report.intervals["single_letter_proportion"]
    return Estimate(iv["successes"], iv["trials"], iv["estimate"], iv["ci_lo"], iv["ci_hi"], iv["method"])
