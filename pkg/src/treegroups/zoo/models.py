"""Concrete closed subgroups of Aut(T) with exact finite quotients.

Three flavours:

* :class:`ChartModel` -- groups with an explicit coordinate chart. Every
  label is a function of one optional *global slot* (shared by all vertices
  of a level) and a free *local* coordinate per vertex. The chart is a
  bijection onto each quotient, so uniform coordinates give exact Haar
  samples and all orders and stabiliser counts have product formulas.
  Built-ins: ``full-wreath``, ``cyclic-wreath``, ``abelian-level``, ``affine``.
* :class:`PatternModel` -- finite-type groups G_P given by a pattern group of
  depth-D portraits.
* :class:`RecursionModel` -- self-similar groups given by wreath recursions
  (e.g. the first Grigorchuk group), enumerated by closure.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Mapping, Sequence

import numpy as np

from .. import batch
from ..tree import (
    Permutation,
    TruncatedAutomorphism,
    check_permutation,
    leaf_dtype,
)

DEFAULT_MAX_ELEMENTS = 5_000_000


class QuotientTooLarge(ValueError):
    """Raised when a quotient would exceed the enumeration cap."""


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def _perm_codes(table: np.ndarray, d: int) -> np.ndarray:
    """Integer code of each 0-based permutation along the last axis."""
    weights = d ** np.arange(d, dtype=np.int64)
    return (table.astype(np.int64) * weights).sum(axis=-1)


class GroupModel:
    """Base class: a closed subgroup of Aut(T) known through its quotients."""

    kind: str = "abstract"
    coordinate_sampler = False

    def __init__(self, d: int, params: Mapping | None = None, *, declared_depth: int | None = None,
                 name: str | None = None, max_elements: int = DEFAULT_MAX_ELEMENTS):
        if d < 2:
            raise ValueError("arity must be at least 2")
        self.d = d
        self.params = dict(params or {})
        self.declared_depth = declared_depth
        self.max_elements = max_elements
        self._name = name
        self._cache: dict = {}
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self._name or f"{self.kind}:{self.d}"

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    # -- quotients --------------------------------------------------------

    def _cached(self, key, build):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    def order(self, n: int) -> int:
        """|pi_n(G)|."""
        return len(self.quotient(n))

    def quotient(self, n: int) -> np.ndarray:
        """All of pi_n(G) as a read-only stack of leaf permutations."""
        if n < 0:
            raise ValueError("depth must be non-negative")

        def build():
            rows = self._enumerate(n)
            rows.flags.writeable = False
            return rows

        return self._cached(("quotient", n), build)

    def sorted_keys(self, n: int) -> np.ndarray:
        return self._cached(("keys", n), lambda: np.sort(batch.row_keys(self.quotient(n))))

    def enumerable(self, n: int) -> bool:
        try:
            self.quotient(n)
        except QuotientTooLarge:
            return False
        return True

    def _guard(self, size: int, n: int) -> None:
        if size > self.max_elements:
            raise QuotientTooLarge(
                f"{self.name}: quotient at depth {n} would have {size} elements "
                f"(cap {self.max_elements})"
            )

    def _enumerate(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def contains(self, rows: np.ndarray, n: int) -> np.ndarray:
        """Membership mask of depth-n rows in pi_n(G)."""
        rows = np.atleast_2d(rows)
        return batch.index_in(rows, self.sorted_keys(n)) >= 0

    def __contains__(self, g: TruncatedAutomorphism) -> bool:
        return g.d == self.d and bool(self.contains(g.leaves[None, :], g.depth)[0])

    # -- sampling ---------------------------------------------------------

    def sample(self, n: int, count: int, generator: np.random.Generator) -> np.ndarray:
        """``count`` independent uniform elements of pi_n(G)."""
        rows = self.quotient(n)
        return rows[generator.integers(0, len(rows), size=count)]


# -- chart models -------------------------------------------------------------


class ChartModel(GroupModel):
    """Labels at level l are ``table(l)[slot value, local]``."""

    coordinate_sampler = True

    def slot_sizes(self, n: int) -> list[int]:
        """Sizes of the global slots used by the first n levels."""
        return []

    def level_slot(self, level: int) -> int | None:
        return None

    def level_table(self, level: int) -> np.ndarray:
        """0-based labels, shape (slot size or 1, local size, d)."""
        raise NotImplementedError

    def local_size(self, level: int) -> int:
        return self.level_table(level).shape[1]

    def order(self, n: int) -> int:
        total = math.prod(self.slot_sizes(n))
        for level in range(n):
            total *= self.local_size(level) ** (self.d**level)
        return total

    def _enumerate(self, n: int) -> np.ndarray:
        self._guard(self.order(n), n)
        return self.chart_rows(list(range(n)))

    def chart_rows(self, levels: Sequence[int]) -> np.ndarray:
        """Every portrait whose relative level j uses the chart of ``levels[j]``.

        With ``levels = range(n)`` this is pi_n(G) in chart order; with
        ``levels = range(l, l + m)`` it lists the depth-m sections at a
        level-l vertex once per choice of the coordinates they depend on.
        """
        d = self.d
        slots = sorted({s for s in (self.level_slot(l) for l in levels) if s is not None})
        all_sizes = self.slot_sizes(max(levels) + 1) if levels else []
        radices = [all_sizes[s] for s in slots]
        for j, level in enumerate(levels):
            radices += [self.local_size(level)] * d**j
        total = math.prod(radices)
        if total > self.max_elements:
            raise QuotientTooLarge(f"{self.name}: {total} chart points exceed the cap")
        digits = _mixed_radix(np.arange(total, dtype=np.int64), radices)
        slot_values = {s: digits[i] for i, s in enumerate(slots)}
        pos = len(slots)
        labels = []
        for j, level in enumerate(levels):
            width = d**j
            local = np.stack(digits[pos : pos + width], axis=1) if width else None
            pos += width
            table = self.level_table(level)
            slot = self.level_slot(level)
            sv = slot_values[slot] if slot is not None else np.zeros(total, dtype=np.int64)
            labels.append(table[sv[:, None], local])
        if not levels:
            return np.zeros((1, 1), dtype=leaf_dtype(d, 0))
        return batch.from_label_arrays(labels, d)

    def sample(self, n: int, count: int, generator: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.zeros((count, 1), dtype=leaf_dtype(self.d, 0))
        slot_values = [generator.integers(0, size, size=count) for size in self.slot_sizes(n)]
        labels = []
        for level in range(n):
            table = self.level_table(level)
            local = generator.integers(0, table.shape[1], size=(count, self.d**level))
            slot = self.level_slot(level)
            sv = slot_values[slot] if slot is not None else np.zeros(count, dtype=np.int64)
            labels.append(table[sv[:, None], local])
        return batch.from_label_arrays(labels, self.d)

    def contains(self, rows: np.ndarray, n: int) -> np.ndarray:
        rows = np.atleast_2d(rows)
        if n == 0:
            return np.ones(len(rows), dtype=bool)
        per_slot: dict[int, np.ndarray] = {}
        ok = np.ones(len(rows), dtype=bool)
        for level, lab in enumerate(batch.label_arrays(rows, self.d, n)):
            codes = _perm_codes(lab, self.d)
            table_codes = _perm_codes(self.level_table(level), self.d)
            fits = np.stack(
                [np.isin(codes, table_codes[g]).all(axis=1) for g in range(len(table_codes))], axis=1
            )
            slot = self.level_slot(level)
            if slot is None:
                ok &= fits[:, 0]
            elif slot in per_slot:
                per_slot[slot] &= fits
            else:
                per_slot[slot] = fits
        for fits in per_slot.values():
            ok &= fits.any(axis=1)
        return ok

    def identity_local_counts(self, level: int) -> np.ndarray:
        """For each slot value, the number of locals giving the identity label."""
        table = self.level_table(level)
        return np.all(table == np.arange(self.d), axis=2).sum(axis=1)

    def count_with_trivial_labels(self, depth: int, constrained: Sequence[int]) -> int:
        """Number of elements of pi_depth(G) with prescribed trivial labels.

        ``constrained[l]`` is how many level-l vertices must carry the
        identity label; all other labels are free. The count only depends on
        these numbers because locals are independent across vertices.
        """
        d = self.d
        by_slot: dict[int | None, list[int]] = {}
        for level in range(depth):
            by_slot.setdefault(self.level_slot(level), []).append(level)
        total = 1
        sizes = self.slot_sizes(depth)
        for slot, levels in by_slot.items():
            n_values = 1 if slot is None else sizes[slot]
            acc = 0
            for g in range(n_values):
                term = 1
                for level in levels:
                    k = constrained[level]
                    term *= int(self.identity_local_counts(level)[g]) ** k
                    term *= self.local_size(level) ** (d**level - k)
                acc += term
            total *= acc
        used = {s for s in by_slot if s is not None}
        for s, size in enumerate(sizes):
            if s not in used:
                total *= size
        return total


def _mixed_radix(values: np.ndarray, radices: Sequence[int]) -> list[np.ndarray]:
    """Digits of ``values``; the first radix is the most significant."""
    digits = [None] * len(radices)
    rest = values
    for i in range(len(radices) - 1, -1, -1):
        rest, digits[i] = np.divmod(rest, radices[i])
    return digits


class FullWreath(ChartModel):
    """Aut(T) itself: every label is an arbitrary permutation."""

    kind = "full-wreath"

    def __init__(self, d: int, **kw):
        super().__init__(d, {"d": d}, declared_depth=1, **kw)
        self._table = np.array(list(permutations(range(d))), dtype=np.int64)[None, :, :]

    def level_table(self, level):
        return self._table


class CyclicWreath(ChartModel):
    """W_p: every label is a power of the p-cycle x -> x + 1."""

    kind = "cyclic-wreath"

    def __init__(self, p: int, **kw):
        if not is_prime(p):
            raise ValueError(f"cyclic-wreath needs a prime, got {p}")
        super().__init__(p, {"p": p}, declared_depth=1, **kw)
        x = np.arange(p)
        self._table = ((x[None, :] + x[:, None]) % p)[None, :, :]

    def level_table(self, level):
        return self._table


class AbelianLevel(ChartModel):
    """Level-constant labels sigma**e_l: an elementary abelian p-group.

    The element with coordinates (e_0, e_1, ...) acts on a vertex x_1 x_2 ...
    by x_i -> x_i + e_{i-1} (mod p). Stabilisers of levels are again copies of
    the whole group, so the group is super strongly fractal, yet every
    finitely generated subgroup is finite.
    """

    kind = "abelian-level"

    def __init__(self, p: int, **kw):
        if not is_prime(p):
            raise ValueError(f"abelian-level needs a prime, got {p}")
        super().__init__(p, {"p": p}, declared_depth=None, **kw)
        x = np.arange(p)
        self._table = ((x[None, :] + x[:, None]) % p)[:, None, :]

    def slot_sizes(self, n):
        return [self.d] * n

    def level_slot(self, level):
        return level

    def level_table(self, level):
        return self._table


class Affine(ChartModel):
    """Labels x -> a x + b_v on Z/d with one multiplier a shared by all vertices.

    Letters 1..d are identified with residues 0..d-1. The finite-type depth
    defaults to 2: sharing a multiplier is the local condition that parent
    and child labels have the same a.
    """

    kind = "affine"

    def __init__(self, d: int, D: int = 2, **kw):
        super().__init__(d, {"d": d, "D": D}, declared_depth=D, **kw)
        self.units = [a for a in range(1, d) if math.gcd(a, d) == 1]
        x = np.arange(d)
        self._table = np.array(
            [[(a * x + b) % d for b in range(d)] for a in self.units], dtype=np.int64
        )

    def slot_sizes(self, n):
        return [len(self.units)] if n >= 1 else []

    def level_slot(self, level):
        return 0

    def level_table(self, level):
        return self._table

    def coordinates(self, g: TruncatedAutomorphism) -> tuple[int, list[int]]:
        """(a, [b_v in breadth-first order]) of a member portrait."""
        if g.depth == 0:
            return 1, []
        a = (g.label_array(0)[0][1] - g.label_array(0)[0][0]) % self.d
        bs = []
        for level in range(g.depth):
            lab = g.label_array(level)
            if not np.all(lab == (a * np.arange(self.d) + lab[:, :1]) % self.d):
                raise ValueError("portrait is not affine with a common multiplier")
            bs.extend(int(b) for b in lab[:, 0])
        return int(a), bs

    def from_coordinates(self, a: int, bs: Sequence[int], depth: int) -> TruncatedAutomorphism:
        x = np.arange(self.d)
        labels = [tuple(int(y) + 1 for y in (a * x + b) % self.d) for b in bs]
        return TruncatedAutomorphism.from_labels(self.d, depth, labels)


# -- pattern groups ------------------------------------------------------------


@dataclass(frozen=True)
class PatternSpec:
    """A subgroup P of Aut(T^D) defining the finite-type group G_P."""

    d: int
    D: int
    allowed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("pattern depth must be at least 1")
        allowed = frozenset(self.allowed)
        object.__setattr__(self, "allowed", allowed)
        if not allowed:
            raise ValueError("pattern set is empty")
        if any(g.d != self.d or g.depth != self.D for g in allowed):
            raise ValueError("patterns must be depth-D portraits of arity d")
        if TruncatedAutomorphism.identity(self.d, self.D) not in allowed:
            raise ValueError("pattern set must contain the identity")
        rows = batch.stack(list(allowed), self.d, self.D)
        keys = np.sort(batch.row_keys(rows))
        if (batch.index_in(batch.invert(rows), keys) < 0).any():
            raise ValueError("pattern set not closed under inversion")
        for g in rows:
            if (batch.index_in(batch.compose(g[None, :], rows), keys) < 0).any():
                raise ValueError("pattern set not closed under composition")

    @classmethod
    def from_strings(cls, d: int, D: int, patterns: Sequence[str]) -> "PatternSpec":
        return cls(d, D, frozenset(TruncatedAutomorphism.parse(s, d) for s in patterns))

    @classmethod
    def trivial(cls, d: int, D: int = 1) -> "PatternSpec":
        return cls(d, D, frozenset([TruncatedAutomorphism.identity(d, D)]))


class PatternModel(GroupModel):
    """G_P truncated at depth n: every window ``section(g, u, min(D, n - |u|))``
    must lie in the matching truncation of P."""

    kind = "pattern"

    def __init__(self, spec: PatternSpec, **kw):
        super().__init__(spec.d, {"D": spec.D, "patterns": len(spec.allowed)}, declared_depth=spec.D, **kw)
        self.spec = spec
        d, D = spec.d, spec.D
        self._pattern_rows = batch.unique_rows(batch.stack(sorted(spec.allowed, key=lambda g: g.key()), d, D))
        self._proj_keys = {
            k: np.sort(np.unique(batch.row_keys(batch.project(self._pattern_rows, d, D, k))))
            for k in range(D + 1)
        }

    @property
    def name(self) -> str:
        return self._name or f"pattern:{self.d}:D={self.spec.D}:|P|={len(self.spec.allowed)}"

    def window_filter(self, rows: np.ndarray, n: int) -> np.ndarray:
        """Mask of depth-n rows all of whose windows are allowed."""
        d, D = self.d, self.spec.D
        rows = np.atleast_2d(rows)
        ok = np.ones(len(rows), dtype=bool)
        for level in range(n):
            k = min(D, n - level)
            keys = self._proj_keys[k]
            for idx in range(d**level):
                sec = batch.section(rows, d, n, idx, level, k)
                ok &= batch.index_in(sec, keys) >= 0
        return ok

    def contains(self, rows, n):
        return self.window_filter(rows, n)

    def _admissible(self) -> np.ndarray:
        """Patterns whose own sub-windows are allowed (the ones usable as completions)."""
        return self._pattern_rows[self.window_filter(self._pattern_rows, self.spec.D)]

    def _enumerate(self, n: int) -> np.ndarray:
        d, D = self.d, self.spec.D
        if n <= D:
            cand = batch.unique_rows(batch.project(self._pattern_rows, d, D, n))
            rows = cand[self.window_filter(cand, n)]
            self._guard(len(rows), n)
            return rows
        prev = self.quotient(n - 1)
        adm = self._admissible()
        tops = batch.project(adm, d, D, D - 1)
        top_keys, top_inverse = np.unique(batch.row_keys(tops), return_inverse=True)
        bottom = batch.label_arrays(adm, d, D)[D - 1]  # (P, d**(D-1), d)
        completions = [bottom[top_inverse.ravel() == t] for t in range(len(top_keys))]
        # slot -1 collects windows whose top has no admissible completion
        completions.append(np.empty((0,) + bottom.shape[1:], dtype=bottom.dtype))

        k = n - 1
        wlevel = k + 1 - D
        windows = d**wlevel
        which = np.empty((len(prev), windows), dtype=np.int64)
        for w in range(windows):
            sec = batch.section(prev, d, k, w, wlevel, D - 1)
            which[:, w] = batch.index_in(sec, top_keys)
        sizes = [len(c) for c in completions]
        total = sum(math.prod(sizes[t] for t in row) for row in which)
        self._guard(total, n)

        out = np.empty((total, d**n), dtype=leaf_dtype(d, n))
        cursor = 0
        parents = prev.astype(np.int64)
        for i in range(len(prev)):
            radices = [len(completions[t]) for t in which[i]]
            count = math.prod(radices)
            digits = _mixed_radix(np.arange(count, dtype=np.int64), radices)
            parts = [completions[t][digits[w]] for w, t in enumerate(which[i])]
            labels = np.concatenate(parts, axis=1) if parts else np.empty((count, 0, d), dtype=np.int64)
            images = np.repeat(parents[i], d)[None, :] * d + labels.reshape(count, -1)
            out[cursor : cursor + count] = images
            cursor += count
        return out


# -- wreath recursions ---------------------------------------------------------


@dataclass(frozen=True)
class WreathRecursionSpec:
    """Generators ``name = perm (section_1, ..., section_d)``.

    Section names refer to generators, to inverses written ``name^-1``, or
    to the identity (``e``, ``1`` or ``id``).
    """

    d: int
    generators: Mapping[str, tuple[Permutation, tuple[str, ...]]]

    def __post_init__(self):
        gens = {}
        for name, (perm, sections) in dict(self.generators).items():
            perm = check_permutation(perm, self.d)
            sections = tuple(sections)
            if len(sections) != self.d:
                raise ValueError(f"generator {name} needs {self.d} sections")
            gens[name] = (perm, sections)
        object.__setattr__(self, "generators", gens)
        for name, (_, sections) in gens.items():
            for s in sections:
                self._resolve(s)
        if not gens:
            raise ValueError("no generators")

    def _resolve(self, name: str) -> tuple[str | None, bool]:
        if name in ("e", "1", "id"):
            return None, False
        inverse = name.endswith("^-1")
        base = name[:-3] if inverse else name
        if base not in self.generators:
            raise ValueError(f"unknown section name {name!r}")
        return base, inverse


class RecursionModel(GroupModel):
    """Closure of generator portraits; sampled only through full enumeration."""

    kind = "wreath-recursion"

    def __init__(self, spec: WreathRecursionSpec, *, name: str | None = None, D: int | None = None, **kw):
        super().__init__(spec.d, {"generators": sorted(spec.generators)}, declared_depth=D, name=name, **kw)
        self.spec = spec
        self._portraits: dict[tuple[str, int], np.ndarray] = {}

    @property
    def name(self) -> str:
        return self._name or f"wreath-recursion:{self.d}:" + ",".join(sorted(self.spec.generators))

    def portrait(self, name: str, n: int) -> TruncatedAutomorphism:
        return TruncatedAutomorphism(self.d, n, self._portrait_row(name, n), check=False)

    def _portrait_row(self, name: str, n: int) -> np.ndarray:
        base, inverse = self.spec._resolve(name)
        if base is None or n == 0:
            return np.arange(self.d**n, dtype=leaf_dtype(self.d, n))
        row = self._generator_row(base, n)
        return batch.invert(row[None, :])[0] if inverse else row

    def _generator_row(self, name: str, n: int) -> np.ndarray:
        key = (name, n)
        if n == 0:
            return np.zeros(1, dtype=leaf_dtype(self.d, 0))
        if key not in self._portraits:
            perm, sections = self.spec.generators[name]
            kids = [self._portrait_row(s, n - 1)[None, :] for s in sections]
            root = np.array([[x - 1 for x in perm]], dtype=np.int64)
            self._portraits[key] = batch.graft(kids, self.d, n - 1, root=root)[0]
        return self._portraits[key]

    def generator_rows(self, n: int) -> np.ndarray:
        return np.stack([self._generator_row(g, n) for g in sorted(self.spec.generators)])

    def _enumerate(self, n: int) -> np.ndarray:
        return closure(self.generator_rows(n), self.d, n, cap=self.max_elements, label=self.name)


def closure(generators: np.ndarray, d: int, n: int, *, cap: int = DEFAULT_MAX_ELEMENTS,
            label: str = "subgroup") -> np.ndarray:
    """The finite group generated by some rows of Aut(T^n), breadth first."""
    gens = np.atleast_2d(generators).astype(leaf_dtype(d, n))
    frontier = np.arange(d**n, dtype=leaf_dtype(d, n))[None, :]
    seen_rows = [frontier]
    seen = np.sort(batch.row_keys(frontier))
    while len(frontier):
        cand = np.concatenate([batch.compose(frontier, g[None, :]) for g in gens])
        cand = batch.unique_rows(cand)
        fresh = batch.index_in(cand, seen) < 0
        frontier = cand[fresh]
        if not len(frontier):
            break
        seen_rows.append(frontier)
        seen = np.sort(np.concatenate([seen, batch.row_keys(frontier)]))
        if len(seen) > cap:
            raise QuotientTooLarge(f"{label}: closure at depth {n} exceeds {cap} elements")
    return np.concatenate(seen_rows)


def generated_subgroup(elements: Sequence[TruncatedAutomorphism]) -> list[TruncatedAutomorphism]:
    """All elements of the finite subgroup generated by the given portraits."""
    d, n = elements[0].d, elements[0].depth
    return batch.unstack(closure(batch.stack(list(elements), d, n), d, n), d, n)


GRIGORCHUK = WreathRecursionSpec(
    2,
    {
        "a": ((2, 1), ("e", "e")),
        "b": ((1, 2), ("a", "c")),
        "c": ((1, 2), ("a", "d")),
        "d": ((1, 2), ("e", "b")),
    },
)


# -- construction --------------------------------------------------------------

KINDS = ("full-wreath", "cyclic-wreath", "abelian-level", "affine", "wreath-recursion", "pattern")


def make_model(kind: str, **params) -> GroupModel:
    """Build a model from a family tag and its parameters."""
    cap = params.pop("max_elements", DEFAULT_MAX_ELEMENTS)
    name = params.pop("name", None)
    if kind == "full-wreath":
        return FullWreath(int(params["d"]), max_elements=cap, name=name)
    if kind == "cyclic-wreath":
        return CyclicWreath(int(params.get("p", params.get("d"))), max_elements=cap, name=name)
    if kind == "abelian-level":
        return AbelianLevel(int(params.get("p", params.get("d"))), max_elements=cap, name=name)
    if kind == "affine":
        return Affine(int(params["d"]), int(params.get("D") or 2), max_elements=cap, name=name)
    if kind == "pattern":
        spec = params.get("spec")
        if spec is None:
            spec = PatternSpec.from_strings(int(params["d"]), int(params["D"]), params["patterns"])
        return PatternModel(spec, max_elements=cap, name=name)
    if kind == "wreath-recursion":
        spec = params.get("spec")
        if spec is None:
            gens = {
                g: (tuple(body["perm"]), tuple(body["sections"]))
                for g, body in params["generators"].items()
            }
            spec = WreathRecursionSpec(int(params["d"]), gens)
        return RecursionModel(spec, D=params.get("D"), max_elements=cap, name=name)
    raise ValueError(f"unknown group family {kind!r}")


def parse_group_tag(tag: str, **kw) -> GroupModel:
    """``full-wreath:2``, ``cyclic-wreath:3``, ``abelian-level:2``, ``affine:3``, ``grigorchuk``."""
    if tag == "grigorchuk":
        return RecursionModel(GRIGORCHUK, name="grigorchuk", D=4, **kw)
    kind, _, arg = tag.partition(":")
    if kind not in ("full-wreath", "cyclic-wreath", "abelian-level", "affine") or not arg.isdigit():
        raise ValueError(f"unknown group {tag!r}")
    key = "p" if kind in ("cyclic-wreath", "abelian-level") else "d"
    return make_model(kind, **{key: int(arg)}, name=tag, **kw)


def model_from_config(config: Mapping) -> GroupModel:
    """Build a model from a parsed group-definition document."""
    config = dict(config)
    kind = config.pop("kind", None)
    if kind is None:
        raise ValueError("group definition needs a 'kind'")
    params = {k: v for k, v in config.items() if v is not None}
    if kind in ("cyclic-wreath", "abelian-level") and "p" not in params:
        params["p"] = params.get("d")
    return make_model(kind, **params)
