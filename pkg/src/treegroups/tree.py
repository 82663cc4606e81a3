"""Truncated automorphisms of the d-regular rooted tree.

An element of Aut(T^n) is stored as the permutation it induces on the d^n
vertices of level n (the "leaves" of T^n), indexed in lexicographic order.
Every other piece of data (labels, sections, the action on shallower levels)
is derived from that array by integer arithmetic on vertex indices.

Conventions:

* vertices are words over the letters 1..d; the empty word is the root;
* groups act on the right and products are read left to right, so
  ``v * (g h) == (v * g) * h`` and ``compose(g, h)`` first applies ``g``;
* permutations are tuples in one-line notation over 1..d, and the product
  of permutations ``p q`` maps ``x`` to ``q(p(x))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

Permutation = tuple[int, ...]


def leaf_dtype(d: int, n: int) -> np.dtype:
    """Smallest unsigned dtype able to index the d**n leaves of T^n."""
    size = d**n
    if size <= 1 << 8:
        return np.dtype(np.uint8)
    if size <= 1 << 16:
        return np.dtype(np.uint16)
    if size <= 1 << 32:
        return np.dtype(np.uint32)
    return np.dtype(np.uint64)


# -- vertices ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Vertex:
    """A vertex of T as a word over ``1..d``."""

    path: tuple[int, ...] = ()

    def __post_init__(self):
        if any(int(x) < 1 for x in self.path):
            raise ValueError(f"vertex letters start at 1: {self.path}")
        object.__setattr__(self, "path", tuple(int(x) for x in self.path))

    @classmethod
    def parse(cls, text: str) -> "Vertex":
        """Parse ``"21"`` (single-digit letters) or ``"10.2"`` (dotted)."""
        text = text.strip()
        if text in ("", "()", "root"):
            return cls(())
        if "." in text:
            return cls(tuple(int(t) for t in text.split(".")))
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_index(cls, index: int, level: int, d: int) -> "Vertex":
        letters = []
        for _ in range(level):
            index, r = divmod(index, d)
            letters.append(r + 1)
        return cls(tuple(reversed(letters)))

    @property
    def level(self) -> int:
        return len(self.path)

    def index(self, d: int) -> int:
        """Position of the vertex among the d**level vertices of its level."""
        idx = 0
        for x in self.path:
            if x > d:
                raise ValueError(f"letter {x} out of range for arity {d}")
            idx = idx * d + (x - 1)
        return idx

    def child(self, letter: int) -> "Vertex":
        return Vertex(self.path + (letter,))

    def ancestor(self, level: int) -> "Vertex":
        if not 0 <= level <= self.level:
            raise ValueError(f"no ancestor at level {level} for {self}")
        return Vertex(self.path[:level])

    def __add__(self, other: "Vertex") -> "Vertex":
        return Vertex(self.path + as_vertex(other).path)

    def __str__(self) -> str:
        if any(x > 9 for x in self.path):
            return ".".join(map(str, self.path))
        return "".join(map(str, self.path))

    def __repr__(self) -> str:
        return f"Vertex({str(self)!r})"


VertexLike = Union[Vertex, str, Sequence[int]]


def as_vertex(v: VertexLike) -> Vertex:
    if isinstance(v, Vertex):
        return v
    if isinstance(v, str):
        return Vertex.parse(v)
    return Vertex(tuple(v))


def vertices_at_level(d: int, level: int) -> list[Vertex]:
    return [Vertex.from_index(i, level, d) for i in range(d**level)]


def tree_distance(v: VertexLike, w: VertexLike) -> int:
    """Graph distance between two vertices of T."""
    v, w = as_vertex(v), as_vertex(w)
    common = 0
    for a, b in zip(v.path, w.path):
        if a != b:
            break
        common += 1
    return v.level + w.level - 2 * common


def are_m_cousins(v: VertexLike, w: VertexLike, m: int) -> bool:
    """Distinct same-level vertices with a common ancestor at most m levels up."""
    v, w = as_vertex(v), as_vertex(w)
    if v.level != w.level:
        raise ValueError(f"{v} and {w} lie on different levels")
    if m < 0:
        raise ValueError("m must be non-negative")
    return v != w and tree_distance(v, w) <= 2 * m


# -- permutations -----------------------------------------------------------


def check_permutation(p: Sequence[int], d: int | None = None) -> Permutation:
    p = tuple(int(x) for x in p)
    if d is not None and len(p) != d:
        raise ValueError(f"permutation {p} has length {len(p)}, expected {d}")
    if sorted(p) != list(range(1, len(p) + 1)):
        raise ValueError(f"{p} is not a permutation of 1..{len(p)}")
    return p


def perm_compose(p: Permutation, q: Permutation) -> Permutation:
    """Left-to-right product: x -> q(p(x))."""
    return tuple(q[x - 1] for x in p)


def perm_inverse(p: Permutation) -> Permutation:
    inv = [0] * len(p)
    for i, x in enumerate(p, start=1):
        inv[x - 1] = i
    return tuple(inv)


def format_permutation(p: Permutation) -> str:
    if len(p) > 9:
        return ".".join(map(str, p))
    return "".join(map(str, p))


# -- automorphisms ----------------------------------------------------------


class TruncatedAutomorphism:
    """An element of Aut(T^n): the portrait of a tree automorphism up to depth n.

    ``leaves[i]`` is the index of the image of the i-th level-n vertex. The
    array is validated on construction: it must be a permutation that maps
    sibling blocks to sibling blocks at every level.
    """

    __slots__ = ("d", "depth", "leaves", "_key")

    def __init__(self, d: int, depth: int, leaves, *, check: bool = True):
        if d < 2:
            raise ValueError("arity must be at least 2")
        if depth < 0:
            raise ValueError("depth must be non-negative")
        arr = np.array(leaves, dtype=leaf_dtype(d, depth)).reshape(-1)
        if check:
            _check_leaves(d, depth, arr)
        arr.flags.writeable = False
        self.d = d
        self.depth = depth
        self.leaves = arr
        self._key = None

    # construction

    @classmethod
    def identity(cls, d: int, depth: int) -> "TruncatedAutomorphism":
        return cls(d, depth, np.arange(d**depth), check=False)

    @classmethod
    def from_labels(cls, d: int, depth: int, labels) -> "TruncatedAutomorphism":
        """Build a portrait from its labels.

        ``labels`` is either a sequence of permutations in breadth-first
        vertex order, or a mapping from vertices to permutations (missing
        vertices get the identity label).
        """
        count = (d**depth - 1) // (d - 1)
        if isinstance(labels, Mapping):
            ident = tuple(range(1, d + 1))
            table = [ident] * count
            for v, p in labels.items():
                v = as_vertex(v)
                if v.level >= depth:
                    raise ValueError(f"vertex {v} has no label at depth {depth}")
                table[(d**v.level - 1) // (d - 1) + v.index(d)] = p
            labels = table
        labels = [check_permutation(p, d) for p in labels]
        if len(labels) != count:
            raise ValueError(f"expected {count} labels for depth {depth}, got {len(labels)}")
        images = np.zeros(1, dtype=np.int64)
        start = 0
        for level in range(depth):
            width = d**level
            lab = np.array(labels[start : start + width], dtype=np.int64) - 1
            images = (np.repeat(images, d) * d + lab.reshape(-1)).astype(np.int64)
            start += width
        return cls(d, depth, images, check=False)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "TruncatedAutomorphism":
        """Inverse of :meth:`encode`."""
        return _parse_portrait(text, d)

    # derived data

    def key(self) -> bytes:
        if self._key is None:
            self._key = self.leaves.tobytes()
        return self._key

    def level_images(self, level: int) -> np.ndarray:
        """Images of the level-``level`` vertices, as indices."""
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} outside portrait of depth {self.depth}")
        step = self.d ** (self.depth - level)
        return self.leaves[::step].astype(np.int64) // step

    def label_array(self, level: int) -> np.ndarray:
        """0-based labels of all level-``level`` vertices, shape (d**level, d)."""
        if not 0 <= level < self.depth:
            raise ValueError(f"no labels at level {level} for depth {self.depth}")
        return (self.level_images(level + 1) % self.d).reshape(self.d**level, self.d)

    def label(self, v: VertexLike) -> Permutation:
        v = as_vertex(v)
        row = self.label_array(v.level)[v.index(self.d)]
        return tuple(int(x) + 1 for x in row)

    @property
    def labels(self) -> list[Permutation]:
        """All labels in breadth-first order."""
        out = []
        for level in range(self.depth):
            out.extend(tuple(int(x) + 1 for x in row) for row in self.label_array(level))
        return out

    def encode(self) -> str:
        """Canonical nested text form ``perm(children...)``, depth first."""
        if self.depth == 0:
            return ""
        arrays = [self.label_array(level) for level in range(self.depth)]

        def walk(level: int, idx: int) -> str:
            perm = format_permutation(tuple(int(x) + 1 for x in arrays[level][idx]))
            if level + 1 == self.depth:
                return perm + "()"
            kids = ",".join(walk(level + 1, idx * self.d + j) for j in range(self.d))
            return f"{perm}({kids})"

        return walk(0, 0)

    # algebra

    def __mul__(self, other: "TruncatedAutomorphism") -> "TruncatedAutomorphism":
        return compose(self, other)

    def inverse(self) -> "TruncatedAutomorphism":
        return invert(self)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.leaves, np.arange(self.leaves.size)))

    def __eq__(self, other):
        if not isinstance(other, TruncatedAutomorphism):
            return NotImplemented
        return self.d == other.d and self.depth == other.depth and self.key() == other.key()

    def __hash__(self):
        return hash((self.d, self.depth, self.key()))

    def __repr__(self):
        return f"TruncatedAutomorphism(d={self.d}, depth={self.depth}, {self.encode()!r})"

    def __str__(self):
        return self.encode()


def _check_leaves(d: int, depth: int, arr: np.ndarray) -> None:
    size = d**depth
    if arr.size != size:
        raise ValueError(f"expected {size} leaf images, got {arr.size}")
    if size and (int(arr.max()) >= size or np.bincount(arr.astype(np.int64), minlength=size).min() != 1):
        raise ValueError("leaf images do not form a permutation")
    wide = arr.astype(np.int64)
    for k in range(1, depth + 1):
        blocks = (wide // d**k).reshape(-1, d**k)
        if not np.all(blocks == blocks[:, :1]):
            raise ValueError("leaf permutation does not preserve the tree structure")


def _parse_portrait(text: str, d: int | None) -> TruncatedAutomorphism:
    text = "".join(text.split())
    if text == "":
        if d is None:
            raise ValueError("the depth-0 portrait needs an explicit arity")
        return TruncatedAutomorphism.identity(d, 0)
    pos = 0

    def node():
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos] not in "(),":
            pos += 1
        token = text[start:pos]
        if not token:
            raise ValueError(f"expected a permutation at offset {start} in {text!r}")
        perm = tuple(int(t) for t in token.split(".")) if "." in token else tuple(int(ch) for ch in token)
        if pos >= len(text) or text[pos] != "(":
            raise ValueError(f"expected '(' at offset {pos} in {text!r}")
        pos += 1
        kids = []
        if text[pos] != ")":
            kids.append(node())
            while text[pos] == ",":
                pos += 1
                kids.append(node())
        if text[pos] != ")":
            raise ValueError(f"expected ')' at offset {pos} in {text!r}")
        pos += 1
        return perm, kids

    tree = node()
    if pos != len(text):
        raise ValueError(f"trailing characters in {text!r}")
    arity = len(tree[0])
    if d is not None and d != arity:
        raise ValueError(f"portrait has arity {arity}, expected {d}")

    labels: list[list[Permutation]] = []
    frontier = [tree]
    while frontier:
        labels.append([check_permutation(p, arity) for p, _ in frontier])
        kids = [k for _, ks in frontier for k in ks]
        if kids and any(len(ks) != arity for _, ks in frontier):
            raise ValueError("every internal vertex needs exactly d children")
        if not kids and any(ks for _, ks in frontier):
            raise ValueError("ragged portrait")
        frontier = kids
    flat = [p for level in labels for p in level]
    return TruncatedAutomorphism.from_labels(arity, len(labels), flat)


# -- operations -------------------------------------------------------------


def identity(d: int, n: int) -> TruncatedAutomorphism:
    return TruncatedAutomorphism.identity(d, n)


def _same_shape(g: TruncatedAutomorphism, h: TruncatedAutomorphism) -> None:
    if g.d != h.d or g.depth != h.depth:
        raise ValueError(
            f"arity/depth mismatch: ({g.d}, {g.depth}) vs ({h.d}, {h.depth}); project explicitly"
        )


def compose(g: TruncatedAutomorphism, h: TruncatedAutomorphism) -> TruncatedAutomorphism:
    """The product gh: first g, then h."""
    _same_shape(g, h)
    return TruncatedAutomorphism(g.d, g.depth, h.leaves[g.leaves], check=False)


def invert(g: TruncatedAutomorphism) -> TruncatedAutomorphism:
    inv = np.empty_like(g.leaves)
    inv[g.leaves] = np.arange(g.leaves.size, dtype=g.leaves.dtype)
    return TruncatedAutomorphism(g.d, g.depth, inv, check=False)


def product(elements: Iterable[TruncatedAutomorphism], d: int, n: int) -> TruncatedAutomorphism:
    out = identity(d, n)
    for g in elements:
        out = compose(out, g)
    return out


def project(g: TruncatedAutomorphism, n: int) -> TruncatedAutomorphism:
    """Restriction to the first n levels."""
    if not 0 <= n <= g.depth:
        raise ValueError(f"cannot project depth {g.depth} to depth {n}")
    return TruncatedAutomorphism(g.d, n, g.level_images(n), check=False)


def act_vertex(g: TruncatedAutomorphism, v: VertexLike) -> Vertex:
    v = as_vertex(v)
    if v.level > g.depth:
        raise ValueError(f"vertex {v} is deeper than the portrait (depth {g.depth})")
    step = g.d ** (g.depth - v.level)
    image = int(g.leaves[v.index(g.d) * step]) // step
    return Vertex.from_index(image, v.level, g.d)


def section(g: TruncatedAutomorphism, v: VertexLike, m: int) -> TruncatedAutomorphism:
    """The depth-m section of g at v."""
    v = as_vertex(v)
    if m < 0 or v.level + m > g.depth:
        raise ValueError(f"section of depth {m} at {v} overflows depth {g.depth}")
    top = v.level + m
    step = g.d ** (g.depth - top)
    block = g.d**m
    start = v.index(g.d) * block
    images = g.leaves[start * step : (start + block) * step : step].astype(np.int64) // step
    return TruncatedAutomorphism(g.d, m, images % block, check=False)


def fixed_vertices_at_level(g: TruncatedAutomorphism, level: int) -> set[Vertex]:
    images = g.level_images(level)
    hits = np.flatnonzero(images == np.arange(images.size))
    return {Vertex.from_index(int(i), level, g.d) for i in hits}


def count_fixed_at_level(g: TruncatedAutomorphism, level: int) -> int:
    images = g.level_images(level)
    return int(np.count_nonzero(images == np.arange(images.size)))


def all_automorphisms(d: int, n: int) -> Iterator[TruncatedAutomorphism]:
    """Every element of Aut(T^n); only sensible for tiny (d, n)."""
    from itertools import permutations, product as cartesian

    perms = list(permutations(range(1, d + 1)))
    count = (d**n - 1) // (d - 1)
    for labels in cartesian(perms, repeat=count):
        yield TruncatedAutomorphism.from_labels(d, n, labels)
