"""Vectorised operations on stacks of portraits.

A stack is a 2-D array of shape ``(N, d**n)`` whose rows are leaf
permutations in the layout used by :class:`~treegroups.tree.TruncatedAutomorphism`.
These helpers carry the heavy lifting for enumeration, exact measure
computations and Monte Carlo experiments.
"""

from __future__ import annotations

import numpy as np

from .tree import TruncatedAutomorphism, leaf_dtype


def stack(elements, d: int, n: int) -> np.ndarray:
    if not elements:
        return np.empty((0, d**n), dtype=leaf_dtype(d, n))
    return np.stack([g.leaves for g in elements]).astype(leaf_dtype(d, n), copy=False)


def unstack(rows: np.ndarray, d: int, n: int) -> list[TruncatedAutomorphism]:
    return [TruncatedAutomorphism(d, n, row, check=False) for row in rows]


def identity_rows(count: int, d: int, n: int) -> np.ndarray:
    return np.broadcast_to(np.arange(d**n, dtype=leaf_dtype(d, n)), (count, d**n)).copy()


def compose(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Row-wise products ``g[i] h[i]``; a single row broadcasts."""
    g = np.atleast_2d(g)
    h = np.atleast_2d(h)
    rows = max(len(g), len(h))
    g = np.broadcast_to(g, (rows, g.shape[1]))
    h = np.broadcast_to(h, (rows, h.shape[1]))
    return np.take_along_axis(h, g.astype(np.intp), axis=1)


def invert(g: np.ndarray) -> np.ndarray:
    g = np.atleast_2d(g)
    out = np.empty_like(g)
    ramp = np.broadcast_to(np.arange(g.shape[1], dtype=g.dtype), g.shape)
    np.put_along_axis(out, g.astype(np.intp), ramp, axis=1)
    return out


def level_images(g: np.ndarray, d: int, n: int, level: int) -> np.ndarray:
    step = d ** (n - level)
    return np.atleast_2d(g)[:, ::step].astype(np.int64) // step


def project(g: np.ndarray, d: int, n: int, k: int) -> np.ndarray:
    if not 0 <= k <= n:
        raise ValueError(f"cannot project depth {n} to {k}")
    return level_images(g, d, n, k).astype(leaf_dtype(d, k))


def section(g: np.ndarray, d: int, n: int, v_index: int, v_level: int, m: int) -> np.ndarray:
    """Depth-m sections at the vertex with the given level/index, row-wise."""
    if v_level + m > n:
        raise ValueError(f"section of depth {m} at level {v_level} overflows depth {n}")
    top = level_images(g, d, n, v_level + m)
    block = d**m
    part = top[:, v_index * block : (v_index + 1) * block]
    return (part % block).astype(leaf_dtype(d, m))


def act(g: np.ndarray, d: int, n: int, v_index: int, v_level: int) -> np.ndarray:
    step = d ** (n - v_level)
    return np.atleast_2d(g)[:, v_index * step].astype(np.int64) // step


def fixed_counts(g: np.ndarray, d: int, n: int, level: int) -> np.ndarray:
    images = level_images(g, d, n, level)
    return np.count_nonzero(images == np.arange(d**level), axis=1)


def fixes_some_vertex(g: np.ndarray, d: int, n: int, level: int | None = None) -> np.ndarray:
    level = n if level is None else level
    images = level_images(g, d, n, level)
    return np.any(images == np.arange(d**level), axis=1)


def is_identity(g: np.ndarray) -> np.ndarray:
    g = np.atleast_2d(g)
    return np.all(g == np.arange(g.shape[1]), axis=1)


def in_stabilizer(g: np.ndarray, d: int, n: int, level: int) -> np.ndarray:
    """Rows fixing every vertex of the given level."""
    return is_identity(level_images(g, d, n, level))


def label_arrays(g: np.ndarray, d: int, n: int) -> list[np.ndarray]:
    """0-based labels per level, each of shape (N, d**level, d)."""
    g = np.atleast_2d(g)
    return [
        (level_images(g, d, n, level + 1) % d).reshape(len(g), d**level, d)
        for level in range(n)
    ]


def from_label_arrays(labels: list[np.ndarray], d: int) -> np.ndarray:
    """Inverse of :func:`label_arrays`; ``labels[l]`` has shape (N, d**l, d)."""
    n = len(labels)
    count = labels[0].shape[0] if n else 1
    images = np.zeros((count, 1), dtype=np.int64)
    for lab in labels:
        images = np.repeat(images, d, axis=1) * d + lab.reshape(count, -1)
    return images.astype(leaf_dtype(d, n))


def graft(children: list[np.ndarray], d: int, m: int, root: np.ndarray | None = None) -> np.ndarray:
    """Depth-(m+1) rows with the given root label and depth-m subtree rows.

    ``children[j]`` gives the sections at the j-th child; with no ``root`` the
    root label is trivial.
    """
    count = len(children[0])
    block = d**m
    parts = []
    for j, sub in enumerate(children):
        target = j if root is None else root[:, j : j + 1]
        parts.append(np.asarray(target, dtype=np.int64) * block + sub.astype(np.int64))
    return np.concatenate(parts, axis=1).astype(leaf_dtype(d, m + 1))


def row_keys(g: np.ndarray) -> np.ndarray:
    """One opaque, sortable key per row (for unique/isin on whole portraits)."""
    g = np.ascontiguousarray(np.atleast_2d(g))
    return g.view(np.dtype((np.void, g.dtype.itemsize * g.shape[1]))).ravel()


def unique_rows(g: np.ndarray) -> np.ndarray:
    g = np.atleast_2d(g)
    _, first = np.unique(row_keys(g), return_index=True)
    return g[np.sort(first)]


def same_set(a: np.ndarray, b: np.ndarray) -> bool:
    ka = np.unique(row_keys(a))
    kb = np.unique(row_keys(b))
    return ka.shape == kb.shape and bool(np.all(ka == kb))


def isin_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mask of rows of ``a`` that occur among the rows of ``b``."""
    if len(b) == 0:
        return np.zeros(len(a), dtype=bool)
    kb = np.sort(row_keys(b))
    ka = row_keys(a)
    pos = np.searchsorted(kb, ka)
    pos[pos == len(kb)] = 0
    return kb[pos] == ka


def index_in(a: np.ndarray, sorted_keys: np.ndarray) -> np.ndarray:
    """Positions of the rows of ``a`` in ``sorted_keys``; -1 where absent."""
    ka = row_keys(a)
    pos = np.searchsorted(sorted_keys, ka)
    pos[pos == len(sorted_keys)] = 0
    hit = sorted_keys[pos] == ka
    return np.where(hit, pos, -1)
