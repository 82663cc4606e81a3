"""Naive recursive portraits, written independently of the package.

A portrait of depth n >= 1 is ``(perm, children)`` where ``perm`` is a tuple
over 0..d-1 and ``children`` is a tuple of d portraits of depth n-1; the
depth-0 portrait is ``None``. Vertices are tuples of 0-based letters.
"""

from __future__ import annotations

import itertools
import random


def identity(d, n):
    if n == 0:
        return None
    return (tuple(range(d)), tuple(identity(d, n - 1) for _ in range(d)))


def all_portraits(d, n):
    if n == 0:
        yield None
        return
    subs = list(all_portraits(d, n - 1))
    for perm in itertools.permutations(range(d)):
        for kids in itertools.product(subs, repeat=d):
            yield (perm, kids)


def random_portrait(d, n, rnd: random.Random):
    if n == 0:
        return None
    perm = list(range(d))
    rnd.shuffle(perm)
    return (tuple(perm), tuple(random_portrait(d, n - 1, rnd) for _ in range(d)))


def act(g, v):
    """Image of the vertex v (a tuple of 0-based letters) under g."""
    out = []
    for x in v:
        perm, kids = g
        out.append(perm[x])
        g = kids[x]
    return tuple(out)


def compose(g, h):
    """First g, then h."""
    if g is None:
        return None
    gp, gk = g
    hp, hk = h
    return (tuple(hp[gp[x]] for x in range(len(gp))), tuple(compose(gk[x], hk[gp[x]]) for x in range(len(gp))))


def inverse(g):
    if g is None:
        return None
    gp, gk = g
    inv = [0] * len(gp)
    for x, y in enumerate(gp):
        inv[y] = x
    return (tuple(inv), tuple(inverse(gk[inv[y]]) for y in range(len(gp))))


def section(g, v, m):
    for x in v:
        g = g[1][x]
    return truncate(g, m)


def truncate(g, m):
    if m == 0:
        return None
    return (g[0], tuple(truncate(k, m - 1) for k in g[1]))


def bfs_labels(g, d, n):
    """Breadth-first list of labels as 1-based one-line permutations."""
    out = []
    layer = [g]
    for _ in range(n):
        out.extend(tuple(x + 1 for x in p[0]) for p in layer)
        layer = [k for p in layer for k in p[1]]
    return out


def to_text(g):
    """Canonical nested text, computed directly from the nested tuple."""
    if g is None:
        return ""
    perm = "".join(str(x + 1) for x in g[0])
    return perm + "(" + ",".join(to_text(k) for k in g[1]) + ")" if g[1][0] is not None else perm + "()"


def vertices(d, level):
    return list(itertools.product(range(d), repeat=level))


def distance(v, w):
    common = 0
    for a, b in zip(v, w):
        if a != b:
            break
        common += 1
    return len(v) + len(w) - 2 * common


def fixes_some_leaf(g, d, n):
    return any(act(g, v) == v for v in vertices(d, n))


def rank_mod_p(rows, p):
    """Rank over F_p of a list of row lists, by plain elimination."""
    M = [[x % p for x in r] for r in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        inv = pow(M[rank][c], p - 2, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank
