"""Finite-depth verification of structural hypotheses on group models."""

from __future__ import annotations

from itertools import product

import numpy as np

from .. import batch
from ..tree import TruncatedAutomorphism
from .models import GroupModel, PatternModel, PatternSpec, QuotientTooLarge


def enumerate_quotient(model: GroupModel, n: int) -> list[TruncatedAutomorphism]:
    """pi_n(G) as a list of portraits, without duplicates."""
    return batch.unstack(model.quotient(n), model.d, n)


def _sections_cover(model: GroupModel, rows: np.ndarray, n: int, v_index: int, v_level: int, m: int) -> bool:
    """Do the depth-m sections of ``rows`` at the vertex equal pi_m(G) as a set?"""
    secs = batch.section(rows, model.d, n, v_index, v_level, m)
    return batch.same_set(secs, model.quotient(m))


def check_level_transitive(model: GroupModel, n: int) -> bool:
    if n == 0:
        return True
    rows = model.quotient(n)
    return len(np.unique(rows[:, 0])) == model.d**n


def check_self_similar(model: GroupModel, n: int) -> bool:
    """Depth-n sections at level-1 vertices of pi_{n+1}(G) stay in pi_n(G)."""
    rows = model.quotient(n + 1)
    for v in range(model.d):
        secs = batch.section(rows, model.d, n + 1, v, 1, n)
        if not model.contains(batch.unique_rows(secs), n).all():
            return False
    return True


def check_fractal(model: GroupModel, n: int) -> bool:
    """Vertex stabilisers of level-1 vertices map onto pi_n(G) under sections."""
    if n < 1:
        raise ValueError("fractality is checked for n >= 1")
    if not (check_level_transitive(model, n) and check_self_similar(model, n)):
        return False
    d = model.d
    rows = model.quotient(n + 1)
    for v in range(d):
        stab = rows[batch.act(rows, d, n + 1, v, 1) == v]
        if not _sections_cover(model, stab, n + 1, v, 1, n):
            return False
    return True


def check_super_strongly_fractal(model: GroupModel, n: int, m: int) -> bool:
    """Sections of St_G(n) at every level-n vertex fill pi_m(G).

    Level transitivity at depth n + m is required as well, and the depth-m
    sections of all of pi_{n+m}(G) at level n must stay inside pi_m(G).
    """
    if not check_level_transitive(model, n + m):
        return False
    d = model.d
    rows = model.quotient(n + m)
    stab = rows[batch.in_stabilizer(rows, d, n + m, n)]
    for v in range(d**n):
        secs = batch.unique_rows(batch.section(rows, d, n + m, v, n, m))
        if not model.contains(secs, m).all():
            return False
    return all(_sections_cover(model, stab, n + m, v, n, m) for v in range(d**n))


def check_pattern_closure(model: GroupModel, D: int, n: int) -> bool:
    """Whether G agrees at depth n with the finite-type group of its depth-D patterns."""
    if n < D:
        raise ValueError("pattern closure needs n >= D")
    spec = PatternSpec(model.d, D, frozenset(batch.unstack(model.quotient(D), model.d, D)))
    closure = PatternModel(spec, max_elements=model.max_elements)
    rows = closure.quotient(n)
    return bool(model.contains(rows, n).all())


def check_branching_witness(model: GroupModel, D: int, n: int) -> bool:
    """psi(K) >= K x ... x K at depth n for K = St_G(D - 1).

    Every d-tuple of elements of pi_{n-1}(K), grafted below a trivial root
    label, must be an element of pi_n(G).
    """
    if n < D:
        raise ValueError("branching witness needs n >= D")
    d = model.d
    sub = model.quotient(n - 1)
    K = sub[batch.in_stabilizer(sub, d, n - 1, D - 1)]
    total = len(K) ** d
    if total > model.max_elements:
        raise QuotientTooLarge(f"{total} branching tuples exceed the cap")
    picks = np.array(list(product(range(len(K)), repeat=d)), dtype=np.int64).reshape(-1, d)
    chunk = 200_000
    for start in range(0, len(picks), chunk):
        idx = picks[start : start + chunk]
        rows = batch.graft([K[idx[:, j]] for j in range(d)], d, n - 1)
        if not model.contains(rows, n).all():
            return False
    return True


def restriction_kernel_size(model: GroupModel, n: int) -> int:
    """|ker(pi_{n+1}(G) -> pi_n(G))|, checking surjectivity on the way."""
    rows = model.quotient(n + 1)
    down = batch.project(rows, model.d, n + 1, n)
    if not batch.same_set(down, model.quotient(n)):
        raise AssertionError(f"restriction {n + 1} -> {n} is not onto pi_{n}")
    return int(batch.is_identity(down).sum())
