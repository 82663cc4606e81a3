"""Exact Haar measure on congruence quotients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .. import batch
from ..tree import TruncatedAutomorphism, Vertex, VertexLike, are_m_cousins, as_vertex
from ..zoo.models import ChartModel, GroupModel
from .rng import SeededRng


class CousinPreconditionError(ValueError):
    """Vertices handed to the kernel identity are (D-1)-cousins."""


def sample_batch(model: GroupModel, n: int, count: int, rng: SeededRng) -> np.ndarray:
    """``count`` exact Haar samples of pi_n(G) as rows, from one stream."""
    return model.sample(n, count, rng.generator())


def sample_uniform(model: GroupModel, n: int, rng: SeededRng) -> TruncatedAutomorphism:
    row = sample_batch(model, n, 1, rng)[0]
    return TruncatedAutomorphism(model.d, n, row, check=False)


def cone_measure(model: GroupModel, n: int, A: Iterable[TruncatedAutomorphism]) -> Fraction:
    """mu(C_A) = #A / |pi_n(G)|."""
    A = set(A)
    if not A:
        return Fraction(0)
    if any(g.d != model.d or g.depth != n for g in A):
        raise ValueError("cone set elements must be depth-n portraits of the model's arity")
    rows = batch.stack(list(A), model.d, n)
    if not model.contains(rows, n).all():
        raise ValueError("cone set contains elements outside pi_n(G)")
    return Fraction(len(A), model.order(n))


def _level_vertex(v: VertexLike, d: int) -> tuple[Vertex, int]:
    v = as_vertex(v)
    return v, v.index(d)


def section_pushforward(model: GroupModel, n: int, m: int, v: VertexLike) -> tuple[np.ndarray, np.ndarray]:
    """Distinct depth-m sections at v and how often each is hit.

    The counts are proportional to the pushforward of the uniform measure on
    pi_{n+m}(G). Chart models enumerate only the coordinates the section
    depends on (every such choice extends in equally many ways), other
    models enumerate the whole quotient.
    """
    v, idx = _level_vertex(v, model.d)
    if v.level != n:
        raise ValueError(f"vertex {v} is not on level {n}")

    def build():
        if isinstance(model, ChartModel):
            secs = model.chart_rows(list(range(n, n + m)))
        else:
            secs = batch.section(model.quotient(n + m), model.d, n + m, idx, n, m)
        keys, first, counts = np.unique(batch.row_keys(secs), return_index=True, return_counts=True)
        return secs[first], counts

    # chart pushforwards do not depend on which level-n vertex is chosen
    key = ("pushforward", n, m) if isinstance(model, ChartModel) else ("pushforward", n, m, idx)
    return model._cached(key, build)


def check_section_measure_preserving(model: GroupModel, n: int, m: int, v: VertexLike) -> bool:
    """Is the depth-m section at v exactly uniform on pi_m(G)?"""
    values, counts = section_pushforward(model, n, m, v)
    if len(values) != model.order(m):
        return False
    if not model.contains(values, m).all():
        return False
    return bool(np.all(counts == counts[0]))


@dataclass(frozen=True)
class KernelCheck:
    observed: int
    predicted: Fraction
    match: bool
    precondition: str  # "ok", "violated" or "undeclared"
    method: str

    def to_dict(self) -> dict:
        return {
            "observed": self.observed,
            "predicted": self.predicted,
            "match": self.match,
            "precondition": self.precondition,
            "method": self.method,
        }


def cousin_precondition(model: GroupModel, n: int, V: Sequence[Vertex]) -> str:
    D = model.declared_depth
    if D is None:
        return "undeclared"
    if n < D:
        return "violated"
    if any(are_m_cousins(a, b, D - 1) for a, b in combinations(V, 2)):
        return "violated"
    return "ok"


def kernel_size_check(model: GroupModel, n: int, m: int, V: Sequence[VertexLike], *,
                      strict: bool = True, method: str = "auto") -> KernelCheck:
    """Compare |ker phi_V^{n,m}| with |pi_{n+m}| / (|pi_m|^#V |pi_n|).

    The kernel lives in pi_{n+m}(St_G(n)) and consists of the elements with
    trivial depth-m sections at every vertex of V. With ``strict`` a
    violated cousin precondition raises; otherwise it is reported.
    """
    d = model.d
    V = sorted({as_vertex(v) for v in V})
    if any(v.level != n for v in V):
        raise ValueError(f"all vertices of V must lie on level {n}")
    pre = cousin_precondition(model, n, V)
    if pre == "violated" and strict:
        raise CousinPreconditionError(
            f"V is not pairwise ({model.declared_depth} - 1)-cousin free at level {n}"
        )
    if method == "auto":
        method = "chart" if isinstance(model, ChartModel) else "enumerate"
    if method == "chart":
        if not isinstance(model, ChartModel):
            raise ValueError("chart counting needs a chart model")
        constrained = [d**level for level in range(n)] + [len(V) * d**j for j in range(m)]
        observed = model.count_with_trivial_labels(n + m, constrained)
    elif method == "enumerate":
        rows = model.quotient(n + m)
        keep = batch.in_stabilizer(rows, d, n + m, n)
        for v in V:
            keep &= batch.is_identity(batch.section(rows, d, n + m, v.index(d), n, m))
        observed = int(keep.sum())
    else:
        raise ValueError(f"unknown method {method!r}")
    predicted = Fraction(model.order(n + m), model.order(m) ** len(V) * model.order(n))
    return KernelCheck(observed, predicted, predicted == observed, pre, method)


def non_cousin_sets(d: int, n: int, gap: int) -> list[tuple[Vertex, ...]]:
    """Every subset of level n whose members are pairwise not gap-cousins.

    Equivalently: at most one vertex below each level-(n - gap) vertex.
    """
    if gap <= 0:
        verts = [Vertex.from_index(i, n, d) for i in range(d**n)]
        return [c for r in range(len(verts) + 1) for c in combinations(verts, r)]
    top = max(n - gap, 0)
    width = d ** (n - top)
    out: list[tuple[Vertex, ...]] = [()]
    for block in range(d**top):
        choices = [Vertex.from_index(block * width + j, n, d) for j in range(width)]
        out = out + [s + (c,) for s in out for c in choices]
    return out
