"""Independence of sections at a set of vertices, exactly and statistically."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import batch
from ..tree import Vertex, VertexLike, as_vertex
from ..zoo.models import GroupModel
from .rng import SeededRng, block_sizes, run_blocks, stream_layout
from .stats import ALPHA, MIN_EXPECTED, pearson_chi_square

# joint distributions with more cells than this are summarised, not listed
MAX_LISTED_CELLS = 4096


@dataclass
class IndependenceReport:
    mode: str
    group: str
    n: int
    m: int
    V: list[str]
    verdict: bool
    vertical: bool | None = None
    joint: dict | None = None
    cells: int = 0
    statistic: float | None = None
    df: int | None = None
    p_value: float | None = None
    samples: int | None = None
    alpha: float | None = None
    streams: dict | None = field(default=None)

    def to_dict(self) -> dict:
        return asdict(self)


def _vertices(V: Sequence[VertexLike], n: int, d: int) -> list[Vertex]:
    V = sorted({as_vertex(v) for v in V})
    if any(v.level != n for v in V):
        raise ValueError(f"all vertices must lie on level {n}")
    if any(x > d for v in V for x in v.path):
        raise ValueError("vertex letter exceeds the arity")
    return V


def _section_indices(model: GroupModel, rows: np.ndarray, n: int, m: int, V: list[Vertex]) -> np.ndarray:
    """Position in pi_m(G) (sorted-key order) of each section; -1 if outside."""
    keys = model.sorted_keys(m)
    cols = [batch.index_in(batch.section(rows, model.d, n + m, v.index(model.d), n, m), keys) for v in V]
    return np.stack(cols, axis=1) if cols else np.zeros((len(rows), 0), dtype=np.int64)


def _encode(idx: np.ndarray, radix: int) -> np.ndarray:
    code = np.zeros(len(idx), dtype=object if radix ** idx.shape[1] >= 2**62 else np.int64)
    for j in range(idx.shape[1]):
        code = code * radix + idx[:, j]
    return code


def _is_flat(codes: np.ndarray, cells: int) -> tuple[bool, np.ndarray, np.ndarray]:
    values, counts = np.unique(codes, return_counts=True)
    flat = len(values) == cells and bool(np.all(counts == counts[0]))
    return flat, values, counts


def independence_exact(model: GroupModel, n: int, m: int, V: Sequence[VertexLike]) -> IndependenceReport:
    """Is (g|_v^m)_{v in V} exactly uniform on pi_m(G)^#V for uniform g in pi_{n+m}(G)?

    ``vertical`` additionally asks for uniformity of (pi_n(g), sections) on
    pi_n(G) x pi_m(G)^#V; that stronger statement is what the kernel-size
    identity is equivalent to.
    """
    V = _vertices(V, n, model.d)
    rows = model.quotient(n + m)
    size_m = model.order(m)
    cells = size_m ** len(V)
    idx = _section_indices(model, rows, n, m, V)
    if (idx < 0).any() or cells > len(rows):
        verdict = False
        joint = None
    else:
        codes = _encode(idx, size_m)
        verdict, values, counts = _is_flat(codes, cells)
        joint = None
        if len(values) <= MAX_LISTED_CELLS:
            total = len(rows)
            joint = {
                ",".join(map(str, _decode(int(c), size_m, len(V)))): Fraction(int(k), total)
                for c, k in zip(values, counts)
            }
    vertical = False
    if verdict:
        top = batch.index_in(batch.project(rows, model.d, n + m, n), model.sorted_keys(n))
        both = np.concatenate([top[:, None], idx], axis=1)
        size_n = model.order(n)
        vertical_cells = size_n * cells
        if vertical_cells <= len(rows):
            codes = _encode(both, max(size_n, size_m))
            vertical, _, _ = _is_flat(codes, vertical_cells)
    return IndependenceReport(
        mode="exact", group=model.name, n=n, m=m, V=[str(v) for v in V],
        verdict=verdict, vertical=vertical, joint=joint, cells=cells,
    )


def _decode(code: int, radix: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        code, r = divmod(code, radix)
        out.append(r)
    return out[::-1]


def independence_chi_square(model: GroupModel, n: int, m: int, V: Sequence[VertexLike], samples: int,
                            alpha: float = ALPHA, rng: SeededRng = SeededRng(0), *,
                            threads: int = 1) -> IndependenceReport:
    """Pearson test of the sampled joint section histogram against the uniform product."""
    V = _vertices(V, n, model.d)
    size_m = model.order(m)
    cells = size_m ** len(V)
    if samples / cells < MIN_EXPECTED:
        raise ValueError(
            f"{samples} samples over {cells} cells gives expected count {samples / cells:.2f} < {MIN_EXPECTED}"
        )
    blocks = block_sizes(samples)

    def work(i: int) -> np.ndarray:
        rows = model.sample(n + m, blocks[i], rng.substream(i).generator())
        idx = _section_indices(model, rows, n, m, V)
        if (idx < 0).any():
            raise ValueError("sampled section outside pi_m(G): model is not self-similar")
        return np.bincount(_encode(idx, size_m).astype(np.int64), minlength=cells)

    observed = np.sum(run_blocks(work, len(blocks), threads), axis=0)
    stat, df, p = pearson_chi_square(observed, samples / cells)
    return IndependenceReport(
        mode="chi-square", group=model.name, n=n, m=m, V=[str(v) for v in V],
        verdict=p >= alpha, cells=cells, statistic=stat, df=df, p_value=p,
        samples=samples, alpha=alpha, streams=stream_layout(rng, blocks),
    )
