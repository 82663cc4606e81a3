"""Fixed-point proportion: exact level curves, Monte Carlo estimates, and the
closed recursion for iterated cyclic wreath products."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .. import batch
from ..tree import TruncatedAutomorphism
from ..zoo.models import GroupModel, is_prime
from .rng import SeededRng, block_sizes, run_blocks, stream_layout
from .stats import Estimate, proportion

CSV_HEADER = ("level", "exact", "estimate", "ci_lo", "ci_hi")


@dataclass
class FppReport:
    group: str
    levels: list[int]
    exact: dict[int, Fraction] = field(default_factory=dict)
    estimates: dict[int, Estimate] = field(default_factory=dict)
    samples: int | None = None
    seed: int | None = None
    streams: dict | None = None

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "levels": list(self.levels),
            "exact": {str(k): v for k, v in self.exact.items()},
            "estimates": {str(k): e.to_dict() for k, e in self.estimates.items()},
            "samples": self.samples,
            "seed": self.seed,
            "streams": self.streams,
        }

    def rows(self) -> list[tuple]:
        out = []
        for level in self.levels:
            exact = self.exact.get(level)
            est = self.estimates.get(level)
            out.append((
                level,
                "" if exact is None else f"{exact.numerator}/{exact.denominator}",
                "" if est is None else repr(est.estimate),
                "" if est is None else repr(est.lo),
                "" if est is None else repr(est.hi),
            ))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(self.rows())
        return buf.getvalue()


def fpp_of_elements(elements: Iterable[TruncatedAutomorphism]) -> Fraction:
    """Share of a finite set of portraits fixing some vertex of their deepest level."""
    elements = list(elements)
    if not elements:
        raise ValueError("empty set of elements")
    d, n = elements[0].d, elements[0].depth
    rows = batch.stack(elements, d, n)
    return Fraction(int(batch.fixes_some_vertex(rows, d, n).sum()), len(rows))


def fpp_exact(model: GroupModel, n: int) -> Fraction:
    """#{g in pi_n(G) fixing a level-n vertex} / |pi_n(G)|."""
    rows = model.quotient(n)
    return Fraction(int(batch.fixes_some_vertex(rows, model.d, n).sum()), len(rows))


def fpp_curve_exact(model: GroupModel, n: int) -> FppReport:
    """Exact values at levels 1..n, all read off pi_n(G)."""
    rows = model.quotient(n)
    exact = {
        level: Fraction(int(batch.fixes_some_vertex(rows, model.d, n, level).sum()), len(rows))
        for level in range(1, n + 1)
    }
    return FppReport(group=model.name, levels=list(range(1, n + 1)), exact=exact)


def fpp_monte_carlo(model: GroupModel, n: int, samples: int, rng: SeededRng, *,
                    threads: int = 1, exact_levels: Sequence[int] = ()) -> FppReport:
    """Proportion of sampled depth-n elements fixing a level-l vertex, l = 1..n.

    Every level uses the same samples. ``exact_levels`` adds exact values
    (by enumeration) where the quotient is small enough.
    """
    if samples <= 0:
        raise ValueError("need at least one sample")
    blocks = block_sizes(samples)
    levels = list(range(1, n + 1))

    def work(i: int) -> np.ndarray:
        rows = model.sample(n, blocks[i], rng.substream(i).generator())
        return np.array([int(batch.fixes_some_vertex(rows, model.d, n, l).sum()) for l in levels],
                        dtype=np.int64)

    hits = np.sum(run_blocks(work, len(blocks), threads), axis=0) if levels else np.zeros(0, np.int64)
    estimates = {l: proportion(int(k), samples) for l, k in zip(levels, hits)}
    exact = {l: fpp_exact(model, l) for l in exact_levels}
    return FppReport(
        group=model.name, levels=levels, exact=exact, estimates=estimates,
        samples=samples, seed=rng.seed, streams=stream_layout(rng, blocks),
    )


def fpp_wreath_recursion(p: int, n: int) -> Fraction:
    """f_1 = 1/p and f_{k+1} = (1 - (1 - f_k)^p) / p."""
    return fpp_wreath_curve(p, n)[-1]


def fpp_wreath_curve(p: int, n: int) -> list[Fraction]:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if n < 1:
        raise ValueError("the recursion starts at level 1")
    f = Fraction(1, p)
    out = [f]
    for _ in range(n - 1):
        f = (1 - (1 - f) ** p) / p
        out.append(f)
    return out
