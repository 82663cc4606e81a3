"""Probability that k random vectors span F_p^d, exactly and by sampling."""

from __future__ import annotations

import itertools
import warnings
from fractions import Fraction

import numpy as np

from .haar.rng import SeededRng, block_sizes, run_blocks, stream_layout
from .haar.stats import Estimate, proportion
from .zoo.models import is_prime


class RankDeficitWarning(UserWarning):
    """Fewer vectors than the dimension: the probability is exactly 0."""


def generation_probability_formula(p: int, d: int, k: int) -> Fraction:
    """prod_{j=0}^{d-1} (1 - p^{-(k-j)})."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if d < 0 or k < 0:
        raise ValueError("d and k must be non-negative")
    if k < d:
        warnings.warn(f"k={k} < d={d}: {k} vectors never span dimension {d}", RankDeficitWarning,
                      stacklevel=2)
        return Fraction(0)
    out = Fraction(1)
    for j in range(d):
        out *= 1 - Fraction(1, p ** (k - j))
    return out


def rank_mod_p(matrices: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a stack of integer matrices over F_p by Gaussian elimination."""
    M = np.array(matrices, dtype=np.int64, copy=True) % p
    if M.ndim == 2:
        M = M[None]
    count, rows, cols = M.shape
    inverse = np.zeros(p, dtype=np.int64)
    inverse[1:] = [pow(int(x), -1, p) for x in range(1, p)]
    rank = np.zeros(count, dtype=np.int64)
    ramp = np.arange(rows)
    everyone = np.arange(count)
    for c in range(cols):
        candidates = (ramp[None, :] >= rank[:, None]) & (M[:, :, c] != 0)
        has = candidates.any(axis=1)
        if not has.any():
            continue
        b = everyone[has]
        r = rank[has]
        piv = np.argmax(candidates[has], axis=1)
        top = M[b, r].copy()
        M[b, r] = M[b, piv]
        M[b, piv] = top
        M[b, r] = (M[b, r] * inverse[M[b, r, c]][:, None]) % p
        factors = M[b, :, c].copy()
        factors[np.arange(len(b)), r] = 0
        M[b] = (M[b] - factors[:, :, None] * M[b, r][:, None, :]) % p
        rank[has] += 1
        if rows and (rank >= rows).all():
            break
    return rank


def exhaustive_generation_count(p: int, d: int, k: int) -> tuple[int, int]:
    """(# k x d matrices over F_p of rank d, p^(k d)) by listing them all."""
    total = p ** (k * d)
    if total > 5_000_000:
        raise ValueError(f"{total} matrices is too many to list")
    if k * d == 0:
        return (1 if d == 0 else 0), 1
    entries = np.array(list(itertools.product(range(p), repeat=k * d)), dtype=np.int64)
    ranks = rank_mod_p(entries.reshape(total, k, d), p)
    return int((ranks == d).sum()), total


def generation_probability_monte_carlo(p: int, d: int, k: int, samples: int, rng: SeededRng, *,
                                       transpose: bool = False, threads: int = 1) -> tuple[Estimate, dict]:
    """Share of uniform k x d matrices over F_p with rank d, and the stream layout.

    With ``transpose`` the same entries are read as the d x k transpose; the
    estimate is then identical draw by draw.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if d < 1 or k < 1:
        raise ValueError("d and k must be at least 1")
    blocks = block_sizes(samples)

    def work(i: int) -> int:
        A = rng.substream(i).generator().integers(0, p, size=(blocks[i], k, d))
        if transpose:
            A = A.transpose(0, 2, 1)
        return int((rank_mod_p(A, p) == d).sum())

    hits = sum(run_blocks(work, len(blocks), threads))
    return proportion(hits, samples), stream_layout(rng, blocks)
