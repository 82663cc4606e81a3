"""Stable JSON and CSV serialisation of experiment reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import __version__
from .haar.rng import TEST_VECTOR_HASH

TOP_LEVEL = ("experiment", "group", "params", "seed", "streams", "values", "intervals", "verdicts", "runtime_ms")


def fraction_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def plain(obj: Any) -> Any:
    """Recursively convert to JSON-native values; rationals become ``"p/q"``."""
    if isinstance(obj, Fraction):
        return fraction_text(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [plain(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclass
class Report:
    experiment: str
    group: str | None = None
    params: dict = field(default_factory=dict)
    seed: int | None = None
    streams: dict | None = None
    values: dict = field(default_factory=dict)
    intervals: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    curve: list[tuple] | None = None
    curve_header: Sequence[str] = ()

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.verdicts.values())

    def to_dict(self) -> dict:
        out = {
            "experiment": self.experiment,
            "group": self.group,
            "params": self.params,
            "seed": self.seed,
            "streams": self.streams,
            "values": self.values,
            "intervals": self.intervals,
            "verdicts": self.verdicts,
            "runtime_ms": self.runtime_ms,
            "config": self.config,
            "version": __version__,
            "rng_test_vector_hash": TEST_VECTOR_HASH,
        }
        out.update(self.extra)
        return plain(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        if self.curve is None:
            raise ValueError(f"experiment {self.experiment!r} has no curve to export as CSV")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.curve_header)
        writer.writerows(self.curve)
        return buf.getvalue()


def without_runtime(text: str) -> dict:
    """Parsed JSON report minus ``runtime_ms``, for reproducibility comparisons."""
    data = json.loads(text)
    data.pop("runtime_ms", None)
    return data
