"""Reports and their serialisations.

JSON output uses sorted keys and fixed separators so that identical runs
give identical bytes; wall-clock timing is left out unless requested.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

STATUSES = ("pass", "fail", "budget-exhausted")


@dataclass
class Report:
    task: str
    config_hash: str
    status: str
    results: dict = field(default_factory=dict)
    seed: int | None = None
    mode: str = "exact"
    witness: dict | None = None
    best_bound: float | None = None
    error: dict | None = None
    timing: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {"task": self.task, "config_hash": self.config_hash, "status": self.status,
               "seed": self.seed, "mode": self.mode, "results": jsonable(self.results)}
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if self.best_bound is not None:
            out["best_bound"] = jsonable(self.best_bound)
        if self.error is not None:
            out["error"] = jsonable(self.error)
        if include_timing and self.timing is not None:
            out["timing_seconds"] = round(self.timing, 6)
        return out


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return x


def emit_report(r: Report, format: str = "json", include_timing: bool = False) -> str:
    d = r.to_dict(include_timing)
    if format == "json":
        return json.dumps(d, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"
    if format != "table":
        raise ValueError(f"unknown format {format!r}")
    lines = [f"task     {r.task}", f"status   {r.status}", f"mode     {r.mode}", f"seed     {r.seed}",
             f"config   {r.config_hash[:16]}"]
    if r.best_bound is not None:
        lines.append(f"best     {d['best_bound']}")
    if r.error is not None:
        lines.append(f"error    {d['error']}")
    if r.witness is not None:
        lines.append(f"witness  {json.dumps(d['witness'], sort_keys=True)}")

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        else:
            lines.append(f"  {prefix:<40} {json.dumps(obj, sort_keys=True)}")

    walk("", d["results"])
    if include_timing and r.timing is not None:
        lines.append(f"time     {r.timing:.3f}s")
    return "\n".join(lines) + "\n"
