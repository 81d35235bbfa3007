"""Measured-constant records for inequalities of the form LHS <= C * RHS."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class EstimateAudit:
    """One inequality audited over a sample set.

    ``table`` holds one dict per sample; each carries at least ``ratio``.
    ``max_ratio`` is the empirical constant.
    """

    id: str
    grid: dict
    table: list = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        if not self.table:
            return 0.0
        return max(row["ratio"] for row in self.table)

    def add(self, ratio: float, **info):
        if not math.isfinite(ratio):
            raise FloatingPointError(f"non-finite ratio in audit {self.id}: {info}")
        self.table.append({"ratio": float(ratio), **info})

    def rows(self, **match):
        return [r for r in self.table if all(r.get(k) == v for k, v in match.items())]

    def to_json(self) -> dict:
        return {"id": self.id, "grid": self.grid, "max_ratio": self.max_ratio, "table": self.table}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        """Aligned plain-text rendering."""
        if not self.table:
            return f"{self.id}: (no samples)"
        keys = list(self.table[0].keys())
        keys = [k for k in keys if k != "ratio"] + ["ratio"]
        cells = [[_fmt(r.get(k)) for k in keys] for r in self.table]
        widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
        lines = [f"{self.id}  max_ratio={self.max_ratio:.6g}"]
        lines.append("  ".join(k.rjust(w) for k, w in zip(keys, widths)))
        lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def safe_ratio(lhs: float, rhs: float) -> float:
    """LHS/RHS with 0/0 read as 0."""
    if lhs == 0.0:
        return 0.0
    if rhs == 0.0:
        return math.inf
    return lhs / rhs
