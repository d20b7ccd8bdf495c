"""Expected schema counts under selection, one-point crossover and mutation.

The count is iterated as a real number,

    xi(t+1) = xi(t) * r * (1 - p_c * delta / (m - 1) - o * p_m),

and only rounded for display. Once the count passes ``takeover * N`` the
growth assumption no longer holds and the series shows a takeover marker.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

TAKEOVER = None  # marker value inside a series

#: Generations shown as table columns; column g holds the count after g - 1 updates.
COLUMNS = (1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


@dataclass(frozen=True)
class SchemaSpec:
    xi0: float = 5.0
    fitness_ratio: float = 1.9
    p_c: float = 0.7
    p_m: float = 0.01
    delta: int = 11
    order: int = 6
    m: int = 20
    N: int = 500

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("chromosome length must be at least 2")
        if not 0 <= self.delta <= self.m - 1:
            raise ValueError("defining length must lie in [0, m - 1]")
        if not 0 <= self.order <= self.m:
            raise ValueError("order must lie in [0, m]")

    @property
    def survival(self) -> float:
        return 1.0 - self.p_c * self.delta / (self.m - 1) - self.order * self.p_m

    @property
    def factor(self) -> float:
        return self.fitness_ratio * self.survival


def schema_counts(spec: SchemaSpec, generations: int) -> list[float]:
    """Real-valued counts after 0, 1, ..., ``generations`` updates."""
    if generations < 0:
        raise ValueError("generations must be non-negative")
    f = spec.factor
    xs = [float(spec.xi0)]
    for _ in range(generations):
        xs.append(max(xs[-1] * f, 0.0) if f > 0 else 0.0)
    return xs


def _round(x: float, rounding: str) -> int:
    if rounding == "floor":
        return int(math.floor(x))
    if rounding == "nearest":
        return int(math.floor(x + 0.5))
    raise ValueError(f"unknown rounding {rounding!r}")


def schema_growth(spec: SchemaSpec, generations: int, rounding: str = "floor",
                  takeover: float = 0.6) -> list[Optional[int]]:
    """Integer counts after 0..``generations`` updates, capped at N.

    Entries become ``None`` (the takeover marker) from the first update whose
    count exceeds ``takeover * N`` onward.
    """
    if generations < 1:
        raise ValueError("generations must be at least 1")
    out: list[Optional[int]] = []
    taken = False
    for x in schema_counts(spec, generations):
        taken = taken or x > takeover * spec.N
        out.append(None if taken else min(_round(x, rounding), spec.N))
    return out


def table_row(spec: SchemaSpec, columns: Sequence[int] = COLUMNS, rounding: str = "floor",
              takeover: float = 0.6) -> list[Optional[int]]:
    series = schema_growth(spec, max(columns) - 1 if max(columns) > 1 else 1, rounding, takeover)
    return [series[g - 1] for g in columns]


def ratio_rows(ratios=(1.8, 1.9, 2.0, 2.1, 2.2), **kw) -> list[tuple[str, SchemaSpec]]:
    """Rows varying the fitness ratio at delta = 11, o = 6."""
    return [(f"{r:g}", SchemaSpec(fitness_ratio=r, **kw)) for r in ratios]


def shape_rows(shapes=((10, 6), (10, 7), (10, 8), (11, 8), (12, 8)), ratio: float = 1.9,
               **kw) -> list[tuple[str, SchemaSpec]]:
    """Rows varying (delta, o) at a fixed fitness ratio."""
    return [(f"({d}, {o})", SchemaSpec(fitness_ratio=ratio, delta=d, order=o, **kw)) for d, o in shapes]


def _cell(v: Optional[int]) -> str:
    return "--" if v is None else str(v)


def format_table(rows, columns: Sequence[int] = COLUMNS, rounding: str = "floor",
                 takeover: float = 0.6, label: str = "row") -> str:
    """Aligned text table, one line per row spec."""
    body = [[name] + [_cell(v) for v in table_row(s, columns, rounding, takeover)] for name, s in rows]
    head = [label] + [str(c) for c in columns]
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [head] + body]
    return "\n".join(lines) + "\n"


def table_csv(rows, columns: Sequence[int] = COLUMNS, rounding: str = "floor",
              takeover: float = 0.6, label: str = "row") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([label] + [f"g{c}" for c in columns])
    for name, s in rows:
        w.writerow([name] + [_cell(v) for v in table_row(s, columns, rounding, takeover)])
    return buf.getvalue()
