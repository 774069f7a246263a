"""Table rendering: markdown (report rounding), CSV, and JSON.

Rounding lives only in the markdown renderer; csv and json always carry
full precision.  Column kinds:

- text: rendered as-is
- score: efficiency score, md rounds to 2 decimals
- rate: percent rate, md rounds to 1 decimal and prints exact zeros as "0"
- int: integer (None allowed, rendered empty/null)
- num: general numeric, md uses up to 10 significant digits
- scorerank: (score, rank) pair; md prints "0.49/6" ("1.00" if rank is
  None), csv/json split it into two fields
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError

KINDS = ("text", "score", "rate", "int", "num", "scorerank")


@dataclass(frozen=True)
class Column:
    header: str
    kind: str = "num"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown column kind {self.kind!r}")


@dataclass(frozen=True)
class Table:
    columns: tuple[Column, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise DataError(f"row {i} has {len(row)} cells, expected "
                                f"{len(self.columns)}")


def _md_cell(kind: str, v) -> str:
    if v is None:
        return ""
    if kind == "text":
        return str(v)
    if kind == "score":
        return f"{v:.2f}"
    if kind == "rate":
        return "0" if v == 0 else f"{v:.1f}"
    if kind == "int":
        return str(int(v))
    if kind == "scorerank":
        score, rank = v
        cell = f"{score:.2f}"
        return cell if rank is None else f"{cell}/{int(rank)}"
    return f"{v:.10g}"


def _full(v) -> str:
    return f"{v:.17g}"


def _flat_cells(columns: Sequence[Column], row: Sequence):
    """Expand scorerank pairs so csv/json carry score and rank separately."""
    headers = []
    cells = []
    for col, v in zip(columns, row):
        if col.kind == "scorerank":
            score, rank = (None, None) if v is None else v
            headers += [col.header, f"{col.header} rank"]
            cells += [("score", score), ("int", rank)]
        else:
            headers.append(col.header)
            cells.append((col.kind, v))
    return headers, cells


def _render_md(table: Table) -> str:
    grid = [[c.header for c in table.columns]]
    for row in table.rows:
        grid.append([_md_cell(c.kind, v) for c, v in zip(table.columns, row)])
    widths = [max(len(r[j]) for r in grid) for j in range(len(table.columns))]
    lines = []

    def fmt(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) \
            + " |"

    lines.append(fmt(grid[0]))
    lines.append(fmt(["-" * w for w in widths]))
    for r in grid[1:]:
        lines.append(fmt(r))
    return "\n".join(lines) + "\n"


def _render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    first = True
    for row in table.rows:
        headers, cells = _flat_cells(table.columns, row)
        if first:
            writer.writerow(headers)
            first = False
        out = []
        for kind, v in cells:
            if v is None:
                out.append("")
            elif kind == "text":
                out.append(str(v))
            elif kind == "int":
                out.append(str(int(v)))
            else:
                out.append(_full(float(v)))
        writer.writerow(out)
    if first:
        headers, _ = _flat_cells(table.columns,
                                 [None] * len(table.columns))
        writer.writerow(headers)
    return buf.getvalue()


def _render_json(table: Table) -> str:
    objs = []
    for row in table.rows:
        headers, cells = _flat_cells(table.columns, row)
        obj = {}
        for h, (kind, v) in zip(headers, cells):
            if v is None:
                obj[h] = None
            elif kind == "text":
                obj[h] = str(v)
            elif kind == "int":
                obj[h] = int(v)
            else:
                obj[h] = float(v)
        objs.append(obj)
    return json.dumps(objs, indent=2, allow_nan=False) + "\n"


def render_table(table: Table, fmt: str = "md") -> str:
    if fmt == "md":
        return _render_md(table)
    if fmt == "csv":
        return _render_csv(table)
    if fmt == "json":
        return _render_json(table)
    raise DataError(f"unknown output format {fmt!r}")
