"""MPS export of the tagged MILP and parsing of external solver output.

Row names embed the constraint tags (``<kind>_<id>_<t>``) so that an
external solver's row duals can be mapped straight back onto the model.
The solution parser understands the pretty solution-file style written by
the HiGHS command line (``--solution_file``), which carries primal column
values and, for LPs, row duals.
"""
from __future__ import annotations

from pathlib import Path

from .formulation import MilpModel

OBJECTIVE_ROW = "COST"

_SENSE = {"<=": "L", ">=": "G", "==": "E"}


def _clean(name: str) -> str:
    # MPS fields cannot carry whitespace
    return "".join(ch if not ch.isspace() else "." for ch in name)


def write_mps(model: MilpModel, path) -> None:
    lines = ["NAME          RESERVEMARKET", "ROWS", f" N  {OBJECTIVE_ROW}"]
    row_names = [_clean(r.tag.name) for r in model.rows]
    for r, name in zip(model.rows, row_names):
        lines.append(f" {_SENSE[r.sense]}  {name}")

    # column-major coefficient lists
    by_col: dict[int, list[tuple[str, float]]] = {i: [] for i in range(len(model.variables))}
    for r, name in zip(model.rows, row_names):
        for ci, coef in r.coefs.items():
            by_col[ci].append((name, coef))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for i, v in enumerate(model.variables):
        if v.integer != in_int:
            kind = "'INTORG'" if v.integer else "'INTEND'"
            lines.append(f"    MARKER{marker}  'MARKER'  {kind}")
            marker += 1
            in_int = v.integer
        col = _clean(v.name)
        entries = []
        if v.cost:
            entries.append((OBJECTIVE_ROW, v.cost))
        entries.extend(by_col[i])
        if not entries:
            entries.append((OBJECTIVE_ROW, 0.0))
        for rname, coef in entries:
            lines.append(f"    {col}  {rname}  {coef!r}")
    if in_int:
        lines.append(f"    MARKER{marker}  'MARKER'  'INTEND'")

    lines.append("RHS")
    for r, name in zip(model.rows, row_names):
        if r.rhs:
            lines.append(f"    RHS  {name}  {r.rhs!r}")

    lines.append("BOUNDS")
    for v in model.variables:
        col = _clean(v.name)
        if v.integer and v.lb == 0.0 and v.ub == 1.0:
            lines.append(f" BV BND  {col}")
            continue
        if v.lb == v.ub:
            lines.append(f" FX BND  {col}  {v.lb!r}")
            continue
        if v.lb == float("-inf") and v.ub == float("inf"):
            lines.append(f" FR BND  {col}")
            continue
        if v.lb != 0.0:
            if v.lb == float("-inf"):
                lines.append(f" MI BND  {col}")
            else:
                lines.append(f" LO BND  {col}  {v.lb!r}")
        if v.ub != float("inf"):
            lines.append(f" UP BND  {col}  {v.ub!r}")
    lines.append("ENDATA")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_highs_solution(text: str) -> dict:
    """Parse a HiGHS pretty solution file into
    {"status", "objective", "columns": {name: value}, "row_duals": {name: value}}."""
    status = None
    objective = None
    columns: dict[str, float] = {}
    row_duals: dict[str, float] = {}
    lines = text.splitlines()
    section = None   # None | "primal" | "dual"
    block = None     # None | "columns" | "rows"
    remaining = 0
    for i, line in enumerate(lines):
        stripped = line.strip()
        if stripped == "Model status":
            status = lines[i + 1].strip() if i + 1 < len(lines) else None
            continue
        if stripped.startswith("Objective"):
            parts = stripped.split()
            if len(parts) == 2:
                objective = float(parts[1])
            continue
        if stripped.startswith("# Primal solution values"):
            section, block = "primal", None
            continue
        if stripped.startswith("# Dual solution values"):
            section, block = "dual", None
            continue
        if stripped.startswith("# Basis"):
            section, block = None, None
            continue
        if stripped.startswith("# Columns"):
            block = "columns"
            remaining = int(stripped.split()[-1])
            continue
        if stripped.startswith("# Rows"):
            block = "rows"
            remaining = int(stripped.split()[-1])
            continue
        if section and block and remaining > 0 and stripped:
            name, value = stripped.rsplit(None, 1)
            remaining -= 1
            if section == "primal" and block == "columns":
                columns[name] = float(value)
            elif section == "dual" and block == "rows":
                row_duals[name] = float(value)
    return {"status": status, "objective": objective,
            "columns": columns, "row_duals": row_duals}
