"""Minimal test-local MPS reader, independent of the package's writer.

Understands exactly the feature set the writer emits: free-format fields,
N/L/G/E rows, INTORG/INTEND markers, RHS, and BV/FX/FR/LO/UP/MI bounds.
Used both by the round-trip tests and by the fake external solver."""
import math


class MpsProblem:
    def __init__(self):
        self.objective_row = None
        self.row_names = []          # constraint rows in file order
        self.row_sense = {}          # name -> "<=" | ">=" | "=="
        self.col_names = []
        self.integer = {}            # col -> bool
        self.obj = {}                # col -> objective coefficient
        self.coefs = {}              # (row, col) -> coefficient
        self.rhs = {}                # row -> value (default 0)
        self.lb = {}                 # col -> lower bound (default 0)
        self.ub = {}                 # col -> upper bound (default +inf)


_SENSE = {"L": "<=", "G": ">=", "E": "=="}


def read_mps(path) -> MpsProblem:
    prob = MpsProblem()
    section = None
    in_integer = False
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            head = line.split()
            if not line[0].isspace():
                section = head[0]
                continue
            if section == "ROWS":
                kind, name = head
                if kind == "N":
                    prob.objective_row = name
                else:
                    prob.row_names.append(name)
                    prob.row_sense[name] = _SENSE[kind]
            elif section == "COLUMNS":
                if len(head) >= 2 and head[1] == "'MARKER'":
                    in_integer = head[2] == "'INTORG'"
                    continue
                col, row, value = head
                if col not in prob.integer:
                    prob.col_names.append(col)
                    prob.integer[col] = in_integer
                    prob.lb[col] = 0.0
                    prob.ub[col] = math.inf
                if row == prob.objective_row:
                    prob.obj[col] = float(value)
                else:
                    prob.coefs[(row, col)] = float(value)
            elif section == "RHS":
                _, row, value = head
                prob.rhs[row] = float(value)
            elif section == "BOUNDS":
                kind = head[0]
                col = head[2]
                value = float(head[3]) if len(head) > 3 else None
                if kind == "BV":
                    prob.lb[col], prob.ub[col] = 0.0, 1.0
                elif kind == "FX":
                    prob.lb[col] = prob.ub[col] = value
                elif kind == "FR":
                    prob.lb[col], prob.ub[col] = -math.inf, math.inf
                elif kind == "LO":
                    prob.lb[col] = value
                elif kind == "UP":
                    prob.ub[col] = value
                elif kind == "MI":
                    prob.lb[col] = -math.inf
    return prob


def to_arrays(prob: MpsProblem):
    """numpy/scipy-ready arrays: (c, integrality, bounds, A_ub, b_ub, ub_map,
    A_eq, b_eq, eq_map) with ub_map/eq_map carrying (row name, sign)."""
    import numpy as np

    col_idx = {c: i for i, c in enumerate(prob.col_names)}
    n = len(prob.col_names)
    c = np.zeros(n)
    for col, v in prob.obj.items():
        c[col_idx[col]] = v
    integrality = np.array([1 if prob.integer[col] else 0 for col in prob.col_names])
    lb = np.array([prob.lb[col] for col in prob.col_names])
    ub = np.array([prob.ub[col] for col in prob.col_names])

    by_row = {name: {} for name in prob.row_names}
    for (row, col), v in prob.coefs.items():
        by_row[row][col_idx[col]] = v

    ub_rows, ub_rhs, ub_map = [], [], []
    eq_rows, eq_rhs, eq_map = [], [], []
    for name in prob.row_names:
        rhs = prob.rhs.get(name, 0.0)
        row = np.zeros(n)
        for j, v in by_row[name].items():
            row[j] = v
        sense = prob.row_sense[name]
        if sense == "==":
            eq_rows.append(row)
            eq_rhs.append(rhs)
            eq_map.append((name, 1.0))
        elif sense == "<=":
            ub_rows.append(row)
            ub_rhs.append(rhs)
            ub_map.append((name, 1.0))
        else:
            ub_rows.append(-row)
            ub_rhs.append(-rhs)
            ub_map.append((name, -1.0))
    A_ub = np.array(ub_rows) if ub_rows else np.zeros((0, n))
    A_eq = np.array(eq_rows) if eq_rows else np.zeros((0, n))
    return (c, integrality, lb, ub, A_ub, np.array(ub_rhs), ub_map,
            A_eq, np.array(eq_rhs), eq_map)
