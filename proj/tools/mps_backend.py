#!/usr/bin/env python3
"""Reference MILP backend: reads an MPS file, solves it with SciPy's HiGHS
interface and writes a solution file.

Usage:
    mps_backend.py MODEL.mps SOLUTION.sol [--gap G] [--timelimit SECONDS]

Solution file layout:
    Status <Optimal|FeasibleGap|Infeasible|Unbounded|Error>
    Objective <value>
    Gap <relative mip gap>
    Columns <count>
    <name> <value>
    ...

Any MPS-capable solver can replace this script; the driving process only
relies on the command-line contract above.
"""

import argparse
import math
import sys
import warnings

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

# scipy warns when options are forwarded verbatim to HiGHS; that is exactly
# what the solver tuning below relies on
warnings.filterwarnings("ignore", category=RuntimeWarning)

INF = math.inf


class MpsError(Exception):
    pass


def parse_mps(path):
    """Parse fixed/free MPS with ROWS/COLUMNS/RHS/RANGES/BOUNDS sections and
    INTORG/INTEND markers. Token based, so both classic column-aligned and
    free-form files are accepted."""
    row_sense = {}
    row_order = []
    obj_row = None
    col_order = []
    col_entries = {}     # name -> list[(row, coef)]
    col_integer = {}
    obj_coef = {}
    rhs = {}
    ranges = {}
    lb = {}
    ub = {}
    obj_offset = 0.0

    section = None
    in_integer_block = False

    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            if not raw.strip() or raw.lstrip().startswith("*"):
                continue
            is_header = raw[0] not in (" ", "\t")
            tokens = raw.split()
            if is_header:
                section = tokens[0].upper()
                if section == "ENDATA":
                    break
                continue
            if section == "ROWS":
                sense, name = tokens[0].upper(), tokens[1]
                if sense == "N":
                    if obj_row is None:
                        obj_row = name
                    continue
                if sense not in ("L", "G", "E"):
                    raise MpsError(f"unknown row sense {sense}")
                row_sense[name] = sense
                row_order.append(name)
            elif section == "COLUMNS":
                if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                    if tokens[2] == "'INTORG'":
                        in_integer_block = True
                    elif tokens[2] == "'INTEND'":
                        in_integer_block = False
                    continue
                name = tokens[0]
                if name not in col_entries:
                    col_entries[name] = []
                    col_order.append(name)
                    col_integer[name] = in_integer_block
                pairs = tokens[1:]
                if len(pairs) % 2 != 0:
                    raise MpsError(f"odd COLUMNS record: {raw.rstrip()}")
                for row, value in zip(pairs[0::2], pairs[1::2]):
                    coef = float(value)
                    if row == obj_row:
                        obj_coef[name] = obj_coef.get(name, 0.0) + coef
                    elif row in row_sense:
                        col_entries[name].append((row, coef))
                    else:
                        raise MpsError(f"unknown row {row} in COLUMNS")
            elif section == "RHS":
                pairs = tokens[1:]
                for row, value in zip(pairs[0::2], pairs[1::2]):
                    if row == obj_row:
                        # convention: RHS on the objective row is -offset
                        obj_offset = -float(value)
                    else:
                        rhs[row] = float(value)
            elif section == "RANGES":
                pairs = tokens[1:]
                for row, value in zip(pairs[0::2], pairs[1::2]):
                    ranges[row] = float(value)
            elif section == "BOUNDS":
                btype = tokens[0].upper()
                name = tokens[2]
                value = float(tokens[3]) if len(tokens) > 3 else 0.0
                if name not in col_entries:
                    raise MpsError(f"bound on unknown column {name}")
                if btype == "UP":
                    ub[name] = value
                elif btype == "LO":
                    lb[name] = value
                elif btype == "FX":
                    lb[name] = value
                    ub[name] = value
                elif btype == "FR":
                    lb[name] = -INF
                    ub[name] = INF
                elif btype == "MI":
                    lb[name] = -INF
                elif btype == "PL":
                    ub[name] = INF
                elif btype == "BV":
                    lb[name] = 0.0
                    ub[name] = 1.0
                    col_integer[name] = True
                elif btype == "UI":
                    ub[name] = value
                    col_integer[name] = True
                elif btype == "LI":
                    lb[name] = value
                    col_integer[name] = True
                else:
                    raise MpsError(f"unknown bound type {btype}")
            elif section == "NAME":
                continue

    if obj_row is None:
        raise MpsError("no objective (N) row")

    n = len(col_order)
    col_index = {name: i for i, name in enumerate(col_order)}
    c = np.zeros(n)
    for name, coef in obj_coef.items():
        c[col_index[name]] = coef

    lower = np.zeros(n)
    upper = np.full(n, INF)
    for name, value in lb.items():
        lower[col_index[name]] = value
    for name, value in ub.items():
        upper[col_index[name]] = value

    integrality = np.array([1 if col_integer[name] else 0 for name in col_order])

    m = len(row_order)
    row_index = {name: i for i, name in enumerate(row_order)}
    data, rows_ix, cols_ix = [], [], []
    for name, entries in col_entries.items():
        j = col_index[name]
        for row, coef in entries:
            rows_ix.append(row_index[row])
            cols_ix.append(j)
            data.append(coef)
    matrix = sparse.csr_matrix((data, (rows_ix, cols_ix)), shape=(m, n))

    con_lb = np.full(m, -INF)
    con_ub = np.full(m, INF)
    for name in row_order:
        i = row_index[name]
        b = rhs.get(name, 0.0)
        sense = row_sense[name]
        if sense == "L":
            con_ub[i] = b
        elif sense == "G":
            con_lb[i] = b
        else:
            con_lb[i] = b
            con_ub[i] = b
        if name in ranges:
            r = ranges[name]
            if sense == "L":
                con_lb[i] = b - abs(r)
            elif sense == "G":
                con_ub[i] = b + abs(r)
            elif r >= 0:
                con_ub[i] = b + r
            else:
                con_lb[i] = b + r

    return {
        "c": c,
        "offset": obj_offset,
        "A": matrix,
        "con_lb": con_lb,
        "con_ub": con_ub,
        "lb": lower,
        "ub": upper,
        "integrality": integrality,
        "columns": col_order,
    }


def solve(problem, gap, timelimit, presolve="auto"):
    n_int = int(problem["integrality"].sum())
    if presolve == "auto":
        # large unit-commitment style instances solve far faster unpresolved:
        # the presolved form traps HiGHS in root-node cut loops
        use_presolve = n_int < 1000
    else:
        use_presolve = presolve == "on"
    options = {"presolve": use_presolve}
    if n_int > 0:
        options["mip_heuristic_effort"] = 0.2  # forwarded to HiGHS
    if gap is not None:
        options["mip_rel_gap"] = gap
    if timelimit is not None:
        options["time_limit"] = timelimit
    constraints = None
    if problem["A"].shape[0] > 0:
        constraints = LinearConstraint(problem["A"], problem["con_lb"], problem["con_ub"])
    result = milp(
        c=problem["c"],
        constraints=constraints,
        integrality=problem["integrality"],
        bounds=Bounds(problem["lb"], problem["ub"]),
        options=options,
    )
    return result


def write_solution(path, status, objective, gap, columns, values):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"Status {status}\n")
        if objective is not None:
            handle.write(f"Objective {objective:.16g}\n")
        handle.write(f"Gap {0.0 if gap is None else gap:.6g}\n")
        if values is None:
            handle.write("Columns 0\n")
            return
        handle.write(f"Columns {len(columns)}\n")
        for name, value in zip(columns, values):
            handle.write(f"{name} {value:.16g}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("mps")
    parser.add_argument("sol")
    parser.add_argument("--gap", type=float, default=None)
    parser.add_argument("--timelimit", type=float, default=None)
    parser.add_argument("--presolve", choices=["auto", "on", "off"], default="auto")
    args = parser.parse_args()

    try:
        problem = parse_mps(args.mps)
    except (MpsError, OSError, ValueError) as exc:
        print(f"mps parse error: {exc}", file=sys.stderr)
        return 2

    result = solve(problem, args.gap, args.timelimit, args.presolve)

    # scipy milp status codes: 0 optimal, 1 iteration/time limit, 2 infeasible,
    # 3 unbounded, 4 numerical trouble
    gap = getattr(result, "mip_gap", None)
    if result.status == 0:
        status = "Optimal"
        if gap is not None and args.gap is not None and gap > args.gap:
            status = "FeasibleGap"
    elif result.status == 1 and result.x is not None:
        status = "FeasibleGap"
    elif result.status == 2:
        status = "Infeasible"
    elif result.status == 3:
        status = "Unbounded"
    else:
        status = "Error"

    objective = None
    values = None
    if result.x is not None:
        values = result.x
        objective = float(problem["c"] @ result.x) + problem["offset"]
    write_solution(args.sol, status, objective, gap, problem["columns"], values)
    return 0


if __name__ == "__main__":
    sys.exit(main())
