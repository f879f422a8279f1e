#!/usr/bin/env python3
"""Solve a sparse SDPA (.dat-s) file with cvxpy and write SDPA-style output.

Usage: sdpa_clarabel.py problem.dat-s solution.out [--tol 1e-8] [--solver CLARABEL]

Used as an external backend:
  momentctl solve --backend sdpa-file \
      --sdpa-command "python3 tools/sdpa_clarabel.py {in} {out} --tol {tol}"
"""

import argparse
import re
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    with open(path) as f:
        lines = [l for l in f if l.strip() and not l.lstrip().startswith(("*", '"'))]
    tok = lambda l: re.sub(r"[{}(),]", " ", l).split()
    m = int(tok(lines[0])[0])
    nblocks = int(tok(lines[1])[0])
    pos = 2
    sizes = []
    while len(sizes) < nblocks:
        sizes += [int(t) for t in tok(lines[pos])[: nblocks - len(sizes)]]
        pos += 1
    c = []
    while len(c) < m:
        c += [float(t) for t in tok(lines[pos])[: m - len(c)]]
        pos += 1
    entries = []
    for l in lines[pos:]:
        t = tok(l)
        entries.append((int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])))
    return m, sizes, np.array(c), entries


def fmt(v):
    return repr(float(v))


def block_text(val, size):
    if size < 0:
        return "{" + ",".join(fmt(v) for v in val) + "}"
    rows = ["{" + ",".join(fmt(v) for v in row) + "}" for row in val]
    return "{ " + ",".join(rows) + " }"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem")
    ap.add_argument("solution")
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args()

    m, sizes, cvec, entries = read_sdpa(args.problem)
    # One flattened variable per block: full s*s for matrices, k for diagonal blocks.
    dims = [s * s if s > 0 else -s for s in sizes]
    rows = [[[], [], []] for _ in sizes]  # per block: (row, col, val) over matno 0..m
    for mat, b, i, j, v in entries:
        s = sizes[b]
        if s < 0:
            rows[b][0].append(mat); rows[b][1].append(i); rows[b][2].append(v)
        else:
            rows[b][0].append(mat); rows[b][1].append(i * s + j); rows[b][2].append(v)
            if i != j:
                rows[b][0].append(mat); rows[b][1].append(j * s + i); rows[b][2].append(v)
    F = [sp.csr_matrix((r[2], (r[0], r[1])), shape=(m + 1, d)) for r, d in zip(rows, dims)]

    Y, cons = [], []
    for s in sizes:
        if s > 0:
            V = cp.Variable((s, s), symmetric=True)
            cons.append(V >> 0)
            Y.append(V)
        else:
            V = cp.Variable(-s)
            cons.append(V >= 0)
            Y.append(V)
    flat = [cp.vec(V, order="C") if s > 0 else V for V, s in zip(Y, sizes)]
    objective = sum(F[b][0, :] @ flat[b] for b in range(len(sizes)))
    lhs = sum(F[b][1:, :] @ flat[b] for b in range(len(sizes)))
    eq = lhs == cvec
    prob = cp.Problem(cp.Maximize(objective), cons + [eq])
    opts = {}
    if args.solver == "CLARABEL":
        opts = dict(tol_gap_abs=args.tol, tol_gap_rel=args.tol, tol_feas=args.tol)
    try:
        prob.solve(solver=args.solver, **opts)
    except cp.SolverError as e:
        print(f"solver failed: {e}", file=sys.stderr)
        with open(args.solution, "w") as f:
            f.write("phase.value = noINFO\n")
        return 0

    status = prob.status
    phase = {
        cp.OPTIMAL: "pdOPT",
        cp.OPTIMAL_INACCURATE: "pdFEAS",
        cp.INFEASIBLE: "pFEAS_dINF",
        cp.INFEASIBLE_INACCURATE: "pFEAS_dINF",
        cp.UNBOUNDED: "dUNBD",
        cp.UNBOUNDED_INACCURATE: "dUNBD",
    }.get(status, "noINFO")
    out = [f"phase.value = {phase}"]
    if phase in ("pdOPT", "pdFEAS"):
        duals = np.asarray(eq.dual_value).ravel()
        # SDPA primal objective c'x must match the optimal value.
        x = min((duals, -duals), key=lambda v: abs(cvec @ v - prob.value))
        xmat, ymat = [], []
        for b, s in enumerate(sizes):
            Fx = F[b][1:, :].T @ x - F[b][0, :].toarray().ravel()
            val = np.asarray(Y[b].value)
            if s > 0:
                xmat.append(block_text(Fx.reshape(s, s), s))
                ymat.append(block_text(val, s))
            else:
                xmat.append(block_text(Fx, s))
                ymat.append(block_text(val, s))
        out += [
            f"objValPrimal = {fmt(cvec @ x)}",
            f"objValDual = {fmt(prob.value)}",
            "xVec = ",
            "{" + ",".join(fmt(v) for v in x) + "}",
            "xMat = ",
            "{",
            *xmat,
            "}",
            "yMat = ",
            "{",
            *ymat,
            "}",
        ]
    with open(args.solution, "w") as f:
        f.write("\n".join(out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
