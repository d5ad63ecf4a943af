#!/usr/bin/env python3
"""Solve a sparse SDPA problem with cvxpy and write a CSDP-style solution.

Usage: sdpa_cvxpy.py problem.dat-s solution.sol

Primal form: maximize tr(C X) subject to tr(A_k X) = a_k, X PSD.
Exit codes follow CSDP: 0 optimal, 1 primal infeasible, 2 dual infeasible,
3 inaccurate solution, 4 failure.
"""

import sys

import numpy as np
import scipy.sparse as sp
import cvxpy as cp


def read_problem(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and ln[0] not in "*\""]
    toks = " ".join(lines).replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ").split()
    m = int(toks[0])
    nblocks = int(toks[1])
    sizes = [int(t) for t in toks[2:2 + nblocks]]
    pos = 2 + nblocks
    rhs = np.array([float(t) for t in toks[pos:pos + m]])
    pos += m
    entries = []
    while pos + 5 <= len(toks):
        k, b, i, j = (int(t) for t in toks[pos:pos + 4])
        entries.append((k, b, i, j, float(toks[pos + 4])))
        pos += 5
    return m, sizes, rhs, entries


def main():
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 4
    m, sizes, rhs, entries = read_problem(sys.argv[1])
    offsets, total = [], 0
    for s in sizes:
        offsets.append(total)
        total += s * s if s > 0 else -s

    def slots(b, i, j):
        s, off = sizes[b - 1], offsets[b - 1]
        if s < 0:
            return [off + i - 1] if i == j else []
        if i == j:
            return [off + (i - 1) + (j - 1) * s]
        return [off + (i - 1) + (j - 1) * s, off + (j - 1) + (i - 1) * s]

    rows, cols, vals = [], [], []
    c = np.zeros(total)
    for k, b, i, j, v in entries:
        for slot in slots(b, i, j):
            if k == 0:
                c[slot] += v
            else:
                rows.append(k - 1)
                cols.append(slot)
                vals.append(v)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(m, total))

    blocks, parts, cons = [], [], []
    for s in sizes:
        if s > 0:
            x = cp.Variable((s, s), symmetric=True)
            cons.append(x >> 0)
            parts.append(cp.vec(x, order="F"))
        else:
            x = cp.Variable(-s, nonneg=True)
            parts.append(x)
        blocks.append(x)
    xv = cp.hstack(parts) if len(parts) > 1 else parts[0]
    eq = a @ xv == rhs
    prob = cp.Problem(cp.Maximize(c @ xv), [eq] + cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError as exc:
        try:
            prob.solve(solver=cp.SCS, eps=1e-9, max_iters=100000)
        except cp.error.SolverError:
            print(f"solver error: {exc}", file=sys.stderr)
            return 4
    status = prob.status
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return 1
    if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return 2
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        print(f"solver status: {status}", file=sys.stderr)
        return 4
    y = eq.dual_value if eq.dual_value is not None else np.zeros(m)
    with open(sys.argv[2], "w") as out:
        out.write(" ".join(f"{v:.17g}" for v in np.atleast_1d(y)) + "\n")
        for b, (s, x) in enumerate(zip(sizes, blocks), start=1):
            val = np.asarray(x.value)
            if s > 0:
                for i in range(s):
                    for j in range(i, s):
                        if val[i, j] != 0.0:
                            out.write(f"2 {b} {i + 1} {j + 1} {val[i, j]:.17g}\n")
            else:
                for i in range(-s):
                    if val[i] != 0.0:
                        out.write(f"2 {b} {i + 1} {i + 1} {val[i]:.17g}\n")
    return 0 if status == cp.OPTIMAL else 3


if __name__ == "__main__":
    sys.exit(main())
