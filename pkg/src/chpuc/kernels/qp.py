"""Primal active-set method for convex (PSD) quadratic programs.

The working set always holds the equality rows. Each iteration solves the
equality-constrained sub-problem in the null space of the working rows;
zero-curvature descent directions (singular Q) are followed until a
constraint blocks them or declared unbounded.
"""
from __future__ import annotations

import numpy as np

from .lp import solve_lp
from .problems import EQ, GE, LE, LinearProgram, QuadraticProgram, SolveOutcome, Status


def _null_space(A: np.ndarray, n: int):
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(A)
    tol = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0) * 10
    rank = int((s > max(tol, 1e-12)).sum())
    return vt[rank:].T


def _rank(A: np.ndarray) -> int:
    if A.shape[0] == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int((s > max(A.shape) * np.finfo(float).eps * s[0] * 10).sum())


def solve_qp(qp: QuadraticProgram, *, max_iter: int | None = None, x0: np.ndarray | None = None) -> SolveOutcome:
    """Solve ``min 1/2 x'Qx + c'x`` over the linear constraints of ``qp``.

    ``x0``, when given, must be feasible; otherwise a phase-one LP supplies
    a starting vertex.
    """
    n = qp.n
    Q, c = qp.Q, qp.c
    E_rows, e_rhs, e_map = [], [], []
    G_rows, g_rhs, g_map = [], [], []
    for i, s in enumerate(qp.senses):
        a, b = qp.A[i], qp.b[i]
        sc = np.abs(a).max()
        if sc == 0.0:
            if (s == LE and b < -1e-9) or (s == GE and b > 1e-9) or (s == EQ and abs(b) > 1e-9):
                return SolveOutcome(Status.INFEASIBLE, message="empty row with violated rhs")
            continue
        if s == EQ:
            E_rows.append(a / sc); e_rhs.append(b / sc); e_map.append((i, sc))
        elif s == LE:
            G_rows.append(a / sc); g_rhs.append(b / sc); g_map.append(("row", i, -1.0 / sc))
        else:
            G_rows.append(-a / sc); g_rhs.append(-b / sc); g_map.append(("row", i, 1.0 / sc))
    eye = np.eye(n)
    for j in range(n):
        if np.isfinite(qp.upper[j]):
            G_rows.append(eye[j]); g_rhs.append(qp.upper[j]); g_map.append(("ub", j, 1.0))
        if np.isfinite(qp.lower[j]):
            G_rows.append(-eye[j]); g_rhs.append(-qp.lower[j]); g_map.append(("lb", j, 1.0))
    E = np.array(E_rows).reshape(-1, n)
    e = np.array(e_rhs)
    G = np.array(G_rows).reshape(-1, n)
    g = np.array(g_rhs)
    nE = E.shape[0]

    if x0 is None:
        ph1 = solve_lp(LinearProgram(np.zeros(n), qp.A, qp.senses, qp.b, qp.lower, qp.upper))
        if ph1.status is not Status.OPTIMAL:
            st = Status.INFEASIBLE if ph1.status in (Status.INFEASIBLE, Status.UNBOUNDED) else ph1.status
            return SolveOutcome(st, message="phase one: " + ph1.message)
        x = ph1.x.copy()
    else:
        x = np.asarray(x0, dtype=float).copy()

    scale_x = 1.0 + np.abs(x).max(initial=0.0)
    act_tol = 1e-9 * max(1.0, np.abs(g).max(initial=1.0))
    W: list[int] = []
    if G.shape[0]:
        slack = g - G @ x
        base = E
        r0 = _rank(base)
        for i in np.flatnonzero(np.abs(slack) <= act_tol):
            trial = np.vstack([base, G[i]])
            r1 = _rank(trial)
            if r1 > r0:
                W.append(int(i))
                base, r0 = trial, r1
            if r0 >= n:
                break

    qscale = max(1.0, np.abs(Q).max(initial=0.0))
    max_iter = max_iter or 50 * (n + G.shape[0] + 10)
    it = 0
    status = Status.ITERATION_LIMIT
    lam = np.zeros(0)
    nu = np.zeros(nE)
    while it < max_iter:
        it += 1
        grad = Q @ x + c
        AW = np.vstack([E, G[W]]) if W else E
        Z = _null_space(AW, n)
        p = np.zeros(n)
        alpha_max = 1.0
        if Z.shape[1]:
            Hr = Z.T @ Q @ Z
            gr = Z.T @ grad
            w, V = np.linalg.eigh(Hr)
            pos = w > 1e-10 * qscale
            g0 = V[:, ~pos].T @ gr
            if g0.size and np.abs(g0).max() > 1e-10 * (1.0 + np.abs(grad).max()):
                p = -Z @ (V[:, ~pos] @ g0)
                alpha_max = np.inf
            elif pos.any():
                p = -Z @ (V[:, pos] @ (V[:, pos].T @ gr / w[pos]))
        if np.abs(p).max(initial=0.0) <= 1e-12 * scale_x:
            if AW.shape[0]:
                mult = np.linalg.lstsq(AW.T, -grad, rcond=None)[0]
            else:
                mult = np.zeros(0)
            nu, lam = mult[:nE], mult[nE:]
            mtol = 1e-9 * (1.0 + np.abs(grad).max())
            if lam.size == 0 or lam.min() >= -mtol:
                status = Status.OPTIMAL
                break
            W.pop(int(np.argmin(lam)))
            continue
        # ratio test
        alpha = alpha_max
        block = -1
        if G.shape[0]:
            Gp = G @ p
            mask = np.ones(G.shape[0], dtype=bool)
            mask[W] = False
            cand = np.flatnonzero(mask & (Gp > 1e-12 * np.abs(p).max()))
            if cand.size:
                ratios = np.maximum(g[cand] - G[cand] @ x, 0.0) / Gp[cand]
                k = int(np.argmin(ratios))
                if ratios[k] < alpha:
                    alpha = float(ratios[k])
                    block = int(cand[k])
        if not np.isfinite(alpha):
            return SolveOutcome(Status.UNBOUNDED, iterations=it, ray=p)
        x = x + alpha * p
        if block >= 0:
            W.append(block)

    if status is not Status.OPTIMAL:
        return SolveOutcome(status, x=x, iterations=it)

    duals = np.zeros(qp.m)
    lower_duals = np.zeros(n)
    upper_duals = np.zeros(n)
    for k, (i, sc) in enumerate(e_map):
        duals[i] = -nu[k] / sc
    for k, wi in enumerate(W):
        kind, idx, fac = g_map[wi]
        if kind == "row":
            duals[idx] = lam[k] * fac
        elif kind == "ub":
            upper_duals[idx] = lam[k]
        else:
            lower_duals[idx] = lam[k]
    obj = float(0.5 * x @ Q @ x + c @ x)
    return SolveOutcome(Status.OPTIMAL, x=x, objective=obj, duals=duals,
                        lower_duals=lower_duals, upper_duals=upper_duals, iterations=it)
