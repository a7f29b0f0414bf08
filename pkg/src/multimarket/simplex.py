"""Dense two-phase tableau simplex.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq`` and
``x >= 0``. Entering columns follow Dantzig's rule until a run of degenerate
pivots, then Bland's rule takes over until progress resumes. The tableau is
rebuilt from the original data every few dozen pivots so rounding does not pile up.
Small dense problems only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50
DEGENERATE_RUN = 20


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded" or "iteration_limit"
    x: Optional[np.ndarray]
    fun: Optional[float]
    pivots: int
    phase1_objective: float

    @property
    def success(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray):
        self.A, self.b, self.cost = A, b, cost
        self.basis = basis
        self.m, self.n = A.shape
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        body = np.linalg.solve(B, np.column_stack([self.A, self.b]))
        body[np.abs(body) < 1e-14] = 0.0
        body[:, -1] = np.maximum(body[:, -1], 0.0)
        T = np.empty((self.m + 1, self.n + 1))
        T[:-1] = body
        cB = self.cost[self.basis]
        T[-1, :-1] = self.cost - cB @ body[:, :-1]
        T[-1, -1] = -cB @ body[:, -1]
        self.T = T

    def pivot(self, row: int, col: int):
        T = self.T
        T[row] /= T[row, col]
        col_vals = T[:, col].copy()
        col_vals[row] = 0.0
        T -= np.outer(col_vals, T[row])
        T[:-1, -1] = np.maximum(T[:-1, -1], 0.0)
        self.basis[row] = col

    @property
    def objective(self) -> float:
        return -self.T[-1, -1]

    def run(self, tol: float, max_iter: int) -> tuple[str, int]:
        m = self.m
        pivots, degenerate = 0, 0
        while pivots < max_iter:
            T = self.T
            cost = T[-1, :-1]
            candidates = np.flatnonzero(cost < -tol)
            if candidates.size == 0:
                if pivots and pivots % REFACTOR_EVERY:
                    self.refactor()
                    if (self.T[-1, :-1] < -tol).any():
                        continue
                return "optimal", pivots
            bland = degenerate >= DEGENERATE_RUN
            col = candidates[0] if bland else candidates[np.argmin(cost[candidates])]
            column = T[:m, col]
            pos = column > tol
            if not pos.any():
                return "unbounded", pivots
            rhs = T[:m, -1]
            ratios = np.full(m, np.inf)
            ratios[pos] = rhs[pos] / column[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
            if bland:
                row = ties[np.argmin(self.basis[ties])]
            else:
                row = ties[np.argmax(column[ties])]
            degenerate = degenerate + 1 if best <= tol else 0
            self.pivot(row, col)
            pivots += 1
            if pivots % REFACTOR_EVERY == 0:
                self.refactor()
        return "iteration_limit", pivots


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = PIVOT_TOL,
             feas_tol: float = 1e-9, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if m == 0:
        if (c < 0).any():
            return LPResult("unbounded", None, None, 0, 0.0)
        return LPResult("optimal", np.zeros(n), 0.0, 0, 0.0)

    # columns: original | slacks | artificials
    n_struct = n + m_ub
    A = np.zeros((m, n_struct))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    basis = np.full(m, -1)
    slack_ok = np.zeros(m, dtype=bool)
    slack_ok[:m_ub] = ~neg[:m_ub]
    basis[slack_ok] = n + np.flatnonzero(slack_ok)
    art_rows = np.flatnonzero(~slack_ok)
    A1 = np.zeros((m, n_struct + art_rows.size))
    A1[:, :n_struct] = A
    A1[art_rows, n_struct + np.arange(art_rows.size)] = 1.0
    basis[art_rows] = n_struct + np.arange(art_rows.size)
    cost1 = np.zeros(A1.shape[1])
    cost1[n_struct:] = 1.0

    phase1 = _Tableau(A1, b, cost1, basis)
    status, piv1 = phase1.run(tol, max_iter)
    if status == "iteration_limit":
        return LPResult(status, None, None, piv1, float("nan"))
    infeas = phase1.objective
    scale = max(1.0, float(np.abs(b).max()))
    if infeas > feas_tol * scale:
        return LPResult("infeasible", None, None, piv1, float(infeas))

    # drive artificials out of the basis; rows where that is impossible are redundant
    T = phase1.T
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if phase1.basis[i] >= n_struct:
            row = T[i, :n_struct]
            cand = np.flatnonzero(np.abs(row) > tol)
            if cand.size:
                phase1.pivot(i, cand[np.argmax(np.abs(row[cand]))])
                piv1 += 1
            else:
                keep[i] = False
    basis2 = phase1.basis[keep].copy()
    cost2 = np.zeros(n_struct)
    cost2[:n] = c
    phase2 = _Tableau(A[keep], b[keep], cost2, basis2)
    status, piv2 = phase2.run(tol, max_iter)
    if status != "optimal":
        return LPResult(status, None, None, piv1 + piv2, float(infeas))
    x = np.zeros(n_struct)
    x[phase2.basis] = phase2.T[:-1, -1]
    x = x[:n]
    return LPResult("optimal", x, float(c @ x), piv1 + piv2, float(infeas))
