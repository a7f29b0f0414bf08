"""Upper bound on the R-state payoff of belief-free equilibria, by bisection over a feasibility LP.

For a candidate value ``v`` and a given P-state payoff ``V_P`` the LP asks for an
opponent mixed action ``alpha`` and continuation products ``w(a_j, w_j) = alpha(a_j) z(a_j, w_j)``
with ``V_P alpha <= w <= v alpha`` such that every own action vector earns at most ``v``
and the two prescribed action vectors earn exactly ``v``.

The opponent's signal distribution does not depend on the opponent's own action, so the
``w`` variables only enter through ``W(w_j) = sum_a w(a, w_j)``, and the band rows sum to
``V_P <= W <= v``. Any feasible ``W`` splits back as ``w = alpha * W``, so the solver works on
``(alpha, W)``: ``2 * 2**M`` variables instead of ``2**M + 4**M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionCapExceeded, InvalidParameters, NotAnEquilibrium
from .simplex import solve_lp
from .stage_game import GameParams, payoff_matrix, signal_matrix
from .strategies import MarketStructure

DEFAULT_CAP = 6
FULL_FORM_CAP = 4
BISECTION_TOL = 1e-6


def ntpd_prescriptions(structure: MarketStructure) -> tuple[int, int]:
    return (0, structure.mask_B)


@dataclass
class LPInstance:
    """The feasibility LP at a fixed candidate value ``v``."""

    params: GameParams
    M: int
    v: float
    V_P: float
    prescriptions: tuple[int, int]

    @property
    def n_alpha(self) -> int:
        return 1 << self.M

    @property
    def n_w(self) -> int:
        return 1 << (2 * self.M)

    @property
    def n_incentive_rows(self) -> int:
        return 1 << self.M

    @property
    def n_equality_rows(self) -> int:
        return len(set(self.prescriptions))

    @property
    def n_band_rows(self) -> int:
        return 2 * self.n_w

    n_simplex_rows = 1

    def _incentive_parts(self):
        d = self.params.delta
        return (1 - d) * payoff_matrix(self.params, self.M), d * signal_matrix(self.params, self.M)

    def full_form(self):
        """Literal LP over ``(alpha, w)`` as ``(A_ub, b_ub, A_eq, b_eq)``; ``w`` is indexed ``a_j * 2**M + w_j``."""
        if self.M > FULL_FORM_CAP:
            raise DimensionCapExceeded(f"full LP form is limited to M <= {FULL_FORM_CAP}")
        if self.V_P < 0:
            raise InvalidParameters("full LP form assumes V_P >= 0 so that w >= 0")
        n, nw = self.n_alpha, self.n_w
        G, O = self._incentive_parts()
        eq = set(self.prescriptions)
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for a_i in range(n):
            row = np.zeros(n + nw)
            row[:n] = G[a_i]
            row[n:] = np.tile(O[a_i], n)
            (eq_rows if a_i in eq else ub_rows).append(row)
            (eq_rhs if a_i in eq else ub_rhs).append(self.v)
        for a_j in range(n):
            for w_j in range(n):
                k = n + a_j * n + w_j
                lo = np.zeros(n + nw)
                lo[a_j], lo[k] = self.V_P, -1.0
                hi = np.zeros(n + nw)
                hi[a_j], hi[k] = -self.v, 1.0
                ub_rows += [lo, hi]
                ub_rhs += [0.0, 0.0]
        simplex_row = np.zeros(n + nw)
        simplex_row[:n] = 1.0
        eq_rows.append(simplex_row)
        eq_rhs.append(1.0)
        return np.array(ub_rows), np.array(ub_rhs), np.array(eq_rows), np.array(eq_rhs)

    def reduced_form(self):
        """Aggregated LP over ``(alpha, u)`` with ``u = W - V_P`` in ``[0, v - V_P]``."""
        n = self.n_alpha
        G, O = self._incentive_parts()
        d = self.params.delta
        rhs = self.v - d * self.V_P
        eq = set(self.prescriptions)
        inc = np.hstack([G, O])
        ub_idx = [a for a in range(n) if a not in eq]
        eq_idx = sorted(eq)
        bound_rows = np.hstack([np.zeros((n, n)), np.eye(n)])
        A_ub = np.vstack([inc[ub_idx], bound_rows])
        b_ub = np.concatenate([np.full(len(ub_idx), rhs), np.full(n, self.v - self.V_P)])
        simplex_row = np.concatenate([np.ones(n), np.zeros(n)])
        A_eq = np.vstack([inc[eq_idx], simplex_row])
        b_eq = np.concatenate([np.full(len(eq_idx), rhs), [1.0]])
        return A_ub, b_ub, A_eq, b_eq


def build_instance(v, V_P, params, structure, prescriptions=None) -> LPInstance:
    if prescriptions is None:
        prescriptions = ntpd_prescriptions(structure)
    full = structure.full
    if not all(0 <= a <= full for a in prescriptions):
        raise InvalidParameters(f"prescriptions {prescriptions} outside {structure.M} markets")
    return LPInstance(params, structure.M, float(v), float(V_P), tuple(prescriptions))


def _check_cap(structure, cap):
    if structure.M > cap:
        raise DimensionCapExceeded(f"M={structure.M} exceeds the LP dimension cap {cap}")


def feasible_at(v, V_P, params, structure, prescriptions=None, cap: int = DEFAULT_CAP,
                form: str = "reduced", stats: Optional[dict] = None) -> bool:
    _check_cap(structure, cap)
    if v < V_P:
        return False
    inst = build_instance(v, V_P, params, structure, prescriptions)
    if form == "reduced":
        A_ub, b_ub, A_eq, b_eq = inst.reduced_form()
    elif form == "full":
        A_ub, b_ub, A_eq, b_eq = inst.full_form()
    else:
        raise InvalidParameters(f"unknown LP form {form!r}")
    res = solve_lp(np.zeros(A_ub.shape[1]), A_ub, b_ub, A_eq, b_eq)
    if stats is not None:
        stats["solves"] = stats.get("solves", 0) + 1
        stats["pivots"] = stats.get("pivots", 0) + res.pivots
        stats["rows"] = A_ub.shape[0] + A_eq.shape[0]
        stats["cols"] = A_ub.shape[1]
    if res.status == "iteration_limit":
        raise RuntimeError("simplex hit its iteration limit")
    return res.status == "optimal"


@dataclass
class BoundResult:
    v_star: float
    iterations: int
    lp_stats: dict = field(default_factory=dict)


def upper_bound(V_P, params, structure, prescriptions=None, lower: Optional[float] = None,
                tol: float = BISECTION_TOL, cap: int = DEFAULT_CAP) -> BoundResult:
    """Largest ``v`` for which the LP is feasible, to within ``tol``.

    ``lower`` must be a feasible value (an equilibrium payoff of the class works);
    when omitted and the prescriptions are NTPD's, the NTPD payoff is used. The upper
    bracket ``M (1 + x)`` exceeds every feasible payoff.
    """
    _check_cap(structure, cap)
    if lower is None:
        if prescriptions not in (None, ntpd_prescriptions(structure)):
            raise InvalidParameters("a feasible lower bracket is required for custom prescriptions")
        from .equilibrium import certify_ntpd

        report = certify_ntpd(params, structure)
        if not report.certified:
            raise NotAnEquilibrium("NTPD is not an equilibrium here; pass an explicit lower bracket")
        lower = report.closed_forms.V_R
    upper = structure.M * (1 + params.x)
    stats: dict = {}
    if not feasible_at(lower, V_P, params, structure, prescriptions, cap, stats=stats):
        raise InvalidParameters(f"lower bracket {lower} is infeasible")
    if feasible_at(upper, V_P, params, structure, prescriptions, cap, stats=stats):
        raise InvalidParameters(f"upper bracket {upper} is feasible")
    lo, hi = lower, upper
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible_at(mid, V_P, params, structure, prescriptions, cap, stats=stats):
            lo = mid
        else:
            hi = mid
        iterations += 1
    return BoundResult(lo, iterations, stats)


def ntpd_witness(params: GameParams, structure: MarketStructure, V_R: float, V_P: float, strategy) -> tuple[np.ndarray, np.ndarray]:
    """NTPD's own play as a point of the LP at ``v = V_R``.

    The opponent sits at R, so ``alpha`` is a point mass on its R action, and the
    continuation after signal ``w_j`` mixes ``V_R`` and ``V_P`` by the switch probability.
    Returns ``(alpha, W)``; the full-form products are ``w = outer(alpha, W)``.
    """
    n = 1 << structure.M
    alpha = np.zeros(n)
    alpha[strategy.actions[0]] = 1.0
    t = strategy.transit_table[0]
    return alpha, V_R * (1 - t) + V_P * t


def efficiency(params: GameParams, structure: MarketStructure, cap: int = DEFAULT_CAP) -> tuple[float, BoundResult]:
    """NTPD's R-state payoff divided by the LP upper bound; raises ``NotAnEquilibrium`` off-equilibrium."""
    from .equilibrium import certify_ntpd

    _check_cap(structure, cap)
    report = certify_ntpd(params, structure)
    if not report.certified:
        raise NotAnEquilibrium(f"NTPD is not an equilibrium at p={params.p}, delta={params.delta}")
    cf = report.closed_forms
    bound = upper_bound(cf.V_P, params, structure, lower=cf.V_R, cap=cap)
    return cf.V_R / bound.v_star, bound
