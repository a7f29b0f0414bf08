"""Collusion in multimarket contact under private monitoring: two-state strategies, values, certification, LP bounds."""
from .conditions import check_ev_condition, check_ntpd2_condition, check_ntpdM_conditions
from .equilibrium import EquilibriumReport, certify_ev, certify_ntpd
from .errors import (ConditionViolated, DimensionCapExceeded, InvalidParameters, NotAnEquilibrium,
                     SingularSystem, TransitionOutOfRange, TruncationError)
from .lp_bound import efficiency, feasible_at, upper_bound
from .simulator import SimConfig, SimResult, simulate
from .stage_game import GameParams
from .strategies import MarketStructure, make_ev, make_ntpd
from .value_solver import (ev_closed_forms, ntpd2_closed_forms, ntpdM_closed_forms,
                           solve_value_equations)

__version__ = "0.1.0"
