"""Public LP interface over the dense simplex kernel.

All variables must carry finite lower bounds and finite-or-infinite
upper bounds; the callers (bound computation, branch-and-bound node
relaxations, dependency sub-problems) always have boxed variables, so
UNBOUNDED cannot legitimately occur and is reported as an internal
inconsistency.

Tolerances are fixed package-wide: primal feasibility 1e-7, reduced-cost
optimality 1e-7 (asserted in the test suite).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _simplex

MIN, MAX = "min", "max"

FEAS_TOL = _simplex.FEAS_TOL
OPT_TOL = _simplex.OPT_TOL

_STATUS_NAMES = {
    _simplex.OPTIMAL: "OPTIMAL",
    _simplex.INFEASIBLE: "INFEASIBLE",
    _simplex.ITER_LIMIT: "ITER_LIMIT",
    _simplex.CUTOFF_STOP: "CUTOFF_STOP",
}


class LpInternalError(RuntimeError):
    """The solver reached a state that the bounded setup rules out."""


@dataclass
class LpProblem:
    """min/max  c.x  s.t.  A x <sense> b,  lb <= x <= ub.

    senses entries: -1 for <=, 0 for =, +1 for >=.  All lb finite.
    """
    sense: str
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        self.c = np.ascontiguousarray(self.c, dtype=np.float64)
        self.A = np.ascontiguousarray(self.A, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        self.senses = np.ascontiguousarray(self.senses, dtype=np.int8)
        self.lb = np.ascontiguousarray(self.lb, dtype=np.float64)
        self.ub = np.ascontiguousarray(self.ub, dtype=np.float64)
        if not np.all(np.isfinite(self.lb)):
            raise ValueError("every variable needs a finite lower bound")
        if np.any(self.ub < self.lb):
            raise ValueError("ub < lb")


@dataclass
class LpResult:
    status: str            # OPTIMAL | INFEASIBLE | ITER_LIMIT | CUTOFF_STOP
    objective: float
    x: np.ndarray
    iterations: int
    feasible: bool         # the returned x satisfies the constraints

    @property
    def optimal(self):
        return self.status == "OPTIMAL"


def solve_lp(problem: LpProblem, iter_cap: int = 20000, rule: str = "bland") -> LpResult:
    """Solve to optimality (or the iteration cap).

    `rule` selects the pivot rule: "bland" (default, anti-cycling) or
    "dantzig" (faster on most instances, cap-guarded).
    """
    return _run(problem, iter_cap, rule, False, 0.0)


def solve_lp_with_cutoff(problem: LpProblem, cutoff: float,
                         iter_cap: int = 20000, rule: str = "bland") -> LpResult:
    """Solve, stopping early once the objective provably crosses `cutoff`.

    For a MIN problem the solve stops as soon as a feasible point with
    objective < cutoff is reached (status CUTOFF_STOP); symmetrically
    for MAX.  The sign question "is the optimum >= cutoff?" is then
    resolved either by the early stop (no) or by optimality (compare the
    optimum against the cutoff).
    """
    return _run(problem, iter_cap, rule, True, cutoff)


def _run(problem, iter_cap, rule, cut_enabled, cut_value):
    neg = problem.sense == MAX
    c = -problem.c if neg else problem.c
    cut = -cut_value if neg else cut_value
    status, obj, x, iters, feasible = _simplex.simplex_core(
        problem.A, problem.b, problem.senses, problem.lb, problem.ub,
        np.ascontiguousarray(c, dtype=np.float64),
        iter_cap, rule == "bland", cut_enabled, cut,
    )
    if status == _simplex.NUMERIC_FAIL:
        raise LpInternalError("unbounded direction in a fully boxed problem")
    objective = -obj if neg else obj
    return LpResult(
        status=_STATUS_NAMES[status],
        objective=float(objective),
        x=x,
        iterations=int(iters),
        feasible=bool(feasible),
    )
