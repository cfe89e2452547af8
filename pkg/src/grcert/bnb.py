"""Best-first branch and bound over the boolean ReLU variables.

Maintains the anytime pair (delta_l, delta_u): delta_l is the best
exactly-replayed witness value (seeded from the attack cutoff), delta_u
the largest open-node relaxation bound.  Both are reported in
confidence space (the model's report_offset undoes the strictness
margin).  delta_l only ever increases, delta_u only ever decreases, and
delta_l <= delta_u is enforced against float noise, so progress records
are monotone by construction.

Warm-start hints drive one initial depth dive that can only contribute
an incumbent; the main search always starts from the unrestricted root,
so hints can never change the returned optimum, only the time to reach
it.  Models with a bilinear layer-0 coupling (contrast) additionally
branch on the perturbation factor interval, regenerating the envelope
rows per node.
"""

from dataclasses import dataclass, field
import heapq
import time

import numpy as np

from .lp import solve_lp

OPTIMAL = "OPTIMAL"
TIMEOUT = "TIMEOUT"
INFEASIBLE = "INFEASIBLE"
PROVED_LE = "PROVED_LE"   # early stop: bound fell to the target
PROVED_GE = "PROVED_GE"   # early stop: incumbent reached the target

GAP_TOL = 1e-6
INT_TOL = 1e-6
BILINEAR_TOL = 1e-6


@dataclass(order=True)
class BnbNode:
    sort_key: float
    order: int
    fixes: dict = field(compare=False)
    bound: float = field(compare=False, default=np.inf)
    relax_x: np.ndarray = field(compare=False, default=None)
    depth: int = field(compare=False, default=0)
    eps_lo: float = field(compare=False, default=np.nan)
    eps_hi: float = field(compare=False, default=np.nan)


@dataclass
class AnytimeState:
    delta_l: float
    delta_u: float
    incumbent: tuple | None = None
    assignment: object = None
    records: list = field(default_factory=list)
    t0: float = field(default_factory=time.monotonic)

    def ms(self):
        return (time.monotonic() - self.t0) * 1000.0

    def record(self):
        self.records.append((self.ms(), self.delta_l, self.delta_u))

    def update_lower(self, value, witness, assignment=None):
        value = min(value, self.delta_u)  # float-noise guard; see module doc
        if value > self.delta_l:
            self.delta_l = value
            self.incumbent = witness
            if assignment is not None:
                self.assignment = assignment.copy()
            self.record()
            return True
        return False

    def update_upper(self, value):
        if value < self.delta_u:
            self.delta_u = value
            self.record()


@dataclass
class MipSolution:
    status: str
    delta_l: float
    delta_u: float
    incumbent: tuple | None
    nodes: int
    wall_ms: float
    records: list
    assignment: object = None  # LP point of the accepted incumbent


def branch_select(model, x, int_tol=INT_TOL):
    """Most-fractional boolean of a relaxation point; ties break on the
    (layer, neuron, copy) order baked into model.bool_indices."""
    best, best_score = None, None
    for j in model.bool_indices:
        v = x[j]
        if min(v, 1.0 - v) <= int_tol:
            continue
        score = abs(v - 0.5)
        if best is None or score < best_score:
            best, best_score = j, score
    return best


def hint_fixes(model, hints):
    """Boolean fixings requested by a hint matrix pair, in tie-break order.

    Entries are 1/0/-1 (-1 means no hint).  Eliminated booleans are
    skipped: a hint is a starting point, never a constraint.
    """
    if hints is None:
        return {}
    H, Hp = hints
    fixes = {}
    for j in model.bool_indices:
        vid = model.var_ids[j]
        M = H if vid.copy == "in" else Hp
        if vid.layer - 1 < M.shape[0] and vid.neuron < M.shape[1]:
            v = int(M[vid.layer - 1, vid.neuron])
            if v in (0, 1):
                fixes[j] = v
    return fixes


def _node_lp(model, fixes, eps_lo, eps_hi, iter_cap, rule):
    kwargs = {}
    if model.bilinear:
        kwargs = dict(eps_lo=eps_lo, eps_hi=eps_hi)
    problem = model.node_problem(fixes, **kwargs)
    res = solve_lp(problem, iter_cap=iter_cap, rule=rule)
    if res.status == "ITER_LIMIT":
        res = solve_lp(problem, iter_cap=4 * iter_cap, rule="bland")
    return res


def _bilinear_violation(model, x):
    worst, worst_pair = 0.0, None
    if model.bilinear:
        e = x[model.eps_index]
        for wj, zj in model.bilinear:
            v = abs(x[wj] - e * x[zj])
            if v > worst:
                worst, worst_pair = v, (wj, zj)
    return worst, worst_pair


def solve_mip(model, timeout: float, hints=None, gap_tol=GAP_TOL,
              int_tol=INT_TOL, lp_iter_cap=20000, rule="dantzig",
              node_limit=None, stop_bound_le=None, stop_incumbent_ge=None,
              progress=None) -> MipSolution:
    """Maximize the model objective over integral boolean assignments.

    Returns OPTIMAL once delta_u - delta_l <= gap_tol, TIMEOUT when the
    wall budget or node budget runs out, INFEASIBLE when the tree is
    exhausted without any witness.  `progress`, when given, is called as
    progress(ms, delta_l, delta_u) on every bound change.
    """
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    t_deadline = time.monotonic() + timeout
    off = model.report_offset
    cutoff_init = model.cutoff if np.isfinite(model.cutoff) else -np.inf
    state = AnytimeState(delta_l=cutoff_init, delta_u=np.inf)

    def emit():
        if progress is not None and state.records:
            progress(*state.records[-1])

    c = model.objective_vector()
    obj_cap = float(np.sum(np.where(c > 0, c * model.ub, c * model.lb)))
    nodes_done = 0

    def finish(status):
        if status == OPTIMAL and state.delta_u > state.delta_l:
            state.delta_u = state.delta_l
            state.record()
            emit()
        return MipSolution(status, state.delta_l, state.delta_u, state.incumbent,
                           nodes_done, state.ms(), state.records, state.assignment)

    if model.trivially_infeasible:
        state.delta_l = max(cutoff_init, 0.0)
        state.delta_u = state.delta_l
        state.record()
        return finish(INFEASIBLE if not model.cutoff_genuine else OPTIMAL)

    eps0 = model.eps_interval if model.bilinear else (np.nan, np.nan)

    def try_incumbent(x):
        nonlocal nodes_done
        viol, _ = _bilinear_violation(model, x)
        if viol > BILINEAR_TOL * (1.0 + abs(x[model.eps_index]) if model.bilinear else 1.0):
            return False
        ev = model.evaluate_incumbent(x)
        if ev is None:
            return None
        value, witness = ev
        if state.update_lower(value, witness, assignment=x):
            emit()
        return True

    # Hint dive: seek an early incumbent, never prune.
    dive_fixes = hint_fixes(model, hints)
    if dive_fixes:
        fixes = dict(dive_fixes)
        for _ in range(len(model.bool_indices) + 1):
            if time.monotonic() > t_deadline:
                break
            res = _node_lp(model, fixes, *eps0, lp_iter_cap, rule)
            if not res.optimal:
                break
            j = branch_select(model, res.x, int_tol)
            if j is None:
                try_incumbent(res.x)
                break
            fixes[j] = int(round(res.x[j]))

    # Root.
    counter = 0
    res = _node_lp(model, {}, *eps0, lp_iter_cap, rule)
    if res.status == "INFEASIBLE":
        state.delta_l = max(cutoff_init, 0.0)
        state.delta_u = max(state.delta_l, 0.0)
        state.record()
        if model.cutoff_genuine:
            # A validated witness at the cutoff exists; the margin made the
            # model empty, so the optimum is the cutoff itself.
            state.delta_l = state.delta_u = model.cutoff
            state.record()
            return finish(OPTIMAL)
        return finish(INFEASIBLE)
    root_bound = (res.objective if res.optimal else obj_cap) + off
    heap = []
    heapq.heappush(heap, BnbNode(-root_bound, counter, {}, root_bound, res.x, 0, *eps0))
    state.update_upper(root_bound)
    state.record() if not state.records else None
    emit()

    while heap:
        if time.monotonic() > t_deadline:
            return finish(TIMEOUT)
        if node_limit is not None and nodes_done >= node_limit:
            return finish(TIMEOUT)
        node = heapq.heappop(heap)
        nodes_done += 1
        state.update_upper(node.bound)
        emit()
        if stop_bound_le is not None and state.delta_u <= stop_bound_le:
            return finish(PROVED_LE)
        if node.bound <= state.delta_l + 1e-12:
            continue
        if state.delta_u - state.delta_l <= gap_tol:
            return finish(OPTIMAL)

        x = node.relax_x
        j = branch_select(model, x, int_tol)
        if j is None:
            viol, pair = _bilinear_violation(model, x)
            scale = 1.0 + (abs(x[model.eps_index]) if model.bilinear else 0.0)
            if model.bilinear and viol > BILINEAR_TOL * scale:
                children = _split_eps(model, node, x)
            else:
                ok = try_incumbent(x)
                if stop_incumbent_ge is not None and state.delta_l >= stop_incumbent_ge:
                    return finish(PROVED_GE)
                continue
        else:
            lo_fix, hi_fix = dict(node.fixes), dict(node.fixes)
            lo_fix[j] = 0
            hi_fix[j] = 1
            children = [(lo_fix, node.eps_lo, node.eps_hi),
                        (hi_fix, node.eps_lo, node.eps_hi)]

        for fixes, elo, ehi in children:
            cres = _node_lp(model, fixes, elo, ehi, lp_iter_cap, rule)
            if cres.status == "INFEASIBLE":
                continue
            cbound = (cres.objective if cres.optimal else node.bound - off) + off
            cbound = min(cbound, node.bound)  # child can never beat its parent
            if cbound <= state.delta_l + 1e-12:
                continue
            counter += 1
            heapq.heappush(heap, BnbNode(-cbound, counter, fixes, cbound,
                                         cres.x, node.depth + 1, elo, ehi))
        if stop_incumbent_ge is not None and state.delta_l >= stop_incumbent_ge:
            return finish(PROVED_GE)

    # Tree exhausted.
    if state.incumbent is not None or model.cutoff_genuine:
        return finish(OPTIMAL)
    state.delta_l = state.delta_u = 0.0
    state.record()
    return finish(INFEASIBLE)


def _split_eps(model, node, x):
    lo, hi = node.eps_lo, node.eps_hi
    mid = float(np.clip(x[model.eps_index], lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)))
    return [(dict(node.fixes), lo, mid), (dict(node.fixes), mid, hi)]
