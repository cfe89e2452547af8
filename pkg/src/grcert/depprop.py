"""Cross-copy dependency discovery.

Works layer by layer over the two network copies.  Each entry (m, k)
relates the input-copy neuron z_{m,k} to a perturbed-copy partner
z^p_{m,kp} (kp == k except where the perturbation moves pixels):

  1. seeds from the perturbation at layer 0 (and, for brightness, the
     sign-derived relations at layer 1),
  2. a concrete-bound comparison: disjoint post-activation boxes decide
     the relation outright,
  3. propagation through the affine+ReLU structure from the previous
     row (sign-aware in the weights, partner-aware for geometric
     perturbations),
  4. guarded min/max sub-problems with a zero cutoff, run only when the
     bound boxes overlap in the one order that leaves the relation
     plausible; their budget is capped, and a capped solve simply emits
     no relation (this costs pruning power, never soundness).

Strictness bookkeeping: GT/LT records mean the concrete boxes are
disjoint; the model encoder realizes them as >=/<= rows with margin 0,
because any positive margin could cut genuinely feasible traces.
"""

from dataclasses import dataclass

import numpy as np

from . import bnb, mip
from .lp import MIN, MAX
from .perturb import EQ, GE, GT, LE, LT, NONE, seed_dependencies


@dataclass
class DependencyMatrix:
    """rows[m] maps neuron k -> (value_rel, bool_rel, partner)."""
    widths: list
    rows: list = None

    def __post_init__(self):
        if self.rows is None:
            self.rows = [dict() for _ in self.widths]

    def get(self, m, k):
        return self.rows[m].get(k)

    def set(self, m, k, value_rel, bool_rel, partner=None):
        self.rows[m][k] = (value_rel, bool_rel, k if partner is None else partner)

    def iter_entries(self):
        for m, row in enumerate(self.rows):
            for k in sorted(row):
                yield m, k, row[k]

    def count(self):
        return sum(len(r) for r in self.rows)

    def dump(self):
        lines = []
        for m, k, (vrel, brel, kp) in self.iter_entries():
            partner = "" if kp == k else f" partner={kp}"
            lines.append(f"layer {m} neuron {k}: value {vrel} bool {brel}{partner}")
        return "\n".join(lines) + "\n"


_TERM_FLIP = {EQ: EQ, GE: LE, GT: LT, LE: GE, LT: GT, NONE: NONE}


def _orient(rel, w):
    if rel == EQ:
        return EQ
    return rel if w > 0 else _TERM_FLIP[rel]


def _merge(rels):
    out = EQ
    for r in rels:
        if r in (GE, GT):
            r = GE
        elif r in (LE, LT):
            r = LE
        if r == EQ:
            continue
        if out == EQ:
            out = r
        elif out != r:
            return NONE
    return out


def propagate(net, dep: DependencyMatrix, m: int, k: int):
    """Lift row m-1 relations through neuron k's affine map and ReLU.

    Tries the same-index partner first, then searches for a perturbed
    neuron whose weight row matches under the previous row's partner
    map (this is what makes shifted convolution windows line up for
    translation-style perturbations).  Returns (value_rel, bool_rel,
    partner) or None.
    """
    W, bias, _relu = net.dense_layers()[m - 1]
    width = W.shape[0]
    row_prev = dep.rows[m - 1]
    support = np.flatnonzero(W[k]).tolist()
    pmap = {}
    for j in support:
        rec = row_prev.get(j)
        if rec is None or rec[0] == NONE:
            return None
        pmap[j] = (rec[2], rec[0])
    partners = {pj for pj, _ in pmap.values()}
    if len(partners) != len(support):
        return None  # partner map not injective on the support

    candidates = [k] + [kp for kp in range(width) if kp != k]
    for kp in candidates:
        sup_p = np.flatnonzero(W[kp])
        if sup_p.size != len(support):
            continue
        if set(sup_p.tolist()) != partners:
            continue
        ok = True
        rels = []
        for j in support:
            pj, rel = pmap[j]
            if W[kp, pj] != W[k, j]:
                ok = False
                break
            rels.append(_orient(rel, W[k, j]))
        if not ok:
            continue
        if bias[k] > bias[kp]:
            rels.append(GE)
        elif bias[k] < bias[kp]:
            rels.append(LE)
        merged = _merge(rels)
        if merged == NONE:
            continue
        return merged, merged, kp
    return None


@dataclass
class SubMipBudget:
    node_limit: int = 60
    timeout: float = 2.0
    lp_iter_cap: int = 20000


def pairwise_relation_via_mips(net, case, dep, bounds_in, bounds_p, m, k,
                               run_min, run_max, budget: SubMipBudget):
    """Lemma-style decision of z_{m,k} vs z^p_{m,k} via cutoff-0 solves.

    run_min resolves whether min(z - z^p) >= 0, run_max whether
    max(z - z^p) <= 0; both early-stop the moment the sign question is
    answered.  Budget exhaustion yields no relation.
    """
    min_ge0 = False
    max_le0 = False
    if run_min:
        # min(z - z^p) >= 0  <=>  max(z^p - z) <= 0
        model = mip.build_pair_problem(net, case, dep, bounds_in, bounds_p, m, k, MIN)
        res = bnb.solve_mip(model, timeout=budget.timeout, gap_tol=1e-9,
                            lp_iter_cap=budget.lp_iter_cap,
                            node_limit=budget.node_limit,
                            stop_bound_le=0.0, stop_incumbent_ge=1e-12)
        if res.status == bnb.PROVED_LE or (res.status == bnb.OPTIMAL and res.delta_u <= 0.0):
            min_ge0 = True
    if run_max:
        model = mip.build_pair_problem(net, case, dep, bounds_in, bounds_p, m, k, MAX)
        res = bnb.solve_mip(model, timeout=budget.timeout, gap_tol=1e-9,
                            lp_iter_cap=budget.lp_iter_cap,
                            node_limit=budget.node_limit,
                            stop_bound_le=0.0, stop_incumbent_ge=1e-12)
        if res.status == bnb.PROVED_LE or (res.status == bnb.OPTIMAL and res.delta_u <= 0.0):
            max_le0 = True
    if min_ge0 and max_le0:
        return (EQ, EQ, k)
    if min_ge0:
        return (GE, GE, k)
    if max_le0:
        return (LE, LE, k)
    return None


def compute_dependencies(net, case, bounds_in: mip.BoundsTable,
                         bounds_p: mip.BoundsTable, use_submips=True,
                         budget: SubMipBudget | None = None) -> DependencyMatrix:
    """Full dependency pass over all layers (see module docstring)."""
    budget = budget or SubMipBudget()
    widths = net.layer_widths()
    dep = DependencyMatrix(widths=widths)

    seeds = seed_dependencies(case, net)
    for k_in, rel, k_p in seeds.layer0:
        dep.set(0, k_in, rel, NONE, partner=k_p)
    for k, rel in seeds.layer1:
        dep.set(1, k, rel, rel)

    L = len(net.layers)
    dense = net.dense_layers()
    for m in range(1, L + 1):
        relu = dense[m - 1][2]

        def put(k, vrel, brel, partner=None):
            dep.set(m, k, vrel, brel if relu else NONE, partner=partner)

        for k in range(widths[m]):
            if dep.get(m, k) is not None:
                continue
            l_in = bounds_in.post_lo[m - 1][k]
            u_in = bounds_in.post_hi[m - 1][k]
            l_p = bounds_p.post_lo[m - 1][k]
            u_p = bounds_p.post_hi[m - 1][k]
            if l_in > u_p:
                put(k, GT, GE)
                continue
            if u_in < l_p:
                put(k, LT, LE)
                continue
            got = propagate(net, dep, m, k)
            if got is not None:
                put(k, got[0], got[1], partner=got[2])
                continue
            if not use_submips:
                continue
            run_min = l_p <= l_in <= u_p <= u_in
            run_max = l_in <= l_p <= u_in <= u_p
            if not (run_min or run_max):
                continue  # boxes nest strictly: the variables are incomparable
            got = pairwise_relation_via_mips(net, case, dep, bounds_in, bounds_p,
                                             m, k, run_min, run_max, budget)
            if got is not None:
                put(k, got[0], got[1], partner=got[2])
        if not dep.rows[m]:
            break
    return dep
