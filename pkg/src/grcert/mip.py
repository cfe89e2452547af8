"""Two-copy mixed-integer encoding of the non-robustness maximization.

One model per target class: both network copies with big-M ReLU rows
over concrete per-neuron bounds, the layer-0 coupling of the copies,
cross-copy dependency rows, the output margin constraints, the
attack-derived cutoff, and the single maximization objective.

Strict inequalities of the formulation are realized as non-strict rows
with a margin gamma (default 1e-6) on the output/cutoff families.
Cross-copy dependency relations that are strict are realized with
margin 0: a positive margin there could cut genuinely feasible traces,
while dropping strictness only forfeits a measure-zero sliver of
pruning (see notes in depprop).

Reported objective values are in "confidence space": the model's delta
variable maximizes (confidence - gamma), and solvers add gamma back, so
a reported value is the exact class confidence of a witness.
"""

from dataclasses import dataclass

import numpy as np

from . import perturb
from .lp import LpProblem, solve_lp, MIN, MAX
from .network import Network, forward, class_confidence
from .perturb import PerturbationCase, PhiIn, EQ, GE, GT, LE, LT

GAMMA = 1e-6          # strictness margin for > realized as >=
BOUND_PAD = 1e-7      # padding applied to LP-computed concrete bounds

COPY_IN = "in"
COPY_PERT = "pert"

PRE, POST, BOOL, EPS, DELTA = "pre", "post", "bool", "eps", "delta"


class EncodingError(RuntimeError):
    pass


class InfeasibleInputError(ValueError):
    """The layer-0 constraints admit no point at all."""


@dataclass(frozen=True, order=True)
class VarId:
    # Field order gives the tie-break ordering (layer, neuron, copy, kind).
    layer: int
    neuron: int
    copy: str
    kind: str

    def __repr__(self):
        if self.kind in (EPS, DELTA):
            return self.kind
        return f"{self.kind}[{self.copy},{self.layer},{self.neuron}]"


@dataclass(frozen=True)
class LinConstraint:
    terms: tuple          # ((var_index, coef), ...)
    relation: str         # "<=", "=", ">="
    rhs: float
    tag: str = ""


@dataclass
class BoundsTable:
    """Concrete bounds for one network copy.

    input_lo/hi bound layer 0; pre/post lists hold per-layer arrays for
    layers 1..L.  Post bounds on ReLU layers are clamped at zero.
    """
    input_lo: np.ndarray
    input_hi: np.ndarray
    pre_lo: list
    pre_hi: list
    post_lo: list
    post_hi: list
    lp_tightened: int = 0
    lp_fallbacks: int = 0

    def stability(self, m, k):
        """'active', 'inactive' or 'unstable' for ReLU neuron k of layer m."""
        if self.pre_hi[m - 1][k] <= 0.0:
            return "inactive"
        if self.pre_lo[m - 1][k] >= 0.0:
            return "active"
        return "unstable"


def compute_concrete_bounds(net: Network, input_lo, input_hi,
                            mode: str = "lp", lp_iter_cap: int = 4000,
                            rule: str = "dantzig") -> BoundsTable:
    """Layer-by-layer pre-activation bounds for one copy.

    `mode` is "lp" (per-neuron LPs over the relaxed encoding of the
    preceding layers, falling back to interval arithmetic when the
    iteration budget runs out) or "interval" (interval arithmetic only;
    looser but sound).  Both directions are padded outward by a small
    epsilon so downstream big-M rows stay valid under float error.
    """
    input_lo = np.asarray(input_lo, dtype=np.float64)
    input_hi = np.asarray(input_hi, dtype=np.float64)
    if np.any(input_lo > input_hi):
        raise InfeasibleInputError("layer-0 box is empty")
    dense = net.dense_layers()
    table = BoundsTable(input_lo, input_hi, [], [], [], [])

    lo_prev, hi_prev = input_lo, input_hi
    for m, (W, bias, relu) in enumerate(dense, start=1):
        Wp = np.maximum(W, 0.0)
        Wn = np.minimum(W, 0.0)
        pre_lo = bias + Wp @ lo_prev + Wn @ hi_prev
        pre_hi = bias + Wp @ hi_prev + Wn @ lo_prev
        if mode == "lp" and m > 1:
            _tighten_layer_lp(net, table, m, pre_lo, pre_hi, lp_iter_cap, rule)
        pre_lo = pre_lo - BOUND_PAD * (1.0 + np.abs(pre_lo))
        pre_hi = pre_hi + BOUND_PAD * (1.0 + np.abs(pre_hi))
        table.pre_lo.append(pre_lo)
        table.pre_hi.append(pre_hi)
        if relu:
            table.post_lo.append(np.maximum(pre_lo, 0.0))
            table.post_hi.append(np.maximum(pre_hi, 0.0))
        else:
            table.post_lo.append(pre_lo.copy())
            table.post_hi.append(pre_hi.copy())
        lo_prev, hi_prev = table.post_lo[-1], table.post_hi[-1]
    return table


def _tighten_layer_lp(net, table, m, pre_lo, pre_hi, iter_cap, rule):
    """Replace interval bounds of layer m with LP bounds where the budget
    allows.  The LP ranges over the already-encoded layers 1..m-1 of the
    same copy (booleans relaxed), so its optima are valid outer bounds."""
    lpdat = _prefix_relaxation(net, table, m - 1)
    if lpdat is None:
        return
    A, b, senses, lb, ub, prev_slice = lpdat
    W, bias, _ = net.dense_layers()[m - 1]
    n = lb.size
    for k in range(W.shape[0]):
        c = np.zeros(n)
        c[prev_slice] = W[k]
        for sense, store, ivl in ((MIN, table.pre_lo, pre_lo), (MAX, table.pre_hi, pre_hi)):
            res = solve_lp(LpProblem(sense, c, A, b, senses, lb, ub),
                           iter_cap=iter_cap, rule=rule)
            if res.optimal:
                v = res.objective + bias[k]
                # LP bounds are relaxations: never looser than interval.
                ivl[k] = max(ivl[k], v) if sense == MIN else min(ivl[k], v)
                table.lp_tightened += 1
            else:
                table.lp_fallbacks += 1


def _prefix_relaxation(net, table, upto):
    """Dense relaxed encoding of layers 1..upto of one copy.

    Variables: [z_0, z_1, a_1(unstable), z_2, ...].  Pre-activations are
    substituted away; returns (A, b, senses, lb, ub, slice_of_last_z).
    """
    widths = net.layer_widths()
    dense = net.dense_layers()
    idx0 = 0
    n = widths[0]
    zs = [slice(0, n)]
    a_slices = []
    unstables = []
    for m in range(1, upto + 1):
        uns = [k for k in range(widths[m]) if dense[m - 1][2]
               and table.stability(m, k) == "unstable"]
        unstables.append(uns)
        zs.append(slice(n, n + widths[m]))
        n += widths[m]
        a_slices.append(slice(n, n + len(uns)))
        n += len(uns)
    lb = np.zeros(n)
    ub = np.zeros(n)
    lb[zs[0]], ub[zs[0]] = table.input_lo, table.input_hi
    rows_A, rows_b, rows_s = [], [], []

    def row(terms, rel, rhs):
        r = np.zeros(n)
        for j, coef in terms:
            r[j] += coef
        rows_A.append(r)
        rows_b.append(rhs)
        rows_s.append({"<=": -1, "=": 0, ">=": 1}[rel])

    for m in range(1, upto + 1):
        W, bias, relu = dense[m - 1]
        z_prev, z_cur = zs[m - 1], zs[m]
        lb[z_cur] = table.post_lo[m - 1]
        ub[z_cur] = table.post_hi[m - 1]
        if a_slices[m - 1].stop > a_slices[m - 1].start:
            lb[a_slices[m - 1]] = 0.0
            ub[a_slices[m - 1]] = 1.0
        a_pos = {k: a_slices[m - 1].start + i for i, k in enumerate(unstables[m - 1])}
        for k in range(widths[m]):
            wrow = [(z_prev.start + j, -W[k, j]) for j in range(widths[m - 1]) if W[k, j] != 0.0]
            zj = z_cur.start + k
            if not relu:
                row([(zj, 1.0)] + wrow, "=", bias[k])
                continue
            st = table.stability(m, k)
            if st == "inactive":
                continue  # z fixed to 0 by its bounds
            if st == "active":
                row([(zj, 1.0)] + wrow, "=", bias[k])
                continue
            l_, u_ = table.pre_lo[m - 1][k], table.pre_hi[m - 1][k]
            aj = a_pos[k]
            row([(zj, 1.0)] + wrow, ">=", bias[k])                   # z >= zhat
            row([(zj, 1.0), (aj, -u_)], "<=", 0.0)                   # z <= u a
            row([(zj, 1.0)] + wrow + [(aj, -l_)], "<=", bias[k] - l_)  # z <= zhat - l(1-a)
    if not rows_A:
        A = np.zeros((0, n))
        b = np.zeros(0)
        senses = np.zeros(0, dtype=np.int8)
    else:
        A = np.vstack(rows_A)
        b = np.array(rows_b)
        senses = np.array(rows_s, dtype=np.int8)
    return A, b, senses, lb, ub, zs[upto]


# ---------------------------------------------------------------------------
# Model assembly
# ---------------------------------------------------------------------------

@dataclass
class MipModel:
    var_ids: list
    var_index: dict
    lb: np.ndarray
    ub: np.ndarray
    rows: list                    # LinConstraint, static part
    objective: tuple              # ((var_index, coef), ...), sense MAX
    bool_indices: list            # indices of boolean variables, tie-break order
    bilinear: tuple               # ((w_index, z_index), ...) w = eps * z
    eps_index: int | None
    eps_interval: tuple | None
    delta_index: int | None
    cutoff: float
    cutoff_genuine: bool
    hints: tuple | None           # (H, Hp) in {1,0,-1=no hint}, or None
    report_offset: float          # added to solver bounds when reporting
    input_indices: np.ndarray
    pert_input_indices: np.ndarray | None
    case: PerturbationCase | None
    net: Network
    trivially_infeasible: bool = False
    meta: str = ""
    _compiled: tuple | None = None

    @property
    def n_vars(self):
        return self.lb.size

    def compiled(self):
        """Dense (A, b, senses) of the static rows, built once."""
        if self._compiled is None:
            n = self.n_vars
            A = np.zeros((len(self.rows), n))
            b = np.zeros(len(self.rows))
            senses = np.zeros(len(self.rows), dtype=np.int8)
            for i, rw in enumerate(self.rows):
                for j, coef in rw.terms:
                    A[i, j] += coef
                b[i] = rw.rhs
                senses[i] = {"<=": -1, "=": 0, ">=": 1}[rw.relation]
            self._compiled = (A, b, senses)
        return self._compiled

    def objective_vector(self):
        c = np.zeros(self.n_vars)
        for j, coef in self.objective:
            c[j] += coef
        return c

    def mccormick_rows(self, eps_lo, eps_hi):
        """Envelope rows of every bilinear pair for the given eps interval."""
        if not self.bilinear:
            return None
        n = self.n_vars
        e = self.eps_index
        A = np.zeros((4 * len(self.bilinear), n))
        b = np.zeros(4 * len(self.bilinear))
        senses = np.zeros(4 * len(self.bilinear), dtype=np.int8)
        for t, (wj, zj) in enumerate(self.bilinear):
            zl, zu = self.lb[zj], self.ub[zj]
            r = 4 * t
            # w >= eps_lo*z + zl*eps - eps_lo*zl
            A[r, wj], A[r, zj], A[r, e] = 1.0, -eps_lo, -zl
            b[r], senses[r] = -eps_lo * zl, 1
            # w >= eps_hi*z + zu*eps - eps_hi*zu
            A[r + 1, wj], A[r + 1, zj], A[r + 1, e] = 1.0, -eps_hi, -zu
            b[r + 1], senses[r + 1] = -eps_hi * zu, 1
            # w <= eps_lo*z + zu*eps - eps_lo*zu
            A[r + 2, wj], A[r + 2, zj], A[r + 2, e] = 1.0, -eps_lo, -zu
            b[r + 2], senses[r + 2] = -eps_lo * zu, -1
            # w <= eps_hi*z + zl*eps - eps_hi*zl
            A[r + 3, wj], A[r + 3, zj], A[r + 3, e] = 1.0, -eps_hi, -zl
            b[r + 3], senses[r + 3] = -eps_hi * zl, -1
        return A, b, senses

    def evaluate_incumbent(self, x):
        """Replay an integral assignment as an exact witness.

        Returns (value, witness) where value is the exact objective in
        report space, or None when the assignment does not replay to a
        genuine witness (strictness lost to solver tolerance)."""
        raise NotImplementedError

    def node_problem(self, fixes=None, eps_lo=None, eps_hi=None):
        """LpProblem of the relaxation with boolean fixes and, for
        bilinear models, a sub-interval of eps with fresh envelopes."""
        A, b, senses = self.compiled()
        lb = self.lb.copy()
        ub = self.ub.copy()
        if fixes:
            for j, v in fixes.items():
                lb[j] = ub[j] = float(v)
        if self.bilinear:
            elo = self.eps_interval[0] if eps_lo is None else eps_lo
            ehi = self.eps_interval[1] if eps_hi is None else eps_hi
            lb[self.eps_index] = max(lb[self.eps_index], elo)
            ub[self.eps_index] = min(ub[self.eps_index], ehi)
            mc = self.mccormick_rows(elo, ehi)
            A = np.vstack([A, mc[0]])
            b = np.concatenate([b, mc[1]])
            senses = np.concatenate([senses, mc[2]])
            # Perturbed inputs cannot exceed the case's largest factor.
            for wj, zj in self.bilinear:
                ub[wj] = min(ub[wj], ehi * self.ub[zj])
        return LpProblem(MAX, self.objective_vector(), A, b, senses, lb, ub)


class _Builder:
    def __init__(self, net, bounds_in, bounds_p=None, max_layer=None,
                 keep_stable_booleans=False):
        self.net = net
        self.widths = net.layer_widths()
        self.dense = net.dense_layers()
        self.L = max_layer if max_layer is not None else len(net.layers)
        self.bounds = {COPY_IN: bounds_in, COPY_PERT: bounds_p}
        self.keep_stable_booleans = keep_stable_booleans
        self.var_ids = []
        self.var_index = {}
        self.lb = []
        self.ub = []
        self.rows = []
        self.bool_indices = []

    def add_var(self, vid, lo, hi):
        if vid in self.var_index:
            raise EncodingError(f"duplicate variable {vid}")
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise EncodingError(f"missing concrete bounds for {vid}")
        j = len(self.var_ids)
        self.var_ids.append(vid)
        self.var_index[vid] = j
        self.lb.append(float(lo))
        self.ub.append(float(hi))
        return j

    def idx(self, vid):
        return self.var_index[vid]

    def row(self, terms, rel, rhs, tag=""):
        self.rows.append(LinConstraint(tuple(terms), rel, float(rhs), tag))

    def bound_fix(self, j, lo=None, hi=None):
        if lo is not None:
            self.lb[j] = max(self.lb[j], lo)
        if hi is not None:
            self.ub[j] = min(self.ub[j], hi)

    def add_copy(self, copy):
        """Variables and constraints of one network copy up to layer L."""
        table = self.bounds[copy]
        n0 = self.widths[0]
        for k in range(n0):
            self.add_var(VarId(0, k, copy, POST), table.input_lo[k], table.input_hi[k])
        for m in range(1, self.L + 1):
            W, bias, relu = self.dense[m - 1]
            pl, ph = table.pre_lo[m - 1], table.pre_hi[m - 1]
            for k in range(self.widths[m]):
                pre_j = self.add_var(VarId(m, k, copy, PRE), pl[k], ph[k])
                terms = [(pre_j, 1.0)]
                for j in range(self.widths[m - 1]):
                    if W[k, j] != 0.0:
                        terms.append((self.idx(VarId(m - 1, j, copy, POST)), -W[k, j]))
                self.row(terms, "=", bias[k], tag="affine")
                if relu:
                    encode_relu(self, copy, m, k, pl[k], ph[k],
                                force_boolean=self.keep_stable_booleans)
                else:
                    post_j = self.add_var(VarId(m, k, copy, POST),
                                          table.post_lo[m - 1][k], table.post_hi[m - 1][k])
                    self.row([(post_j, 1.0), (pre_j, -1.0)], "=", 0.0, tag="linear")

    def post(self, copy, m, k):
        return self.idx(VarId(m, k, copy, POST))

    def bool_var(self, copy, m, k):
        return self.var_index.get(VarId(m, k, copy, BOOL))

    def stability(self, copy, m, k):
        return self.bounds[copy].stability(m, k)


def encode_relu(builder: _Builder, copy, m, k, lo, hi, force_boolean=False):
    """Big-M ReLU rows for one neuron given its pre-activation bounds.

    Unstable neurons get a boolean and four rows; sign-stable neurons
    are linearized and get no boolean (force_boolean keeps the boolean
    anyway, which the tests use to show the elimination is lossless).
    Returns the encoding kind.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise EncodingError(f"bad bounds [{lo},{hi}] for relu ({copy},{m},{k})")
    pre_j = builder.idx(VarId(m, k, copy, PRE))
    if hi <= 0.0 and not force_boolean:
        builder.add_var(VarId(m, k, copy, POST), 0.0, 0.0)
        return "inactive"
    if lo >= 0.0 and not force_boolean:
        post_j = builder.add_var(VarId(m, k, copy, POST), max(lo, 0.0), hi)
        builder.row([(post_j, 1.0), (pre_j, -1.0)], "=", 0.0, tag="relu")
        return "active"
    post_j = builder.add_var(VarId(m, k, copy, POST), max(lo, 0.0), max(hi, 0.0))
    a_j = builder.add_var(VarId(m, k, copy, BOOL), 0.0, 1.0)
    builder.bool_indices.append(a_j)
    builder.row([(post_j, 1.0)], ">=", 0.0, tag="relu")
    builder.row([(post_j, 1.0), (pre_j, -1.0)], ">=", 0.0, tag="relu")
    builder.row([(post_j, 1.0), (a_j, -hi)], "<=", 0.0, tag="relu")
    builder.row([(post_j, 1.0), (pre_j, -1.0), (a_j, -lo)], "<=", -lo, tag="relu")
    return "unstable"


def _emit_phi_in(builder: _Builder, phi: PhiIn):
    """Layer-0 coupling rows; bilinear pairs are returned for later
    envelope generation."""
    eps_j = None
    if phi.eps_interval is not None:
        eps_j = builder.add_var(VarId(-1, 0, "", EPS), *phi.eps_interval)
    for k, srcs, ecoef, const in phi.eq_rows:
        pj = builder.post(COPY_PERT, 0, k)
        if not srcs and ecoef == 0.0:
            # Fixed entry: the bound box already pins it.
            builder.bound_fix(pj, lo=const, hi=const)
            continue
        terms = [(pj, 1.0)]
        for s, coef in srcs:
            terms.append((builder.post(COPY_IN, 0, s), -coef))
        if ecoef != 0.0:
            terms.append((eps_j, -ecoef))
        builder.row(terms, "=", const, tag="phi_in")
    for k, s, lo, hi in phi.band_rows:
        pj = builder.post(COPY_PERT, 0, k)
        sj = builder.post(COPY_IN, 0, s)
        builder.row([(pj, 1.0), (sj, -1.0)], ">=", lo, tag="phi_in")
        builder.row([(pj, 1.0), (sj, -1.0)], "<=", hi, tag="phi_in")
    bilinear = []
    for k, s in phi.bilinear:
        bilinear.append((builder.post(COPY_PERT, 0, k), builder.post(COPY_IN, 0, s)))
    return eps_j, tuple(bilinear)


def _emit_dependencies(builder: _Builder, dep, max_layer):
    """Cross-copy value and boolean rows for decided entries, layers >= 1."""
    if dep is None:
        return
    for m, k, rec in dep.iter_entries():
        if m < 1 or m > max_layer:
            continue
        vrel, brel, kp = rec
        zi = builder.post(COPY_IN, m, k)
        zp = builder.post(COPY_PERT, m, kp)
        if vrel in (EQ, GE, GT, LE, LT):
            rel = {"EQ": "=", "GE": ">=", "GT": ">=", "LE": "<=", "LT": "<="}[vrel]
            builder.row([(zi, 1.0), (zp, -1.0)], rel, 0.0, tag="dep")
        if brel == "NONE" or not builder.dense[m - 1][2]:
            continue
        ai = builder.bool_var(COPY_IN, m, k)
        ap = builder.bool_var(COPY_PERT, m, kp)
        if ai is not None and ap is not None:
            rel = {"EQ": "=", "GE": ">=", "LE": "<="}[brel]
            builder.row([(ai, 1.0), (ap, -1.0)], rel, 0.0, tag="dep")
        elif ai is None and ap is not None:
            # Input-copy boolean got eliminated: substitute its constant.
            const = 1.0 if builder.stability(COPY_IN, m, k) == "active" else 0.0
            if brel in (EQ, LE) and const == 0.0:
                builder.bound_fix(ap, hi=0.0)      # a^p <= 0
            if brel == EQ and const == 1.0:
                builder.bound_fix(ap, lo=1.0)
        elif ai is not None and ap is None:
            const = 1.0 if builder.stability(COPY_PERT, m, kp) == "active" else 0.0
            if brel in (EQ, GE) and const == 1.0:
                builder.bound_fix(ai, lo=1.0)      # a >= 1
            if brel == EQ and const == 0.0:
                builder.bound_fix(ai, hi=0.0)


class _DualModel(MipModel):
    c_prime: int = 0
    c_t: int = 0

    def evaluate_incumbent(self, x):
        net, case = self.net, self.case
        x0 = np.clip(x[self.input_indices], 0.0, 1.0)
        xp = _witness_pert(self, x, x0)
        conf_in = class_confidence(forward(net, x0).scores, self.c_prime)
        conf_p = class_confidence(forward(net, xp).scores, self.c_t)
        if conf_p <= 0.0:
            return None
        return conf_in, (x0, xp)


def _witness_pert(model, x, x0):
    """Exact perturbed example of the witness, from the assignment."""
    case = model.case
    k = case.kind
    if k in ("brightness", "contrast"):
        lo, hi = case.eps_range
        e = float(np.clip(x[model.eps_index], lo, hi))
        return x0 + e if k == "brightness" else e * x0
    if k in ("patch", "linf"):
        d = x[model.pert_input_indices] - x[model.input_indices]
        lim = case.eps_limit
        d = np.clip(d, -lim, lim)
        if k == "patch":
            mask = np.zeros(case.n_inputs, dtype=bool)
            mask[perturb.square_indices(case.shape, case.square)] = True
            d = np.where(mask, d, 0.0)
        return x0 + d
    return perturb.case_apply(case, x0, clip=False)


def build_problem(net: Network, c_prime: int, c_t: int, case: PerturbationCase,
                  dep, delta_ha: float, hints, bounds_in: BoundsTable,
                  bounds_p: BoundsTable, gamma: float = GAMMA,
                  keep_stable_booleans: bool = False) -> MipModel:
    """The per-target maximization model (see module docstring)."""
    if c_t == c_prime:
        raise ValueError("target class equals the protected class")
    c = net.num_classes
    if not (0 <= c_prime < c and 0 <= c_t < c):
        raise IndexError("class out of range")
    L = len(net.layers)
    b = _Builder(net, bounds_in, bounds_p, keep_stable_booleans=keep_stable_booleans)
    b.add_copy(COPY_IN)
    b.add_copy(COPY_PERT)
    phi = perturb.emit_phi_in(case)
    eps_j, bilinear = _emit_phi_in(b, phi)
    _emit_dependencies(b, dep, L)

    out_lo = bounds_in.post_lo[L - 1]
    out_hi = bounds_in.post_hi[L - 1]
    delta_ub = min(out_hi[c_prime] - out_lo[cc] for cc in range(c) if cc != c_prime)
    trivially_infeasible = delta_ub < 0.0
    delta_j = b.add_var(VarId(L + 1, 0, "", DELTA), 0.0, max(delta_ub, 0.0))

    for cc in range(c):
        if cc != c_prime:
            b.row([(b.post(COPY_IN, L, c_prime), 1.0),
                   (b.post(COPY_IN, L, cc), -1.0), (delta_j, -1.0)],
                  ">=", gamma, tag="output")
        if cc != c_t:
            b.row([(b.post(COPY_PERT, L, c_t), 1.0),
                   (b.post(COPY_PERT, L, cc), -1.0)],
                  ">=", gamma, tag="output")
    b.row([(delta_j, 1.0)], ">=", delta_ha - gamma, tag="cutoff")

    model = _DualModel(
        var_ids=b.var_ids, var_index=b.var_index,
        lb=np.array(b.lb), ub=np.array(b.ub), rows=b.rows,
        objective=((delta_j, 1.0),),
        bool_indices=sorted(b.bool_indices, key=lambda j: b.var_ids[j]),
        bilinear=bilinear, eps_index=eps_j, eps_interval=phi.eps_interval,
        delta_index=delta_j, cutoff=delta_ha, cutoff_genuine=delta_ha > 0.0,
        hints=hints, report_offset=gamma,
        input_indices=np.array([b.post(COPY_IN, 0, k) for k in range(net.input_size)]),
        pert_input_indices=np.array([b.post(COPY_PERT, 0, k) for k in range(net.input_size)]),
        case=case, net=net, trivially_infeasible=trivially_infeasible,
        meta=f"target={c_t} case={case.label()}",
    )
    model.c_prime = c_prime
    model.c_t = c_t
    return model


class _ConfidenceModel(MipModel):
    c_prime: int = 0

    def evaluate_incumbent(self, x):
        x0 = np.clip(x[self.input_indices], 0.0, 1.0)
        conf = class_confidence(forward(self.net, x0).scores, self.c_prime)
        return conf, (x0, None)


def build_confidence_problem(net: Network, c_prime: int,
                             bounds_in: BoundsTable) -> MipModel:
    """Single-copy model of the maximal class confidence over the domain."""
    c = net.num_classes
    L = len(net.layers)
    b = _Builder(net, bounds_in)
    b.add_copy(COPY_IN)
    out_lo = bounds_in.post_lo[L - 1]
    out_hi = bounds_in.post_hi[L - 1]
    t_lo = min(out_lo[c_prime] - out_hi[cc] for cc in range(c) if cc != c_prime)
    t_hi = min(out_hi[c_prime] - out_lo[cc] for cc in range(c) if cc != c_prime)
    t_j = b.add_var(VarId(L + 1, 0, "", DELTA), t_lo, max(t_lo, t_hi))
    for cc in range(c):
        if cc != c_prime:
            b.row([(b.post(COPY_IN, L, c_prime), 1.0),
                   (b.post(COPY_IN, L, cc), -1.0), (t_j, -1.0)],
                  ">=", 0.0, tag="output")
    model = _ConfidenceModel(
        var_ids=b.var_ids, var_index=b.var_index,
        lb=np.array(b.lb), ub=np.array(b.ub), rows=b.rows,
        objective=((t_j, 1.0),),
        bool_indices=sorted(b.bool_indices, key=lambda j: b.var_ids[j]),
        bilinear=(), eps_index=None, eps_interval=None,
        delta_index=t_j, cutoff=-np.inf, cutoff_genuine=False,
        hints=None, report_offset=0.0,
        input_indices=np.array([b.post(COPY_IN, 0, k) for k in range(net.input_size)]),
        pert_input_indices=None, case=None, net=net,
        meta=f"confidence c'={c_prime}",
    )
    model.c_prime = c_prime
    return model


class _PairModel(MipModel):
    pair: tuple = (0, 0, 0)  # (m, k, kp)

    def evaluate_incumbent(self, x):
        m, k, kp = self.pair
        x0 = np.clip(x[self.input_indices], 0.0, 1.0)
        xp = _witness_pert(self, x, x0)
        t_in = forward(self.net, x0)
        t_p = forward(self.net, xp)
        return float(t_in.post[m - 1][k] - t_p.post[m - 1][kp]), (x0, xp)


def build_pair_problem(net: Network, case: PerturbationCase, dep,
                       bounds_in: BoundsTable, bounds_p: BoundsTable,
                       m: int, k: int, sense: str) -> MipModel:
    """Sub-problem min/max of z_{m,k} - z^p_{m,k} over both copies up to
    layer m, the layer-0 coupling, and the dependencies decided so far.
    Encoded as a maximization (min f == max -f with negated objective)."""
    b = _Builder(net, bounds_in, bounds_p, max_layer=m)
    b.add_copy(COPY_IN)
    b.add_copy(COPY_PERT)
    phi = perturb.emit_phi_in(case)
    eps_j, bilinear = _emit_phi_in(b, phi)
    _emit_dependencies(b, dep, m)
    sgn = 1.0 if sense == MAX else -1.0
    zi, zp = b.post(COPY_IN, m, k), b.post(COPY_PERT, m, k)
    model = _PairModel(
        var_ids=b.var_ids, var_index=b.var_index,
        lb=np.array(b.lb), ub=np.array(b.ub), rows=b.rows,
        objective=((zi, sgn), (zp, -sgn)),
        bool_indices=sorted(b.bool_indices, key=lambda j: b.var_ids[j]),
        bilinear=bilinear, eps_index=eps_j, eps_interval=phi.eps_interval,
        delta_index=None, cutoff=-np.inf, cutoff_genuine=False,
        hints=None, report_offset=0.0,
        input_indices=np.array([b.post(COPY_IN, 0, t) for t in range(net.input_size)]),
        pert_input_indices=np.array([b.post(COPY_PERT, 0, t) for t in range(net.input_size)]),
        case=case, net=net, meta=f"pair m={m} k={k} {sense}",
    )
    model.pair = (m, k, k)
    if sense == MIN:
        # evaluate_incumbent must report the *maximization* objective.
        orig = model.evaluate_incumbent

        def negate(x):
            r = orig(x)
            return None if r is None else (-r[0], r[1])

        model.evaluate_incumbent = negate
    return model


def dump_lp_text(model: MipModel) -> str:
    """LP-format-like plain-text rendering, for debugging."""
    names = [repr(v) for v in model.var_ids]

    def expr(terms):
        parts = []
        for j, coef in terms:
            parts.append(f"{'+' if coef >= 0 else '-'} {abs(coef):g} {names[j]}")
        return " ".join(parts) if parts else "0"

    out = ["Maximize", " obj: " + expr(model.objective), "Subject To"]
    for i, rw in enumerate(model.rows):
        rel = {"<=": "<=", "=": "=", ">=": ">="}[rw.relation]
        out.append(f" r{i}({rw.tag}): {expr(rw.terms)} {rel} {rw.rhs:g}")
    out.append("Bounds")
    for j, nm in enumerate(names):
        out.append(f" {model.lb[j]:g} <= {nm} <= {model.ub[j]:g}")
    out.append("Binary")
    out.append(" " + " ".join(names[j] for j in model.bool_indices))
    out.append("End")
    return "\n".join(out) + "\n"
