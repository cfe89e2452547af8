"""Warm starts for the solver: simultaneous gradient attack over a
spread of inputs.

The attack optimizes a batch of M inputs at once, maximizing each
input's protected-class confidence while driving its perturbed example
into the target class.  The two goals are balanced per input by an
adaptive factor computed from the gradient norms each iteration (and
treated as a constant inside the gradient).  Survivors with a genuinely
misclassified perturbed example give a valid lower bound on the
non-robustness optimum plus majority-vote warm-start hints for the
boolean search.

The iterates themselves are projected into the image domain and the
parameter ranges after every step, but the perturbed example inside the
loss and the final validation use the unclipped perturbation
arithmetic.  That is the semantics of the constraint encoding the
resulting confidence is injected into as a cutoff: a bound backed by a
clipped-only witness could cut the true optimum wherever clipping
binds.  Everything here is deterministic under a fixed seed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import perturb
from .network import confidence_batch
from .perturb import PerturbationCase


class InsufficientInputsError(ValueError):
    pass


@dataclass
class AttackConfig:
    M: int = 64
    r: float = 0.95
    lambda0: float = 1.01
    tau: float = 0.01
    kappa: float = 1e-6
    eta: float = 0.05
    iters: int = 300
    seed: int = 0


@dataclass
class AttackResult:
    delta_ha: float
    hints: tuple          # (H, Hp), int8 (L, max_width), -1 = no hint
    solutions: list       # [(x, eps, confidence)] validated survivors
    confidences: np.ndarray = field(default=None)


def _batched_trace(net, X):
    """Batched forward keeping every pre-activation (for hints/backprop)."""
    pres = []
    Z = X
    for W, b, relu in net.dense_layers():
        P = Z @ W.T + b
        pres.append(P)
        Z = np.maximum(P, 0.0) if relu else P
    return Z, pres


def _confidence_and_grad(net, X, cls):
    """Class confidences and their input gradients for a batch.

    The max over competing classes and the ReLU kinks take their
    argmax/inactive branches, so the result is an exact gradient almost
    everywhere and a fixed subgradient choice on the kinks.
    """
    scores, pres = _batched_trace(net, X)
    B, c = scores.shape
    others = np.delete(scores, cls, axis=1)
    best = np.argmax(others, axis=1)
    rival = np.where(best >= cls, best + 1, best)
    conf = scores[:, cls] - others[np.arange(B), best]
    G = np.zeros_like(scores)
    G[:, cls] = 1.0
    G[np.arange(B), rival] -= 1.0
    dense = net.dense_layers()
    for m in range(len(dense) - 1, -1, -1):
        W, _b, relu = dense[m]
        if relu:
            G = G * (pres[m] > 0.0)
        G = G @ W
    return conf, G


def _pert_value_and_vjp(case, X, eps, Gbar):
    """Perturbation outputs plus the pulled-back gradient.

    Returns (XP, gX, gE): XP = f(X, eps) (formal arithmetic, unclipped);
    gX = (df/dx)^T Gbar; gE the gradient w.r.t. the continuous
    parameters (None when the case has none).
    """
    XP = perturb.case_apply(case, X, eps, clip=False)
    G = Gbar
    k = case.kind
    if k == "brightness":
        return XP, G, np.sum(G, axis=1)
    if k == "contrast":
        e = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
        return XP, G * e, np.sum(G * X, axis=1)
    if k == "occlusion":
        gX = G.copy()
        gX[:, perturb.square_indices(case.shape, case.square)] = 0.0
        return XP, gX, None
    if k == "patch":
        idx = perturb.square_indices(case.shape, case.square)
        return XP, G, G[:, idx].copy()
    if k == "linf":
        return XP, G, G.copy()
    if k == "translation":
        src, valid = perturb._translation_map(case)
        gX = np.zeros_like(G)
        np.add.at(gX, (slice(None), src[valid]), G[:, valid])
        return XP, gX, None
    if k == "rotation":
        l, d1, d2 = case.shape
        stencil = perturb.rotation_stencil(case.shape, case.theta)
        gX = np.zeros_like(G)
        plane = d1 * d2
        for v in range(l):
            off = v * plane
            for t, entry in enumerate(stencil):
                if entry is None:
                    continue
                for s, coef in entry:
                    gX[:, off + s] += coef * G[:, off + t]
        return XP, gX, None
    raise AssertionError(k)


def _init_eps(case, M, rng):
    k = case.kind
    if k in ("brightness", "contrast"):
        lo, hi = case.eps_range
        return rng.uniform(lo, hi, size=M)
    if k == "patch":
        return np.zeros((M, perturb.square_indices(case.shape, case.square).size))
    if k == "linf":
        return np.zeros((M, case.n_inputs))
    return None


def _project_eps(case, eps):
    k = case.kind
    if k in ("brightness", "contrast"):
        lo, hi = case.eps_range
        return np.clip(eps, lo, hi)
    if k in ("patch", "linf"):
        lim = case.eps_limit
        return np.clip(eps, -lim, lim)
    return eps


def build_hyper_input(dataset, net, c_prime, M, rng):
    """Select M starting inputs spread over the confidence range.

    The dataset is doubled with uniform random images, every image is
    scored, and either every floor(n/M)-th positively-classified
    candidate (confidence-sorted) or simply the top M of the expansion
    is kept.  Returns (X, origins) with origins in {dataset, random}.
    """
    dataset = np.asarray(dataset, dtype=np.float64).reshape(len(dataset), -1)
    if len(dataset) < 1 or M > 2 * len(dataset):
        raise InsufficientInputsError(
            f"need a dataset of at least {int(np.ceil(M / 2))} inputs for M={M}")
    rand = rng.uniform(0.0, 1.0, size=dataset.shape)
    full = np.vstack([dataset, rand])
    origins = np.array(["dataset"] * len(dataset) + ["random"] * len(rand))
    conf = confidence_batch(_batched_trace(net, full)[0], c_prime)
    order = np.argsort(-conf, kind="stable")
    full, origins, conf = full[order], origins[order], conf[order]
    pos = conf > 0.0
    cands = full[pos]
    if len(cands) > M:
        step = len(cands) // M
        idx = np.arange(M) * step
        return cands[idx], origins[pos][idx]
    return full[:M], origins[:M]


def backprop_loss_grad(net, case: PerturbationCase, X, Xt, eps, c_prime, c_t,
                       lambda0=1.01, tau=0.01, kappa=1e-6):
    """Gradient of the two-goal attack loss w.r.t. the input offsets and
    the continuous perturbation parameters.

    loss_i = C(x_i + xt_i, c') + lam_i * min(C(f(x_i + xt_i, eps_i), c_t), tau)
    with lam_i = lambda0 * ||grad_1|| / (||grad_2|| + kappa) held constant.

    Returns (gX, gE, lam, conf_in, conf_p).
    """
    P = X + Xt
    conf_in, g1 = _confidence_and_grad(net, P, c_prime)
    # Gradient of C(f(.), c_t) at the (formal, unclipped) perturbed points.
    raw_conf_p, gp = _confidence_and_grad(net, perturb.case_apply(case, P, eps, clip=False), c_t)
    _XP, g2x, g2e = _pert_value_and_vjp(case, P, eps, gp)
    capped = raw_conf_p < tau
    g2x = g2x * capped[:, None]
    if g2e is not None:
        g2e = g2e * (capped[:, None] if g2e.ndim == 2 else capped)
    n1 = np.linalg.norm(g1, axis=1)
    n2 = np.linalg.norm(g2x, axis=1)
    lam = lambda0 * n1 / (n2 + kappa)
    gX = g1 + lam[:, None] * g2x
    gE = None
    if g2e is not None:
        gE = (lam[:, None] if g2e.ndim == 2 else lam) * g2e
    return gX, gE, lam, conf_in, raw_conf_p


def attack_loss(net, case: PerturbationCase, X, Xt, eps, c_prime, c_t, lam, tau=0.01):
    """Scalar attack loss with the balancing factors frozen at `lam`.

    This is the function whose gradient backprop_loss_grad computes
    (lam is a constant there too); finite-difference checks use it.
    """
    P = X + Xt
    conf_in = confidence_batch(_batched_trace(net, P)[0], c_prime)
    XP = perturb.case_apply(case, P, eps, clip=False)
    conf_p = confidence_batch(_batched_trace(net, XP)[0], c_t)
    return float(np.sum(conf_in) + np.sum(lam * np.minimum(conf_p, tau)))


def run_attack(net, case: PerturbationCase, c_prime, c_t, dataset,
               config: AttackConfig | None = None) -> AttackResult:
    """Projected gradient ascent over the batch; see the module docstring.

    Returns the best surviving confidence (0.0 when nothing survives),
    hint matrices from activation-majority voting, and the validated
    solutions themselves.
    """
    cfg = config or AttackConfig()
    rng = np.random.default_rng(cfg.seed)
    X, _origins = build_hyper_input(dataset, net, c_prime, cfg.M, rng)
    M = X.shape[0]
    Xt = np.zeros_like(X)
    eps = _init_eps(case, M, rng)

    for _ in range(cfg.iters):
        gX, gE, _lam, _ci, _cp = backprop_loss_grad(
            net, case, X, Xt, eps, c_prime, c_t, cfg.lambda0, cfg.tau, cfg.kappa)
        Xt = Xt + cfg.eta * gX
        Xt = np.clip(X + Xt, 0.0, 1.0) - X
        if gE is not None:
            eps = _project_eps(case, eps + cfg.eta * gE)

    P = X + Xt
    # Validation under the exact (unclipped) perturbation arithmetic.
    XP = perturb.case_apply(case, P, eps, clip=False)
    conf_in = confidence_batch(_batched_trace(net, P)[0], c_prime)
    conf_p = confidence_batch(_batched_trace(net, XP)[0], c_t)
    sol = np.flatnonzero((conf_in > 0.0) & (conf_p > 0.0))

    L = len(net.layers)
    widths = net.layer_widths()
    maxw = max(widths[1:])
    H = np.full((L, maxw), -1, dtype=np.int8)
    Hp = np.full((L, maxw), -1, dtype=np.int8)
    if sol.size == 0:
        return AttackResult(0.0, (H, Hp), [], confidences=conf_in)

    delta_ha = float(np.max(conf_in[sol]))
    _s, pres_in = _batched_trace(net, P[sol])
    _s, pres_p = _batched_trace(net, XP[sol])
    for m in range(L):
        for mat, pres in ((H, pres_in), (Hp, pres_p)):
            active = np.mean(pres[m] >= 0.0, axis=0)
            mat[m, :widths[m + 1]] = np.where(
                active > cfg.r, 1, np.where(1.0 - active > cfg.r, 0, -1))
    solutions = [
        (P[i].copy(), None if eps is None else np.array(eps[i], ndmin=1).copy(),
         float(conf_in[i]))
        for i in sol
    ]
    return AttackResult(delta_ha, (H, Hp), solutions, confidences=conf_in)
