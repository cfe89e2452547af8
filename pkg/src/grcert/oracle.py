"""Exhaustive and sampling references used by tests and comparisons.

The grid oracle enumerates the input box (and the perturbation
parameters) on a regular grid and reports the best confidence among
points that are classified as the protected class and admit a perturbed
example classified as the target.  It is exact over the grid, hence a
certified lower reference; together with the documented Lipschitz-style
slack it serves as an approximate two-sided reference on tiny networks.

By default the oracle applies the perturbation without clipping,
matching the exact constraint encoding it is used to validate; pass
clip=True for the attack-path semantics.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import perturb
from .network import confidence_batch, forward_batch
from .perturb import PerturbationSpec, enumerate_cases


class IntractableGridError(ValueError):
    pass


@dataclass
class OracleResult:
    value: float          # best confidence with a grid-certified violation
    slack: float          # documented approximate two-sided slack
    points: int           # forward evaluations spent
    witness: np.ndarray | None


def lipschitz_slack(net, grid_step):
    """grid_step * sqrt(n) * prod ||W_m||_F: a conservative bound on how
    far the continuum optimum can sit above the grid optimum (heuristic
    on the attackability side; see module docstring)."""
    prod = 1.0
    for W, _b, _r in net.dense_layers():
        prod *= float(np.linalg.norm(W))
    return grid_step * math.sqrt(net.input_size) * prod


def _axis(lo, hi, step):
    n = max(int(math.floor((hi - lo) / step + 1e-9)) + 1, 2)
    return np.linspace(lo, hi, n)


def _input_grid_chunks(n_dims, step, chunk_target=200_000):
    """Yield the regular grid over [0,1]^n in memory-bounded chunks."""
    ax = _axis(0.0, 1.0, step)
    per_slab = len(ax) ** (n_dims - 1) if n_dims > 1 else 1
    slab_group = max(1, int(chunk_target // max(per_slab, 1)))
    if n_dims == 1:
        yield ax[:, None]
        return
    tail_axes = [ax] * (n_dims - 1)
    tail = np.stack(np.meshgrid(*tail_axes, indexing="ij"), axis=-1).reshape(-1, n_dims - 1)
    for start in range(0, len(ax), slab_group):
        heads = ax[start:start + slab_group]
        block = np.empty((len(heads) * len(tail), n_dims))
        for i, h in enumerate(heads):
            block[i * len(tail):(i + 1) * len(tail), 0] = h
            block[i * len(tail):(i + 1) * len(tail), 1:] = tail
        yield block


def _eps_grids(case, step):
    """Grid over the continuous perturbation parameters of one case."""
    k = case.kind
    if k in ("brightness", "contrast"):
        lo, hi = case.eps_range
        if hi == lo:
            return [np.array([lo])]
        return [_axis(lo, hi, step)]
    if k == "patch":
        lim = case.eps_limit
        width = perturb.square_indices(case.shape, case.square).size
        return [_axis(-lim, lim, step)] * width
    if k == "linf":
        lim = case.eps_limit
        return [_axis(-lim, lim, step)] * case.n_inputs
    return []


def grid_oracle(net, spec: PerturbationSpec, c_prime, c_t, grid_step,
                clip=False, max_points=2.0e7):
    """Reference value of the non-robustness maximization (see module doc).

    Raises IntractableGridError with a size estimate when the product of
    the input grid and the parameter grid exceeds max_points.
    """
    n = net.input_size
    axis_len = len(_axis(0.0, 1.0, grid_step))
    n_grid = float(axis_len) ** n

    total_eps = 0
    cases = enumerate_cases(spec, net.input_shape)
    plans = []
    for case in cases:
        grids = _eps_grids(case, grid_step)
        n_eps = 1.0
        for g in grids:
            n_eps *= len(g)
        plans.append((case, grids, n_eps))
        total_eps += n_eps
    budget = n_grid * max(total_eps, 1.0)
    if budget > max_points:
        raise IntractableGridError(
            f"grid needs about {budget:.2e} evaluations (> {max_points:.0e})")

    meshes = []
    for case, grids, _n_eps in plans:
        if not grids:
            meshes.append((case, [None]))
        else:
            mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)
            meshes.append((case, list(mesh.reshape(-1, len(grids)))))

    best_val, best_x, points = -np.inf, None, 0
    for X in _input_grid_chunks(n, grid_step):
        conf_in = confidence_batch(forward_batch(net, X), c_prime)
        points += X.shape[0]
        classified = conf_in > 0.0
        # only attackability of still-improving classified points matters
        cand = classified & (conf_in > best_val)
        if not np.any(cand):
            continue
        attackable = np.zeros(X.shape[0], dtype=bool)
        for case, rows in meshes:
            for row in rows:
                if row is None:
                    eps = None
                elif case.kind in ("brightness", "contrast"):
                    eps = row[0]
                else:
                    eps = row
                todo = cand & ~attackable
                if not np.any(todo):
                    break
                XP = perturb.case_apply(case, X[todo], eps, clip=clip)
                hit = confidence_batch(forward_batch(net, XP), c_t) > 0.0
                attackable[np.flatnonzero(todo)[hit]] = True
                points += int(todo.sum())
        ok = cand & attackable
        if np.any(ok):
            i = int(np.argmax(np.where(ok, conf_in, -np.inf)))
            best_val, best_x = float(conf_in[i]), X[i].copy()
    if best_x is None:
        return OracleResult(0.0, lipschitz_slack(net, grid_step), points, None)
    return OracleResult(best_val, lipschitz_slack(net, grid_step), points, best_x)


def grid_oracle_untargeted(net, spec, c_prime, targets, grid_step, **kw):
    """Max of the targeted oracle over a target set."""
    best = OracleResult(0.0, lipschitz_slack(net, grid_step), 0, None)
    for c_t in targets:
        r = grid_oracle(net, spec, c_prime, c_t, grid_step, **kw)
        best = OracleResult(max(best.value, r.value), r.slack,
                            best.points + r.points,
                            r.witness if r.value >= best.value else best.witness)
    return best


# ---------------------------------------------------------------------------
# Sampling baselines (lower-bound estimates, attack-path semantics).
# ---------------------------------------------------------------------------

@dataclass
class BaselineResult:
    delta_ds: float       # best confidence among attackable dataset samples
    delta_rs: float       # mean per-sample bound over random draws
    hoeffding_h: float    # 95% half-width, range taken from the samples
    n_random: int


def _sample_bounds(net, spec, X, c_prime, targets, eps_step):
    """Per-sample non-robust bound: the sample's confidence when some
    enumerated/gridded perturbation sends it into a target class, else 0."""
    conf_in = confidence_batch(forward_batch(net, X), c_prime)
    hit = np.zeros(X.shape[0], dtype=bool)
    for case in enumerate_cases(spec, net.input_shape):
        grids = _eps_grids(case, eps_step)
        if not grids:
            XP = perturb.case_apply(case, X, None, clip=True)
            S = forward_batch(net, XP)
            for c_t in targets:
                hit |= confidence_batch(S, c_t) > 0.0
            continue
        mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, len(grids))
        for row in mesh:
            eps = row[0] if case.kind in ("brightness", "contrast") else row
            XP = perturb.case_apply(case, X, eps, clip=True)
            S = forward_batch(net, XP)
            for c_t in targets:
                hit |= confidence_batch(S, c_t) > 0.0
    return np.where((conf_in > 0.0) & hit, conf_in, 0.0)


def sampling_baselines(net, spec, dataset, c_prime, targets, n_samples,
                       seed=0, eps_step=0.05) -> BaselineResult:
    """Dataset-sampling max bound and random-sampling mean bound.

    Random draws are per-pixel Gaussian(0.5, 0.25) clipped into [0,1];
    the confidence half-width uses Hoeffding at 95% with the observed
    sample range as the bounded support.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    ds_bounds = _sample_bounds(net, spec, np.asarray(dataset, dtype=np.float64),
                               c_prime, targets, eps_step)
    delta_ds = float(np.max(ds_bounds)) if ds_bounds.size else 0.0
    rng = np.random.default_rng(seed)
    R = np.clip(rng.normal(0.5, 0.25, size=(n_samples, net.input_size)), 0.0, 1.0)
    rs_bounds = _sample_bounds(net, spec, R, c_prime, targets, eps_step)
    spread = float(np.max(rs_bounds) - np.min(rs_bounds)) if n_samples > 1 else float(rs_bounds[0])
    h = spread * math.sqrt(math.log(2.0 / 0.05) / (2.0 * n_samples))
    return BaselineResult(delta_ds, float(np.mean(rs_bounds)), h, n_samples)
