"""Shared test utilities: independent oracles and fixture generators.

Everything here is deliberately written without reusing the package's
own machinery wherever it serves as a reference implementation (the
textbook simplex, the dense-matmul forward, the rotation transcription,
the falsification sampler), so a bug in the package cannot hide itself.
"""

import numpy as np

from grcert.network import Network, FullyConnected, Convolutional

# ---------------------------------------------------------------------------
# Independent textbook simplex (standard full-tableau, big-M free, two
# phase, upper bounds as explicit rows).  Slow and simple on purpose.
# ---------------------------------------------------------------------------

def textbook_simplex(c, A, b, senses, lb, ub, maximize=False):
    """Returns (status, objective, x) with status in {optimal, infeasible}."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), -1) if len(b) else np.zeros((0, c.size))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = c.size
    if maximize:
        c = -c

    # Shift x = y + lb, add rows y_j <= ub_j - lb_j for finite ub.
    rows = []
    rhs = []
    for i in range(len(b)):
        rows.append((A[i], senses[i], b[i] - A[i] @ lb))
    for j in range(n):
        if np.isfinite(ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append((e, -1, ub[j] - lb[j]))

    # Standard form: every row gets a slack (<=/>=) and artificials give
    # the phase-1 basis.
    m = len(rows)
    ncols = n
    slack_of = [None] * m
    for i, (_a, s, _r) in enumerate(rows):
        if s != 0:
            slack_of[i] = ncols
            ncols += 1
    art_of = [None] * m
    T = np.zeros((m, ncols + m + 1))
    base = ncols
    basis = [None] * m
    for i, (a, s, r) in enumerate(rows):
        T[i, :n] = a
        if s == -1:
            T[i, slack_of[i]] = 1.0
        elif s == 1:
            T[i, slack_of[i]] = -1.0
        T[i, -1] = r
        if T[i, -1] < 0:
            T[i, :] = -T[i, :]
        if s == -1 and (r >= 0):
            basis[i] = slack_of[i]
        else:
            art_of[i] = base + i
            T[i, base + i] = 1.0
            basis[i] = base + i
    total = ncols + m

    def solve_phase(cost):
        z = cost.copy().astype(float)
        zc = 0.0
        for i in range(m):
            if cost[basis[i]] != 0.0:
                z = z - cost[basis[i]] * T[i, :-1]
                zc -= cost[basis[i]] * T[i, -1]
        for _ in range(20000):
            enter = -1
            for j in range(total):
                if z[j] < -1e-9:
                    enter = j
                    break
            if enter < 0:
                return z, zc
            ratios = [(T[i, -1] / T[i, enter], basis[i], i)
                      for i in range(m) if T[i, enter] > 1e-9]
            if not ratios:
                return None, None  # unbounded
            _, _, r = min(ratios)
            piv = T[r, enter]
            T[r, :] /= piv
            for i in range(m):
                if i != r and T[i, enter] != 0.0:
                    T[i, :] -= T[i, enter] * T[r, :]
            zq = z[enter]
            z = z - zq * T[r, :-1]
            zc -= zq * T[r, -1]
            basis[r] = enter
        raise RuntimeError("textbook simplex iteration blow-up")

    cost1 = np.zeros(total)
    for i in range(m):
        if art_of[i] is not None:
            cost1[art_of[i]] = 1.0
    z, zc = solve_phase(cost1)
    if z is None or -zc > 1e-7:
        return "infeasible", None, None
    # Bar artificials by making them expensive in phase 2.
    cost2 = np.zeros(total)
    cost2[:n] = c
    for i in range(m):
        if art_of[i] is not None:
            cost2[art_of[i]] = 1e9
    z, zc = solve_phase(cost2)
    if z is None:
        return "unbounded", None, None
    x = np.zeros(total)
    for i in range(m):
        x[basis[i]] = T[i, -1]
    y = x[:n] + lb
    obj = float(c @ y)
    if maximize:
        obj = -obj
    return "optimal", obj, y


# ---------------------------------------------------------------------------
# Independent dense forward (hand-rolled loops; convolutions expanded by
# explicit window walking, separately from the package's expansion).
# ---------------------------------------------------------------------------

def dense_forward_oracle(net: Network, x):
    z = np.asarray(x, dtype=float).reshape(-1)
    shape = net.input_shape
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            out = np.empty(layer.weights.shape[0])
            for k in range(out.size):
                acc = layer.biases[k]
                for j in range(z.size):
                    acc += layer.weights[k, j] * z[j]
                out[k] = acc
            shape = (out.size,)
        else:
            l, d1, d2 = shape
            zz = z.reshape(l, d1, d2)
            t, s = layer.kernel.shape[1], layer.stride
            oh, ow = (d1 - t) // s + 1, (d2 - t) // s + 1
            out = np.empty(oh * ow)
            for oi in range(oh):
                for oj in range(ow):
                    acc = layer.bias
                    for v in range(l):
                        for p in range(t):
                            for q in range(t):
                                acc += layer.kernel[v, p, q] * zz[v, oi * s + p, oj * s + q]
                    out[oi * ow + oj] = acc
            shape = (1, oh, ow)
        if layer.relu:
            out = np.maximum(out, 0.0)
        z = out
    return z


# ---------------------------------------------------------------------------
# Line-by-line transcription of the appendix rotation pseudocode.
# ---------------------------------------------------------------------------

def rotation_transcription(x, theta):
    import math
    x = np.asarray(x, dtype=float)
    d1, d2 = x.shape
    xr = np.zeros((d1, d2))
    center = [d1 / 2 + 1, d2 / 2 + 1]
    for i in range(1, d1 + 1):
        for j in range(1, d2 + 1):
            ic = i - center[0]
            jc = j - center[1]
            ir = (ic * math.sin(theta * math.pi / 180) + jc * math.cos(theta * math.pi / 180)) + center[0]
            jr = (ic * math.cos(theta * math.pi / 180) - jc * math.sin(theta * math.pi / 180)) + center[1]
            if math.floor(ir) >= 1 and math.ceil(ir) <= d1 and math.floor(jr) >= 1 and math.ceil(jr) <= d2:
                di = ir - math.floor(ir)
                dj = jr - math.floor(jr)
                xr[i - 1, j - 1] = (
                    (1 - di) * (1 - dj) * x[math.floor(ir) - 1, math.floor(jr) - 1]
                    + di * (1 - dj) * x[math.ceil(ir) - 1, math.floor(jr) - 1]
                    + (1 - di) * dj * x[math.floor(ir) - 1, math.ceil(jr) - 1]
                    + di * dj * x[math.ceil(ir) - 1, math.ceil(jr) - 1]
                )
    return xr


# ---------------------------------------------------------------------------
# Sampled falsification of dependency relations (unclipped semantics).
# ---------------------------------------------------------------------------

def sample_case_eps(case, rng):
    k = case.kind
    if k in ("brightness", "contrast"):
        lo, hi = case.eps_range
        return rng.uniform(lo, hi)
    if k == "patch":
        from grcert.perturb import square_indices
        w = square_indices(case.shape, case.square).size
        return rng.uniform(-case.eps_limit, case.eps_limit, size=w)
    if k == "linf":
        return rng.uniform(-case.eps_limit, case.eps_limit, size=case.n_inputs)
    return None


def falsify_dependencies(net, case, dep, n_samples, rng, tol=1e-7):
    """Check every decided relation on sampled exact trace pairs.

    Returns a list of violation descriptions (empty when sound).  The
    perturbed example is computed without clipping, matching the
    constraint encoding the relations are injected into.
    """
    from grcert.perturb import case_apply
    from grcert.network import forward

    violations = []
    entries = list(dep.iter_entries())
    for _ in range(n_samples):
        x = rng.uniform(0.0, 1.0, size=case.n_inputs)
        eps = sample_case_eps(case, rng)
        xp = case_apply(case, x, eps, clip=False)
        t_in = forward(net, x)
        t_p = forward(net, xp.reshape(-1))
        post_in = [t_in.inputs] + [p for p in t_in.post]
        post_p = [t_p.inputs] + [p for p in t_p.post]
        pre_in = [None] + [p for p in t_in.pre]
        pre_p = [None] + [p for p in t_p.pre]
        for m, k, (vrel, brel, kp) in entries:
            a = post_in[m][k]
            b = post_p[m][kp]
            bad = (
                (vrel == "EQ" and abs(a - b) > tol)
                or (vrel in ("GE", "GT") and a < b - tol)
                or (vrel in ("LE", "LT") and a > b + tol)
            )
            if bad:
                violations.append((m, k, vrel, float(a), float(b)))
            if m >= 1 and brel in ("EQ", "GE", "LE"):
                ai, ap = pre_in[m][k], pre_p[m][kp]
                if brel in ("EQ", "GE") and ai < -tol and ap > tol:
                    violations.append((m, k, "bool" + brel, float(ai), float(ap)))
                if brel in ("EQ", "LE") and ai > tol and ap < -tol:
                    violations.append((m, k, "bool" + brel, float(ai), float(ap)))
    return violations


# ---------------------------------------------------------------------------
# Random tiny networks.
# ---------------------------------------------------------------------------

def random_fc_net(rng, n_in, hidden, n_classes, scale=1.0, bias_scale=0.4,
                  shape=None):
    layers = []
    prev = n_in
    for h in hidden:
        layers.append(FullyConnected(
            weights=rng.normal(size=(h, prev)) * scale,
            biases=rng.normal(size=h) * bias_scale, relu=True))
        prev = h
    layers.append(FullyConnected(
        weights=rng.normal(size=(n_classes, prev)) * scale,
        biases=rng.normal(size=n_classes) * bias_scale, relu=False))
    return Network(layers=tuple(layers), input_shape=shape or (1, 1, n_in),
                   num_classes=n_classes)


def random_classifier_net(rng, n_in, hidden, n_classes, min_classes=2, tries=80,
                          require_class=0, shape=None):
    """Random net realizing at least min_classes distinct argmax classes
    on uniform samples, one of them `require_class` (the non-trivial
    classifier setting: the protected class must be achievable)."""
    from grcert.network import forward_batch
    for _ in range(tries):
        net = random_fc_net(rng, n_in, hidden, n_classes, shape=shape)
        S = forward_batch(net, rng.uniform(size=(512, n_in)))
        seen = set(np.argmax(S, axis=1).tolist())
        if len(seen) >= min_classes and (require_class is None or require_class in seen):
            return net
    raise RuntimeError("could not sample a non-trivial classifier")


def prepare_case(net, spec_text, idx=0, mode="lp"):
    """(case, input-copy bounds, perturbed-copy bounds) for one sub-case."""
    from grcert import mip
    from grcert.perturb import parse_spec, enumerate_cases, emit_phi_in
    case = enumerate_cases(parse_spec(spec_text), net.input_shape)[idx]
    phi = emit_phi_in(case)
    b_in = mip.compute_concrete_bounds(
        net, np.zeros(net.input_size), np.ones(net.input_size), mode=mode)
    b_p = mip.compute_concrete_bounds(net, phi.pert_lo, phi.pert_hi, mode=mode)
    return case, b_in, b_p


def fixture_net():
    """16-input conv + fc + linear-output network used across the suite.

    Same topology as the worked small-network example: a 2x2/stride-2
    convolution with a positive top-left kernel weight, a 4->2 fully
    connected layer whose two neurons weight the first feature with
    opposite signs, and a 2-class linear output.  Weights are this
    repo's own; every numeric expectation against it is derived by the
    oracles in this file, not transcribed from anywhere.
    """
    return Network(
        layers=(
            Convolutional(kernel=np.array([[[1.0, 0.5], [0.5, 0.25]]]),
                          bias=0.1, stride=2, relu=True),
            FullyConnected(weights=np.array([[1.0, 0.3, 0.2, 0.4],
                                             [-1.0, 0.5, 0.3, 0.2]]),
                           biases=np.array([0.05, -0.05]), relu=True),
            FullyConnected(weights=np.array([[1.0, -0.5], [-0.3, 0.8]]),
                           biases=np.array([0.0, 0.1]), relu=False),
        ),
        input_shape=(1, 4, 4), num_classes=2)
