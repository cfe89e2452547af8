import numpy as np
import pytest

import helpers
from grcert import bnb, mip
from grcert.network import Network, FullyConnected, Convolutional, forward
from grcert.perturb import PerturbationCase, emit_phi_in, enumerate_cases, parse_spec


def input_bounds(net):
    return np.zeros(net.input_size), np.ones(net.input_size)


def make_bounds(net, case=None, mode="lp"):
    b_in = mip.compute_concrete_bounds(net, *input_bounds(net), mode=mode)
    if case is None:
        return b_in, None
    phi = emit_phi_in(case)
    b_p = mip.compute_concrete_bounds(net, phi.pert_lo, phi.pert_hi, mode=mode)
    return b_in, b_p


# ---------------------------------------------------------------------------
# encode_relu
# ---------------------------------------------------------------------------

def _single_neuron_builder():
    net = Network(
        layers=(FullyConnected(np.array([[1.0]]), np.array([0.0]), relu=True),
                FullyConnected(np.array([[1.0], [0.0]]), np.zeros(2), relu=False)),
        input_shape=(1, 1, 1), num_classes=2)
    table = mip.compute_concrete_bounds(net, np.zeros(1), np.ones(1), mode="interval")
    b = mip._Builder(net, table)
    b.add_var(mip.VarId(0, 0, mip.COPY_IN, mip.POST), 0.0, 1.0)
    b.add_var(mip.VarId(1, 0, mip.COPY_IN, mip.PRE), -10.0, 10.0)
    return b


@pytest.mark.parametrize("lo,hi,kind,extra_rows,has_bool", [
    (-1.0, 2.0, "unstable", 4, True),
    (-3.0, -1.0, "inactive", 0, False),
    (0.5, 2.0, "active", 1, False),
])
def test_encode_relu_classification(lo, hi, kind, extra_rows, has_bool):
    b = _single_neuron_builder()
    before = len(b.rows)
    got = mip.encode_relu(b, mip.COPY_IN, 1, 0, lo, hi)
    assert got == kind
    assert len(b.rows) - before == extra_rows
    assert bool(b.bool_indices) == has_bool
    post = b.idx(mip.VarId(1, 0, mip.COPY_IN, mip.POST))
    if kind == "inactive":
        assert b.lb[post] == b.ub[post] == 0.0


def test_encode_relu_missing_bounds():
    b = _single_neuron_builder()
    with pytest.raises(mip.EncodingError):
        mip.encode_relu(b, mip.COPY_IN, 1, 0, np.nan, 1.0)


# ---------------------------------------------------------------------------
# compute_concrete_bounds
# ---------------------------------------------------------------------------

def test_bounds_monotone_sum():
    # all-ones 2x2 kernel, stride 2, 4 inputs per neuron: pre in [0, 4]
    net = Network(
        layers=(Convolutional(np.ones((1, 2, 2)), 0.0, 2, relu=True),
                FullyConnected(np.ones((2, 4)), np.zeros(2), relu=False)),
        input_shape=(1, 4, 4), num_classes=2)
    t = mip.compute_concrete_bounds(net, *input_bounds(net))
    assert np.allclose(t.pre_lo[0], 0.0, atol=1e-5)
    assert np.allclose(t.pre_hi[0], 4.0, atol=1e-5)


def test_bounds_affine_image():
    net = Network(
        layers=(FullyConnected(np.array([[-2.0]]), np.array([1.0]), relu=True),
                FullyConnected(np.array([[1.0], [0.0]]), np.zeros(2), relu=False)),
        input_shape=(1, 1, 1), num_classes=2)
    t = mip.compute_concrete_bounds(net, np.zeros(1), np.ones(1))
    assert t.pre_lo[0][0] == pytest.approx(-1.0, abs=1e-6)
    assert t.pre_hi[0][0] == pytest.approx(1.0, abs=1e-6)


def test_bounds_contain_grid_and_improve_on_interval():
    # 2-input fixture-style net, exhaustively gridded at 0.05: LP bounds
    # must contain every reachable layer-2 pre-activation and be no
    # looser than interval arithmetic.
    rng = np.random.default_rng(21)
    net = helpers.random_fc_net(rng, 2, [4, 3], 2)
    t_lp = mip.compute_concrete_bounds(net, np.zeros(2), np.ones(2), mode="lp")
    t_iv = mip.compute_concrete_bounds(net, np.zeros(2), np.ones(2), mode="interval")
    ax = np.arange(0.0, 1.0 + 1e-9, 0.05)
    G = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1).reshape(-1, 2)
    pre2 = np.array([forward(net, g).pre[1] for g in G])
    lo, hi = pre2.min(axis=0), pre2.max(axis=0)
    assert np.all(t_lp.pre_lo[1] <= lo + 1e-7)
    assert np.all(t_lp.pre_hi[1] >= hi - 1e-7)
    assert np.all(t_lp.pre_lo[1] >= t_iv.pre_lo[1] - 1e-7)
    assert np.all(t_lp.pre_hi[1] <= t_iv.pre_hi[1] + 1e-7)


def test_bounds_infeasible_box():
    net = helpers.random_fc_net(np.random.default_rng(0), 2, [2], 2)
    with pytest.raises(mip.InfeasibleInputError):
        mip.compute_concrete_bounds(net, np.ones(2), np.zeros(2))


# ---------------------------------------------------------------------------
# build_problem
# ---------------------------------------------------------------------------

def test_two_class_output_row_counts(fixture_net):
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    model = mip.build_problem(fixture_net, 0, 1, case, None, 0.0, None, b_in, b_p)
    out_rows = [r for r in model.rows if r.tag == "output"]
    assert len(out_rows) == 2  # one per family for c = 2
    cut_rows = [r for r in model.rows if r.tag == "cutoff"]
    assert len(cut_rows) == 1


def test_vacuous_cutoff_with_zero_attack_bound(fixture_net):
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    model = mip.build_problem(fixture_net, 0, 1, case, None, 0.0, None, b_in, b_p)
    cut = [r for r in model.rows if r.tag == "cutoff"][0]
    # delta >= -gamma cannot bind: the delta variable's floor is 0
    assert cut.rhs == pytest.approx(-mip.GAMMA)
    assert model.lb[model.delta_index] == 0.0


def test_target_equals_class_rejected(fixture_net):
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    with pytest.raises(ValueError):
        mip.build_problem(fixture_net, 0, 0, case, None, 0.0, None, b_in, b_p)


def test_booleans_touch_only_their_relu_and_dep_rows(fixture_net):
    from grcert import depprop
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    dep = depprop.compute_dependencies(fixture_net, case, b_in, b_p)
    model = mip.build_problem(fixture_net, 0, 1, case, dep, 0.0, None, b_in, b_p)
    bools = set(model.bool_indices)
    per_bool_relu = {j: 0 for j in bools}
    for row in model.rows:
        touched = [j for j, _c in row.terms if j in bools]
        if not touched:
            continue
        assert row.tag in ("relu", "dep"), row
        if row.tag == "relu":
            assert len(touched) == 1
            per_bool_relu[touched[0]] += 1
            # the row references only variables of the boolean's neuron
            vid = model.var_ids[touched[0]]
            for j, _c in row.terms:
                other = model.var_ids[j]
                assert (other.layer, other.neuron, other.copy) == \
                    (vid.layer, vid.neuron, vid.copy)
    for j, n_rows in per_bool_relu.items():
        assert n_rows == 2  # the boolean appears in the two big-M rows


def test_feasible_assignment_replays_as_forward_trace(fixture_net):
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    model = mip.build_problem(fixture_net, 0, 1, case, None, 0.0, None, b_in, b_p)
    sol = bnb.solve_mip(model, timeout=60)
    assert sol.status == bnb.OPTIMAL and sol.assignment is not None
    x = sol.assignment
    for copy, inputs in ((mip.COPY_IN, x[model.input_indices]),
                         (mip.COPY_PERT, x[model.pert_input_indices])):
        tr = forward(fixture_net, inputs)
        for m in range(1, len(fixture_net.layers) + 1):
            for k in range(fixture_net.layer_widths()[m]):
                pre = x[model.var_index[mip.VarId(m, k, copy, mip.PRE)]]
                post = x[model.var_index[mip.VarId(m, k, copy, mip.POST)]]
                assert pre == pytest.approx(tr.pre[m - 1][k], abs=1e-6)
                assert post == pytest.approx(tr.post[m - 1][k], abs=1e-6)


def test_stable_elimination_preserves_optimum():
    rng = np.random.default_rng(4)
    for trial in range(3):
        net = helpers.random_fc_net(rng, 3, [4], 2, scale=1.2)
        case = enumerate_cases(parse_spec("occlusion(1,1,1)"), net.input_shape)[0]
        b_in, b_p = make_bounds(net, case)
        vals = []
        for keep in (False, True):
            model = mip.build_problem(net, 0, 1, case, None, 0.0, None,
                                      b_in, b_p, keep_stable_booleans=keep)
            sol = bnb.solve_mip(model, timeout=120)
            vals.append((sol.status, sol.delta_l))
        assert vals[0][0] == vals[1][0]
        if vals[0][0] == bnb.OPTIMAL:
            assert vals[0][1] == pytest.approx(vals[1][1], abs=1e-6)


def test_bound_tightening_never_raises_optimum():
    rng = np.random.default_rng(14)
    net = helpers.random_fc_net(rng, 3, [4], 2)
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), net.input_shape)[0]
    roots, opts = [], []
    for mode in ("interval", "lp"):
        b_in, b_p = make_bounds(net, case, mode=mode)
        model = mip.build_problem(net, 0, 1, case, None, 0.0, None, b_in, b_p)
        from grcert.lp import solve_lp
        root = solve_lp(model.node_problem())
        roots.append(root.objective if root.optimal else np.inf)
        sol = bnb.solve_mip(model, timeout=120)
        opts.append((sol.status, sol.delta_l))
    assert roots[1] <= roots[0] + 1e-7  # tighter bounds, tighter relaxation
    if opts[0][0] == opts[1][0] == bnb.OPTIMAL:
        assert opts[0][1] == pytest.approx(opts[1][1], abs=1e-6)


def test_dump_lp_text(fixture_net):
    case = enumerate_cases(parse_spec("occlusion(1,1,1)"), (1, 4, 4))[0]
    b_in, b_p = make_bounds(fixture_net, case)
    model = mip.build_problem(fixture_net, 0, 1, case, None, 0.0, None, b_in, b_p)
    text = mip.dump_lp_text(model)
    assert "Maximize" in text and "Subject To" in text and "Binary" in text
    # headers + one line per row + one line per variable bound
    assert text.count("\n") == len(model.rows) + model.n_vars + 7
