"""Command-line entry point.

    grcert verify --net net.json --class 0 --targets all \
        --perturb "occlusion(1,1,1)" --timeout 60 --delta 1e-4 --seed 0 \
        [--no-deps] [--no-attack] [--baselines] [--oracle-grid 0.05] \
        [--dataset data.json] [--delta-m] [--dump-model] [--dump-deps] \
        --out outdir

Classes are 0-based; pixel coordinates in the perturbation syntax are
1-based.  Exit code 0 covers completed verifications including TIMEOUT
statuses; errors (unreadable files, bad arguments) exit nonzero.

Numeric defaults can be overridden by environment variables, each
beaten in turn by an explicit flag: GRCERT_TIMEOUT, GRCERT_DELTA,
GRCERT_GAMMA, GRCERT_SEED, GRCERT_JOBS, GRCERT_ATTACK_M,
GRCERT_ATTACK_ITERS, GRCERT_ATTACK_ETA, GRCERT_BASELINE_SAMPLES.
GRCERT_JIT=0 switches the LP kernel to the pure-numpy fallback.
"""

import argparse
import os
import sys

import numpy as np

from . import bnb, depprop, mip, oracle
from .attack import AttackConfig
from .network import NetworkFormatError, load_dataset, load_network
from .perturb import SpecError, parse_spec, enumerate_cases, emit_phi_in
from .verify import VerifyOptions, VerificationReport, compute_delta_m, emit_report, verify


def _env(name, cast, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"bad value for ${name}: {raw!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="grcert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="bound the minimal globally robust confidence")
    v.add_argument("--net", required=True, help="network file (canonical JSON)")
    v.add_argument("--class", dest="c_prime", type=int, required=True,
                   help="protected class (0-based)")
    v.add_argument("--targets", default="all",
                   help="'all' or comma-separated target classes")
    v.add_argument("--perturb", required=True, help='perturbation spec, e.g. "occlusion(1,1,1)"')
    v.add_argument("--timeout", type=float, default=_env("GRCERT_TIMEOUT", float, 60.0),
                   help="seconds per target solve")
    v.add_argument("--delta", type=float, default=_env("GRCERT_DELTA", float, 1e-4),
                   help="precision step added to the non-robust bound")
    v.add_argument("--seed", type=int, default=_env("GRCERT_SEED", int, 0))
    v.add_argument("--no-deps", action="store_true", help="skip dependency constraints")
    v.add_argument("--no-attack", action="store_true", help="skip the warm-start attack")
    v.add_argument("--baselines", action="store_true",
                   help="also run dataset/random sampling baselines")
    v.add_argument("--oracle-grid", type=float, default=None, metavar="STEP",
                   help="also run the exhaustive grid reference at STEP")
    v.add_argument("--dataset", default=None, help="dataset file for the attack/baselines")
    v.add_argument("--delta-m", action="store_true",
                   help="also compute the maximal confidence of the class")
    v.add_argument("--dump-model", action="store_true",
                   help="write the per-target models in LP-like text")
    v.add_argument("--dump-deps", action="store_true",
                   help="write the dependency matrices as text")
    v.add_argument("--out", required=True, help="output directory")
    return p


def _run_verify(args):
    net = load_network(args.net)
    spec = parse_spec(args.perturb)
    if args.targets.strip().lower() == "all":
        targets = [t for t in range(net.num_classes) if t != args.c_prime]
    else:
        targets = [int(t) for t in args.targets.split(",") if t.strip() != ""]
    dataset = load_dataset(args.dataset) if args.dataset else None

    attack_cfg = AttackConfig(
        M=_env("GRCERT_ATTACK_M", int, 64),
        iters=_env("GRCERT_ATTACK_ITERS", int, 300),
        eta=_env("GRCERT_ATTACK_ETA", float, 0.05),
        seed=args.seed,
    )
    options = VerifyOptions(
        timeout=args.timeout, delta_precision=args.delta,
        gamma=_env("GRCERT_GAMMA", float, mip.GAMMA), seed=args.seed,
        use_deps=not args.no_deps, use_attack=not args.no_attack,
        attack=attack_cfg,
    )
    report = verify(net, args.c_prime, targets, spec, options, dataset=dataset)

    if args.delta_m:
        report.delta_m = compute_delta_m(net, args.c_prime, options)
    if args.baselines:
        if dataset is None:
            rng = np.random.default_rng(args.seed)
            dataset = rng.uniform(size=(256, net.input_size))
        base = oracle.sampling_baselines(
            net, spec, dataset, args.c_prime, targets,
            n_samples=_env("GRCERT_BASELINE_SAMPLES", int, 1000), seed=args.seed)
        report.baselines = {
            "delta_ds": base.delta_ds, "delta_rs": base.delta_rs,
            "hoeffding_h": base.hoeffding_h, "n_random": base.n_random,
        }
    if args.oracle_grid:
        try:
            ref = oracle.grid_oracle_untargeted(net, spec, args.c_prime, targets,
                                                args.oracle_grid)
            report.oracle_ref = {"value": ref.value, "slack": ref.slack,
                                 "grid_step": args.oracle_grid, "points": ref.points}
        except oracle.IntractableGridError as e:
            report.oracle_ref = {"error": str(e)}

    path = emit_report(report, args.out)
    if args.dump_model or args.dump_deps:
        _write_dumps(net, args, spec, options)

    print(f"non-robust bound in [{report.nonrobust_lo:.6g}, {report.nonrobust_hi:.6g}]")
    print(f"robust bound     in [{report.robust_lo:.6g}, {report.robust_hi:.6g}]")
    for o in report.outcomes:
        print(f"  target {o.target} {o.case_label}: {o.status} "
              f"[{o.delta_l:.6g}, {o.delta_u:.6g}] attack {o.delta_ha:.6g} "
              f"({o.nodes} nodes, {o.wall_ms:.0f} ms)")
    print(f"report: {path}")
    return 0


def _write_dumps(net, args, spec, options):
    bounds_in = mip.compute_concrete_bounds(
        net, np.zeros(net.input_size), np.ones(net.input_size))
    for ci, case in enumerate(enumerate_cases(spec, net.input_shape)):
        phi = emit_phi_in(case)
        bounds_p = mip.compute_concrete_bounds(net, phi.pert_lo, phi.pert_hi)
        dep = None
        if options.use_deps:
            dep = depprop.compute_dependencies(net, case, bounds_in, bounds_p)
            if args.dump_deps:
                with open(os.path.join(args.out, f"deps_case{ci}.txt"), "w") as f:
                    f.write(dep.dump())
        if args.dump_model:
            targets = [t for t in range(net.num_classes) if t != args.c_prime]
            for t in targets:
                model = mip.build_problem(net, args.c_prime, t, case, dep,
                                          0.0, None, bounds_in, bounds_p)
                with open(os.path.join(args.out, f"model_case{ci}_t{t}.lp"), "w") as f:
                    f.write(mip.dump_lp_text(model))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        raise SystemExit(f"unknown command {args.command}")
    except (NetworkFormatError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (SpecError, ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
