"""Pipeline orchestration: bounds, dependencies, attacks, per-target
solves, and interval aggregation.

For a protected class c' and a target set, every (target, case) pair
gets its own model and anytime solve; attacks run concurrently with the
dependency computation, the solves run concurrently across targets.
The maximal globally NON-robust bound interval is the componentwise max
over the pairs, and the minimal globally robust interval is that plus
the precision step delta_precision: any input whose confidence in c'
strictly clears the robust bound keeps its classification under the
perturbation.

Status notes: an INFEASIBLE target (no attackable input at all)
contributes [0, 0] by convention, and a TIMEOUT contributes its current
anytime interval, so the aggregate is always sound; the report carries
per-target statuses so callers can tell the difference.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
import csv
import json
import os
import time

import numpy as np

from . import attack as attack_mod
from . import bnb, depprop, mip, oracle
from .attack import AttackConfig
from .network import Network
from .perturb import PerturbationSpec, emit_phi_in, enumerate_cases, parse_spec


@dataclass
class VerifyOptions:
    timeout: float = 60.0            # seconds per target/case solve
    delta_precision: float = 1e-4    # step between non-robust and robust
    gamma: float = mip.GAMMA         # strictness margin inside the encoding
    seed: int = 0
    use_deps: bool = True
    use_attack: bool = True
    bound_mode: str = "lp"           # "lp" or "interval"
    lp_rule: str = "dantzig"
    gap_tol: float = bnb.GAP_TOL
    lp_iter_cap: int = 20000
    jobs: int = 0                    # 0: pick from cpu count / GRCERT_JOBS
    attack: AttackConfig = field(default_factory=AttackConfig)
    dep_budget: depprop.SubMipBudget = field(default_factory=depprop.SubMipBudget)

    def resolved_jobs(self):
        if self.jobs > 0:
            return self.jobs
        env = os.environ.get("GRCERT_JOBS")
        if env:
            return max(1, int(env))
        return min(8, os.cpu_count() or 1)


@dataclass
class TargetOutcome:
    target: int
    case_label: str
    status: str
    delta_l: float
    delta_u: float
    delta_ha: float
    nodes: int
    wall_ms: float
    records: list


@dataclass
class VerificationReport:
    net_summary: str
    c_prime: int
    targets: list
    spec_text: str
    delta_precision: float
    outcomes: list
    nonrobust_lo: float
    nonrobust_hi: float
    robust_lo: float
    robust_hi: float
    delta_m: float | None = None
    baselines: dict | None = None
    oracle_ref: dict | None = None
    timing_ms: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def to_json(self):
        doc = asdict(self)
        return json.dumps(doc, indent=1, default=float)

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        doc["outcomes"] = [TargetOutcome(**o) for o in doc["outcomes"]]
        return VerificationReport(**doc)


def _synth_dataset(net, options):
    rng = np.random.default_rng(options.seed)
    size = max(2 * options.attack.M, 32)
    return rng.uniform(0.0, 1.0, size=(size, net.input_size))


def verify(net: Network, c_prime: int, targets, spec: PerturbationSpec,
           options: VerifyOptions | None = None, dataset=None) -> VerificationReport:
    """Run the full pipeline; see the module docstring."""
    options = options or VerifyOptions()
    if isinstance(spec, str):
        spec = parse_spec(spec)
    c = net.num_classes
    targets = sorted(set(int(t) for t in targets))
    if not targets or any(t == c_prime or not 0 <= t < c for t in targets):
        raise ValueError(f"target set {targets} invalid for c'={c_prime}, {c} classes")
    if not 0 <= c_prime < c:
        raise IndexError(f"class {c_prime} out of range")

    t_start = time.monotonic()
    timing = {}
    cases = enumerate_cases(spec, net.input_shape)
    bounds_in = mip.compute_concrete_bounds(
        net, np.zeros(net.input_size), np.ones(net.input_size),
        mode=options.bound_mode, rule=options.lp_rule)
    timing["bounds_input"] = (time.monotonic() - t_start) * 1000.0

    if dataset is None and options.use_attack:
        dataset = _synth_dataset(net, options)

    pool = ThreadPoolExecutor(max_workers=options.resolved_jobs())
    try:
        # Attacks overlap with the perturbed-copy bounds and dependencies.
        attack_futs = {}
        if options.use_attack:
            for ci, case in enumerate(cases):
                for t in targets:
                    cfg = AttackConfig(**{**vars(options.attack),
                                          "seed": options.seed + 7919 * ci + t})
                    attack_futs[(ci, t)] = pool.submit(
                        attack_mod.run_attack, net, case, c_prime, t, dataset, cfg)

        t0 = time.monotonic()
        per_case = []
        for case in cases:
            phi = emit_phi_in(case)
            bounds_p = mip.compute_concrete_bounds(
                net, phi.pert_lo, phi.pert_hi,
                mode=options.bound_mode, rule=options.lp_rule)
            dep = None
            if options.use_deps:
                dep = depprop.compute_dependencies(
                    net, case, bounds_in, bounds_p, budget=options.dep_budget)
            per_case.append((case, bounds_p, dep))
        timing["bounds_pert_and_deps"] = (time.monotonic() - t0) * 1000.0

        t0 = time.monotonic()
        attack_results = {}
        for key, fut in attack_futs.items():
            attack_results[key] = fut.result()
        timing["attack"] = (time.monotonic() - t0) * 1000.0

        t0 = time.monotonic()
        solve_futs = []
        for ci, (case, bounds_p, dep) in enumerate(per_case):
            for t in targets:
                ar = attack_results.get((ci, t))
                delta_ha = ar.delta_ha if ar is not None else 0.0
                hints = ar.hints if ar is not None else None
                model = mip.build_problem(net, c_prime, t, case, dep, delta_ha,
                                          hints, bounds_in, bounds_p,
                                          gamma=options.gamma)
                solve_futs.append((t, case, delta_ha, pool.submit(
                    bnb.solve_mip, model, options.timeout, hints,
                    options.gap_tol, bnb.INT_TOL, options.lp_iter_cap,
                    options.lp_rule)))
        outcomes = []
        for t, case, delta_ha, fut in solve_futs:
            sol = fut.result()
            outcomes.append(TargetOutcome(
                target=t, case_label=case.label(), status=sol.status,
                delta_l=sol.delta_l, delta_u=sol.delta_u, delta_ha=delta_ha,
                nodes=sol.nodes, wall_ms=sol.wall_ms,
                records=[list(r) for r in sol.records]))
        timing["solves"] = (time.monotonic() - t0) * 1000.0
    finally:
        pool.shutdown(wait=True)

    nonrobust_lo = max(o.delta_l for o in outcomes)
    nonrobust_hi = max(o.delta_u for o in outcomes)
    timing["total"] = (time.monotonic() - t_start) * 1000.0
    opt_doc = {
        "timeout": options.timeout, "delta_precision": options.delta_precision,
        "gamma": options.gamma, "seed": options.seed,
        "use_deps": options.use_deps, "use_attack": options.use_attack,
        "bound_mode": options.bound_mode,
    }
    return VerificationReport(
        net_summary=f"{len(net.layers)} layers, input {net.input_shape}, {c} classes",
        c_prime=c_prime, targets=targets, spec_text=str(spec),
        delta_precision=options.delta_precision, outcomes=outcomes,
        nonrobust_lo=nonrobust_lo, nonrobust_hi=nonrobust_hi,
        robust_lo=nonrobust_lo + options.delta_precision,
        robust_hi=nonrobust_hi + options.delta_precision,
        timing_ms=timing, options=opt_doc,
    )


def compute_delta_m(net: Network, c_prime: int, options: VerifyOptions | None = None,
                    bounds_in: mip.BoundsTable | None = None) -> float:
    """Maximal class confidence of c' over the whole input box."""
    options = options or VerifyOptions()
    if bounds_in is None:
        bounds_in = mip.compute_concrete_bounds(
            net, np.zeros(net.input_size), np.ones(net.input_size),
            mode=options.bound_mode, rule=options.lp_rule)
    model = mip.build_confidence_problem(net, c_prime, bounds_in)
    sol = bnb.solve_mip(model, options.timeout, gap_tol=options.gap_tol,
                        lp_iter_cap=options.lp_iter_cap, rule=options.lp_rule)
    return sol.delta_l


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def emit_report(reports, out_dir):
    """Write report.json, heatmap.csv and progress.csv under out_dir.

    `reports` is one report or a list (e.g. several protected classes);
    the heatmap holds one row per computed (c', c_t) pair.
    """
    if isinstance(reports, VerificationReport):
        reports = [reports]
    os.makedirs(out_dir, exist_ok=True)
    path_json = os.path.join(out_dir, "report.json")
    with open(path_json, "w") as f:
        if len(reports) == 1:
            f.write(reports[0].to_json())
        else:
            f.write("[" + ",\n".join(r.to_json() for r in reports) + "]")
        f.write("\n")

    with open(os.path.join(out_dir, "heatmap.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["c_prime", "c_t", "nonrobust_lo", "nonrobust_hi",
                    "robust_lo", "robust_hi"])
        for rep in reports:
            per_target = {}
            for o in rep.outcomes:
                lo, hi = per_target.get(o.target, (0.0, 0.0))
                per_target[o.target] = (max(lo, o.delta_l), max(hi, o.delta_u))
            for t in sorted(per_target):
                lo, hi = per_target[t]
                w.writerow([rep.c_prime, t, f"{lo:.9g}", f"{hi:.9g}",
                            f"{lo + rep.delta_precision:.9g}",
                            f"{hi + rep.delta_precision:.9g}"])

    with open(os.path.join(out_dir, "progress.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["c_prime", "c_t", "case", "t_ms", "delta_l", "delta_u"])
        for rep in reports:
            for o in rep.outcomes:
                for ms, lo, hi in o.records:
                    w.writerow([rep.c_prime, o.target, o.case_label,
                                f"{ms:.3f}", f"{lo:.9g}",
                                "inf" if not np.isfinite(hi) else f"{hi:.9g}"])
    return path_json
