"""Single entry point: every experiment and verifier as a subcommand.

Exit status: 0 on success, 1 when a verification-style run fails its own
check, 2 on usage errors (unknown flags, malformed or missing config).
Common flags: --out-dir, --seed, --trials, --threads, --config.
All defaults that come from the experiment protocols live in the config
dataclasses; a YAML config file overrides them and CLI flags win last.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .gd import WeightMatrix, hinge_loss
from .patterns import DistributionSpec, all_pattern_sets, p_star, uniform_diversity_probs
from .runner import RunManifest, TrialPool, load_yaml, trial_seeds, write_csv, write_json
from .util import wilson_ci
from .xor_lab import (
    convergence_bound_iters,
    montecarlo_small_xor,
    run_xor,
    xor_overparam_hp,
    xor_small_hp,
)
from .xord_lab import (
    SweepConfig,
    decoy_experiment,
    gamma_comparison,
    sample_complexity_bounds,
    sweep_channels,
    symmetry_check,
    theorem_main_trial,
    theorem_small_trial,
)

USAGE_ERROR = 2
VERIFY_FAIL = 1


def _fail_usage(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return USAGE_ERROR


def _load_config(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(p)
    return load_yaml(p)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _filters_rows(tag, W0: WeightMatrix, W1: WeightMatrix):
    rows = []
    for stage, W in (("init", W0), ("final", W1)):
        for group, block in (("w", W.w), ("u", W.u)):
            for j in range(W.k):
                rows.append({"k": W.k, "run": tag, "stage": stage,
                             "group": group, "index": j,
                             "x": block[j, 0], "y": block[j, 1]})
    return rows


FILTER_HEADER = ["k", "run", "stage", "group", "index", "x", "y"]


# ---------------------------------------------------------------------------
# xor


def cmd_xor_run(args) -> int:
    cfg = {"k": args.k, "c_eta": args.c_eta, "seed": args.seed}
    man = RunManifest("xor-run", cfg, args.seed)
    out = _out_dir(args)
    hp = xor_overparam_hp(k=args.k, c_eta=args.c_eta) if args.k > 16 \
        else xor_small_hp(c_eta=args.c_eta)
    rep = run_xor(hp, args.seed)
    rep.trace.to_csv(out / "trace.csv")
    man.outputs.append(out / "trace.csv")
    write_csv(out / "filters.csv", "filters", FILTER_HEADER,
              _filters_rows("xor", rep.w0, rep.w_final), man)
    write_json(out / "report.json", {
        "schema_version": 1,
        "kind": "xor-run",
        "k": args.k,
        "endpoint": rep.endpoint.kind,
        "iterations": rep.endpoint.iteration,
        "exploration": rep.exploration,
        "clustering_ok": rep.clustering_ok,
        "angle_check": (None if rep.angle_check is None
                        else {k: v for k, v in rep.angle_check.items() if k != "angles"}),
        "misclassified": rep.misclassified,
    }, man)
    man.write(out)
    print(f"xor-run k={args.k}: {rep.endpoint.kind} at t={rep.endpoint.iteration}")
    return 0


def cmd_xor_montecarlo(args) -> int:
    cfg = {"k": args.k, "c_eta": args.c_eta, "trials": args.trials, "seed": args.seed}
    man = RunManifest("xor-montecarlo", cfg, args.seed)
    out = _out_dir(args)
    if args.k == 2:
        rep = montecarlo_small_xor(args.trials, args.seed, c_eta=args.c_eta,
                                   init_event_trials=args.init_trials)
        write_json(out / "montecarlo.json", {"kind": "xor-montecarlo-small", **rep}, man)
        man.write(out)
        lo, hi = rep["local_min_ci95"]
        print(f"local-min fraction {rep['local_min_fraction']:.3f} "
              f"(95% CI [{lo:.3f}, {hi:.3f}]) over {args.trials} trials")
        print(f"init under-exploration frequency {rep['init_event_frequency']:.4f} "
              f"over {rep['init_event_trials']} trials")
        return 0
    if args.k <= 16:
        return _fail_usage("k must be 2 or > 16")
    hp = xor_overparam_hp(k=args.k, c_eta=args.c_eta)
    bound = convergence_bound_iters(args.k)
    rows = []
    first = None
    for i, s in enumerate(trial_seeds(args.seed, args.trials)):
        rep = run_xor(hp, s)
        if first is None:
            first = rep
        ang = rep.angle_check or {}
        rows.append({
            "seed": s,
            "endpoint": rep.endpoint.kind,
            "iterations": rep.endpoint.iteration,
            "within_bound": rep.endpoint.kind == "GlobalMin"
                             and rep.endpoint.iteration <= bound,
            "exploration_ok": bool(rep.exploration["all_ok"]),
            "clustering_ok": rep.clustering_ok,
            "max_angle_deg": ang.get("max_angle_deg", math.nan),
            "angle_ok": ang.get("all_ok", False),
        })
    write_csv(out / "runs.csv", "xor-runs",
              ["seed", "endpoint", "iterations", "within_bound",
               "exploration_ok", "clustering_ok", "max_angle_deg", "angle_ok"],
              rows, man)
    write_csv(out / "filters.csv", "filters", FILTER_HEADER,
              _filters_rows("xor", first.w0, first.w_final), man)
    n_ok = sum(r["within_bound"] for r in rows)
    summary = {
        "kind": "xor-montecarlo-overparam",
        "k": args.k,
        "bound_iterations": bound,
        "trials": args.trials,
        "globalmin_within_bound": n_ok,
        "fraction_within_bound": n_ok / args.trials,
        "exploration_failures": sum(not r["exploration_ok"] for r in rows),
        "clustering_failures": sum(not r["clustering_ok"] for r in rows),
        "angle_failures": sum(not r["angle_ok"] for r in rows),
    }
    write_json(out / "montecarlo.json", summary, man)
    man.write(out)
    print(f"{n_ok}/{args.trials} runs reached GlobalMin within {bound} iterations")
    return 0


# ---------------------------------------------------------------------------
# xord theorem trials


def _trial_csv_rows(reports):
    rows = []
    for rep in reports:
        det = rep.detection
        rows.append({
            "seed": rep.seed,
            "endpoint": rep.endpoint_kind,
            "iterations": rep.iterations,
            "recovered_fstar": rep.recovered_fstar,
            "all_detected": det.all_detected if det else False,
            "test_error": rep.test_error if rep.test_error is not None else math.nan,
            "max_angle_deg": rep.extras.get("max_angle_deg", math.nan),
            "angles_ok": rep.extras.get("angles_ok", True),
            "exploration_ok": rep.extras.get("exploration_ok", True),
            "violations": len(rep.extras.get("invariant_violations", [])),
            "success": rep.extras.get("success",
                                      rep.extras.get("nonrecovering_global_min", False)),
        })
    return rows


TRIAL_HEADER = ["seed", "endpoint", "iterations", "recovered_fstar", "all_detected",
                "test_error", "max_angle_deg", "angles_ok", "exploration_ok",
                "violations", "success"]


def _write_trial_reports(out, reports, man):
    tdir = out / "trials"
    tdir.mkdir(exist_ok=True)
    for i, rep in enumerate(reports):
        (tdir / f"trial_{i:04d}.json").write_text(rep.to_json())
    man.outputs.append(tdir)


def cmd_xord_theorem_main(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = {"k": 120, "c_eta": 1 / 410, "gamma": 8.0, "d": 10,
           "trials": args.trials, "seed": args.seed}
    cfg.update(file_cfg)
    man = RunManifest("xord-theorem-main", cfg, args.seed)
    out = _out_dir(args)
    seeds = trial_seeds(args.seed, args.trials)
    with TrialPool(args.threads) as pool:
        reports = pool.map(_main_trial_job,
                           [(s, cfg["k"], cfg["c_eta"], cfg["gamma"], cfg["d"],
                             args.override) for s in seeds])
    rows = _trial_csv_rows(reports)
    write_csv(out / "trials.csv", "xord-theorem-main", TRIAL_HEADER, rows, man)
    _write_trial_reports(out, reports, man)
    n_success = sum(r["success"] for r in rows)
    violations = sum(r["violations"] for r in rows)
    summary = {
        "kind": "xord-theorem-main",
        "trials": args.trials,
        "successes": n_success,
        "success_fraction": n_success / args.trials,
        "invariant_violations": violations,
        "exploration_failures": sum(not r["exploration_ok"] for r in rows),
    }
    write_json(out / "summary.json", summary, man)
    man.write(out)
    print(f"{n_success}/{args.trials} trials: GlobalMin + recovery + detection + angles")
    print(f"trajectory invariant violations: {violations}")
    return 0 if n_success == args.trials and violations == 0 else VERIFY_FAIL


def _main_trial_job(seed, k, c_eta, gamma, d, override):
    return theorem_main_trial(seed, k=k, c_eta=c_eta, gamma=gamma, d=d,
                              override=override)


def cmd_xord_theorem_small(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = {"c_eta": 1 / 41, "gamma": 1.0, "d": 10, "p_plus": 0.5, "p_minus": 0.9,
           "trials": args.trials, "seed": args.seed}
    cfg.update(file_cfg)
    man = RunManifest("xord-theorem-small", cfg, args.seed)
    out = _out_dir(args)
    dist = DistributionSpec.from_diversity(cfg["d"], cfg["p_plus"], cfg["p_minus"])
    seeds = trial_seeds(args.seed, args.trials)
    with TrialPool(args.threads) as pool:
        reports = pool.map(_small_trial_job,
                           [(s, dist.to_config(), cfg["c_eta"], cfg["gamma"],
                             args.override) for s in seeds])
    rows = _trial_csv_rows(reports)
    write_csv(out / "trials.csv", "xord-theorem-small", TRIAL_HEADER, rows, man)
    _write_trial_reports(out, reports, man)
    n_nonrec = sum(r.extras["nonrecovering_global_min"] for r in reports)
    ok_pstar = all(r.extras["test_error_ge_p_star"] for r in reports
                   if r.extras["nonrecovering_global_min"])
    ok_crit = all(r.extras["misclassified_critical"] for r in reports
                  if r.extras["nonrecovering_global_min"])
    lo, hi = wilson_ci(n_nonrec, args.trials)
    summary = {
        "kind": "xord-theorem-small",
        "trials": args.trials,
        "nonrecovering_global_minima": n_nonrec,
        "fraction": n_nonrec / args.trials,
        "ci95": [lo, hi],
        "p_star": p_star(dist),
        "all_failures_misclassify_a_critical_class": ok_crit,
        "all_failures_test_error_ge_p_star": ok_pstar,
    }
    write_json(out / "summary.json", summary, man)
    man.write(out)
    print(f"{n_nonrec}/{args.trials} runs ended at a non-recovering global minimum "
          f"(95% CI [{lo:.3f}, {hi:.3f}])")
    return 0 if ok_pstar and ok_crit else VERIFY_FAIL


def _small_trial_job(seed, dist_cfg, c_eta, gamma, override):
    dist = DistributionSpec.from_config(dist_cfg)
    return theorem_small_trial(seed, dist, c_eta=c_eta, gamma=gamma,
                               override=override)


def cmd_xord_decoy(args) -> int:
    file_cfg = _load_config(args.config)
    cfg = {"variant": args.variant, "ks": args.k or [2, 100], "d": 10, "m": 6,
           "c_eta": 0.04, "gamma": 1.0, "sigma_g": 1e-5,
           "patience": 20, "max_iters": 30_000, "seed": args.seed}
    cfg.update(file_cfg)
    man = RunManifest("xord-decoy", cfg, args.seed)
    out = _out_dir(args)
    filter_rows = []
    rows = []
    for k in cfg["ks"]:
        rep = decoy_experiment(cfg["variant"], k, args.seed, d=cfg["d"], m=cfg["m"],
                               c_eta=cfg["c_eta"], gamma=cfg["gamma"],
                               sigma_g=cfg["sigma_g"], patience=cfg["patience"],
                               max_iters=cfg["max_iters"], keep_weights=True)
        w0 = rep.extras.pop("w0")
        w1 = rep.extras.pop("w_final")
        filter_rows += _filters_rows(f"k{k}", w0, w1)
        (out / f"report_k{k}.json").write_text(rep.to_json())
        man.outputs.append(out / f"report_k{k}.json")
        rows.append({"k": k, "endpoint": rep.endpoint_kind,
                     "train_error_01": rep.extras["train_error_01"],
                     "train_loss": rep.extras["train_loss"],
                     "zero_train_error": rep.extras["zero_train_error"],
                     "recovered_fstar": rep.recovered_fstar})
        print(f"k={k}: train_err={rep.extras['train_error_01']:.3f} "
              f"recovered={rep.recovered_fstar}")
    write_csv(out / "decoy.csv", "xord-decoy",
              ["k", "endpoint", "train_error_01", "train_loss",
               "zero_train_error", "recovered_fstar"], rows, man)
    write_csv(out / "filters.csv", "filters", FILTER_HEADER, filter_rows, man)
    man.write(out)
    return 0


def _sweep_cfg(args):
    file_cfg = _load_config(args.config)
    base = SweepConfig()
    known = {f: getattr(base, f) for f in base.__dataclass_fields__}
    for key, val in file_cfg.items():
        if key not in known:
            raise KeyError(f"unknown sweep config key {key!r}")
        known[key] = tuple(val) if key == "channels" else val
    if args.trials is not None:
        known["runs"] = args.trials
    return SweepConfig(**known)


SWEEP_HEADER = ["gamma", "k", "runs", "zero_train_error_runs",
                "mean_test_error", "mean_test_error_zero_train"]


def cmd_xord_sweep(args) -> int:
    cfg = _sweep_cfg(args)
    man = RunManifest("xord-sweep", asdict(cfg), args.seed)
    out = _out_dir(args)
    with TrialPool(args.threads) as pool:
        summary, runs = sweep_channels(cfg, args.seed,
                                       pool=pool._pool if pool._pool else None)
    write_csv(out / "sweep.csv", "error-vs-channels", SWEEP_HEADER, summary, man)
    write_csv(out / "runs.csv", "sweep-runs",
              ["k", "gamma", "seed", "endpoint", "iterations", "train_error_01",
               "zero_train_error", "train_loss", "test_error"], runs, man)
    man.write(out)
    for row in summary:
        print(f"k={row['k']:>4}  zero-train-error {row['zero_train_error_runs']:>3}"
              f"/{row['runs']}  mean test error {row['mean_test_error']:.4f}")
    return 0


def cmd_xord_gamma(args) -> int:
    cfg = _sweep_cfg(args)
    man = RunManifest("xord-gamma", asdict(cfg), args.seed)
    out = _out_dir(args)
    with TrialPool(args.threads) as pool:
        summary, runs = gamma_comparison(cfg, args.seed, gammas=tuple(args.gammas),
                                         pool=pool._pool if pool._pool else None)
    write_csv(out / "gamma.csv", "error-vs-channels", SWEEP_HEADER, summary, man)
    write_csv(out / "runs.csv", "sweep-runs",
              ["k", "gamma", "seed", "endpoint", "iterations", "train_error_01",
               "zero_train_error", "train_loss", "test_error"], runs, man)
    man.write(out)
    for row in summary:
        print(f"gamma={row['gamma']} k={row['k']:>4}  "
              f"mean test error {row['mean_test_error']:.4f}")
    return 0


def cmd_xord_symmetry(args) -> int:
    cfg = {"seeds": args.trials, "iters": args.iters, "seed": args.seed}
    man = RunManifest("xord-symmetry", cfg, args.seed)
    out = _out_dir(args)
    failures = []
    for s in trial_seeds(args.seed, args.trials):
        ok, first_div = symmetry_check(s, iters=args.iters)
        if not ok:
            failures.append({"seed": s, "first_divergence": first_div})
    write_json(out / "symmetry.json", {
        "kind": "xord-symmetry",
        "seeds": args.trials,
        "iters": args.iters,
        "failures": failures,
    }, man)
    man.write(out)
    print(f"{args.trials - len(failures)}/{args.trials} paired trajectories "
          f"matched bitwise for {args.iters} iterations")
    return 0 if not failures else VERIFY_FAIL


def cmd_bounds(args) -> int:
    try:
        res = sample_complexity_bounds(args.p_plus, args.p_minus, delta=args.delta)
    except ValueError as e:
        return _fail_usage(str(e))
    man = RunManifest("bounds", {"p_plus": args.p_plus, "p_minus": args.p_minus,
                                 "delta": args.delta}, args.seed)
    out = _out_dir(args)
    write_json(out / "bounds.json", {"kind": "bounds", **res}, man)
    man.write(out)
    print(f"m1 = {res['m1_bound']}")
    print(f"m2 = {res['m2_bound']:.1f}   (delta = {res['delta']:.6f})")
    return 0


def cmd_dist_probe(args) -> int:
    file_cfg = _load_config(args.config)
    if file_cfg:
        dist = DistributionSpec.from_config(file_cfg)
    else:
        dist = DistributionSpec.uniform(args.d)
    man = RunManifest("dist-probe", dist.to_config(), args.seed)
    out = _out_dir(args)
    printed = uniform_diversity_probs(dist.d, "as-printed")
    conditional = uniform_diversity_probs(dist.d, "conditional")
    rows = []
    for ps in all_pattern_sets():
        rows.append({
            "class": ps.key, "label": ps.label,
            "feasible": len(ps.members) <= dist.d,
            "weight": dist.weight_of(ps),
            "mass": (dist.prob_positive if ps.label == 1
                     else 1 - dist.prob_positive) * dist.weight_of(ps),
        })
    write_csv(out / "classes.csv", "dist-classes",
              ["class", "label", "feasible", "weight", "mass"], rows, man)
    payload = {
        "kind": "dist-probe",
        "d": dist.d,
        "p_plus_as_printed": printed[0],
        "p_minus_as_printed": printed[1],
        "p_plus_conditional": conditional[0],
        "p_minus_conditional": conditional[1],
        "p_star": p_star(dist),
    }
    write_json(out / "probe.json", payload, man)
    man.write(out)
    print(f"d={dist.d}: p+ as-printed {printed[0]:.6f} / conditional {conditional[0]:.6f}"
          f"   p- {printed[1]:.6f} (both modes agree exactly)")
    print(f"p* = {p_star(dist):.6f}")
    return 0


# ---------------------------------------------------------------------------
# mnist


def _load_mnist_dir(data_dir):
    from .mnist import load_dataset

    d = Path(data_dir)
    train = load_dataset(d / "train-images-idx3-ubyte", d / "train-labels-idx1-ubyte")
    test = load_dataset(d / "t10k-images-idx3-ubyte", d / "t10k-labels-idx1-ubyte")
    return train, test


def _save_filter_bank(path, arr, man):
    """Raw little-endian float32 plus a JSON sidecar with the shape."""
    arr = np.asarray(arr, dtype="<f4")
    Path(path).write_bytes(arr.tobytes())
    sidecar = Path(str(path) + ".json")
    sidecar.write_text(json.dumps({"dtype": "<f4", "shape": list(arr.shape)}))
    man.outputs += [Path(path), sidecar]


def load_filter_bank(path):
    meta = json.loads(Path(str(path) + ".json").read_text())
    return np.frombuffer(Path(path).read_bytes(),
                         dtype=meta["dtype"]).reshape(meta["shape"]).copy()


def cmd_mnist_train(args) -> int:
    from .mnist import TrainConfig, train_mnist

    file_cfg = _load_config(args.config)
    cfg = TrainConfig(**file_cfg) if file_cfg else TrainConfig()
    man = RunManifest("mnist-train", asdict(cfg), args.seed)
    out = _out_dir(args)
    train_set, test_set = _load_mnist_dir(args.data_dir)
    res = train_mnist(cfg, train_set, test_set, args.seed)
    rows = [{"epoch": e, "train_acc": res.train_acc[e], "test_acc": res.test_acc[e],
             "train_loss": res.train_loss[e]} for e in range(res.epochs_run)]
    write_csv(out / "metrics.csv", "mnist-train",
              ["epoch", "train_acc", "test_acc", "train_loss"], rows, man)
    _save_filter_bank(out / "filters.f32", res.net.conv_w, man)
    write_json(out / "report.json", {
        "kind": "mnist-train",
        "channels": cfg.channels,
        "filter_size": cfg.filter_size,
        "n_train": cfg.n_train,
        "epochs_run": res.epochs_run,
        "final_train_acc": res.train_acc[-1],
        "final_test_acc": res.test_acc[-1],
    }, man)
    man.write(out)
    print(f"final test accuracy {res.test_acc[-1]:.4f} after {res.epochs_run} epochs")
    return 0


def cmd_mnist_cluster(args) -> int:
    from .mnist import TrainConfig, cluster_filters, init_convnet, train_mnist
    from .util import trial_rng

    file_cfg = _load_config(args.config)
    cfg = TrainConfig(**file_cfg) if file_cfg else TrainConfig()
    man = RunManifest("mnist-cluster", asdict(cfg), args.seed)
    out = _out_dir(args)
    train_set, test_set = _load_mnist_dir(args.data_dir)
    res = train_mnist(cfg, train_set, test_set, args.seed)
    trained = cluster_filters(res.net, k=args.clusters, seed=args.seed)
    random_net = init_convnet(cfg.channels, cfg.filter_size, cfg.init_std,
                              trial_rng(args.seed, 7))
    randomed = cluster_filters(random_net, k=args.clusters, seed=args.seed)
    rows = []
    for variant, km in (("trained", trained), ("random", randomed)):
        for i, a in enumerate(km.angles_deg):
            rows.append({"variant": variant, "filter": i, "angle_deg": a})
    write_csv(out / "angles.csv", "angle-histogram",
              ["variant", "filter", "angle_deg"], rows, man)
    _save_filter_bank(out / "centers.f32", trained.centers, man)
    write_json(out / "report.json", {
        "kind": "mnist-cluster",
        "channels": cfg.channels,
        "clusters": args.clusters,
        "trained_median_angle": float(np.median(trained.angles_deg)),
        "random_median_angle": float(np.median(randomed.angles_deg)),
        "final_test_acc": res.test_acc[-1],
    }, man)
    man.write(out)
    print(f"median angle trained {np.median(trained.angles_deg):.2f} deg "
          f"vs random {np.median(randomed.angles_deg):.2f} deg")
    return 0


def cmd_mnist_cluster_init(args) -> int:
    from .mnist import cluster_init_experiment

    man = RunManifest("mnist-cluster-init",
                      {"centers": str(args.centers), "sizes": args.sizes},
                      args.seed)
    out = _out_dir(args)
    train_set, test_set = _load_mnist_dir(args.data_dir)
    centers = load_filter_bank(args.centers)
    f = int(round(math.sqrt(centers.shape[1])))
    rows = cluster_init_experiment(train_set, test_set, centers, args.sizes,
                                   args.seed, filter_size=f, runs=args.runs,
                                   progress=lambda m: print(f"  {m}", flush=True))
    out_rows = [{k: r[k] for k in ("n_train", "cluster_init_acc",
                                   "best_random_acc", "big_net_acc")}
                for r in rows]
    write_csv(out / "acc_vs_size.csv", "accuracy-vs-trainsize",
              ["n_train", "cluster_init_acc", "best_random_acc", "big_net_acc"],
              out_rows, man)
    write_json(out / "report.json", {"kind": "mnist-cluster-init", "rows": rows}, man)
    man.write(out)
    for r in rows:
        print(f"n={r['n_train']:>5}  cluster-init {r['cluster_init_acc']:.4f}  "
              f"best random {r['best_random_acc']:.4f}  120ch {r['big_net_acc']:.4f}")
    return 0


def cmd_mnist_fetch(args) -> int:
    from .mnist import fetch_mnist

    man = RunManifest("mnist-fetch", {"base_url": args.base_url}, args.seed)
    out = _out_dir(args)
    paths = fetch_mnist(args.dest or out, args.base_url)
    man.outputs += paths
    man.write(out)
    for p in paths:
        print(p)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xordlab",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default=None):
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        if trials_default is not None:
            p.add_argument("--trials", type=int, default=trials_default)
        return p

    p = common(sub.add_parser("xor-run", help="one XOR run with verifiers"))
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--c-eta", type=float, default=0.4)
    p.set_defaults(func=cmd_xor_run)

    p = common(sub.add_parser("xor-montecarlo", help="seeded XOR Monte Carlo"),
               trials_default=1000)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--c-eta", type=float, default=0.4)
    p.add_argument("--init-trials", type=int, default=10_000,
                   help="extra init-only trials for the under-exploration frequency")
    p.set_defaults(func=cmd_xor_montecarlo)

    p = common(sub.add_parser("xord-theorem-main",
                              help="over-parameterized XORD theorem trials"),
               trials_default=200)
    p.add_argument("--config", help="YAML with k / c_eta / gamma / d")
    p.add_argument("--override", action="store_true",
                   help="run despite precondition violations")
    p.set_defaults(func=cmd_xord_theorem_main)

    p = common(sub.add_parser("xord-theorem-small", help="k=2 XORD theorem trials"),
               trials_default=1000)
    p.add_argument("--config")
    p.add_argument("--override", action="store_true")
    p.set_defaults(func=cmd_xord_theorem_small)

    p = common(sub.add_parser("xord-decoy", help="decoy training-set experiment"))
    p.add_argument("--variant", choices=("all-diverse", "with-nondiverse"),
                   default="all-diverse")
    p.add_argument("--k", type=int, action="append",
                   help="channel count (repeatable; default 2 and 100)")
    p.add_argument("--config")
    p.set_defaults(func=cmd_xord_decoy)

    p = common(sub.add_parser("xord-sweep", help="channel sweep, figure-1 protocol"),
               trials_default=None)
    p.add_argument("--trials", type=int, default=None, help="runs per channel")
    p.add_argument("--config")
    p.set_defaults(func=cmd_xord_sweep)

    p = common(sub.add_parser("xord-gamma", help="hinge-confidence comparison"),
               trials_default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--gammas", type=float, nargs=2, default=(1.0, 5.0))
    p.add_argument("--config")
    p.set_defaults(func=cmd_xord_gamma)

    p = common(sub.add_parser("xord-symmetry", help="paired-trajectory symmetry check"),
               trials_default=100)
    p.add_argument("--iters", type=int, default=500)
    p.set_defaults(func=cmd_xord_symmetry)

    p = common(sub.add_parser("bounds", help="sample-complexity calculator"))
    p.add_argument("--p-plus", type=float, required=True)
    p.add_argument("--p-minus", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(func=cmd_bounds)

    p = common(sub.add_parser("dist-probe", help="diversity probabilities and p*"))
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--config", help="YAML distribution block")
    p.set_defaults(func=cmd_dist_probe)

    p = common(sub.add_parser("mnist-train", help="train the conv/pool/fc net"))
    p.add_argument("--data-dir", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_mnist_train)

    p = common(sub.add_parser("mnist-cluster", help="filter clustering + angles"))
    p.add_argument("--data-dir", required=True)
    p.add_argument("--config")
    p.add_argument("--clusters", type=int, default=4)
    p.set_defaults(func=cmd_mnist_cluster)

    p = common(sub.add_parser("mnist-cluster-init",
                              help="cluster-initialized small-net comparison"))
    p.add_argument("--data-dir", required=True)
    p.add_argument("--centers", required=True, help="centers.f32 from mnist-cluster")
    p.add_argument("--sizes", type=int, nargs="+",
                   default=[500, 1000, 2000, 4000, 6000])
    p.add_argument("--runs", type=int, default=20)
    p.set_defaults(func=cmd_mnist_cluster_init)

    p = common(sub.add_parser("mnist-fetch", help="download MNIST over HTTP"))
    p.add_argument("--base-url", required=True)
    p.add_argument("--dest", default=None)
    p.set_defaults(func=cmd_mnist_fetch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as e:
        return _fail_usage(f"missing file: {e}")
    except (KeyError, ValueError) as e:
        return _fail_usage(str(e))


if __name__ == "__main__":
    sys.exit(main())
