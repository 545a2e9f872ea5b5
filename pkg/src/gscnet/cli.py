"""Experiment CLI.

Subcommands: train, sweep, oversmooth, ablate, bench, csbm-gen, analyze,
verify. Every artifact is JSON/CSV with a schema field; re-running a
command overwrites outputs with identical bytes apart from wall times.

Exit codes: 0 success, 2 config error, 3 data error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import experiments, pnca, suite
from .data import CsbmParams, csbm_generate, csbm_params_for, load_dataset, \
    save_dataset
from .errors import ConfigError, DataError, GscnetError, InputError
from .experiments import ExperimentConfig, SCHEMA_VERSION


def _load_config(args) -> ExperimentConfig:
    obj = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as f:
                obj = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    config = ExperimentConfig.from_json(obj)
    if args.seed_list:
        seeds = [int(s) for s in args.seed_list.split(",") if s.strip()]
        config = ExperimentConfig(**{**config.__dict__, "seeds": seeds})
    if args.out_dir:
        config.out_dir = args.out_dir
    if args.threads:
        config.threads = args.threads
    return config


def _out_dir(config: ExperimentConfig) -> str:
    out = config.out_dir or "runs"
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_train(args) -> int:
    config = _load_config(args)
    result = experiments.cmd_train(config)
    out = _out_dir(config)
    for record in result["records"]:
        experiments.write_records_jsonl(
            os.path.join(out, f"run_{record.seed}.jsonl"), record)
    experiments.write_json(os.path.join(out, "summary.json"),
                           result["summary"])
    s = result["summary"]
    print(f"{config.arch} (k1={config.k1}, k2={config.k2}): "
          f"test acc {s['mean_test_acc']:.4f} +/- {s['ci95']:.4f} "
          f"over {len(config.seeds)} seed(s)")
    return 0


def _parse_range(text: str) -> list:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    table = experiments.cmd_sweep_degrees(config, _parse_range(args.k1_range),
                                          _parse_range(args.k2_range))
    out = _out_dir(config)
    experiments.write_json(os.path.join(out, "sweep.json"), table)
    experiments.write_grid_csv(os.path.join(out, "sweep.csv"), table)
    print(f"sweep spread (max-min mean acc): {table['spread']:.4f}")
    return 0


def _cmd_oversmooth(args) -> int:
    config = _load_config(args)
    depths = [int(d) for d in args.depths.split(",")]
    table = experiments.cmd_oversmooth(config, depths)
    out = _out_dir(config)
    experiments.write_json(os.path.join(out, "oversmooth.json"), table)
    experiments.write_depth_csv(os.path.join(out, "oversmooth.csv"), table)
    for arch, drop in table["drop_to_deepest"].items():
        print(f"{arch}: drop to depth {depths[-1]} = {drop:.4f}")
    return 0


def _cmd_ablate(args) -> int:
    config = _load_config(args)
    table = experiments.cmd_ablate_activations(config)
    out = _out_dir(config)
    experiments.write_json(os.path.join(out, "ablate.json"), table)
    for variant, row in table["rows"].items():
        print(f"{variant}: {row['mean_test_acc']:.4f} +/- {row['ci95']:.4f}")
    return 0


def _cmd_bench(args) -> int:
    config = _load_config(args)
    report = experiments.cmd_bench(config, warmup=args.warmup)
    out = _out_dir(config)
    experiments.write_json(os.path.join(out, "bench.json"), report)
    with open(os.path.join(out, "bench_epochs.csv"), "w",
              encoding="utf-8") as f:
        f.write("epoch,ms\n")
        for i, ms in enumerate(report["series_ms"]):
            f.write(f"{i},{ms:.3f}\n")
    print(f"{config.arch}: {report['per_epoch_ms']:.2f} ms/epoch, "
          f"{report['total_s']:.2f} s total")
    return 0


def _cmd_csbm_gen(args) -> int:
    if args.preset:
        params = csbm_params_for(args.preset, n=args.n, d=args.d, mu=args.mu,
                                 sigma=args.sigma,
                                 expected_degree=args.expected_degree,
                                 seed=args.seed)
    else:
        if args.p_intra is None or args.p_inter is None:
            raise ConfigError("either --preset or both --p-intra/--p-inter "
                              "are required")
        params = CsbmParams(n=args.n, p_intra=args.p_intra,
                            p_inter=args.p_inter, mu=args.mu,
                            sigma=args.sigma, d=args.d, seed=args.seed)
    ds = csbm_generate(params)
    out = args.out_dir or "csbm"
    os.makedirs(out, exist_ok=True)
    save_dataset(ds, os.path.join(out, "edges.txt"),
                 os.path.join(out, "features.csv"),
                 os.path.join(out, "labels.txt"))
    sidecar = {"schema": SCHEMA_VERSION, "params": params.to_json(),
               "realized": ds.stats()}
    experiments.write_json(os.path.join(out, "csbm.json"), sidecar)
    print(f"wrote {out}/: n={ds.n}, |E|={ds.graph.num_edges}, "
          f"label_smoothness={sidecar['realized']['label_smoothness']:.4f}")
    return 0


def _cmd_analyze(args) -> int:
    if args.preset:
        ds = csbm_generate(csbm_params_for(args.preset, seed=args.seed))
    elif args.edges and args.features and args.labels:
        ds = load_dataset(args.edges, args.features, args.labels)
    else:
        raise ConfigError("analyze needs --preset or all of "
                          "--edges/--features/--labels")
    report = {"schema": SCHEMA_VERSION, "command": "analyze", **ds.stats()}
    g = ds.graph
    deg = g.degrees
    report["degree"] = {"min": float(deg.min()) if g.n else 0.0,
                        "mean": float(deg.mean()) if g.n else 0.0,
                        "max": float(deg.max()) if g.n else 0.0}
    if g.n <= pnca.CLASSIFY_GUARD:
        shifted = pnca.classify_graph_activation(
            pnca.dense_transform(g, "shifted"), g)
        lap = pnca.classify_graph_activation(
            pnca.dense_transform(g, "laplacian"), g)
        report["activation"] = {
            "shifted": {"label": shifted.label, "witness": shifted.witness},
            "laplacian": {"label": lap.label, "witness": lap.witness},
        }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)
    return 0


def _cmd_verify(args) -> int:
    report = suite.run_suite(seed=args.seed, quick=args.quick)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)
    return 0 if report["passed"] else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gscnet",
        description="Sparse spectral graph-filter experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed-list", help="comma-separated seeds")
        p.add_argument("--out-dir", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads")

    p = sub.add_parser("train", help="train one model over the seed list")
    add_common(p)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("sweep", help="degree-grid accuracy sweep")
    add_common(p)
    p.add_argument("--k1-range", default="0:6", help="lo:hi or comma list")
    p.add_argument("--k2-range", default="0:6")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("oversmooth", help="accuracy vs propagation depth")
    add_common(p)
    p.add_argument("--depths", default="2,4,8,16")
    p.set_defaults(fn=_cmd_oversmooth)

    p = sub.add_parser("ablate", help="positive/negative/mixed basis ablation")
    add_common(p)
    p.set_defaults(fn=_cmd_ablate)

    p = sub.add_parser("bench", help="per-epoch timing")
    add_common(p)
    p.add_argument("--warmup", type=int, default=5)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("csbm-gen", help="generate a CSBM dataset to files")
    p.add_argument("--preset", choices=["homophily", "heterophily"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--expected-degree", type=float, default=10.0)
    p.add_argument("--p-intra", type=float)
    p.add_argument("--p-inter", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(fn=_cmd_csbm_gen)

    p = sub.add_parser("analyze", help="graph/label diagnostics as JSON")
    p.add_argument("--preset", choices=["homophily", "heterophily"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--edges")
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("verify", help="run the dense-oracle suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, InputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GscnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
