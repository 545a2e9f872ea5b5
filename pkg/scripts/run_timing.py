#!/usr/bin/env python3
"""Per-epoch timing: GSCNet (K1=K2=3) vs degree-10 BernNet at n=5000,
plus basis-cache build scaling when K1+K2 doubles."""

import argparse
import os

from gscnet.data import csbm_generate, csbm_params_for
from gscnet.experiments import (ExperimentConfig, cmd_bench,
                                measure_cache_build, write_json)
from gscnet.model import TrainConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--out-dir", default="runs/bench")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    train = TrainConfig(epochs=args.epochs, patience=args.epochs)
    dataset = {"kind": "csbm", "regime": "homophily", "n": args.n}
    reports = {}
    for arch, k1, k2 in (("GSCNet", 3, 3), ("BernNet", 10, 0)):
        config = ExperimentConfig(dataset=dataset, arch=arch, k1=k1, k2=k2,
                                  train=train, seeds=[0])
        reports[arch] = cmd_bench(config, warmup=5)
        print(f"{arch:8s} {reports[arch]['per_epoch_ms']:.2f} ms/epoch, "
              f"{reports[arch]['total_s']:.2f} s total")
        write_json(os.path.join(args.out_dir, f"bench_{arch}.json"),
                   reports[arch])

    ds = csbm_generate(csbm_params_for("homophily", n=args.n,
                                       expected_degree=40.0, seed=0))
    t_small = measure_cache_build(ds, 2, 2)
    t_big = measure_cache_build(ds, 4, 4)
    print(f"cache build (nnz={ds.graph.nnz}): "
          f"K1+K2=4 {t_small*1e3:.1f} ms, K1+K2=8 {t_big*1e3:.1f} ms, "
          f"ratio {t_big/t_small:.2f}")


if __name__ == "__main__":
    main()
