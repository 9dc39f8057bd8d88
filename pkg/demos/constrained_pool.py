"""Constrained-setting walkthrough: approximating the synthesized query in a pool.

With a fixed item pool the synthesized pair usually is not available, so the
selector has to pick an existing pair instead.  Exhaustive search (evaluate
the mutual information of every pair) is the gold standard but costs
O(N^2 * S) per query.  The Mahalanobis filter scores every pair with a local
quadratic model of the MI around the synthesized optimum, keeps the closest
alpha fraction, and only runs full MI evaluation on those.

This script compares final estimation error and selection time for the two,
plus the k-nearest-neighbour baseline that saturates on small pools.

Run:  python3 demos/constrained_pool.py
"""

import numpy as np

from prefsynth.experiments import ExperimentConfig, SyntheticSpec, run_active_loop
from prefsynth.strategies import StrategyConfig

METHODS = ("active_discrete", "pair_m_dist", "knn_approx")


def main():
    queries = 30
    print("d=10, 100 items, sigma0=0.01, 3 trials,", queries, "queries\n")
    print(f"{'method':>16s} {'final MSE':>10s} {'sec/query':>10s}")
    for method in METHODS:
        cfg = ExperimentConfig(
            spec=SyntheticSpec(
                d=10, n_items=100, sigma0=0.01, trials=3, queries=queries, seed=0
            ),
            strategy=StrategyConfig(method=method),
        )
        finals, seconds = [], []
        for rec in run_active_loop(cfg):
            if rec.query_index == queries:
                finals.append(rec.mse)
            if rec.query_index > 0:
                seconds.append(rec.selection_seconds)
        print(f"{method:>16s} {np.mean(finals):10.4f} {np.mean(seconds):10.3f}")
    print(
        "\nthe filter keeps pace with exhaustive search at a fraction of the"
        "\nper-query cost; k-NN stalls once its local neighbourhoods stop"
        "\ncontaining informative pairs"
    )


if __name__ == "__main__":
    main()
