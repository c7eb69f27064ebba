"""
Recovering from forest-fire growth
==================================

Grow the mesh by 1, 2, 5 and 10 percent every 50 iterations. New vertices
are placed by hash. The static run keeps whatever cut the hash gives it;
the adaptive run pulls the new vertices next to their neighbours.
"""

from graphshift.experiment import (compare_runs, manifest_from_mapping,
                                   recovery_iterations, run_experiment)

bursts = "50@fire:0.01, 100@fire:0.02, 150@fire:0.05, 200@fire:0.10"
common = {"graph": "mesh:10x10x100", "injections": bursts,
          "until_converged": False, "max_iterations": 250}

static = run_experiment(manifest_from_mapping({**common, "adaptive": False})).rows()
adaptive = run_experiment(manifest_from_mapping(common)).rows()

############################################################
# Cut ratio just before and a few iterations after each burst.

for it in (50, 100, 150, 200):
    before, after = adaptive[it - 2]["cut_ratio"], adaptive[it - 1]["cut_ratio"]
    back = recovery_iterations(adaptive, it)
    print(f"burst at {it}: adaptive {before} -> {after}, back within 10% after {back} "
          f"iterations; static {static[it - 1]['cut_ratio']}")

############################################################
# Phase-by-phase comparison.

for phase in compare_runs(static, adaptive):
    print(f"iterations {phase['start']}-{phase['stop'] or 'end'}: "
          f"cut ratio improvement {phase['cut_ratio_improvement']:.1%}")
