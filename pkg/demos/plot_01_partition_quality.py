"""
Cut ratio from four starting partitions
=======================================

Start the 10x10x100 mesh from each initial strategy and let the adaptive
heuristic run until no vertex has moved for 30 iterations.
"""

from graphshift.experiment import manifest_from_mapping, run_experiment

############################################################
# Hash and random placement cut almost every edge; the greedy streaming
# partitioner starts out nearly optimal, so there is little left to gain.

for initial in ("hsh", "rnd", "dgr", "mnn"):
    m = manifest_from_mapping({"graph": "mesh:10x10x100", "initial": initial, "seed": 1})
    reports = run_experiment(m).reports
    first, last = reports[0], reports[-1]
    print(f"{initial}: cut ratio {first.cut_ratio:.3f} -> {last.cut_ratio:.3f} "
          f"after {len(reports)} iterations, balance {last.balance:.2f}")
