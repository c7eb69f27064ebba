"""
Migrations per iteration and the effect of s
============================================

Most migrations happen in the first few iterations. The probability s
mostly changes how fast the heuristic settles, not where it ends up.
"""

import numpy as np

from graphshift.experiment import front_loading, manifest_from_mapping, run_experiment

############################################################
# One run, printed as a coarse time series.

m = manifest_from_mapping({"graph": "mesh:10x10x100", "s": 0.5})
rows = run_experiment(m).rows()
for r in rows[:12]:
    print(f"iteration {r['iteration']:>3}: committed {r['committed']:>5}  cut {r['cut_ratio']}")
print(f"{front_loading(rows):.0%} of migrations in the first quarter of the active run")

############################################################
# Final quality for three values of s over five seeds.

for s in (0.25, 0.5, 0.75):
    finals, lengths = [], []
    for seed in range(5):
        reps = run_experiment(manifest_from_mapping(
            {"graph": "mesh:10x10x100", "s": s, "seed": seed})).reports
        finals.append(reps[-1].cut_ratio)
        lengths.append(len(reps))
    print(f"s={s}: final cut {np.mean(finals):.4f} ± {np.std(finals, ddof=1):.4f}, "
          f"{np.mean(lengths):.0f} iterations on average")
