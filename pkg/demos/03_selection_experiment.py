"""
Curate fine-tuning sentences by predicted informativeness
=========================================================

Builds scored sentence pools where informativeness is known by
construction, fine-tunes a small skip-gram model on several selection
regimes, and prints the similarity table.  Sentences judged informative
should recover the word's original vector better than the bottom of the
pool does.
"""

import sys

from infolab import synth
from infolab.curate import (SGNSParams, frequency_polysemy_analysis,
                            run_selection_experiment)
from infolab.resources import FreqTable

pools, pretrained = synth.informativeness_pools(n_words=3, pool=120, seed=2)
params = SGNSParams(dim=12, window=3, negatives=3, epochs=2, seed=2)

# n sentences per regime, the mixed regimes add m from the bottom
report = run_selection_experiment(
    pools, pretrained, params, n=40, m=8, pool_label="demo",
    progress=lambda word, column, sim: print(f"  {word} {column} {sim:.3f}",
                                             file=sys.stderr))

print(report.to_tsv())

# relate the per-word gain over the random baseline to frequency and
# sense counts (both made up here, the shape is what matters)
freqs = FreqTable({w: 10 * (i + 1) for i, w in enumerate(report.words)})
senses = {w: i % 3 + 1 for i, w in enumerate(report.words)}
out = frequency_polysemy_analysis(report, freqs, senses, permutations=2000)
print("gain vs frequency rho:", round(out["rho_freq"], 3),
      "p:", round(out["p_freq"], 3))
print("mean gain, fewer senses:", out["low_senses_mean_gain"],
      f"({out['low_count']} words)")
print("mean gain, more senses: ", out["high_senses_mean_gain"],
      f"({out['high_count']} words)")
