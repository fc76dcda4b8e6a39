"""Offline figure rendering for feemarket CSV/JSON outputs.

Three standalone scripts, each reading the documented file schemas and
drawing exactly the values they contain (no statistics are recomputed):

* ``plot-bifurcation``: attractors.csv + averages.csv -> four-panel figure
* ``plot-bound-tightness``: averages.csv -> averages vs. the bound curve
* ``plot-batches``: batches.csv + report.json -> batch series with band
"""

__version__ = "0.1.0"
