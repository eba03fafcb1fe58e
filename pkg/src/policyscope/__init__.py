"""Lockdown-policy what-if analysis toolkit.

Pipeline: ingest daily cases and ordinal policy indicators, estimate
reproduction numbers, cluster countries by policy behavior, train a
two-pathway recurrent forecaster on cluster data, and evaluate hypothetical
lockdown-lifting scenarios against a baseline forecast.
"""

__version__ = "0.1.0"
