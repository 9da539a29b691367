"""Uncertainty-aware fake-news classification pipeline.

Library layout, one module per concern:

- :mod:`fusionet.corpus` -- data model, text cleaning, attribute
  extraction, deterministic splitting
- :mod:`fusionet.backbone` -- built-in bag-of-words classifier and the
  ``predictions.csv`` wire format external backbones plug into
- :mod:`fusionet.ensemble` -- soft / hard voting
- :mod:`fusionet.stat_features` -- attribute conditional probabilities
  and fusion feature vectors
- :mod:`fusionet.sffn` -- the MC-dropout fusion network with
  predictive-mean / uncertainty outputs
- :mod:`fusionet.oversample` -- SMOTE and KMeans-SMOTE
- :mod:`fusionet.heuristic` -- the attribute-override cascade, elbow
  threshold selection and ablations
- :mod:`fusionet.evalkit` -- metrics, NLL / Brier, McNemar tests
- :mod:`fusionet.datasets` -- synthetic corpora and oracle fixtures
- :mod:`fusionet.pipeline` -- the nine-stage orchestrator behind
  ``fusionet run``
"""

__version__ = "0.1.0"

from .types import NEUTRAL_PAIR, ProbPair

__all__ = ["ProbPair", "NEUTRAL_PAIR", "__version__"]
