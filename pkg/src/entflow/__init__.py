"""entflow: multiparametric Gaussian matrix ensembles, eigenstate
entanglement statistics, and single-parameter (N Lambda) flow diagnostics."""

from . import complexity, dynamics, entangle, models, pipeline, spectral

__version__ = "0.1.0"

__all__ = ["complexity", "dynamics", "entangle", "models", "pipeline",
           "spectral", "__version__"]
