"""Threshold design with effort under privately known task complexity.

Subpackages follow the computation bottom-up: :mod:`numerics` (scalar
solvers), :mod:`model` (parameters, beliefs, ability posteriors),
:mod:`effort` (agent best responses), :mod:`advisor` (threshold choice and
policy taxonomy), :mod:`partition` (separating/pooling bounds) and
:mod:`oracle` (brute-force references for tests).
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    NOISELESS,
    NO_POSTING_COST,
    PointMass,
    PostingCost,
    Primitives,
    Prior,
    Technology,
    TestNoise,
    TruncExp,
)

__all__ = [
    "NOISELESS",
    "NO_POSTING_COST",
    "PointMass",
    "PostingCost",
    "Primitives",
    "Prior",
    "Technology",
    "TestNoise",
    "TruncExp",
    "__version__",
]
