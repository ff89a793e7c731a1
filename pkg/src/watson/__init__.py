"""Watson: interactive exploration of categorical survey data.

Core pieces: CSV ingestion into a compact multidimensional frequency table,
category seriation by minimum Manhattan-distance open path, deterministic
SVG plot rendering with guided questions, and a k-nearest-neighbor therapy
recommender.  A small HTTP server and CLI expose the same operations.
"""

__version__ = "0.1.0"

from .errors import WatsonError
from .freqtable import FreqTable, ProportionMatrix
from .ingest import RecordSet, Schema, Variable
from .seriation import Ordering

__all__ = [
    "WatsonError",
    "FreqTable",
    "ProportionMatrix",
    "RecordSet",
    "Schema",
    "Variable",
    "Ordering",
    "__version__",
]
